//! Two-step matching: unique DOI hit first, then candidate search with the
//! forest deciding which candidates match.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateIndex;
use crate::corpus::{Clock, CorpusStore, MatchDecision, MatchOutcome, PreprintRecord, PublishedRecord, Timestamp};
use crate::error::{Error, Result};
use crate::forest::ForestModel;
use crate::normalize::normalize_text;
use crate::scalar::Scalar;
use crate::similarity::{FeatureVector, RecordProfile};

/// Step one. Returns the accession only when the preprint's DOI resolves to
/// exactly one published record; zero or several hits fall through.
pub fn match_by_doi(p: &PreprintRecord, store: &CorpusStore) -> Option<String> {
    let doi = p.doi.as_ref()?;
    let hits = store.accessions_for_doi(doi)?;
    if hits.len() == 1 {
        hits.iter().next().cloned()
    } else {
        None
    }
}

/// Every `(arxiv id, accession)` pair established by a unique DOI hit,
/// ordered by arXiv id.
pub fn doi_pairs(store: &CorpusStore) -> Vec<(String, String)> {
    store
        .preprints()
        .filter_map(|p| match_by_doi(p, store).map(|acc| (p.id.value.clone(), acc)))
        .collect()
}

/// Step two. Among the top-`k` candidates the forest accepts, return the
/// lexicographically smallest vector; ties go to the smaller accession.
pub fn match_by_classifier<T: Scalar>(
    p: &PreprintRecord,
    store: &CorpusStore,
    index: &CandidateIndex,
    model: &ForestModel<T>,
    k: usize,
) -> Option<(String, FeatureVector<T>)> {
    let profile = RecordProfile::of_preprint(p);
    index
        .query_candidates(p, k)
        .into_iter()
        .filter_map(|c| {
            let v: FeatureVector<T> = match index.profile(&c.accession) {
                Some(other) => profile.distance(other),
                None => profile.distance(&RecordProfile::of_published(store.published_record(&c.accession)?)),
            };
            model.classify(&v).then_some((c.accession, v))
        })
        .min_by(|(a, u), (b, v)| u.lex_cmp(v).then_with(|| a.cmp(b)))
}

/// Both steps for one preprint.
pub fn match_preprint<T: Scalar>(
    p: &PreprintRecord,
    store: &CorpusStore,
    index: &CandidateIndex,
    model: &ForestModel<T>,
    k: usize,
    at: Timestamp,
) -> MatchDecision {
    if let Some(acc) = match_by_doi(p, store) {
        return MatchDecision::doi_match(p.id.clone(), acc, at);
    }
    match match_by_classifier(p, store, index, model, k) {
        Some((acc, v)) => MatchDecision::classifier_match(p.id.clone(), acc, v.cast(), at),
        None => MatchDecision::unmatched(p.id.clone(), at),
    }
}

/// Exact-match key: normalized title plus the ordered normalized family names.
pub fn naive_key(title: &str, authors: &[crate::corpus::AuthorName]) -> (String, Vec<String>) {
    (
        normalize_text(title).value,
        authors.iter().map(|a| a.normalized_family()).collect(),
    )
}

fn published_key(r: &PublishedRecord) -> (String, Vec<String>) {
    naive_key(&r.title, &r.authors)
}

/// Lookup table for the naive title+authors baseline.
#[derive(Debug, Clone, Default)]
pub struct NaiveIndex {
    by_key: HashMap<(String, Vec<String>), Vec<String>>,
}

impl NaiveIndex {
    pub fn build(store: &CorpusStore) -> Self {
        let mut by_key: HashMap<_, Vec<String>> = HashMap::new();
        for r in store.published() {
            by_key.entry(published_key(r)).or_default().push(r.accession.clone());
        }
        NaiveIndex { by_key }
    }

    pub fn lookup(&self, p: &PreprintRecord) -> Option<String> {
        match self.by_key.get(&naive_key(&p.title, &p.authors)) {
            Some(hits) if hits.len() == 1 => Some(hits[0].clone()),
            _ => None,
        }
    }
}

/// Naive baseline: a unique published record with the same normalized
/// title and ordered family names.
pub fn naive_match(p: &PreprintRecord, store: &CorpusStore) -> Option<String> {
    let key = naive_key(&p.title, &p.authors);
    let mut hits = store.published().filter(|r| published_key(r) == key);
    let first = hits.next()?;
    hits.next().is_none().then(|| first.accession.clone())
}

/// Counts from one batch run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRunReport {
    pub total_preprints: u64,
    pub doi_matches: u64,
    pub classifier_matches: u64,
    pub unmatched: u64,
    /// Classifier matches whose two records already agree on normalized
    /// title and authors.
    pub naive_equal_title_authors: u64,
    pub new_vs_naive: u64,
    pub candidates_k: usize,
    pub run_seed: u64,
    pub timestamp: Timestamp,
}

impl MatchRunReport {
    pub fn from_counts(
        doi_matches: u64,
        classifier_matches: u64,
        unmatched: u64,
        naive_equal_title_authors: u64,
        candidates_k: usize,
        run_seed: u64,
        timestamp: Timestamp,
    ) -> Result<Self> {
        let new_vs_naive = classifier_matches
            .checked_sub(naive_equal_title_authors)
            .ok_or_else(|| Error::Integrity("more naive-equal pairs than classifier matches".into()))?;
        Ok(MatchRunReport {
            total_preprints: doi_matches + classifier_matches + unmatched,
            doi_matches,
            classifier_matches,
            unmatched,
            naive_equal_title_authors,
            new_vs_naive,
            candidates_k,
            run_seed,
            timestamp,
        })
    }

    pub fn total_matches(&self) -> u64 {
        self.doi_matches + self.classifier_matches
    }

    pub fn is_conserved(&self) -> bool {
        self.doi_matches + self.classifier_matches + self.unmatched == self.total_preprints
    }
}

/// Match every preprint that is not merged yet and persist the decisions.
pub fn batch_match<T: Scalar>(
    store: &mut CorpusStore,
    index: &CandidateIndex,
    model: &ForestModel<T>,
    k: usize,
    clock: &dyn Clock,
) -> Result<MatchRunReport> {
    let at = clock.now();
    let pending: Vec<&PreprintRecord> = store.preprints().filter(|p| !store.is_merged(&p.id.value)).collect();
    let decisions: Vec<(MatchDecision, bool)> = pending
        .par_iter()
        .map(|p| {
            let d = match_preprint(p, store, index, model, k, at);
            let naive_equal = d.outcome == MatchOutcome::ClassifierMatch
                && d.matched_accession
                    .as_deref()
                    .and_then(|a| store.published_record(a))
                    .is_some_and(|r| published_key(r) == naive_key(&p.title, &p.authors));
            (d, naive_equal)
        })
        .collect();

    let mut doi = 0;
    let mut classifier = 0;
    let mut unmatched = 0;
    let mut naive_equal = 0;
    for (d, eq) in &decisions {
        match d.outcome {
            MatchOutcome::DoiMatch => doi += 1,
            MatchOutcome::ClassifierMatch => classifier += 1,
            MatchOutcome::Unmatched => unmatched += 1,
        }
        naive_equal += u64::from(*eq);
    }
    let report = MatchRunReport::from_counts(doi, classifier, unmatched, naive_equal, k, model.seed, at)?;

    // Validate everything before the first write so a bad decision leaves
    // the store untouched.
    for (d, _) in &decisions {
        d.validate()?;
    }
    for (d, _) in decisions {
        store.record_decision(d)?;
    }
    Ok(report)
}
