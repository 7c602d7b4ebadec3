//! Candidate generation (blocking) over title tokens and family names.
//!
//! A candidate's score is the sum of `ln(1 + N / df)` over the distinct
//! non-stopword title tokens it shares with the query, plus 2 for every
//! shared normalized family name. Only positive scores are returned, best
//! first, ties broken by the smaller accession.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::corpus::{CorpusStore, PreprintRecord};
use crate::error::{Error, Result};
use crate::normalize::normalize_text;
use crate::similarity::{family_set, RecordProfile};

pub const DEFAULT_CANDIDATES: usize = 20;
pub const AUTHOR_WEIGHT: f64 = 2.0;

const STOPWORDS_V1: &str = include_str!("../data/stopwords-v1.txt");

/// Title tokens ignored for blocking. Changing the list changes every
/// candidate set, so it is versioned with the models trained on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    /// One token per line; blank lines ignored.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| normalize_text(l).value)
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::parse(STOPWORDS_V1)
    }
}

/// Distinct non-stopword tokens of a normalized title.
pub fn title_tokens(title: &str, stopwords: &Stopwords) -> BTreeSet<String> {
    normalize_text(title)
        .tokens()
        .filter(|t| !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

/// FNV-1a fingerprint of the published collection an index was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SnapshotId(pub u64);

impl SnapshotId {
    pub fn of(store: &CorpusStore) -> Self {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
            h ^= 0xff;
            h = h.wrapping_mul(0x0100_0000_01b3);
        };
        for rec in store.published() {
            feed(rec.accession.as_bytes());
            feed(rec.title.as_bytes());
            for a in &rec.authors {
                feed(a.raw.as_bytes());
            }
        }
        SnapshotId(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub accession: String,
    pub score: f64,
}

/// Inverted index over the published collection. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateIndex {
    token_postings: BTreeMap<String, BTreeSet<String>>,
    author_postings: BTreeMap<String, BTreeSet<String>>,
    doc_count: usize,
    built_from: SnapshotId,
    stopwords: Stopwords,
    profiles: BTreeMap<String, RecordProfile>,
}

impl CandidateIndex {
    pub fn build(store: &CorpusStore) -> Self {
        Self::build_with(store, Stopwords::default())
    }

    pub fn build_with(store: &CorpusStore, stopwords: Stopwords) -> Self {
        let mut token_postings: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut author_postings: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut profiles = BTreeMap::new();
        for rec in store.published() {
            profiles.insert(rec.accession.clone(), RecordProfile::of_published(rec));
            for t in title_tokens(&rec.title, &stopwords) {
                token_postings.entry(t).or_default().insert(rec.accession.clone());
            }
            for f in family_set(&rec.authors) {
                author_postings.entry(f).or_default().insert(rec.accession.clone());
            }
        }
        CandidateIndex {
            token_postings,
            author_postings,
            doc_count: store.published_count(),
            built_from: SnapshotId::of(store),
            stopwords,
            profiles,
        }
    }

    /// Normalized comparison profile of an indexed published record.
    pub fn profile(&self, accession: &str) -> Option<&RecordProfile> {
        self.profiles.get(accession)
    }

    pub fn token_postings(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.token_postings
    }

    pub fn author_postings(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.author_postings
    }

    pub fn built_from(&self) -> SnapshotId {
        self.built_from
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    /// `ln(1 + N / df)`; zero for unseen tokens.
    pub fn idf(&self, token: &str) -> f64 {
        match self.token_postings.get(token) {
            Some(p) if !p.is_empty() => (1.0 + self.doc_count as f64 / p.len() as f64).ln(),
            _ => 0.0,
        }
    }

    /// Top-`k` published records for a preprint. `k = 0` is treated as 1.
    pub fn query_candidates(&self, p: &PreprintRecord, k: usize) -> Vec<Candidate> {
        let k = k.max(1);
        // Per accession: title score, matched family count.
        let mut acc: HashMap<&str, (f64, u32)> = HashMap::new();
        for token in title_tokens(&p.title, &self.stopwords) {
            let Some(postings) = self.token_postings.get(&token) else {
                continue;
            };
            let w = self.idf(&token);
            for a in postings {
                acc.entry(a.as_str()).or_insert((0.0, 0)).0 += w;
            }
        }
        for fam in family_set(&p.authors) {
            if let Some(postings) = self.author_postings.get(&fam) {
                for a in postings {
                    acc.entry(a.as_str()).or_insert((0.0, 0)).1 += 1;
                }
            }
        }
        let mut scored: Vec<Candidate> = acc
            .into_iter()
            .map(|(a, (title, authors))| Candidate {
                accession: a.to_string(),
                score: title + AUTHOR_WEIGHT * f64::from(authors),
            })
            .filter(|c| c.score > 0.0)
            .collect();
        scored.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.accession.cmp(&y.accession)));
        scored.truncate(k);
        scored
    }
}
