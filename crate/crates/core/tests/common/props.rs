//! Strategies and property bodies shared by the suites.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::io::Cursor;

use prelink::authors::{DocKind, DocumentRef, ProfileTable};
use prelink::candidates::CandidateIndex;
use prelink::corpus::{AuthorName, CorpusStore, FixedClock, MatchDecision, MatchOutcome, Timestamp};
use prelink::forest::best_split;
use prelink::forest::{train_forest, ForestParams, TrainingPair};
use prelink::matcher::{batch_match, match_by_doi};
use prelink::normalize::{normalize_doi, normalize_text, split_authors};
use prelink::scope::{in_scope_categories, ScopeReason, ScopeRules};
use prelink::similarity::{abstract_distance, lex_compare, title_distance, FeatureVector, RecordProfile};
use prelink::ForestModel;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::oracles::{brute_cosine_distance, dp_edit_distance, exhaustive_split};

type Check = std::result::Result<(), TestCaseError>;

/// Runs `check` on `cases` generated values, panicking on the first
/// (shrunk) failure. Returns the number of cases.
pub fn run<S>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> u32
where
    S: Strategy,
    S::Value: Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    if let Err(e) = runner.run(&strategy, check) {
        panic!("{e}");
    }
    cases
}

// Normalization.

pub fn text_strategy() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        "\\PC{0,12}",
        "[a-zA-Z ]{0,12}",
        Just("\\'{e}".to_string()),
        Just("$L^2$".to_string()),
        Just("\\emph{x}".to_string()),
        Just("Étale".to_string()),
        Just("ﬁ".to_string()),
        Just("zeta--function".to_string()),
        Just(" - ".to_string()),
        Just("Å\u{30a}".to_string()),
        Just("\u{2163}".to_string()),
    ];
    prop::collection::vec(pieces, 0..6).prop_map(|v| v.concat())
}

pub fn normalize_is_idempotent(s: &str) -> Check {
    let once = normalize_text(s);
    let twice = normalize_text(&once.value);
    prop_assert_eq!(&once.value, &twice.value);
    prop_assert_eq!(once.token_count, twice.token_count);
    Ok(())
}

pub fn normalized_shape(s: &str) -> Check {
    let n = normalize_text(s);
    prop_assert_eq!(n.value.trim(), n.value.as_str());
    prop_assert!(!n.value.contains("  "));
    prop_assert!(!n.value.chars().any(char::is_uppercase));
    prop_assert!(n.value.chars().all(|c| c == ' ' || c == '-' || c.is_alphanumeric()));
    prop_assert_eq!(n.tokens().count(), n.token_count);
    Ok(())
}

pub fn doi_parts() -> impl Strategy<Value = (String, String, &'static str)> {
    (
        "[0-9]{4,5}",
        "[A-Za-z0-9./_-]{1,20}",
        prop_oneof![
            Just(""),
            Just("doi:"),
            Just("https://doi.org/"),
            Just("http://dx.doi.org/")
        ],
    )
}

pub fn doi_is_idempotent(reg: &str, suffix: &str, prefix: &str) -> Check {
    let raw = format!("{prefix}10.{reg}/{suffix}");
    let d = normalize_doi(&raw).unwrap();
    prop_assert_eq!(normalize_doi(d.as_str()).unwrap(), d.clone());
    prop_assert_eq!(normalize_doi(&format!("10.{reg}/{suffix}")).unwrap(), d);
    Ok(())
}

pub fn split_keeps_something(s: &str) -> Check {
    let names = split_authors(s);
    if s.trim().is_empty() {
        prop_assert!(names.is_empty());
    } else {
        prop_assert!(!names.is_empty());
    }
    Ok(())
}

// Similarity.

const WORDS: &[&str] = &[
    "ring",
    "field",
    "prime",
    "knot",
    "flow",
    "graph",
    "étale",
    "of",
    "the",
    "zeta-function",
];
const FAMILIES: &[&str] = &["Doe", "Roe", "Poe", "Müller", "Ng", "van der Berg"];

pub fn words(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..max).prop_map(|w| w.join(" "))
}

pub fn authors() -> impl Strategy<Value = Vec<AuthorName>> {
    prop::collection::vec(
        (
            prop::sample::select(FAMILIES),
            prop::sample::select(&["Jane", "J.", "Kim", ""][..]),
        ),
        0..4,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(f, g)| AuthorName::parse(&format!("{f}, {g}")))
            .collect()
    })
}

pub fn profile() -> impl Strategy<Value = RecordProfile> {
    (words(8), authors(), prop::option::of(words(20)))
        .prop_map(|(t, a, abs)| RecordProfile::new(&t, &a, abs.as_deref()))
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0..=1.0f64]
}

pub fn vector() -> impl Strategy<Value = FeatureVector<f64>> {
    (unit(), unit(), unit()).prop_map(|(a, b, c)| FeatureVector::new(a, b, c).unwrap())
}

pub fn distances_bounded_symmetric_reflexive(a: &RecordProfile, b: &RecordProfile) -> Check {
    let ab: FeatureVector<f64> = a.distance(b);
    let ba: FeatureVector<f64> = b.distance(a);
    prop_assert_eq!(ab, ba);
    for x in ab.as_array() {
        prop_assert!((0.0..=1.0).contains(&x));
    }
    let aa: FeatureVector<f64> = a.distance(a);
    prop_assert_eq!(aa.title_d, 0.0);
    prop_assert_eq!(aa.author_d, 0.0);
    // Reflexive unless the abstract is missing, which is neutral.
    let expected = if a.abstract_tf.is_empty() { 0.5 } else { 0.0 };
    prop_assert!((aa.abstract_d - expected).abs() < 1e-12);
    Ok(())
}

pub fn cosine_matches_brute_force(a: &str, b: &str) -> Check {
    let (na, nb) = (normalize_text(a), normalize_text(b));
    let got = abstract_distance::<f64>(&na, &nb);
    let want = brute_cosine_distance(&na.value, &nb.value);
    prop_assert!((got - want).abs() < 1e-12, "{} vs {}", got, want);
    Ok(())
}

pub fn author_order_does_not_matter(t: &str, a: &[AuthorName], b: &[AuthorName]) -> Check {
    let mut rev = a.to_vec();
    rev.reverse();
    let p = RecordProfile::new(t, b, None);
    let x: FeatureVector<f64> = RecordProfile::new(t, a, None).distance(&p);
    let y: FeatureVector<f64> = RecordProfile::new(t, &rev, None).distance(&p);
    prop_assert_eq!(x, y);
    Ok(())
}

pub fn lex_is_a_total_order(u: &FeatureVector<f64>, v: &FeatureVector<f64>, w: &FeatureVector<f64>) -> Check {
    prop_assert_eq!(lex_compare(u, u), Ordering::Equal);
    prop_assert_eq!(lex_compare(u, v), lex_compare(v, u).reverse());
    prop_assert_eq!(lex_compare(u, v) == Ordering::Equal, u == v);
    if lex_compare(u, v) != Ordering::Greater && lex_compare(v, w) != Ordering::Greater {
        prop_assert_ne!(lex_compare(u, w), Ordering::Greater);
    }
    let tuple = |x: &FeatureVector<f64>| (x.title_d, x.author_d, x.abstract_d);
    prop_assert_eq!(Some(lex_compare(u, v)), tuple(u).partial_cmp(&tuple(v)));
    Ok(())
}

pub fn substitution_edits() -> impl Strategy<Value = (String, Vec<prop::sample::Index>)> {
    (
        "[a-z]{1,30}",
        prop::collection::vec(any::<prop::sample::Index>(), 1..10),
    )
}

pub fn substitutions_never_decrease_title_distance(base: &str, order: &[prop::sample::Index]) -> Check {
    let a = normalize_text(base);
    let mut chars: Vec<char> = a.value.chars().collect();
    let mut last = 0.0;
    let mut edited = BTreeSet::new();
    for idx in order {
        let i = idx.index(chars.len());
        if !edited.insert(i) {
            continue;
        }
        // Digits never occur in the base, so every edit is a real mismatch.
        chars[i] = '7';
        let b = normalize_text(&chars.iter().collect::<String>());
        let d = title_distance::<f64>(&a, &b);
        let oracle = dp_edit_distance(&a.value.chars().collect::<Vec<_>>(), &chars) as f64 / chars.len() as f64;
        prop_assert_eq!(d, oracle);
        prop_assert!(d >= last);
        last = d;
    }
    Ok(())
}

// Store, matching and merging.

pub const IDS: &[&str] = &[
    "2301.00001",
    "2301.00002",
    "math/0501001",
    "2302.12345",
    "hep-th/9901001",
];
const STORE_FAMILIES: &[&str] = &["Doe", "Roe", "Poe", "Ng", "Fox", "Lee"];
const GIVEN: &[&str] = &["Jane", "John", "Kim", "Ida"];
const TITLE_WORDS: &[&str] = &["ring", "field", "prime", "knot", "flow", "graph", "sheaf", "group"];

pub fn preprint_json(id: &str, version: u32, title: &str, authors: &[String], doi: Option<&str>) -> String {
    serde_json::json!({
        "id": id, "version": version, "title": title, "authors": authors, "abstract": title,
        "categories": ["math.CO"], "msc": [], "doi": doi, "withdrawn": false
    })
    .to_string()
}

pub fn published_json(acc: &str, title: &str, authors: &[String], doi: Option<&str>) -> String {
    serde_json::json!({
        "accession": acc, "title": title, "authors": authors, "abstract": title,
        "doi": doi, "source": "J", "document_type": "journal_article", "msc": []
    })
    .to_string()
}

fn name() -> impl Strategy<Value = String> {
    (prop::sample::select(STORE_FAMILIES), prop::sample::select(GIVEN)).prop_map(|(f, g)| format!("{g} {f}"))
}

pub fn title() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(TITLE_WORDS), 1..5).prop_map(|w| w.join(" "))
}

#[derive(Debug, Clone)]
struct Rec {
    title: String,
    authors: Vec<String>,
    doi: Option<u8>,
}

fn rec() -> impl Strategy<Value = Rec> {
    (
        title(),
        prop::collection::vec(name(), 1..4),
        prop::option::weighted(0.4, 0u8..4),
    )
        .prop_map(|(title, authors, doi)| Rec { title, authors, doi })
}

/// A small random store: up to five preprints and six published records.
pub fn small_store() -> impl Strategy<Value = CorpusStore> {
    (prop::collection::vec(rec(), 1..=5), prop::collection::vec(rec(), 1..=6)).prop_map(|(pre, publ)| {
        let doi = |d: Option<u8>| d.map(|d| format!("10.1000/d{d}"));
        let published: Vec<String> = publ
            .iter()
            .enumerate()
            .map(|(i, r)| published_json(&format!("1000.{i:05}"), &r.title, &r.authors, doi(r.doi).as_deref()))
            .collect();
        let preprints: Vec<String> = pre
            .iter()
            .enumerate()
            .map(|(i, r)| preprint_json(IDS[i], 1, &r.title, &r.authors, doi(r.doi).as_deref()))
            .collect();
        super::store_of(&published, &preprints)
    })
}

pub fn toy_model() -> ForestModel {
    let mut data = Vec::new();
    for i in 0..20 {
        let x = f64::from(i) / 100.0;
        data.push(TrainingPair::positive(FeatureVector::new(x, x, x).unwrap()));
        let y = 0.6 + x;
        data.push(TrainingPair::negative(FeatureVector::new(y, y, y).unwrap()));
    }
    train_forest(
        &data,
        &ForestParams {
            n_trees: 10,
            seed: 1,
            ..ForestParams::default()
        },
    )
    .unwrap()
}

pub fn ingest_ops() -> impl Strategy<Value = Vec<(usize, u32, String)>> {
    prop::collection::vec((0usize..IDS.len(), 1u32..5, title()), 1..20)
}

pub fn one_entry_per_arxiv_id(ops: &[(usize, u32, String)]) -> Check {
    let mut store = CorpusStore::new();
    let mut best: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, v, t) in ops {
        let line = preprint_json(IDS[*i], *v, t, &["Jane Doe".to_string()], None);
        store.ingest_preprints_from(Cursor::new(line)).unwrap();
        let e = best.entry(IDS[*i]).or_insert(0);
        *e = (*e).max(*v);
    }
    prop_assert_eq!(store.preprint_count(), best.len());
    for (id, v) in &best {
        prop_assert_eq!(store.preprint(id).unwrap().id.version, *v);
    }
    let exported = &store.export()[0].1;
    let ids: Vec<String> = exported
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["id"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let distinct: BTreeSet<&String> = ids.iter().collect();
    prop_assert_eq!(distinct.len(), ids.len());
    Ok(())
}

pub fn batch_report_is_conserved_and_repeatable(store: &CorpusStore) -> Check {
    let index = CandidateIndex::build(store);
    let model = toy_model();
    let mut a = store.clone();
    let ra = batch_match(&mut a, &index, &model, 20, &FixedClock(Timestamp(5))).unwrap();
    prop_assert!(ra.is_conserved());
    prop_assert_eq!(
        ra.doi_matches + ra.classifier_matches + ra.unmatched,
        ra.total_preprints
    );
    prop_assert_eq!(ra.total_preprints as usize, store.preprint_count());
    prop_assert_eq!(ra.new_vs_naive + ra.naive_equal_title_authors, ra.classifier_matches);
    let mut b = store.clone();
    let rb = batch_match(&mut b, &index, &model, 20, &FixedClock(Timestamp(5))).unwrap();
    prop_assert_eq!(&ra, &rb);
    prop_assert_eq!(a.export(), b.export());
    // DOI priority: a unique DOI hit always wins.
    for d in a.decisions() {
        let p = a.preprint(&d.preprint.value).unwrap();
        if let Some(acc) = match_by_doi(p, &a) {
            prop_assert_eq!(d.outcome, MatchOutcome::DoiMatch);
            prop_assert_eq!(d.matched_accession.as_deref(), Some(acc.as_str()));
        }
    }
    Ok(())
}

pub fn merge_is_idempotent(store: &CorpusStore) -> Check {
    let index = CandidateIndex::build(store);
    let mut s = store.clone();
    batch_match(&mut s, &index, &toy_model(), 20, &FixedClock(Timestamp(5))).unwrap();
    let matched: Vec<MatchDecision> = s.decisions().filter(|d| d.is_match()).cloned().collect();
    let mut first = Vec::new();
    for d in &matched {
        first.push(s.merge_on_publication(d).unwrap());
    }
    let after_once = s.export();
    let profiles_once = ProfileTable::build(&s).unwrap();
    for (d, e) in matched.iter().zip(&first) {
        let again = s.merge_on_publication(d).unwrap();
        prop_assert_eq!(&again.accession, &e.accession);
        prop_assert_eq!(again.arxiv_links.iter().filter(|l| **l == d.preprint.value).count(), 1);
    }
    prop_assert_eq!(s.export(), after_once);
    prop_assert_eq!(ProfileTable::build(&s).unwrap(), profiles_once);
    for d in &matched {
        prop_assert!(s.is_merged(&d.preprint.value));
        prop_assert!(s.unpublished_preprints().all(|p| p.id.value != d.preprint.value));
    }
    Ok(())
}

pub fn profile_invariants(store: &CorpusStore) -> Check {
    let t = ProfileTable::build(store).unwrap();
    prop_assert_eq!(&ProfileTable::build(store).unwrap(), &t);
    for p in t.profiles() {
        prop_assert!(!p.documents.is_empty());
        let has_pub = p.documents.keys().any(|d| d.kind == DocKind::Published);
        prop_assert_eq!(p.preprint_only(), !has_pub);
    }
    for r in store.preprints() {
        let names: BTreeSet<String> = r.authors.iter().map(AuthorName::normalized_key).collect();
        prop_assert_eq!(t.holders(&DocumentRef::preprint(&r.id.value)).len(), names.len());
    }
    for r in store.published() {
        let names: BTreeSet<String> = r.authors.iter().map(AuthorName::normalized_key).collect();
        prop_assert_eq!(t.holders(&DocumentRef::published(&r.accession)).len(), names.len());
    }
    Ok(())
}

// Forest.

pub fn split_points() -> impl Strategy<Value = Vec<([f64; 3], bool)>> {
    let coord = prop_oneof![(0u32..=10).prop_map(|k| f64::from(k) / 10.0), 0.0..=1.0f64];
    prop::collection::vec(([coord.clone(), coord.clone(), coord], any::<bool>()), 1..=50)
}

pub fn gini_split_matches_exhaustive(points: &[([f64; 3], bool)]) -> Check {
    let got = best_split(points, &[0, 1, 2]).map(|s| (s.feature, s.threshold));
    prop_assert_eq!(got, exhaustive_split(points));
    Ok(())
}

// Scope.

pub fn decide(cats: &[&str]) -> (bool, ScopeReason) {
    let d = in_scope_categories(cats, &ScopeRules::default());
    (d.in_scope, d.reason)
}

/// The four reference decisions.
pub fn scope_examples() {
    assert_eq!(decide(&["math.AG"]), (true, ScopeReason::IncludedSubcategory));
    assert_eq!(decide(&["math.GM"]), (false, ScopeReason::ExcludedSubcategory));
    assert_eq!(
        decide(&["math.ST", "cs.LG"]),
        (false, ScopeReason::ConditionalCrossListed)
    );
    assert_eq!(decide(&["math-ph"]), (true, ScopeReason::StandaloneArchive));
}

/// One case per reason code. Returns how many codes were exercised.
pub fn scope_reason_coverage() -> usize {
    let cases: [(&[&str], ScopeReason, bool); 7] = [
        (&["math.CO", "cs.DM"], ScopeReason::IncludedSubcategory, true),
        (&["math.MP"], ScopeReason::StandaloneArchive, true),
        (&["stat.TH", "math.PR"], ScopeReason::IncludedSubcategory, true),
        (&["math.ST", "stat.TH"], ScopeReason::ConditionalMathOnly, true),
        (&["stat.TH", "q-fin.ST"], ScopeReason::ConditionalCrossListed, false),
        (&["math.HO", "physics.hist-ph"], ScopeReason::ExcludedSubcategory, false),
        (&["hep-th", "gr-qc"], ScopeReason::NonMathematical, false),
    ];
    let mut seen = BTreeSet::new();
    for (cats, reason, admitted) in cases {
        assert_eq!(decide(cats), (admitted, reason), "{cats:?}");
        seen.insert(reason.as_str());
    }
    assert_eq!(decide(&["math.IT", "cs.IT"]), (false, ScopeReason::ExcludedSubcategory));
    for r in ScopeReason::ALL {
        assert!(seen.contains(r.as_str()), "{r} not exercised");
        assert_eq!(
            r.admits(),
            matches!(
                r.as_str(),
                "included_subcategory" | "standalone_archive" | "conditional_math_only"
            )
        );
    }
    seen.len()
}
