//! The (title, authors, abstract) distance triple.
//!
//! All three components live in `[0, 1]` where 0 means identical. Vectors
//! are ordered lexicographically, title first.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorName, PreprintRecord, PublishedRecord};
use crate::error::{Error, Result};
use crate::normalize::{normalize_text, NormalizedText};
use crate::scalar::Scalar;

pub const FEATURE_NAMES: [&str; 3] = ["title_d", "author_d", "abstract_d"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub title_d: T,
    pub author_d: T,
    pub abstract_d: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(title_d: T, author_d: T, abstract_d: T) -> Result<Self> {
        let v = FeatureVector {
            title_d,
            author_d,
            abstract_d,
        };
        if v.as_array().iter().all(|x| *x >= T::zero() && *x <= T::one()) {
            Ok(v)
        } else {
            Err(Error::Validation(format!(
                "feature vector component outside [0,1]: {title_d}, {author_d}, {abstract_d}"
            )))
        }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.title_d, self.author_d, self.abstract_d]
    }

    pub fn from_array(a: [T; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn get(&self, feature: usize) -> T {
        self.as_array()[feature]
    }

    pub fn cast<U: Scalar>(&self) -> FeatureVector<U> {
        FeatureVector {
            title_d: U::from_f64(self.title_d.as_f64()),
            author_d: U::from_f64(self.author_d.as_f64()),
            abstract_d: U::from_f64(self.abstract_d.as_f64()),
        }
    }

    /// Lexicographic order over (title, author, abstract).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        lex_compare(self, other)
    }
}

/// Lexicographic comparison; components are never NaN once constructed
/// through [`FeatureVector::new`].
pub fn lex_compare<T: Scalar>(u: &FeatureVector<T>, v: &FeatureVector<T>) -> Ordering {
    u.as_array()
        .iter()
        .zip(v.as_array().iter())
        .map(|(a, b)| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Edit distance over Unicode scalar values (unit costs).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Normalized Levenshtein distance; 0 when both strings are empty.
pub fn title_distance<T: Scalar>(a: &NormalizedText, b: &NormalizedText) -> T {
    let max = a.value.chars().count().max(b.value.chars().count());
    T::ratio(levenshtein(&a.value, &b.value) as u64, max as u64)
}

pub fn family_set(authors: &[AuthorName]) -> BTreeSet<String> {
    authors
        .iter()
        .map(AuthorName::normalized_family)
        .filter(|f| !f.is_empty())
        .collect()
}

/// `1 - Jaccard` over normalized family names.
pub fn author_distance<T: Scalar>(a: &[AuthorName], b: &[AuthorName]) -> T {
    family_distance(&family_set(a), &family_set(b))
}

pub fn family_distance<T: Scalar>(a: &BTreeSet<String>, b: &BTreeSet<String>) -> T {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => T::zero(),
        (true, false) | (false, true) => T::one(),
        _ => {
            let inter = a.intersection(b).count() as u64;
            let union = a.union(b).count() as u64;
            T::one() - T::ratio(inter, union)
        }
    }
}

/// Term frequencies of a normalized text.
pub fn term_frequencies(text: &NormalizedText) -> BTreeMap<String, u64> {
    let mut tf = BTreeMap::new();
    for t in text.tokens() {
        *tf.entry(t.to_string()).or_insert(0) += 1;
    }
    tf
}

/// `1 - cosine` of term-frequency vectors; 0.5 when either side is empty.
pub fn abstract_distance<T: Scalar>(a: &NormalizedText, b: &NormalizedText) -> T {
    tf_distance(&term_frequencies(a), &term_frequencies(b))
}

pub fn tf_distance<T: Scalar>(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>) -> T {
    if a.is_empty() || b.is_empty() {
        return T::half();
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: u64 = small.iter().filter_map(|(t, x)| large.get(t).map(|y| x * y)).sum();
    let na: u64 = a.values().map(|x| x * x).sum();
    let nb: u64 = b.values().map(|x| x * x).sum();
    let cos = T::from_u64(dot) / (T::from_u64(na) * T::from_u64(nb)).sqrt();
    (T::one() - cos).clamp_unit()
}

/// Normalized fields of one record, computed once and reused across many
/// comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordProfile {
    pub title: NormalizedText,
    pub families: BTreeSet<String>,
    pub abstract_tf: BTreeMap<String, u64>,
}

impl RecordProfile {
    pub fn new(title: &str, authors: &[AuthorName], abstract_text: Option<&str>) -> Self {
        RecordProfile {
            title: normalize_text(title),
            families: family_set(authors),
            abstract_tf: abstract_text
                .map(|a| term_frequencies(&normalize_text(a)))
                .unwrap_or_default(),
        }
    }

    pub fn of_preprint(p: &PreprintRecord) -> Self {
        Self::new(&p.title, &p.authors, Some(&p.abstract_text))
    }

    pub fn of_published(c: &PublishedRecord) -> Self {
        Self::new(&c.title, &c.authors, c.abstract_text.as_deref())
    }

    pub fn distance<T: Scalar>(&self, other: &RecordProfile) -> FeatureVector<T> {
        FeatureVector {
            title_d: title_distance(&self.title, &other.title),
            author_d: family_distance(&self.families, &other.families),
            abstract_d: tf_distance(&self.abstract_tf, &other.abstract_tf),
        }
    }
}

pub fn feature_vector<T: Scalar>(p: &PreprintRecord, c: &PublishedRecord) -> FeatureVector<T> {
    RecordProfile::of_preprint(p).distance(&RecordProfile::of_published(c))
}
