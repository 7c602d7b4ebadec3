//! Domain records and the persistent corpus store.

mod store;

pub use store::{write_atomic, CorpusStore, IngestError, IngestReport, MergedEntry, StoreLock};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::{normalize_text, split_authors};
use crate::similarity::FeatureVector;

/// Stable arXiv identifier plus the version that was ingested.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArxivId {
    pub value: String,
    pub version: u32,
}

impl ArxivId {
    pub fn new(value: impl Into<String>, version: u32) -> Result<Self> {
        let value = value.into();
        if version == 0 {
            return Err(Error::Validation(format!("arXiv version must be >= 1 for {value}")));
        }
        if !is_modern_arxiv_id(&value) && !is_legacy_arxiv_id(&value) {
            return Err(Error::Validation(format!("not an arXiv identifier: {value:?}")));
        }
        Ok(ArxivId { value, version })
    }
}

impl fmt::Display for ArxivId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}v{}", self.value, self.version)
    }
}

// `^\d{4}\.\d{4,5}$`
fn is_modern_arxiv_id(s: &str) -> bool {
    let Some((yymm, num)) = s.split_once('.') else {
        return false;
    };
    yymm.len() == 4
        && yymm.bytes().all(|b| b.is_ascii_digit())
        && (4..=5).contains(&num.len())
        && num.bytes().all(|b| b.is_ascii_digit())
}

// `^[a-z-]+(\.[A-Z]{2})?/\d{7}$`
fn is_legacy_arxiv_id(s: &str) -> bool {
    let Some((archive, num)) = s.split_once('/') else {
        return false;
    };
    if num.len() != 7 || !num.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    let (name, sub) = match archive.split_once('.') {
        Some((name, sub)) => (name, Some(sub)),
        None => (archive, None),
    };
    let name_ok = !name.is_empty() && name.bytes().all(|b| b.is_ascii_lowercase() || b == b'-');
    let sub_ok = sub.is_none_or(|s| s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase()));
    name_ok && sub_ok
}

/// Canonical lowercase DOI without resolver prefix. Construct through
/// [`crate::normalize::normalize_doi`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Doi(pub(crate) String);

impl Doi {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Doi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Doi {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        crate::normalize::normalize_doi(&value)
    }
}

impl From<Doi> for String {
    fn from(d: Doi) -> String {
        d.0
    }
}

/// One person as named on a record.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuthorName {
    pub family: String,
    pub given: String,
    pub raw: String,
    /// Set when the raw string could not be split into family/given parts.
    pub raw_only: bool,
}

impl AuthorName {
    /// Parse a single name: `Family, Given` when a comma is present, else
    /// the last token is the family name.
    pub fn parse(raw: &str) -> Self {
        let raw = raw.trim();
        if let Some((family, given)) = raw.split_once(',') {
            return Self::from_parts(family, given, raw.to_string());
        }
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.split_last() {
            Some((family, given)) => Self::from_parts(family, &given.join(" "), raw.to_string()),
            None => Self::raw_only(raw),
        }
    }

    pub fn from_parts(family: &str, given: &str, raw: String) -> Self {
        AuthorName {
            family: collapse_ws(family),
            given: collapse_ws(given),
            raw,
            raw_only: false,
        }
    }

    pub fn raw_only(raw: &str) -> Self {
        AuthorName {
            family: raw.trim().to_string(),
            given: String::new(),
            raw: raw.trim().to_string(),
            raw_only: true,
        }
    }

    pub fn normalized_family(&self) -> String {
        normalize_text(&self.family).value
    }

    pub fn normalized_given(&self) -> String {
        normalize_text(&self.given).value
    }

    /// `family, given` in normalized form (just `family` when given is empty).
    pub fn normalized_key(&self) -> String {
        let family = self.normalized_family();
        let given = self.normalized_given();
        if given.is_empty() {
            family
        } else {
            format!("{family}, {given}")
        }
    }

    /// The same name with both parts normalized. Idempotent.
    pub fn normalized(&self) -> AuthorName {
        AuthorName {
            family: self.normalized_family(),
            given: self.normalized_given(),
            raw: self.raw.clone(),
            raw_only: self.raw_only,
        }
    }

    pub(crate) fn is_valid(&self) -> bool {
        !self.raw.trim().is_empty() && !self.normalized_family().is_empty()
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parse the author strings of one record, splitting any entry that holds
/// several names.
pub(crate) fn parse_author_list(raw: &[String]) -> Vec<AuthorName> {
    raw.iter().flat_map(|s| split_authors(s)).collect()
}

/// MSC2020 code shape `^\d{2}[A-Z-][0-9X-]{2}$`.
pub fn is_valid_msc(code: &str) -> bool {
    let b = code.as_bytes();
    b.len() == 5
        && b[0].is_ascii_digit()
        && b[1].is_ascii_digit()
        && (b[2].is_ascii_uppercase() || b[2] == b'-')
        && b[3..].iter().all(|c| c.is_ascii_digit() || *c == b'X' || *c == b'-')
}

/// An arXiv-style record; one per stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprintRecord {
    pub id: ArxivId,
    pub title: String,
    pub authors: Vec<AuthorName>,
    pub abstract_text: String,
    /// First entry is the primary category.
    pub categories: Vec<String>,
    pub msc: Vec<String>,
    pub doi: Option<Doi>,
    pub withdrawn: bool,
}

impl PreprintRecord {
    pub fn validate(&self) -> Result<()> {
        let id = &self.id.value;
        if self.title.trim().is_empty() {
            return Err(Error::Validation(format!("{id}: empty title")));
        }
        if self.authors.is_empty() {
            return Err(Error::Validation(format!("{id}: no authors")));
        }
        if let Some(bad) = self.authors.iter().find(|a| !a.is_valid()) {
            return Err(Error::Validation(format!("{id}: unusable author {:?}", bad.raw)));
        }
        if self.categories.is_empty() || self.categories.iter().any(|c| c.trim().is_empty()) {
            return Err(Error::Validation(format!("{id}: missing category")));
        }
        if let Some(bad) = self.msc.iter().find(|m| !is_valid_msc(m)) {
            return Err(Error::Validation(format!("{id}: bad MSC code {bad:?}")));
        }
        Ok(())
    }

    pub fn primary_category(&self) -> &str {
        &self.categories[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentType {
    JournalArticle,
    CollectionArticle,
    Book,
}

/// A record of the published corpus, keyed by accession.
#[derive(Debug, Clone, PartialEq)]
pub struct PublishedRecord {
    pub accession: String,
    pub title: String,
    pub authors: Vec<AuthorName>,
    pub abstract_text: Option<String>,
    pub doi: Option<Doi>,
    pub source: String,
    pub document_type: DocumentType,
    pub msc: Vec<String>,
}

impl PublishedRecord {
    pub fn validate(&self) -> Result<()> {
        if self.accession.trim().is_empty() {
            return Err(Error::Validation("empty accession".into()));
        }
        let acc = &self.accession;
        if self.title.trim().is_empty() {
            return Err(Error::Validation(format!("{acc}: empty title")));
        }
        if self.authors.is_empty() {
            return Err(Error::Validation(format!("{acc}: no authors")));
        }
        if let Some(bad) = self.authors.iter().find(|a| !a.is_valid()) {
            return Err(Error::Validation(format!("{acc}: unusable author {:?}", bad.raw)));
        }
        if let Some(bad) = self.msc.iter().find(|m| !is_valid_msc(m)) {
            return Err(Error::Validation(format!("{acc}: bad MSC code {bad:?}")));
        }
        Ok(())
    }
}

/// Wire form of a preprint record (one JSON object per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprintLine {
    pub id: String,
    pub version: u32,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    pub categories: Vec<String>,
    #[serde(default)]
    pub msc: Vec<String>,
    #[serde(default)]
    pub doi: Option<String>,
    #[serde(default)]
    pub withdrawn: bool,
}

impl TryFrom<PreprintLine> for PreprintRecord {
    type Error = Error;

    fn try_from(line: PreprintLine) -> Result<Self> {
        let record = PreprintRecord {
            id: ArxivId::new(line.id, line.version)?,
            title: line.title,
            authors: parse_author_list(&line.authors),
            abstract_text: line.abstract_text,
            categories: line.categories,
            msc: line.msc,
            // An unusable DOI is treated as absent.
            doi: line.doi.and_then(|d| crate::normalize::normalize_doi(&d).ok()),
            withdrawn: line.withdrawn,
        };
        record.validate()?;
        Ok(record)
    }
}

impl From<&PreprintRecord> for PreprintLine {
    fn from(r: &PreprintRecord) -> Self {
        PreprintLine {
            id: r.id.value.clone(),
            version: r.id.version,
            title: r.title.clone(),
            authors: r.authors.iter().map(|a| a.raw.clone()).collect(),
            abstract_text: r.abstract_text.clone(),
            categories: r.categories.clone(),
            msc: r.msc.clone(),
            doi: r.doi.as_ref().map(|d| d.0.clone()),
            withdrawn: r.withdrawn,
        }
    }
}

/// Wire form of a published record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedLine {
    pub accession: String,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(rename = "abstract", default)]
    pub abstract_text: Option<String>,
    #[serde(default)]
    pub doi: Option<String>,
    pub source: String,
    pub document_type: DocumentType,
    #[serde(default)]
    pub msc: Vec<String>,
}

impl TryFrom<PublishedLine> for PublishedRecord {
    type Error = Error;

    fn try_from(line: PublishedLine) -> Result<Self> {
        let record = PublishedRecord {
            accession: line.accession,
            title: line.title,
            authors: parse_author_list(&line.authors),
            abstract_text: line.abstract_text,
            doi: line.doi.and_then(|d| crate::normalize::normalize_doi(&d).ok()),
            source: line.source,
            document_type: line.document_type,
            msc: line.msc,
        };
        record.validate()?;
        Ok(record)
    }
}

impl From<&PublishedRecord> for PublishedLine {
    fn from(r: &PublishedRecord) -> Self {
        PublishedLine {
            accession: r.accession.clone(),
            title: r.title.clone(),
            authors: r.authors.iter().map(|a| a.raw.clone()).collect(),
            abstract_text: r.abstract_text.clone(),
            doi: r.doi.as_ref().map(|d| d.0.clone()),
            source: r.source.clone(),
            document_type: r.document_type,
            msc: r.msc.clone(),
        }
    }
}

/// Seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

/// Source of decision timestamps; injected so runs can be replayed.
pub trait Clock {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub Timestamp);

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        self.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Timestamp(secs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchOutcome {
    DoiMatch,
    ClassifierMatch,
    Unmatched,
}

/// Result of matching one preprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub preprint: ArxivId,
    pub outcome: MatchOutcome,
    pub matched_accession: Option<String>,
    pub vector: Option<FeatureVector<f64>>,
    pub decided_at: Timestamp,
}

impl MatchDecision {
    pub fn doi_match(preprint: ArxivId, accession: String, at: Timestamp) -> Self {
        MatchDecision {
            preprint,
            outcome: MatchOutcome::DoiMatch,
            matched_accession: Some(accession),
            vector: None,
            decided_at: at,
        }
    }

    pub fn classifier_match(preprint: ArxivId, accession: String, vector: FeatureVector<f64>, at: Timestamp) -> Self {
        MatchDecision {
            preprint,
            outcome: MatchOutcome::ClassifierMatch,
            matched_accession: Some(accession),
            vector: Some(vector),
            decided_at: at,
        }
    }

    pub fn unmatched(preprint: ArxivId, at: Timestamp) -> Self {
        MatchDecision {
            preprint,
            outcome: MatchOutcome::Unmatched,
            matched_accession: None,
            vector: None,
            decided_at: at,
        }
    }

    pub fn is_match(&self) -> bool {
        self.outcome != MatchOutcome::Unmatched
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.is_match();
        if positive != self.matched_accession.is_some() {
            return Err(Error::Integrity(format!(
                "{}: accession presence disagrees with outcome",
                self.preprint.value
            )));
        }
        if (self.outcome == MatchOutcome::ClassifierMatch) != self.vector.is_some() {
            return Err(Error::Integrity(format!(
                "{}: vector presence disagrees with outcome",
                self.preprint.value
            )));
        }
        Ok(())
    }
}
