use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ArxivId, Doi, MatchDecision, PreprintLine, PreprintRecord, PublishedLine, PublishedRecord};
use crate::error::{Error, Result};

const PREPRINTS_FILE: &str = "preprints.jsonl";
const PUBLISHED_FILE: &str = "published.jsonl";
const DECISIONS_FILE: &str = "decisions.jsonl";
const MERGED_FILE: &str = "merged.jsonl";
const LOCK_FILE: &str = ".lock";

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub added: usize,
    pub replaced: usize,
    pub rejected: usize,
    pub errors: Vec<IngestError>,
}

impl IngestReport {
    fn reject(&mut self, line: usize, message: impl Into<String>) {
        self.rejected += 1;
        self.errors.push(IngestError {
            line,
            message: message.into(),
        });
    }
}

/// The canonical entry after a preprint has been merged into its published
/// version. The arXiv identifiers survive only as links.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedEntry {
    pub accession: String,
    pub title: String,
    pub source: String,
    pub arxiv_links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct MergedLine {
    arxiv_id: String,
    accession: String,
}

/// Both record collections, the decision table and the merge flags.
///
/// Collections are ordered maps so every export is byte-deterministic.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    preprints: BTreeMap<String, PreprintRecord>,
    published: BTreeMap<String, PublishedRecord>,
    decisions: BTreeMap<String, MatchDecision>,
    merged: BTreeMap<String, String>,
    doi_index: BTreeMap<Doi, BTreeSet<String>>,
}

impl CorpusStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn preprints(&self) -> impl Iterator<Item = &PreprintRecord> {
        self.preprints.values()
    }

    pub fn published(&self) -> impl Iterator<Item = &PublishedRecord> {
        self.published.values()
    }

    pub fn decisions(&self) -> impl Iterator<Item = &MatchDecision> {
        self.decisions.values()
    }

    pub fn preprint(&self, id: &str) -> Option<&PreprintRecord> {
        self.preprints.get(id)
    }

    pub fn published_record(&self, accession: &str) -> Option<&PublishedRecord> {
        self.published.get(accession)
    }

    pub fn decision(&self, id: &str) -> Option<&MatchDecision> {
        self.decisions.get(id)
    }

    pub fn preprint_count(&self) -> usize {
        self.preprints.len()
    }

    pub fn published_count(&self) -> usize {
        self.published.len()
    }

    pub fn doi_index(&self) -> &BTreeMap<Doi, BTreeSet<String>> {
        &self.doi_index
    }

    pub fn accessions_for_doi(&self, doi: &Doi) -> Option<&BTreeSet<String>> {
        self.doi_index.get(doi)
    }

    pub fn is_merged(&self, id: &str) -> bool {
        self.merged.contains_key(id)
    }

    /// `(arxiv id, accession)` for every merged preprint.
    pub fn merged_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.merged.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Preprints that still stand as their own entries: no positive match
    /// decision and not merged. Withdrawn preprints stay listed.
    pub fn unpublished_preprints(&self) -> impl Iterator<Item = &PreprintRecord> {
        self.preprints.values().filter(|p| {
            !self.merged.contains_key(&p.id.value)
                && !self.decisions.get(&p.id.value).is_some_and(MatchDecision::is_match)
        })
    }

    /// Insert or roll forward one preprint. Returns `Ok(true)` when it
    /// replaced an older version; equal or lower versions are refused.
    pub fn upsert_preprint(&mut self, record: PreprintRecord) -> Result<bool> {
        record.validate()?;
        match self.preprints.get(&record.id.value) {
            Some(existing) if existing.id.version >= record.id.version => Err(Error::Validation(format!(
                "{}: stored version {} is not older than {}",
                record.id.value, existing.id.version, record.id.version
            ))),
            Some(_) => {
                self.preprints.insert(record.id.value.clone(), record);
                Ok(true)
            }
            None => {
                self.preprints.insert(record.id.value.clone(), record);
                Ok(false)
            }
        }
    }

    /// Insert or replace one published record. Re-inserting identical
    /// content is refused so repeated ingests count as rejected.
    pub fn upsert_published(&mut self, record: PublishedRecord) -> Result<bool> {
        record.validate()?;
        let replaced = match self.published.get(&record.accession) {
            Some(existing) if *existing == record => {
                return Err(Error::Validation(format!(
                    "{}: identical record already stored",
                    record.accession
                )));
            }
            Some(existing) => {
                if let Some(old) = existing.doi.clone() {
                    self.unindex(&old, &record.accession);
                }
                true
            }
            None => false,
        };
        if let Some(doi) = &record.doi {
            self.doi_index
                .entry(doi.clone())
                .or_default()
                .insert(record.accession.clone());
        }
        self.published.insert(record.accession.clone(), record);
        Ok(replaced)
    }

    fn unindex(&mut self, doi: &Doi, accession: &str) {
        if let Some(set) = self.doi_index.get_mut(doi) {
            set.remove(accession);
            if set.is_empty() {
                self.doi_index.remove(doi);
            }
        }
    }

    fn rebuild_doi_index(&mut self) {
        self.doi_index.clear();
        for rec in self.published.values() {
            if let Some(doi) = &rec.doi {
                self.doi_index
                    .entry(doi.clone())
                    .or_default()
                    .insert(rec.accession.clone());
            }
        }
    }

    pub fn ingest_preprints(&mut self, path: &Path) -> Result<IngestReport> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        self.ingest_preprints_from(BufReader::new(file))
            .map_err(|e| with_path(e, path))
    }

    pub fn ingest_preprints_from(&mut self, reader: impl BufRead) -> Result<IngestReport> {
        let mut report = IngestReport::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<input>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<PreprintLine>(&line)
                .map_err(|e| e.to_string())
                .and_then(|l| PreprintRecord::try_from(l).map_err(|e| e.to_string()));
            match parsed {
                Ok(record) => match self.upsert_preprint(record) {
                    Ok(true) => report.replaced += 1,
                    Ok(false) => report.added += 1,
                    Err(e) => report.reject(line_no, e.to_string()),
                },
                Err(msg) => report.reject(line_no, msg),
            }
        }
        Ok(report)
    }

    pub fn ingest_published(&mut self, path: &Path) -> Result<IngestReport> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        self.ingest_published_from(BufReader::new(file))
            .map_err(|e| with_path(e, path))
    }

    pub fn ingest_published_from(&mut self, reader: impl BufRead) -> Result<IngestReport> {
        let mut report = IngestReport::default();
        let mut seen = BTreeSet::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<input>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<PublishedLine>(&line)
                .map_err(|e| e.to_string())
                .and_then(|l| PublishedRecord::try_from(l).map_err(|e| e.to_string()));
            match parsed {
                Ok(record) => {
                    if !seen.insert(record.accession.clone()) {
                        report.reject(line_no, format!("duplicate accession {} in input", record.accession));
                        continue;
                    }
                    match self.upsert_published(record) {
                        Ok(true) => report.replaced += 1,
                        Ok(false) => report.added += 1,
                        Err(e) => report.reject(line_no, e.to_string()),
                    }
                }
                Err(msg) => report.reject(line_no, msg),
            }
        }
        Ok(report)
    }

    /// Store a decision, replacing any earlier decision for that preprint.
    pub fn record_decision(&mut self, decision: MatchDecision) -> Result<()> {
        decision.validate()?;
        self.check_decision_refs(&decision)?;
        self.decisions.insert(decision.preprint.value.clone(), decision);
        Ok(())
    }

    fn check_decision_refs(&self, decision: &MatchDecision) -> Result<()> {
        if !self.preprints.contains_key(&decision.preprint.value) {
            return Err(Error::Integrity(format!(
                "decision for unknown preprint {}",
                decision.preprint.value
            )));
        }
        if let Some(acc) = &decision.matched_accession {
            if !self.published.contains_key(acc) {
                return Err(Error::Integrity(format!(
                    "decision for {} names unknown accession {acc}",
                    decision.preprint.value
                )));
            }
        }
        Ok(())
    }

    /// Make the published record the canonical entry for a matched
    /// preprint. Re-applying the same decision changes nothing.
    pub fn merge_on_publication(&mut self, decision: &MatchDecision) -> Result<MergedEntry> {
        let Some(accession) = decision.matched_accession.clone().filter(|_| decision.is_match()) else {
            return Err(Error::Precondition(format!(
                "{}: only matched decisions can be merged",
                decision.preprint.value
            )));
        };
        decision.validate()?;
        self.check_decision_refs(decision)?;
        let id = decision.preprint.value.clone();
        if let Some(existing) = self.merged.get(&id) {
            if *existing != accession {
                return Err(Error::Integrity(format!("{id} is already merged into {existing}")));
            }
        }
        if self.decisions.get(&id) != Some(decision) {
            self.decisions.insert(id.clone(), decision.clone());
        }
        self.merged.insert(id, accession.clone());
        Ok(self.merged_view(&accession).expect("accession checked above"))
    }

    pub fn merged_view(&self, accession: &str) -> Option<MergedEntry> {
        let rec = self.published.get(accession)?;
        let arxiv_links = self
            .merged
            .iter()
            .filter(|(_, acc)| acc.as_str() == accession)
            .map(|(id, _)| id.clone())
            .collect();
        Some(MergedEntry {
            accession: rec.accession.clone(),
            title: rec.title.clone(),
            source: rec.source.clone(),
            arxiv_links,
        })
    }

    /// Set the withdrawn flag. The record stays in the store.
    pub fn mark_withdrawn(&mut self, id: &str) -> Result<bool> {
        let rec = self
            .preprints
            .get_mut(id)
            .ok_or_else(|| Error::UnknownPreprint(id.to_string()))?;
        let changed = !rec.withdrawn;
        rec.withdrawn = true;
        Ok(changed)
    }

    pub fn arxiv_id(&self, id: &str) -> Option<&ArxivId> {
        self.preprints.get(id).map(|p| &p.id)
    }

    /// The store as `(file name, contents)` pairs, in a fixed order.
    pub fn export(&self) -> Vec<(&'static str, String)> {
        let preprints = jsonl(self.preprints.values().map(PreprintLine::from));
        let published = jsonl(self.published.values().map(PublishedLine::from));
        let decisions = jsonl(self.decisions.values());
        let merged = jsonl(self.merged.iter().map(|(a, b)| MergedLine {
            arxiv_id: a.clone(),
            accession: b.clone(),
        }));
        vec![
            (PREPRINTS_FILE, preprints),
            (PUBLISHED_FILE, published),
            (DECISIONS_FILE, decisions),
            (MERGED_FILE, merged),
        ]
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, contents) in self.export() {
            write_atomic(&dir.join(name), contents.as_bytes())?;
        }
        Ok(())
    }

    /// Load a store directory. Missing files are empty collections; any
    /// malformed content is fatal since these files are our own output.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut store = CorpusStore::new();
        for (n, line) in read_lines(&dir.join(PREPRINTS_FILE))? {
            let parsed: PreprintLine =
                serde_json::from_str(&line).map_err(|e| Error::json(format!("{PREPRINTS_FILE}:{n}"), e))?;
            let rec = PreprintRecord::try_from(parsed)?;
            store.preprints.insert(rec.id.value.clone(), rec);
        }
        for (n, line) in read_lines(&dir.join(PUBLISHED_FILE))? {
            let parsed: PublishedLine =
                serde_json::from_str(&line).map_err(|e| Error::json(format!("{PUBLISHED_FILE}:{n}"), e))?;
            let rec = PublishedRecord::try_from(parsed)?;
            store.published.insert(rec.accession.clone(), rec);
        }
        store.rebuild_doi_index();
        for (n, line) in read_lines(&dir.join(DECISIONS_FILE))? {
            let d: MatchDecision =
                serde_json::from_str(&line).map_err(|e| Error::json(format!("{DECISIONS_FILE}:{n}"), e))?;
            store.record_decision(d)?;
        }
        for (n, line) in read_lines(&dir.join(MERGED_FILE))? {
            let m: MergedLine =
                serde_json::from_str(&line).map_err(|e| Error::json(format!("{MERGED_FILE}:{n}"), e))?;
            if !store.preprints.contains_key(&m.arxiv_id) || !store.published.contains_key(&m.accession) {
                return Err(Error::Integrity(format!(
                    "merge {} -> {} refers to a missing record",
                    m.arxiv_id, m.accession
                )));
            }
            store.merged.insert(m.arxiv_id, m.accession);
        }
        Ok(store)
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("store records serialize"));
        out.push('\n');
    }
    out
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.to_string()))
        .collect())
}

/// Write through a temporary sibling and rename, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Advisory lock on a store directory, released on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(StoreLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(path)),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
