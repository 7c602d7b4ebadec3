//! Author profiles: exact normalized-name assignment with a coauthor
//! tie-break.
//!
//! A name joins the existing profile with the same normalized form; if
//! several profiles share that form, the one that already has a coauthor of
//! the incoming record wins, and otherwise the oldest. Unknown names get a
//! new profile whose id is a slug of the name (`doe.jane`, then
//! `doe.jane.1`, ...).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorName, CorpusStore, MatchDecision};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Preprint,
    Published,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocumentRef {
    pub kind: DocKind,
    pub key: String,
}

impl DocumentRef {
    pub fn preprint(key: impl Into<String>) -> Self {
        DocumentRef {
            kind: DocKind::Preprint,
            key: key.into(),
        }
    }

    pub fn published(key: impl Into<String>) -> Self {
        DocumentRef {
            kind: DocKind::Published,
            key: key.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocFlags {
    pub withdrawn: bool,
    /// False when the author was dropped from the published version of a
    /// merged preprint; the profile then keeps the preprint.
    pub on_published_version: bool,
}

impl Default for DocFlags {
    fn default() -> Self {
        DocFlags {
            withdrawn: false,
            on_published_version: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorProfile {
    pub profile_id: String,
    pub canonical_name: AuthorName,
    pub documents: BTreeMap<DocumentRef, DocFlags>,
}

impl AuthorProfile {
    pub fn preprint_only(&self) -> bool {
        !self.documents.keys().any(|d| d.kind == DocKind::Published)
    }

    fn display_name(&self) -> String {
        let n = &self.canonical_name;
        if n.given.is_empty() {
            n.family.clone()
        } else {
            format!("{}, {}", n.family, n.given)
        }
    }
}

#[derive(Debug, Serialize)]
struct ProfileLine<'a> {
    profile_id: &'a str,
    canonical_name: String,
    documents: Vec<DocumentLine<'a>>,
}

#[derive(Debug, Serialize)]
struct DocumentLine<'a> {
    kind: DocKind,
    key: &'a str,
    withdrawn: bool,
    on_published_version: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileTable {
    profiles: BTreeMap<String, AuthorProfile>,
    /// normalized name → profile ids in creation order
    by_name: BTreeMap<String, Vec<String>>,
    /// document → profiles holding it
    doc_profiles: BTreeMap<DocumentRef, BTreeSet<String>>,
    merged: BTreeSet<String>,
}

fn slug(name: &AuthorName) -> String {
    let n = name.normalized();
    let family = n.family.replace(' ', "-");
    if n.given.is_empty() {
        family
    } else {
        format!("{family}.{}", n.given.replace(' ', "-"))
    }
}

impl ProfileTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assign every author of every record, published records first, then
    /// replay merges and withdrawals recorded in the store.
    pub fn build(store: &CorpusStore) -> Result<Self> {
        let mut t = ProfileTable::new();
        for r in store.published() {
            t.assign_record(DocumentRef::published(&r.accession), &r.authors);
        }
        for p in store.preprints() {
            t.assign_record(DocumentRef::preprint(&p.id.value), &p.authors);
        }
        for (id, _) in store.merged_pairs() {
            let d = store
                .decision(id)
                .ok_or_else(|| Error::Integrity(format!("merged preprint {id} has no decision")))?;
            t.update_on_merge(d, store)?;
        }
        for p in store.preprints().filter(|p| p.withdrawn) {
            t.flag_withdrawn(&p.id.value);
        }
        Ok(t)
    }

    pub fn assign_record(&mut self, doc: DocumentRef, authors: &[AuthorName]) -> Vec<String> {
        authors
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let coauthors: Vec<AuthorName> = authors
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, c)| c.clone())
                    .collect();
                self.assign_author(a, doc.clone(), &coauthors)
            })
            .collect()
    }

    /// Attach one name on one document to a profile and return its id.
    /// Idempotent per (name, document).
    pub fn assign_author(&mut self, name: &AuthorName, doc: DocumentRef, coauthors: &[AuthorName]) -> String {
        let key = name.normalized_key();
        let existing = self.by_name.get(&key).cloned().unwrap_or_default();

        if let Some(id) = existing
            .iter()
            .find(|id| self.profiles[*id].documents.contains_key(&doc))
        {
            return id.clone();
        }

        let chosen = match existing.len() {
            0 => None,
            1 => Some(existing[0].clone()),
            _ => {
                let wanted: BTreeSet<String> = coauthors.iter().map(AuthorName::normalized_key).collect();
                existing
                    .iter()
                    .find(|id| self.coauthor_names(id).iter().any(|n| wanted.contains(n)))
                    .or(existing.first())
                    .cloned()
            }
        };
        match chosen {
            Some(id) => {
                self.attach(&id, doc);
                id
            }
            None => self.create_profile(name, doc),
        }
    }

    /// Open a new profile for `name` even if profiles with that name exist.
    pub fn create_profile(&mut self, name: &AuthorName, doc: DocumentRef) -> String {
        let base = slug(name);
        let mut id = base.clone();
        let mut ordinal = 1;
        while self.profiles.contains_key(&id) {
            id = format!("{base}.{ordinal}");
            ordinal += 1;
        }
        self.profiles.insert(
            id.clone(),
            AuthorProfile {
                profile_id: id.clone(),
                canonical_name: name.clone(),
                documents: BTreeMap::new(),
            },
        );
        self.by_name.entry(name.normalized_key()).or_default().push(id.clone());
        self.attach(&id, doc);
        id
    }

    fn attach(&mut self, id: &str, doc: DocumentRef) {
        let p = self.profiles.get_mut(id).expect("profile exists");
        p.documents.entry(doc.clone()).or_default();
        self.doc_profiles.entry(doc).or_default().insert(id.to_string());
    }

    fn detach(&mut self, id: &str, doc: &DocumentRef) {
        if let Some(p) = self.profiles.get_mut(id) {
            p.documents.remove(doc);
        }
        if let Some(set) = self.doc_profiles.get_mut(doc) {
            set.remove(id);
            if set.is_empty() {
                self.doc_profiles.remove(doc);
            }
        }
    }

    /// Normalized names of everyone sharing a document with profile `id`.
    fn coauthor_names(&self, id: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for doc in self.profiles[id].documents.keys() {
            for other in self.doc_profiles.get(doc).into_iter().flatten() {
                if other != id {
                    out.insert(self.profiles[other].canonical_name.normalized_key());
                }
            }
        }
        out
    }

    /// Move a merged preprint onto its published record in every profile.
    /// Authors missing from the published version keep the preprint,
    /// flagged as not on the published version.
    pub fn update_on_merge(&mut self, decision: &MatchDecision, store: &CorpusStore) -> Result<()> {
        let id = &decision.preprint.value;
        if self.merged.contains(id) {
            return Ok(());
        }
        let accession = decision
            .matched_accession
            .as_deref()
            .ok_or_else(|| Error::Precondition(format!("{id}: only matched decisions can be merged")))?;
        let published = store
            .published_record(accession)
            .ok_or_else(|| Error::Integrity(format!("unknown accession {accession}")))?;
        let pre_doc = DocumentRef::preprint(id);
        let holders: Vec<String> = self
            .doc_profiles
            .get(&pre_doc)
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default();
        if holders.is_empty() {
            return Err(Error::Integrity(format!("no profile holds preprint {id}")));
        }
        let pub_doc = DocumentRef::published(accession);
        for h in holders {
            let name = &self.profiles[&h].canonical_name;
            if published.authors.iter().any(|a| same_person(a, name)) {
                self.detach(&h, &pre_doc);
                self.attach(&h, pub_doc.clone());
            } else if let Some(flags) = self.profiles.get_mut(&h).and_then(|p| p.documents.get_mut(&pre_doc)) {
                flags.on_published_version = false;
            }
        }
        self.merged.insert(id.clone());
        Ok(())
    }

    fn flag_withdrawn(&mut self, id: &str) {
        let doc = DocumentRef::preprint(id);
        let holders: Vec<String> = self.doc_profiles.get(&doc).into_iter().flatten().cloned().collect();
        for h in holders {
            if let Some(f) = self.profiles.get_mut(&h).and_then(|p| p.documents.get_mut(&doc)) {
                f.withdrawn = true;
            }
        }
    }

    pub fn profiles(&self) -> impl Iterator<Item = &AuthorProfile> {
        self.profiles.values()
    }

    pub fn profile(&self, id: &str) -> Option<&AuthorProfile> {
        self.profiles.get(id)
    }

    pub fn holders(&self, doc: &DocumentRef) -> BTreeSet<String> {
        self.doc_profiles.get(doc).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// One JSON object per profile, ordered by id.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in self.profiles.values() {
            let line = ProfileLine {
                profile_id: &p.profile_id,
                canonical_name: p.display_name(),
                documents: p
                    .documents
                    .iter()
                    .map(|(d, f)| DocumentLine {
                        kind: d.kind,
                        key: &d.key,
                        withdrawn: f.withdrawn,
                        on_published_version: f.on_published_version,
                    })
                    .collect(),
            };
            out.push_str(&serde_json::to_string(&line).expect("profile serializes"));
            out.push('\n');
        }
        out
    }
}

/// Same family name and compatible given names: equal, one missing, or one
/// an initial of the other.
fn same_person(a: &AuthorName, b: &AuthorName) -> bool {
    if a.normalized_family() != b.normalized_family() {
        return false;
    }
    let (ga, gb) = (a.normalized_given(), b.normalized_given());
    let initial = |short: &str, long: &str| short.chars().count() == 1 && long.starts_with(short);
    ga == gb || ga.is_empty() || gb.is_empty() || initial(&ga, &gb) || initial(&gb, &ga)
}

/// Flag a preprint withdrawn in the store and on every profile listing it.
/// The record stays everywhere it was.
pub fn mark_withdrawn(id: &str, store: &mut CorpusStore, profiles: &mut ProfileTable) -> Result<()> {
    store.mark_withdrawn(id)?;
    profiles.flag_withdrawn(id);
    Ok(())
}
