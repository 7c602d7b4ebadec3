//! Editorial scope: which preprints belong in the database.
//!
//! Policy is data ([`ScopeRules`], shipped as `data/scope-rules-v1.json`).
//! A preprint is in scope when it carries an included math subcategory or
//! the mathematical-physics archive, or when it carries math.ST / stat.TH
//! and nothing outside mathematics. Overlap shares are reported for the
//! editors; the 60% threshold that motivated the lists is not enforced here.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStore, MatchDecision};
use crate::error::{Error, Result};

const RULES_V1: &str = include_str!("../data/scope-rules-v1.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScopeRules {
    #[serde(default = "default_version")]
    pub version: u32,
    pub included: BTreeSet<String>,
    pub excluded: BTreeSet<String>,
    pub conditional: BTreeSet<String>,
    pub standalone: BTreeSet<String>,
    pub nonmath_prefixes: BTreeSet<String>,
}

fn default_version() -> u32 {
    1
}

impl Default for ScopeRules {
    fn default() -> Self {
        Self::from_json(RULES_V1).expect("shipped rules are valid")
    }
}

impl ScopeRules {
    pub fn from_json(text: &str) -> Result<Self> {
        let rules: ScopeRules = serde_json::from_str(text).map_err(|e| Error::json("scope rules", e))?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.included.intersection(&self.excluded).next() {
            return Err(Error::Validation(format!("{c} is both included and excluded")));
        }
        Ok(())
    }

    /// Categories the rules treat as mathematics, whatever their verdict.
    pub fn is_mathematical(&self, category: &str) -> bool {
        self.included.contains(category)
            || self.excluded.contains(category)
            || self.conditional.contains(category)
            || self.standalone.contains(category)
    }

    /// Known to the rules, either as mathematics or through a listed
    /// non-mathematical archive prefix.
    pub fn is_known(&self, category: &str) -> bool {
        self.is_mathematical(category) || self.nonmath_prefixes.contains(archive_prefix(category))
    }
}

/// `math.AG` → `math`, `hep-th` → `hep-th`.
pub fn archive_prefix(category: &str) -> &str {
    category.split_once('.').map_or(category, |(a, _)| a)
}

/// The rule that decided a scope verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeReason {
    IncludedSubcategory,
    StandaloneArchive,
    ConditionalMathOnly,
    ConditionalCrossListed,
    ExcludedSubcategory,
    NonMathematical,
}

impl ScopeReason {
    pub const ALL: [ScopeReason; 6] = [
        ScopeReason::IncludedSubcategory,
        ScopeReason::StandaloneArchive,
        ScopeReason::ConditionalMathOnly,
        ScopeReason::ConditionalCrossListed,
        ScopeReason::ExcludedSubcategory,
        ScopeReason::NonMathematical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScopeReason::IncludedSubcategory => "included_subcategory",
            ScopeReason::StandaloneArchive => "standalone_archive",
            ScopeReason::ConditionalMathOnly => "conditional_math_only",
            ScopeReason::ConditionalCrossListed => "conditional_cross_listed",
            ScopeReason::ExcludedSubcategory => "excluded_subcategory",
            ScopeReason::NonMathematical => "non_mathematical",
        }
    }

    pub fn admits(self) -> bool {
        matches!(
            self,
            ScopeReason::IncludedSubcategory | ScopeReason::StandaloneArchive | ScopeReason::ConditionalMathOnly
        )
    }
}

impl fmt::Display for ScopeReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScopeDecision {
    pub in_scope: bool,
    pub reason: ScopeReason,
    /// Category codes the rules do not know; they count as non-mathematical.
    pub unknown_categories: Vec<String>,
}

/// Scope verdict for a category list (first entry primary; order does not
/// matter to the rules).
pub fn in_scope_categories<S: AsRef<str>>(categories: &[S], rules: &ScopeRules) -> ScopeDecision {
    let cats: Vec<&str> = categories.iter().map(AsRef::as_ref).collect();
    let unknown_categories: Vec<String> = cats
        .iter()
        .filter(|c| !rules.is_known(c))
        .map(|c| c.to_string())
        .collect();
    let any = |set: &BTreeSet<String>| cats.iter().any(|c| set.contains(*c));
    let reason = if any(&rules.included) {
        ScopeReason::IncludedSubcategory
    } else if any(&rules.standalone) {
        ScopeReason::StandaloneArchive
    } else if any(&rules.conditional) {
        if cats.iter().all(|c| rules.is_mathematical(c)) {
            ScopeReason::ConditionalMathOnly
        } else {
            ScopeReason::ConditionalCrossListed
        }
    } else if any(&rules.excluded) {
        ScopeReason::ExcludedSubcategory
    } else {
        ScopeReason::NonMathematical
    };
    ScopeDecision {
        in_scope: reason.admits(),
        reason,
        unknown_categories,
    }
}

pub fn in_scope(p: &crate::corpus::PreprintRecord, rules: &ScopeRules) -> ScopeDecision {
    in_scope_categories(&p.categories, rules)
}

/// Share of the preprints carrying `category` (primary or cross-listed)
/// that have a matching decision. `None` when no preprint carries it.
pub fn overlap_share(category: &str, store: &CorpusStore) -> Option<f64> {
    let (count, matched) = category_counts(store).remove(category)?;
    Some(matched as f64 / count as f64)
}

fn is_matched(store: &CorpusStore, id: &str) -> bool {
    store.is_merged(id) || store.decision(id).is_some_and(MatchDecision::is_match)
}

/// category → (preprints carrying it, of which matched)
fn category_counts(store: &CorpusStore) -> BTreeMap<String, (u64, u64)> {
    let mut out: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for p in store.preprints() {
        let matched = is_matched(store, &p.id.value);
        let distinct: BTreeSet<&String> = p.categories.iter().collect();
        for c in distinct {
            let e = out.entry(c.clone()).or_default();
            e.0 += 1;
            e.1 += u64::from(matched);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeRow {
    pub category: String,
    pub count: u64,
    pub overlap_share: f64,
    pub in_scope: bool,
    pub reason: ScopeReason,
}

/// One row per category present, most frequent first.
pub fn scope_report(store: &CorpusStore, rules: &ScopeRules) -> Vec<ScopeRow> {
    let mut rows: Vec<ScopeRow> = category_counts(store)
        .into_iter()
        .map(|(category, (count, matched))| {
            let d = in_scope_categories(&[category.as_str()], rules);
            ScopeRow {
                overlap_share: matched as f64 / count as f64,
                category,
                count,
                in_scope: d.in_scope,
                reason: d.reason,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
    rows
}

pub const SCOPE_CSV_HEADER: &str = "category,count,overlap_share,in_scope,reason";

pub fn scope_report_csv(rows: &[ScopeRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = "writing to memory cannot fail";
    w.write_record(SCOPE_CSV_HEADER.split(',')).expect(io);
    for r in rows {
        let share = format!("{:.6}", r.overlap_share);
        w.write_record([
            &r.category,
            &r.count.to_string(),
            &share,
            &r.in_scope.to_string(),
            r.reason.as_str(),
        ])
        .expect(io);
    }
    String::from_utf8(w.into_inner().expect(io)).expect("CSV of UTF-8 fields")
}
