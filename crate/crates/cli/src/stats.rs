//! Subject breakdown of preprints that have no published version yet.

use std::collections::BTreeMap;
use std::fmt::Write;

use prelink::corpus::CorpusStore;

const AREAS: &str = include_str!("../data/msc2020-areas.tsv");

fn area_name(code: &str) -> &'static str {
    AREAS
        .lines()
        .filter_map(|l| l.split_once('\t'))
        .find(|(c, _)| *c == code)
        .map_or("(unknown area)", |(_, name)| name)
}

/// Preprints are binned by the two-digit area of their first MSC code.
/// Withdrawn preprints are counted but not binned.
pub fn subject_table(store: &CorpusStore) -> String {
    let mut unpublished = 0usize;
    let mut withdrawn = 0usize;
    let mut with_msc = 0usize;
    let mut areas: BTreeMap<String, usize> = BTreeMap::new();
    for p in store.unpublished_preprints() {
        unpublished += 1;
        if p.withdrawn {
            withdrawn += 1;
            continue;
        }
        if let Some(code) = p.msc.first() {
            with_msc += 1;
            *areas.entry(code[..2].to_string()).or_default() += 1;
        }
    }
    let mut rows: Vec<(String, usize)> = areas.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut out = String::new();
    let _ = writeln!(out, "unpublished preprints: {unpublished}");
    let _ = writeln!(out, "withdrawn: {withdrawn}");
    let _ = writeln!(out, "with MSC: {with_msc}");
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<4} {:>6} {:>7}  name", "area", "count", "share");
    for (code, count) in rows {
        let share = 100.0 * count as f64 / with_msc as f64;
        let _ = writeln!(out, "{code:<4} {count:>6} {share:>6.2}%  {}", area_name(&code));
    }
    out
}
