//! Deterministic text, author-list and DOI normalization.
//!
//! Everything here is a total, pure function. The text pipeline is the layer
//! both the naive title/author baseline and the similarity features sit on,
//! so its output must be stable: `normalize_text(normalize_text(x).value)`
//! always equals `normalize_text(x)`.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{AuthorName, Doi};
use crate::error::{Error, Result};

/// Lowercase, diacritic-folded, LaTeX-stripped, whitespace-collapsed text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NormalizedText {
    pub value: String,
    pub token_count: usize,
}

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.value
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.value.split(' ').filter(|t| !t.is_empty())
    }
}

impl std::fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.value)
    }
}

/// Normalize free text.
///
/// Steps, in order: compatibility decomposition with diacritic removal,
/// LaTeX stripping (`\cmd{arg}` keeps `arg`, `$...$` keeps its content minus
/// commands and `^`/`_`), punctuation to spaces except hyphens between two
/// alphanumerics (runs of hyphens collapse to one), lowercasing, whitespace
/// collapse.
pub fn normalize_text(raw: &str) -> NormalizedText {
    let folded = fold(raw);
    let stripped = strip_latex(&folded);
    let value = map_punctuation(&stripped);
    let token_count = value.split(' ').filter(|t| !t.is_empty()).count();
    NormalizedText { value, token_count }
}

/// NFKD, drop combining marks, lowercase; repeated until stable because a
/// lowercase mapping can itself decompose (e.g. U+0130).
fn fold(raw: &str) -> String {
    let mut cur: String = raw.to_string();
    for _ in 0..4 {
        let next: String = cur
            .nfkd()
            .filter(|c| !is_combining_mark(*c))
            .flat_map(char::to_lowercase)
            .collect();
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn is_hyphen(c: char) -> bool {
    matches!(
        c,
        '-' | '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{FE58}' | '\u{FE63}' | '\u{FF0D}'
    )
}

/// LaTeX accent control symbols: `\'e`, `\"o`, `` \`a `` and friends.
fn is_accent_symbol(c: char) -> bool {
    matches!(c, '\'' | '`' | '^' | '"' | '~' | '=' | '.')
}

fn strip_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_math = false;
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.peek().copied() {
                Some(n) if n.is_alphabetic() => {
                    // Command name: dropped. A braced argument survives
                    // because braces themselves are dropped below.
                    while chars.peek().is_some_and(|n| n.is_alphabetic()) {
                        chars.next();
                    }
                    out.push(' ');
                }
                Some(n) if is_accent_symbol(n) => {
                    chars.next();
                }
                Some(_) => {
                    // `\\`, `\&`, `\$`, ...
                    chars.next();
                    out.push(' ');
                }
                None => out.push(' '),
            },
            '$' => in_math = !in_math,
            '{' | '}' => {}
            '^' | '_' if in_math => {}
            _ => out.push(c),
        }
    }
    out
}

fn map_punctuation(s: &str) -> String {
    // First pass: alnum kept, hyphen-like marked, everything else a space.
    let marked: Vec<char> = s
        .chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c
            } else if is_hyphen(c) {
                '-'
            } else {
                ' '
            }
        })
        .collect();

    let mut out = String::with_capacity(marked.len());
    let mut pending_space = false;
    let mut i = 0;
    while i < marked.len() {
        let c = marked[i];
        if c == '-' {
            let start = i;
            while i < marked.len() && marked[i] == '-' {
                i += 1;
            }
            let before = start
                .checked_sub(1)
                .map(|j| marked[j].is_alphanumeric())
                .unwrap_or(false);
            let after = marked.get(i).is_some_and(|c| c.is_alphanumeric());
            if before && after {
                out.push('-');
            } else {
                pending_space = true;
            }
            continue;
        }
        if c == ' ' {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
        i += 1;
    }
    out
}

/// Split a raw author string into names.
///
/// Separators are `;`, the word `and`, and commas. Commas are ambiguous
/// ("Doe, Jane" vs "Jane Doe, John Roe"): a comma-separated group is read
/// as `Family, Given` pairs when it has an even number of parts and every
/// family position holds a single token (after lowercase particles such as
/// `van der`); otherwise each part is one name in `Given Family` order.
pub fn split_authors(raw: &str) -> Vec<AuthorName> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Vec::new();
    }

    let mut names = Vec::new();
    for segment in split_segments(raw) {
        let parts: Vec<&str> = segment.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        if parts.is_empty() {
            continue;
        }
        let pairs = parts.len().is_multiple_of(2) && parts.iter().step_by(2).all(|p| is_single_family(p));
        if pairs {
            for pair in parts.chunks(2) {
                names.push(AuthorName::from_parts(
                    pair[0],
                    pair[1],
                    format!("{}, {}", pair[0], pair[1]),
                ));
            }
        } else {
            for part in parts {
                names.push(AuthorName::parse(part));
            }
        }
    }

    let garbage = names.is_empty()
        || names
            .iter()
            .any(|n| !normalize_text(&n.family).value.chars().any(char::is_alphabetic));
    if garbage {
        return vec![AuthorName::raw_only(raw)];
    }
    names
}

const PARTICLES: &[&str] = &[
    "da", "das", "de", "del", "della", "der", "di", "dos", "du", "la", "le", "ten", "ter", "van", "von",
];

fn is_single_family(part: &str) -> bool {
    let tokens: Vec<&str> = part.split_whitespace().collect();
    match tokens.split_last() {
        Some((_, particles)) => particles.iter().all(|t| PARTICLES.contains(t)),
        None => false,
    }
}

/// Split on `;` and on a standalone `and` (case-insensitive).
fn split_segments(raw: &str) -> Vec<String> {
    let mut segments = Vec::new();
    for piece in raw.split(';') {
        let mut current: Vec<&str> = Vec::new();
        for word in piece.split_whitespace() {
            if word.eq_ignore_ascii_case("and") || word == "&" {
                segments.push(current.join(" "));
                current.clear();
            } else {
                current.push(word);
            }
        }
        segments.push(current.join(" "));
    }
    segments.retain(|s| !s.trim().is_empty());
    segments
}

const RESOLVER_PREFIXES: [&str; 6] = [
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
];

/// Canonicalize a DOI: strip resolver prefixes and whitespace, lowercase,
/// and check the `10.<registrant>/<suffix>` shape.
pub fn normalize_doi(raw: &str) -> Result<Doi> {
    let mut s = raw.trim().to_lowercase();
    loop {
        let before = s.len();
        for prefix in RESOLVER_PREFIXES {
            if let Some(rest) = s.strip_prefix(prefix) {
                s = rest.trim_start().to_string();
            }
        }
        if s.len() == before {
            break;
        }
    }
    if is_valid_doi(&s) {
        Ok(Doi(s))
    } else {
        Err(Error::Validation(format!("not a DOI: {raw:?}")))
    }
}

pub(crate) fn is_valid_doi(s: &str) -> bool {
    let Some(rest) = s.strip_prefix("10.") else {
        return false;
    };
    let Some((registrant, suffix)) = rest.split_once('/') else {
        return false;
    };
    !registrant.is_empty()
        && registrant.chars().all(|c| c.is_ascii_digit() || c == '.')
        && !suffix.is_empty()
        && !suffix.chars().any(char::is_whitespace)
        && s.chars().all(|c| !c.is_uppercase() && !c.is_control())
}
