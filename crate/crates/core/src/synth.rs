//! Synthetic preprint/published corpora with known ground truth.
//!
//! Each generated pair starts from one set of metadata. The published side
//! then drifts the way real publications do: title words swapped, an author
//! dropped or added, abstract sentences rewritten, sometimes no abstract at
//! all. Presentation differences that normalization must absorb (title
//! case, `Family, Given` author order, abbreviated given names, DOI
//! resolver prefixes, run-together author strings) are always present.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_atomic, DocumentType, Doi, PreprintLine, PublishedLine};
use crate::error::{Error, Result};
use crate::normalize::{normalize_doi, normalize_text};

/// Per-pair drift rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    /// Per title word.
    pub title_word_substitution: f64,
    /// Separately for dropping one author and for adding one.
    pub author_change: f64,
    /// Per abstract sentence.
    pub abstract_sentence_edit: f64,
    /// Share of preprints carrying their published version's DOI.
    pub doi_rate: f64,
    /// Share of pairs whose published DOI is wrong.
    pub wrong_doi_rate: f64,
    pub published_abstract_missing: f64,
    /// Extra preprints with no published counterpart, relative to `n`.
    pub unpublished_fraction: f64,
    pub withdrawn_rate: f64,
}

impl Default for PerturbationProfile {
    fn default() -> Self {
        PerturbationProfile {
            title_word_substitution: 0.1,
            author_change: 0.05,
            abstract_sentence_edit: 0.2,
            doi_rate: 0.3,
            wrong_doi_rate: 0.01,
            published_abstract_missing: 0.15,
            unpublished_fraction: 0.2,
            withdrawn_rate: 0.01,
        }
    }
}

impl PerturbationProfile {
    /// No drift, no DOIs, no extra preprints.
    pub fn none() -> Self {
        PerturbationProfile {
            title_word_substitution: 0.0,
            author_change: 0.0,
            abstract_sentence_edit: 0.0,
            doi_rate: 0.0,
            wrong_doi_rate: 0.0,
            published_abstract_missing: 0.0,
            unpublished_fraction: 0.0,
            withdrawn_rate: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let rates = [
            self.title_word_substitution,
            self.author_change,
            self.abstract_sentence_edit,
            self.doi_rate,
            self.wrong_doi_rate,
            self.published_abstract_missing,
            self.unpublished_fraction,
            self.withdrawn_rate,
        ];
        if rates.iter().all(|r| (0.0..=1.0).contains(r)) {
            Ok(())
        } else {
            Err(Error::InvalidHyperparameter(
                "perturbation rates must lie in [0,1]".into(),
            ))
        }
    }
}

/// Where each generated preprint really belongs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthLine {
    pub arxiv_id: String,
    pub accession: Option<String>,
    pub doi_given: bool,
    pub wrong_doi: bool,
    /// The preprint's DOI resolves to exactly one record. After wrong-DOI
    /// noise that record is not always the counterpart.
    pub doi_unique: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub preprints: Vec<PreprintLine>,
    pub published: Vec<PublishedLine>,
    pub truth: Vec<TruthLine>,
}

pub const PREPRINTS_FILE: &str = "preprints.jsonl";
pub const PUBLISHED_FILE: &str = "published.jsonl";
pub const TRUTH_FILE: &str = "truth.jsonl";

impl SyntheticCorpus {
    pub fn to_files(&self) -> Vec<(&'static str, String)> {
        vec![
            (PREPRINTS_FILE, jsonl(&self.preprints)),
            (PUBLISHED_FILE, jsonl(&self.published)),
            (TRUTH_FILE, jsonl(&self.truth)),
        ]
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in self.to_files() {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    /// Preprint id → true accession, for preprints that have one.
    pub fn truth_map(&self) -> std::collections::BTreeMap<String, String> {
        self.truth
            .iter()
            .filter_map(|t| t.accession.clone().map(|a| (t.arxiv_id.clone(), a)))
            .collect()
    }
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for i in items {
        s.push_str(&serde_json::to_string(i).expect("serializable"));
        s.push('\n');
    }
    s
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthLine>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::json(format!("truth line {}", i + 1), e)))
        .collect()
}

const WORDS: &[&str] = &[
    "algebraic",
    "analytic",
    "asymptotic",
    "banach",
    "bifurcation",
    "boundary",
    "bounded",
    "brownian",
    "calabi",
    "category",
    "cauchy",
    "character",
    "chow",
    "classification",
    "coherent",
    "cohomology",
    "combinatorial",
    "commutative",
    "compact",
    "complex",
    "conformal",
    "conjecture",
    "connection",
    "constant",
    "convex",
    "coxeter",
    "critical",
    "crossed",
    "curvature",
    "curve",
    "cyclic",
    "decomposition",
    "deformation",
    "degenerate",
    "derived",
    "descent",
    "diffusion",
    "dimension",
    "dirichlet",
    "discrete",
    "distribution",
    "divisor",
    "dual",
    "dynamics",
    "eigenvalue",
    "elliptic",
    "embedding",
    "energy",
    "entropy",
    "equation",
    "equivariant",
    "ergodic",
    "estimate",
    "euler",
    "exact",
    "exceptional",
    "expansion",
    "exponent",
    "extension",
    "extremal",
    "factorization",
    "fiber",
    "field",
    "finite",
    "flow",
    "fourier",
    "fractional",
    "free",
    "function",
    "functor",
    "galois",
    "gauge",
    "gaussian",
    "geodesic",
    "geometry",
    "global",
    "gradient",
    "graph",
    "group",
    "hamiltonian",
    "harmonic",
    "heat",
    "hecke",
    "hilbert",
    "hodge",
    "holomorphic",
    "homogeneous",
    "homotopy",
    "hyperbolic",
    "ideal",
    "inequality",
    "infinite",
    "integrable",
    "integral",
    "invariant",
    "inverse",
    "isometry",
    "iwasawa",
    "kernel",
    "knot",
    "lattice",
    "lie",
    "limit",
    "linear",
    "local",
    "manifold",
    "markov",
    "martingale",
    "matrix",
    "maximal",
    "measure",
    "metric",
    "minimal",
    "mixing",
    "model",
    "moduli",
    "module",
    "monodromy",
    "monotone",
    "morse",
    "motive",
    "multiplicity",
    "navier",
    "nilpotent",
    "noether",
    "nonlinear",
    "norm",
    "operator",
    "optimal",
    "orbit",
    "order",
    "orthogonal",
    "parabolic",
    "partition",
    "percolation",
    "periodic",
    "perturbation",
    "poisson",
    "polynomial",
    "positive",
    "potential",
    "prime",
    "principal",
    "projective",
    "quadratic",
    "quantum",
    "quasi",
    "quotient",
    "random",
    "rank",
    "rational",
    "reduction",
    "regularity",
    "representation",
    "residue",
    "riemann",
    "rigidity",
    "ring",
    "scattering",
    "scheme",
    "semigroup",
    "sheaf",
    "shimura",
    "singular",
    "sobolev",
    "solution",
    "spectral",
    "spectrum",
    "sphere",
    "stability",
    "stable",
    "stochastic",
    "stokes",
    "structure",
    "subgroup",
    "surface",
    "symmetric",
    "symplectic",
    "system",
    "tensor",
    "theorem",
    "toric",
    "torsion",
    "trace",
    "transform",
    "tree",
    "uniform",
    "unipotent",
    "universal",
    "variation",
    "variety",
    "vector",
    "wave",
    "weak",
    "weight",
    "zeta",
];

const FUNCTION_WORDS: &[&str] = &[
    "we", "the", "of", "that", "a", "for", "in", "and", "is", "this", "with", "on", "to",
];

const LEADS: &[&str] = &["", "", "", "On", "On the", "A note on", "Remarks on", "Towards"];

const GIVEN: &[&str] = &[
    "Anna", "Boris", "Chen", "Daniel", "Elena", "Farid", "Greta", "Hiro", "Ines", "Jonas", "Kavya", "Lars", "Maria",
    "Nikolai", "Olga", "Pablo", "Qing", "Rosa", "Sven", "Tara", "Umar", "Vera", "Wei", "Xenia", "Yusuf", "Zoe", "Amir",
    "Bianca", "Carlos", "Dana", "Emil", "Fatima", "Goran", "Hanna", "Igor", "Julia", "Kenji", "Lena", "Marek", "Nadia",
];

const SYLLABLES: &[&str] = &[
    "ba", "ber", "ca", "dor", "el", "fan", "gar", "hol", "ik", "jan", "kov", "lin", "mar", "nen", "os", "par", "quin",
    "ros", "sen", "tor", "ul", "vas", "wen", "xu", "yam", "zel", "mo", "ri", "sha", "tin", "ko", "ne", "lu", "da",
    "vi", "stra", "berg", "ova", "ski", "ez",
];

/// (category, weight, MSC area)
const CATEGORIES: &[(&str, u32, &str)] = &[
    ("math.CO", 10, "05"),
    ("math.AP", 9, "35"),
    ("math.NT", 9, "11"),
    ("math.PR", 8, "60"),
    ("math.AG", 8, "14"),
    ("math.DG", 5, "53"),
    ("math.OC", 4, "49"),
    ("math.FA", 4, "46"),
    ("math.DS", 4, "37"),
    ("math.NA", 4, "65"),
    ("math-ph", 4, "81"),
    ("math.GT", 3, "57"),
    ("math.RT", 3, "22"),
    ("math.GR", 3, "20"),
    ("math.ST", 3, "62"),
    ("math.CA", 2, "26"),
    ("math.LO", 2, "03"),
    ("math.QA", 2, "17"),
    ("math.AC", 2, "13"),
    ("math.CV", 2, "32"),
    ("math.IT", 2, "94"),
    ("math.GM", 1, "00"),
    ("math.HO", 1, "01"),
    ("math.SG", 1, "53"),
];

const CROSS_LISTS: &[&str] = &[
    "cs.LG",
    "cs.IT",
    "stat.ME",
    "stat.ML",
    "hep-th",
    "quant-ph",
    "physics.flu-dyn",
    "math.CO",
    "math.PR",
    "math.AP",
    "math.NT",
    "math.MP",
    "math.ST",
    "math.DS",
];

const JOURNALS: &[&str] = &[
    "J. Algebra",
    "Ann. Math.",
    "Invent. Math.",
    "Duke Math. J.",
    "Adv. Math.",
    "Trans. Am. Math. Soc.",
    "Math. Ann.",
    "J. Funct. Anal.",
    "Probab. Theory Relat. Fields",
    "Compos. Math.",
    "Geom. Topol.",
    "Comment. Math. Helv.",
    "J. Differ. Equations",
    "Commun. Math. Phys.",
    "Ann. Stat.",
    "Combinatorica",
];

struct Gen {
    rng: ChaCha8Rng,
    titles: HashSet<String>,
    ids: BTreeSet<String>,
    accessions: BTreeSet<String>,
    doi_counter: u32,
}

#[derive(Clone)]
struct Person {
    given: String,
    family: String,
}

struct Base {
    lead: &'static str,
    words: Vec<String>,
    authors: Vec<Person>,
    sentences: Vec<Vec<String>>,
    categories: Vec<String>,
    area: &'static str,
}

impl Gen {
    fn word(&mut self) -> String {
        WORDS.choose(&mut self.rng).expect("non-empty").to_string()
    }

    fn person(&mut self) -> Person {
        let n = self.rng.gen_range(2..=3);
        let mut family = String::new();
        for _ in 0..n {
            family.push_str(SYLLABLES.choose(&mut self.rng).expect("non-empty"));
        }
        let mut c = family.chars();
        let family = match c.next() {
            Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
            None => family,
        };
        Person {
            given: GIVEN.choose(&mut self.rng).expect("non-empty").to_string(),
            family,
        }
    }

    fn title_from(&self, lead: &str, words: &[String]) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if !lead.is_empty() {
            parts.push(lead);
        }
        for (i, w) in words.iter().enumerate() {
            if i > 0 && i % 3 == 0 {
                parts.push(if i % 2 == 0 { "and" } else { "of" });
            }
            parts.push(w);
        }
        let mut t = parts.join(" ");
        if let Some(f) = t.get(0..1) {
            t = f.to_uppercase() + &t[1..];
        }
        t
    }

    /// Register a title; false if its normalized form is taken.
    fn claim_title(&mut self, title: &str) -> bool {
        self.titles.insert(normalize_text(title).value)
    }

    fn fresh_words(&mut self) -> (&'static str, Vec<String>) {
        loop {
            let lead = *LEADS.choose(&mut self.rng).expect("non-empty");
            let n = self.rng.gen_range(4..=8);
            let words: Vec<String> = (0..n).map(|_| self.word()).collect();
            let title = self.title_from(lead, &words);
            if self.claim_title(&title) {
                return (lead, words);
            }
        }
    }

    fn sentence(&mut self) -> Vec<String> {
        let n = self.rng.gen_range(8..=14);
        (0..n)
            .map(|_| {
                if self.rng.gen_bool(0.35) {
                    FUNCTION_WORDS.choose(&mut self.rng).expect("non-empty").to_string()
                } else {
                    self.word()
                }
            })
            .collect()
    }

    fn categories(&mut self) -> (Vec<String>, &'static str) {
        let total: u32 = CATEGORIES.iter().map(|c| c.1).sum();
        let mut pick = self.rng.gen_range(0..total);
        let mut chosen = CATEGORIES[0];
        for c in CATEGORIES {
            if pick < c.1 {
                chosen = *c;
                break;
            }
            pick -= c.1;
        }
        let mut cats = vec![chosen.0.to_string()];
        if self.rng.gen_bool(0.3) {
            let extra = if chosen.0 == "math.IT" {
                "cs.IT"
            } else {
                CROSS_LISTS.choose(&mut self.rng).expect("non-empty")
            };
            if extra != chosen.0 {
                cats.push(extra.to_string());
            }
        }
        (cats, chosen.2)
    }

    fn base(&mut self, authors: Option<Vec<Person>>) -> Base {
        let (lead, words) = self.fresh_words();
        let authors = authors.unwrap_or_else(|| {
            let n = self.rng.gen_range(1..=4);
            (0..n).map(|_| self.person()).collect()
        });
        let ns = self.rng.gen_range(3..=6);
        let sentences = (0..ns).map(|_| self.sentence()).collect();
        let (categories, area) = self.categories();
        Base {
            lead,
            words,
            authors,
            sentences,
            categories,
            area,
        }
    }

    fn msc(&mut self, area: &str) -> String {
        const LETTERS: &[u8] = b"ABCDEFGHJKLMNPQRS";
        let l = LETTERS[self.rng.gen_range(0..LETTERS.len())] as char;
        format!("{area}{l}{:02}", self.rng.gen_range(5..=99))
    }

    fn arxiv_id(&mut self) -> String {
        loop {
            let id = if self.rng.gen_bool(0.1) {
                let archive = *["math", "math-ph", "math.AG", "math.PR"]
                    .choose(&mut self.rng)
                    .expect("non-empty");
                format!(
                    "{archive}/{:02}{:02}{:03}",
                    self.rng.gen_range(0..=6),
                    self.rng.gen_range(1..=12),
                    self.rng.gen_range(1..=999)
                )
            } else {
                format!(
                    "{:02}{:02}.{:05}",
                    self.rng.gen_range(15..=23),
                    self.rng.gen_range(1..=12),
                    self.rng.gen_range(1..=99999)
                )
            };
            if self.ids.insert(id.clone()) {
                return id;
            }
        }
    }

    fn accession(&mut self) -> String {
        loop {
            let acc = format!(
                "{}.{:05}",
                self.rng.gen_range(1000..=1899),
                self.rng.gen_range(0..100000)
            );
            if self.accessions.insert(acc.clone()) {
                return acc;
            }
        }
    }

    fn doi(&mut self, journal: usize) -> String {
        self.doi_counter += 1;
        format!("10.{}/j{journal}.{:06}", 1000 + journal * 7, self.doi_counter)
    }

    fn source(&mut self) -> (String, usize) {
        let j = self.rng.gen_range(0..JOURNALS.len());
        let vol = self.rng.gen_range(1..=400);
        let page = self.rng.gen_range(1..=900);
        let year = self.rng.gen_range(2015..=2024);
        (
            format!(
                "{} {vol}, {page}-{} ({year})",
                JOURNALS[j],
                page + self.rng.gen_range(8..40)
            ),
            j,
        )
    }

    fn preprint_authors(&mut self, people: &[Person]) -> Vec<String> {
        if people.len() >= 2 && self.rng.gen_bool(0.02) {
            // Run-together "Family, Given, Family, Given" string.
            let joined = people
                .iter()
                .map(|p| format!("{}, {}", p.family, p.given))
                .collect::<Vec<_>>()
                .join(", ");
            return vec![joined];
        }
        people.iter().map(|p| format!("{} {}", p.given, p.family)).collect()
    }

    fn published_authors(&mut self, people: &[Person]) -> Vec<String> {
        people
            .iter()
            .map(|p| {
                if self.rng.gen_bool(0.3) {
                    format!("{}, {}.", p.family, &p.given[..1])
                } else {
                    format!("{}, {}", p.family, p.given)
                }
            })
            .collect()
    }

    fn abstract_text(sentences: &[Vec<String>]) -> String {
        sentences
            .iter()
            .map(|s| {
                let mut t = s.join(" ");
                if let Some(f) = t.get(0..1) {
                    t = f.to_uppercase() + &t[1..];
                }
                t + "."
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn title_case(title: &str) -> String {
        title
            .split(' ')
            .map(|w| {
                let mut c = w.chars();
                match c.next() {
                    Some(f) if w.len() > 3 => f.to_uppercase().collect::<String>() + c.as_str(),
                    _ => w.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn preprint_line(&mut self, b: &Base, doi: Option<String>, profile: &PerturbationProfile) -> PreprintLine {
        let msc = if self.rng.gen_bool(0.4) {
            vec![self.msc(b.area)]
        } else {
            vec![]
        };
        PreprintLine {
            id: self.arxiv_id(),
            version: self.rng.gen_range(1..=4),
            title: self.title_from(b.lead, &b.words),
            authors: self.preprint_authors(&b.authors),
            abstract_text: Self::abstract_text(&b.sentences),
            categories: b.categories.clone(),
            msc,
            doi,
            withdrawn: self.rng.gen_bool(profile.withdrawn_rate),
        }
    }

    fn published_line(
        &mut self,
        title: String,
        people: &[Person],
        abstract_text: Option<String>,
        doi: Option<String>,
        area: &str,
        source: String,
    ) -> PublishedLine {
        let n_msc = self.rng.gen_range(1..=2);
        let msc = (0..n_msc).map(|_| self.msc(area)).collect();
        let document_type = match self.rng.gen_range(0..20) {
            0 => DocumentType::Book,
            1..=3 => DocumentType::CollectionArticle,
            _ => DocumentType::JournalArticle,
        };
        PublishedLine {
            accession: self.accession(),
            title,
            authors: self.published_authors(people),
            abstract_text,
            doi,
            source,
            document_type,
            msc,
        }
    }

    fn drift_title(&mut self, b: &Base, rate: f64) -> String {
        let mut words = b.words.clone();
        loop {
            for w in words.iter_mut() {
                if self.rng.gen_bool(rate) {
                    let mut r = self.word();
                    while r == *w {
                        r = self.word();
                    }
                    *w = r;
                }
            }
            let title = self.title_from(b.lead, &words);
            if words == b.words || self.claim_title(&title) {
                return title;
            }
            words = b.words.clone();
        }
    }

    fn drift_authors(&mut self, people: &[Person], rate: f64) -> Vec<Person> {
        let mut out = people.to_vec();
        if out.len() >= 2 && self.rng.gen_bool(rate) {
            let i = self.rng.gen_range(0..out.len());
            out.remove(i);
        }
        if self.rng.gen_bool(rate) {
            let p = self.person();
            out.push(p);
        }
        out
    }

    fn drift_abstract(&mut self, sentences: &[Vec<String>], rate: f64) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for s in sentences {
            if !self.rng.gen_bool(rate) {
                out.push(s.clone());
                continue;
            }
            match self.rng.gen_range(0..3) {
                0 => {
                    let mut s = s.clone();
                    for _ in 0..self.rng.gen_range(2..=3) {
                        let i = self.rng.gen_range(0..s.len());
                        s[i] = self.word();
                    }
                    out.push(s);
                }
                1 if sentences.len() > 1 => {}
                _ => {
                    out.push(s.clone());
                    let extra = self.sentence();
                    out.push(extra);
                }
            }
        }
        if out.is_empty() {
            out.push(sentences[0].clone());
        }
        out
    }
}

/// Generate `n` matched pairs, `n / 2` unmatched published decoys and
/// `round(n * unpublished_fraction)` preprints without a counterpart.
pub fn gen_synthetic_corpus(n: usize, profile: &PerturbationProfile, seed: u64) -> Result<SyntheticCorpus> {
    if n == 0 {
        return Err(Error::InvalidHyperparameter("n must be >= 1".into()));
    }
    profile.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        titles: HashSet::new(),
        ids: BTreeSet::new(),
        accessions: BTreeSet::new(),
        doi_counter: 0,
    };

    let mut preprints = Vec::new();
    let mut published = Vec::new();
    let mut truth = Vec::new();
    let mut bases: Vec<(Vec<Person>, Vec<String>)> = Vec::new();
    // Indices into `published` of counterparts with a DOI, for wrong-DOI noise.
    let mut pair_pub: Vec<usize> = Vec::new();

    for _ in 0..n {
        let b = g.base(None);
        let (source, journal) = g.source();
        let preprint_has_doi = g.rng.gen_bool(profile.doi_rate);
        let published_has_doi = preprint_has_doi || g.rng.gen_bool(0.8);
        let pub_doi = published_has_doi.then(|| g.doi(journal));

        let pub_title_raw = g.drift_title(&b, profile.title_word_substitution);
        let pub_title = if g.rng.gen_bool(0.5) {
            Gen::title_case(&pub_title_raw)
        } else {
            pub_title_raw
        };
        let pub_people = g.drift_authors(&b.authors, profile.author_change);
        let pub_abstract = if g.rng.gen_bool(profile.published_abstract_missing) {
            None
        } else {
            let s = g.drift_abstract(&b.sentences, profile.abstract_sentence_edit);
            Some(Gen::abstract_text(&s))
        };
        let pl = g.published_line(pub_title, &pub_people, pub_abstract, pub_doi.clone(), b.area, source);

        let pre_doi = if preprint_has_doi {
            pub_doi.clone().map(|d| match g.rng.gen_range(0..5) {
                0 => format!("https://doi.org/{}", d.to_uppercase()),
                1 => format!("doi:{d}"),
                _ => d,
            })
        } else {
            None
        };
        let pre = g.preprint_line(&b, pre_doi, profile);
        truth.push(TruthLine {
            arxiv_id: pre.id.clone(),
            accession: Some(pl.accession.clone()),
            doi_given: pre.doi.is_some(),
            wrong_doi: false,
            doi_unique: false,
        });
        bases.push((b.authors.clone(), b.words.clone()));
        pair_pub.push(published.len());
        preprints.push(pre);
        published.push(pl);
    }

    // Wrong DOIs on the published side: either a copy of another record's
    // DOI (that DOI then resolves to two records) or a fresh unrelated one.
    for i in 0..n {
        if !g.rng.gen_bool(profile.wrong_doi_rate) {
            continue;
        }
        let target = pair_pub[i];
        if preprints[i].doi.is_none() {
            let d = published[target].doi.clone().unwrap_or_else(|| g.doi(0));
            published[target].doi = Some(d.clone());
            preprints[i].doi = Some(d);
        }
        let donor = g.rng.gen_range(0..n);
        let new = if g.rng.gen_bool(0.5) && donor != i && published[pair_pub[donor]].doi.is_some() {
            published[pair_pub[donor]].doi.clone()
        } else {
            Some(g.doi(99))
        };
        published[target].doi = new;
        truth[i].doi_given = true;
        truth[i].wrong_doi = true;
    }

    let mut doi_counts: HashMap<Doi, usize> = HashMap::new();
    for d in published.iter().filter_map(|q| q.doi.as_deref()) {
        *doi_counts.entry(normalize_doi(d)?).or_default() += 1;
    }
    for i in 0..n {
        let Some(d) = preprints[i].doi.as_deref() else { continue };
        let d = normalize_doi(d)?;
        truth[i].doi_unique = doi_counts.get(&d) == Some(&1);
    }

    for _ in 0..n / 2 {
        let reuse = g.rng.gen_bool(0.5);
        let (people, b) = if reuse {
            let (people, words) = bases.choose(&mut g.rng).cloned().expect("n >= 1");
            let mut b = g.base(Some(people.clone()));
            // Share about half the title words with an existing pair.
            for (i, w) in words.iter().enumerate().step_by(2) {
                if i < b.words.len() {
                    b.words[i] = w.clone();
                }
            }
            let title = g.title_from(b.lead, &b.words);
            if !g.claim_title(&title) {
                let (lead, words) = g.fresh_words();
                b.lead = lead;
                b.words = words;
            }
            (people, b)
        } else {
            let b = g.base(None);
            (b.authors.clone(), b)
        };
        let (source, journal) = g.source();
        let doi = g.rng.gen_bool(0.7).then(|| g.doi(journal));
        let abs = (!g.rng.gen_bool(profile.published_abstract_missing)).then(|| Gen::abstract_text(&b.sentences));
        let title = g.title_from(b.lead, &b.words);
        let pl = g.published_line(title, &people, abs, doi, b.area, source);
        published.push(pl);
    }

    let extra = (n as f64 * profile.unpublished_fraction).round() as usize;
    for _ in 0..extra {
        let people = if g.rng.gen_bool(0.3) {
            Some(bases.choose(&mut g.rng).expect("n >= 1").0.clone())
        } else {
            None
        };
        let b = g.base(people);
        let pre = g.preprint_line(&b, None, profile);
        truth.push(TruthLine {
            arxiv_id: pre.id.clone(),
            accession: None,
            doi_given: false,
            wrong_doi: false,
            doi_unique: false,
        });
        preprints.push(pre);
    }

    // Present records in a scrambled order, as a real harvest would.
    preprints.shuffle(&mut g.rng);
    published.shuffle(&mut g.rng);
    truth.sort_by(|a, b| a.arxiv_id.cmp(&b.arxiv_id));
    Ok(SyntheticCorpus {
        preprints,
        published,
        truth,
    })
}
