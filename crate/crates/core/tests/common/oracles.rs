//! Independent reference implementations the library is checked against.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use prelink::candidates::{Candidate, CandidateIndex, Stopwords};
use prelink::corpus::{AuthorName, CorpusStore, PreprintRecord};
use prelink::normalize::normalize_text;
use prelink::similarity::{levenshtein, title_distance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Full-matrix edit distance, straight from the recurrence.
pub fn dp_edit_distance(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn random_string(rng: &mut ChaCha8Rng, alphabet: &[char]) -> String {
    let n = rng.gen_range(0..24);
    (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// Compares `levenshtein` and `title_distance` with the DP oracle on
/// `pairs` random string pairs. Returns the number of pairs checked.
pub fn check_levenshtein_pairs(pairs: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let small: Vec<char> = "ab ".chars().collect();
    let wide: Vec<char> = "abcdefgh ijklmnopé-ü".chars().collect();
    for i in 0..pairs {
        let alphabet = if i % 2 == 0 { &small } else { &wide };
        let a = normalize_text(&random_string(&mut rng, alphabet));
        let b = normalize_text(&random_string(&mut rng, alphabet));
        let ca: Vec<char> = a.value.chars().collect();
        let cb: Vec<char> = b.value.chars().collect();
        let d = dp_edit_distance(&ca, &cb);
        assert_eq!(levenshtein(&a.value, &b.value), d, "{:?} {:?}", a.value, b.value);
        let max = ca.len().max(cb.len());
        let expected = if max == 0 { 0.0 } else { d as f64 / max as f64 };
        assert_eq!(title_distance::<f64>(&a, &b), expected);
    }
    pairs
}

/// Cosine over explicit token-count vectors, indexed by a shared vocabulary.
pub fn brute_cosine_distance(a: &str, b: &str) -> f64 {
    let ta: Vec<&str> = a.split(' ').filter(|t| !t.is_empty()).collect();
    let tb: Vec<&str> = b.split(' ').filter(|t| !t.is_empty()).collect();
    if ta.is_empty() || tb.is_empty() {
        return 0.5;
    }
    let mut vocab: HashMap<&str, usize> = HashMap::new();
    for t in ta.iter().chain(&tb) {
        let next = vocab.len();
        vocab.entry(t).or_insert(next);
    }
    let mut va = vec![0f64; vocab.len()];
    let mut vb = vec![0f64; vocab.len()];
    for t in &ta {
        va[vocab[t]] += 1.0;
    }
    for t in &tb {
        vb[vocab[t]] += 1.0;
    }
    let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
    let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
    (1.0 - dot / (na * nb)).clamp(0.0, 1.0)
}

fn tokens(title: &str, stop: &Stopwords) -> BTreeSet<String> {
    normalize_text(title)
        .value
        .split(' ')
        .filter(|t| !t.is_empty() && !stop.contains(t))
        .map(str::to_string)
        .collect()
}

fn families(p: &[AuthorName]) -> BTreeSet<String> {
    p.iter()
        .map(|a| a.normalized_family())
        .filter(|f| !f.is_empty())
        .collect()
}

/// Candidate scoring without an index: every published record is scored
/// from scratch.
pub struct BruteCandidates {
    docs: Vec<(String, BTreeSet<String>, BTreeSet<String>)>,
    df: BTreeMap<String, usize>,
    stop: Stopwords,
}

impl BruteCandidates {
    pub fn new(store: &CorpusStore) -> Self {
        let stop = Stopwords::default();
        let docs: Vec<_> = store
            .published()
            .map(|r| (r.accession.clone(), tokens(&r.title, &stop), families(&r.authors)))
            .collect();
        let mut df = BTreeMap::new();
        for (_, toks, _) in &docs {
            for t in toks {
                *df.entry(t.clone()).or_default() += 1;
            }
        }
        BruteCandidates { docs, df, stop }
    }

    pub fn query(&self, p: &PreprintRecord, k: usize) -> Vec<Candidate> {
        let n = self.docs.len() as f64;
        let q_tokens = tokens(&p.title, &self.stop);
        let q_fams = families(&p.authors);
        let mut out: Vec<Candidate> = self
            .docs
            .iter()
            .map(|(acc, toks, fams)| {
                let mut title = 0.0;
                for t in &q_tokens {
                    if toks.contains(t) {
                        title += (1.0 + n / self.df[t] as f64).ln();
                    }
                }
                let shared = q_fams.intersection(fams).count() as f64;
                Candidate {
                    accession: acc.clone(),
                    score: title + 2.0 * shared,
                }
            })
            .filter(|c| c.score > 0.0)
            .collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.accession.cmp(&b.accession)));
        out.truncate(k.max(1));
        out
    }
}

/// Every preprint, every k: index output must equal the brute-force list.
/// Returns the number of queries compared.
pub fn check_index_against_brute(store: &CorpusStore, ks: &[usize]) -> usize {
    let index = CandidateIndex::build(store);
    let brute = BruteCandidates::new(store);
    let mut checked = 0;
    for p in store.preprints() {
        for &k in ks {
            assert_eq!(index.query_candidates(p, k), brute.query(p, k), "{} k={k}", p.id.value);
            checked += 1;
        }
    }
    checked
}

/// Weighted Gini impurity of a split as an exact fraction `(num, den)`:
/// sum over children of `(n_c / n) * (1 - p_c^2 - q_c^2)`.
pub fn gini_fraction(points: &[([f64; 3], bool)], feature: usize, threshold: f64) -> Option<(i128, i128)> {
    let (mut nl, mut pl, mut nr, mut pr) = (0i128, 0i128, 0i128, 0i128);
    for (x, y) in points {
        if x[feature] <= threshold {
            nl += 1;
            pl += i128::from(*y);
        } else {
            nr += 1;
            pr += i128::from(*y);
        }
    }
    if nl == 0 || nr == 0 {
        return None;
    }
    let n = nl + nr;
    let (ql, qr) = (nl - pl, nr - pr);
    // (nl - (pl^2+ql^2)/nl + nr - (pr^2+qr^2)/nr) / n over the common
    // denominator n * nl * nr.
    let num = nl * nl * nr - (pl * pl + ql * ql) * nr + nr * nr * nl - (pr * pr + qr * qr) * nl;
    Some((num, n * nl * nr))
}

/// Every (feature, midpoint) pair; the lowest impurity wins, earlier
/// feature then smaller threshold on ties.
pub fn exhaustive_split(points: &[([f64; 3], bool)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, (i128, i128))> = None;
    for f in 0..3 {
        let mut values: Vec<f64> = points.iter().map(|p| p.0[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) * 0.5;
            let Some(g) = gini_fraction(points, f, t) else { continue };
            let better = match best {
                None => true,
                Some((_, _, b)) => g.0 * b.1 < b.0 * g.1,
            };
            if better {
                best = Some((f, t, g));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}
