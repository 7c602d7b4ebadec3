//! Random-forest classifier over distance triples.
//!
//! Trees are CART-style: Gini impurity, thresholds at midpoints of adjacent
//! distinct values, two of the three features drawn per node, leaves holding
//! the positive fraction. Every tree draws from its own ChaCha streams (one
//! for the bootstrap sample, one for feature draws) keyed by the tree index,
//! so parallel and serial training produce the same model.

use std::cmp::Ordering;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateIndex;
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::matcher::doi_pairs;
use crate::scalar::Scalar;
use crate::similarity::{FeatureVector, RecordProfile, FEATURE_NAMES};

pub const SCHEMA_VERSION: u64 = 1;
pub const N_FEATURES: usize = 3;
/// `ceil(sqrt(3))`
pub const FEATURES_PER_NODE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrigin {
    DoiPositive,
    SampledNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrainingPair<T> {
    pub vector: FeatureVector<T>,
    pub label: bool,
    pub origin: PairOrigin,
}

impl<T: Scalar> TrainingPair<T> {
    pub fn positive(vector: FeatureVector<T>) -> Self {
        TrainingPair {
            vector,
            label: true,
            origin: PairOrigin::DoiPositive,
        }
    }

    pub fn negative(vector: FeatureVector<T>) -> Self {
        TrainingPair {
            vector,
            label: false,
            origin: PairOrigin::SampledNegative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: T,
    },
}

/// Nodes in pre-order; the root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecisionTree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn predict(&self, v: &FeatureVector<T>) -> T {
        let x = v.as_array();
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { leaf } => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go<T>(nodes: &[Node<T>], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    fn validate(&self, max_depth: usize) -> Result<()> {
        let bad = |m: &str| Error::Validation(format!("malformed tree: {m}"));
        if self.nodes.is_empty() {
            return Err(bad("no nodes"));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Leaf { leaf } => {
                    if !(leaf >= T::zero() && leaf <= T::one()) {
                        return Err(bad("leaf probability outside [0,1]"));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= N_FEATURES || !threshold.is_finite() {
                        return Err(bad("bad split"));
                    }
                    if left <= i || right <= i || left >= self.nodes.len() || right >= self.nodes.len() {
                        return Err(bad("child reference out of order"));
                    }
                }
            }
        }
        if self.depth() > max_depth {
            return Err(bad("deeper than max_depth"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub decision_threshold: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 6,
            seed: 0,
            decision_threshold: 0.5,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidHyperparameter("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidHyperparameter("max_depth must be >= 1".into()));
        }
        if !(self.decision_threshold > 0.0 && self.decision_threshold < 1.0) {
            return Err(Error::InvalidHyperparameter(
                "decision_threshold must lie in (0,1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel<T> {
    pub trees: Vec<DecisionTree<T>>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub decision_threshold: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T> {
    schema_version: u64,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
    decision_threshold: T,
    trees: Vec<DecisionTree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    pub fn feature_names(&self) -> [&'static str; 3] {
        FEATURE_NAMES
    }

    /// Mean leaf probability of label "match".
    pub fn predict(&self, v: &FeatureVector<T>) -> T {
        let sum = self.trees.iter().fold(T::zero(), |acc, t| acc + t.predict(v));
        (sum / T::from_u64(self.trees.len() as u64)).clamp_unit()
    }

    pub fn classify(&self, v: &FeatureVector<T>) -> bool {
        self.predict(v) >= self.decision_threshold
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: SCHEMA_VERSION,
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            seed: self.seed,
            decision_threshold: self.decision_threshold,
            trees: self.trees.clone(),
        };
        let mut s = serde_json::to_string(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::json("model file", e))?;
        let version = raw.get("schema_version").and_then(|v| v.as_u64());
        match version {
            Some(SCHEMA_VERSION) => {}
            Some(found) => {
                return Err(Error::SchemaVersion {
                    found,
                    expected: SCHEMA_VERSION,
                })
            }
            None => return Err(Error::Validation("model file lacks schema_version".into())),
        }
        let file: ModelFile<T> = serde_json::from_value(raw).map_err(|e| Error::json("model file", e))?;
        if file.trees.len() != file.n_trees || file.n_trees == 0 {
            return Err(Error::Validation(format!(
                "model declares {} trees but holds {}",
                file.n_trees,
                file.trees.len()
            )));
        }
        let threshold = file.decision_threshold;
        if !(threshold > T::zero() && threshold < T::one()) {
            return Err(Error::Validation("decision_threshold outside (0,1)".into()));
        }
        for t in &file.trees {
            t.validate(file.max_depth)?;
        }
        Ok(ForestModel {
            trees: file.trees,
            n_trees: file.n_trees,
            max_depth: file.max_depth,
            seed: file.seed,
            decision_threshold: threshold,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::corpus::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A chosen split and its exact quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    quality: Quality,
}

/// `(p_l^2 + q_l^2) / n_l + (p_r^2 + q_r^2) / n_r` kept as an exact fraction.
/// Larger means lower weighted Gini impurity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Quality {
    num: u128,
    den: u128,
}

impl Quality {
    fn of_node(pos: u64, n: u64) -> Self {
        let neg = n - pos;
        Quality {
            num: u128::from(pos * pos + neg * neg),
            den: u128::from(n),
        }
    }

    fn of_split(pos_l: u64, n_l: u64, pos_r: u64, n_r: u64) -> Self {
        let a = Self::of_node(pos_l, n_l);
        let b = Self::of_node(pos_r, n_r);
        Quality {
            num: a.num * b.den + b.num * a.den,
            den: a.den * b.den,
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

/// Best Gini split over the given features, or `None` when every listed
/// feature is constant. Ties go to the earlier feature in `features`, then
/// the smaller threshold.
pub fn best_split<T: Scalar>(points: &[([T; 3], bool)], features: &[usize]) -> Option<Split<T>> {
    let n = points.len() as u64;
    let total_pos = points.iter().filter(|p| p.1).count() as u64;
    let mut best: Option<Split<T>> = None;
    let mut order: Vec<usize> = (0..points.len()).collect();
    for &f in features {
        order.sort_by(|&a, &b| points[a].0[f].partial_cmp(&points[b].0[f]).unwrap_or(Ordering::Equal));
        let mut n_l = 0u64;
        let mut pos_l = 0u64;
        for w in 0..order.len().saturating_sub(1) {
            let (x, label) = points[order[w]];
            n_l += 1;
            pos_l += u64::from(label);
            let next = points[order[w + 1]].0[f];
            if next <= x[f] {
                continue;
            }
            let quality = Quality::of_split(pos_l, n_l, total_pos - pos_l, n - n_l);
            let better = match &best {
                None => true,
                Some(b) => quality.cmp(&b.quality) == Ordering::Greater,
            };
            if better {
                best = Some(Split {
                    feature: f,
                    threshold: (x[f] + next) * T::half(),
                    quality,
                });
            }
        }
    }
    best
}

struct TreeBuilder<'a, T> {
    max_depth: usize,
    feature_rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> TreeBuilder<'_, T> {
    fn grow(&mut self, points: Vec<([T; 3], bool)>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = points.len() as u64;
        let pos = points.iter().filter(|p| p.1).count() as u64;
        let leaf = Node::Leaf { leaf: T::ratio(pos, n) };
        self.nodes.push(leaf);
        if depth >= self.max_depth || pos == 0 || pos == n {
            return id;
        }
        let mut features: Vec<usize> = (0..N_FEATURES)
            .collect::<Vec<_>>()
            .choose_multiple(self.feature_rng, FEATURES_PER_NODE)
            .copied()
            .collect();
        features.sort_unstable();
        // Drawn features that are all constant here do not end the node
        // while another feature can still separate it.
        let Some(split) = best_split(&points, &features).or_else(|| best_split(&points, &[0, 1, 2])) else {
            return id;
        };
        if split.quality.cmp(&Quality::of_node(pos, n)) != Ordering::Greater {
            return id;
        }
        let (l, r): (Vec<_>, Vec<_>) = points.into_iter().partition(|p| p.0[split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

fn tree_rngs(seed: u64, tree: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut sample = ChaCha8Rng::seed_from_u64(seed);
    sample.set_stream(2 * tree as u64);
    let mut features = ChaCha8Rng::seed_from_u64(seed);
    features.set_stream(2 * tree as u64 + 1);
    (sample, features)
}

/// Grow one unpruned-to-depth tree on exactly these points.
pub fn grow_tree<T: Scalar>(
    points: Vec<([T; 3], bool)>,
    max_depth: usize,
    feature_rng: &mut ChaCha8Rng,
) -> DecisionTree<T> {
    let mut b = TreeBuilder {
        max_depth,
        feature_rng,
        nodes: Vec::new(),
    };
    b.grow(points, 0);
    DecisionTree { nodes: b.nodes }
}

pub fn train_forest<T: Scalar>(data: &[TrainingPair<T>], params: &ForestParams) -> Result<ForestModel<T>> {
    params.validate()?;
    let positives = data.iter().filter(|p| p.label).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::Validation(
            "training data must contain both matching and non-matching pairs".into(),
        ));
    }
    let points: Vec<([T; 3], bool)> = data.iter().map(|p| (p.vector.as_array(), p.label)).collect();
    let trees: Vec<DecisionTree<T>> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let (mut sample_rng, mut feature_rng) = tree_rngs(params.seed, t);
            let sample: Vec<([T; 3], bool)> = (0..points.len())
                .map(|_| points[sample_rng.gen_range(0..points.len())])
                .collect();
            grow_tree(sample, params.max_depth, &mut feature_rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        seed: params.seed,
        decision_threshold: T::from_f64(params.decision_threshold),
    })
}

/// Training pairs from DOI matches: each preprint whose DOI resolves to a
/// unique published record yields one positive, plus up to `neg_per_pos`
/// negatives taken from its best-ranked other candidates.
pub fn bootstrap_training_set<T: Scalar>(
    store: &CorpusStore,
    index: &CandidateIndex,
    neg_per_pos: usize,
    seed: u64,
) -> Result<Vec<TrainingPair<T>>> {
    let pairs = doi_pairs(store);
    training_set_from_pairs(store, index, &pairs, neg_per_pos, seed)
}

/// As [`bootstrap_training_set`], restricted to the given
/// `(arxiv id, accession)` pairs.
pub fn training_set_from_pairs<T: Scalar>(
    store: &CorpusStore,
    index: &CandidateIndex,
    pairs: &[(String, String)],
    neg_per_pos: usize,
    seed: u64,
) -> Result<Vec<TrainingPair<T>>> {
    if neg_per_pos == 0 {
        return Err(Error::InvalidHyperparameter("neg_per_pos must be >= 1".into()));
    }
    if pairs.is_empty() {
        return Err(Error::NoTrainingSignal);
    }
    let mut out: Vec<TrainingPair<T>> = pairs
        .par_iter()
        .map(|(id, acc)| -> Result<Vec<TrainingPair<T>>> {
            let p = store.preprint(id).ok_or_else(|| Error::UnknownPreprint(id.clone()))?;
            let profile = RecordProfile::of_preprint(p);
            let matched = store
                .published_record(acc)
                .ok_or_else(|| Error::Integrity(format!("unknown accession {acc}")))?;
            let mut v = vec![TrainingPair::positive(
                profile.distance(&RecordProfile::of_published(matched)),
            )];
            for c in index
                .query_candidates(p, neg_per_pos + 1)
                .into_iter()
                .filter(|c| c.accession != *acc)
                .take(neg_per_pos)
            {
                let other = index.profile(&c.accession).expect("candidates come from the index");
                v.push(TrainingPair::negative(profile.distance(other)));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(out)
}
