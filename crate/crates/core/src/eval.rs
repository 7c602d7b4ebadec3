//! Held-out evaluation of the classifier step against DOI-established pairs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::CandidateIndex;
use crate::corpus::CorpusStore;
use crate::error::{Error, Result};
use crate::forest::{train_forest, training_set_from_pairs, ForestParams};
use crate::matcher::{doi_pairs, match_by_classifier};

pub const MIN_EVAL_PAIRS: usize = 200;
pub const HOLDOUT_SHARE_DEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalSplit {
    pub train: Vec<(String, String)>,
    pub holdout: Vec<(String, String)>,
}

/// Seeded 80/20 split of `(arxiv id, accession)` pairs. The holdout gets
/// `len / 5` pairs.
pub fn split_pairs(pairs: &[(String, String)], seed: u64) -> EvalSplit {
    let mut shuffled = pairs.to_vec();
    shuffled.sort();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let holdout = shuffled.split_off(shuffled.len() - shuffled.len() / HOLDOUT_SHARE_DEN);
    let mut train = shuffled;
    let mut holdout = holdout;
    train.sort();
    holdout.sort();
    EvalSplit { train, holdout }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub seed: u64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub neg_per_pos: usize,
    pub candidates_k: usize,
}

impl EvalConfig {
    pub fn with_seed(seed: u64) -> Self {
        let p = ForestParams::default();
        EvalConfig {
            seed,
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            neg_per_pos: 3,
            candidates_k: crate::candidates::DEFAULT_CANDIDATES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// 1.0 when the classifier proposes nothing.
    pub precision: f64,
    pub recall: f64,
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub holdout_size: u64,
    pub train_pairs: u64,
    pub seed: u64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub neg_per_pos: usize,
    pub candidates_k: usize,
}

/// Train on 80% of the DOI pairs, then ask the classifier step alone to
/// recover the other 20%. A holdout preprint scores a true positive when
/// its proposed accession is the DOI one, a false positive when it is some
/// other record, and a false negative whenever it is not the DOI one.
pub fn evaluate(store: &CorpusStore, index: &CandidateIndex, config: &EvalConfig) -> Result<(EvalReport, EvalSplit)> {
    let pairs = doi_pairs(store);
    if pairs.len() < MIN_EVAL_PAIRS {
        return Err(Error::TooFewPairs {
            found: pairs.len(),
            required: MIN_EVAL_PAIRS,
        });
    }
    let split = split_pairs(&pairs, config.seed);
    let params = ForestParams {
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        seed: config.seed,
        ..ForestParams::default()
    };
    params.validate()?;
    let data = training_set_from_pairs::<f64>(store, index, &split.train, config.neg_per_pos, config.seed)?;
    let model = train_forest(&data, &params)?;

    let outcomes: Vec<Option<bool>> = split
        .holdout
        .par_iter()
        .map(|(id, acc)| {
            let p = store.preprint(id).ok_or_else(|| Error::UnknownPreprint(id.clone()))?;
            // The classifier step never looks at the DOI.
            Ok(match_by_classifier(p, store, index, &model, config.candidates_k).map(|(got, _)| got == *acc))
        })
        .collect::<Result<_>>()?;

    let tp = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
    let fp = outcomes.iter().filter(|o| **o == Some(false)).count() as u64;
    let n = split.holdout.len() as u64;
    let report = EvalReport {
        precision: if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        },
        recall: tp as f64 / n as f64,
        true_positive: tp,
        false_positive: fp,
        false_negative: n - tp,
        holdout_size: n,
        train_pairs: split.train.len() as u64,
        seed: config.seed,
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        neg_per_pos: config.neg_per_pos,
        candidates_k: config.candidates_k,
    };
    Ok((report, split))
}
