//! Linking preprint records to their published versions.
//!
//! Matching runs in two steps: a unique DOI hit wins outright; otherwise
//! candidates found by title/author blocking are scored as
//! `(title, author, abstract)` distance triples and a random forest decides
//! which of them match. Around that sit ingestion and persistence
//! ([`corpus`]), editorial scope rules ([`scope`]), author profiles
//! ([`authors`]), an evaluation harness ([`eval`]) and a synthetic corpus
//! generator ([`synth`]).
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix it
//! to `f64` (used throughout the pipeline) or `f32`.

pub mod authors;
pub mod candidates;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod forest;
pub mod matcher;
pub mod normalize;
pub mod scalar;
pub mod scope;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FeatureVector = similarity::FeatureVector<f64>;
pub type FeatureVectorF32 = similarity::FeatureVector<f32>;
pub type ForestModel = forest::ForestModel<f64>;
pub type ForestModelF32 = forest::ForestModel<f32>;
pub type DecisionTree = forest::DecisionTree<f64>;
pub type DecisionTreeF32 = forest::DecisionTree<f32>;
pub type TrainingPair = forest::TrainingPair<f64>;
pub type TrainingPairF32 = forest::TrainingPair<f32>;
