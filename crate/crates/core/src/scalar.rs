//! Scalar abstraction for the numeric parts of the matcher.
//!
//! Distances, feature vectors and the forest are generic over [`Scalar`], so
//! the same code runs in `f64` (the default everywhere in the pipeline) or in
//! `f32` for compact models.

use std::fmt::{Debug, Display};

use num_traits::Float;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A real number usable as a distance, threshold or probability.
pub trait Scalar: Float + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static {
    /// `num / den`, with `0 / 0` defined as zero.
    #[inline]
    fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            return Self::zero();
        }
        Self::from_u64(num) / Self::from_u64(den)
    }

    #[inline]
    fn from_u64(v: u64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("u64 fits in a float")
    }

    #[inline]
    fn from_f64(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("f64 converts to scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    #[inline]
    fn half() -> Self {
        Self::from_f64(0.5)
    }

    /// Clamp into the closed unit interval.
    #[inline]
    fn clamp_unit(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
