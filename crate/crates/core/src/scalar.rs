//! Scalar abstraction shared by every real-valued quantity in the crate.
//!
//! Artefact coordinates are integers; everything derived from them (distances,
//! constraint geometry, scores, learning rates) is computed in a [`Scalar`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable by the simulation: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossy conversion from an `f64` literal or sample.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    /// Conversion of a count or index.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count is representable in every Scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Clamp into `[lo, hi]`.
pub(crate) fn clamp<S: Scalar>(v: S, lo: S, hi: S) -> S {
    v.max(lo).min(hi)
}
