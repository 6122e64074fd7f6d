//! Scalar abstraction shared by every model type.
//!
//! All arithmetic in the crate is written against [`Real`], so the models
//! run on `f32` or `f64`. Reliability products and bounds are carried in
//! log space, which keeps `f64` results accurate for graphs with hundreds of
//! tasks; `f32` is usable for small instances.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar used throughout the models.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute slack used when comparing accumulated log-reliabilities.
    ///
    /// `1e-12` for `f64`; a few hundred ulps for narrower types.
    #[inline]
    fn log_slack() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `1 - exp(log_r)` without cancellation: the failure probability of an
/// event whose success probability has natural log `log_r`.
#[inline]
pub fn failure_from_log<T: Real>(log_r: T) -> T {
    -log_r.exp_m1()
}

/// `ln(1 - q)` for a failure probability `q`.
#[inline]
pub fn log_success_from_failure<T: Real>(q: T) -> T {
    (-q).ln_1p()
}
