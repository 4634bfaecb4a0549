//! Scalar abstraction for the numerical core.
//!
//! All math in this crate is written against [`Real`] so the same kernels
//! compile for `f32` and `f64`. The crate root exports `f64` aliases, which
//! are what the CLI and the test suites use.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn of(x: f64) -> Self;

    /// Conversion to `f64` (used by reports and CSV emission).
    fn to_f64x(self) -> f64;

    /// Conversion from an index.
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    fn half(self) -> Self {
        self * Self::of(0.5)
    }

    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Real for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64x(self) -> f64 {
        self
    }
}

impl Real for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64x(self) -> f64 {
        self as f64
    }
}

/// Numerically robust sum with a fixed pairwise reduction tree.
///
/// The tree depends only on the slice length, never on thread count, so
/// reductions built on it are bit-reproducible.
pub fn pairwise_sum<R: Real>(xs: &[R]) -> R {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut acc = R::zero();
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential_on_small_inputs() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let seq: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - seq).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_length_deterministic() {
        let xs: Vec<f64> = (0..1023).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
    }

    #[test]
    fn f32_lane_compiles_and_sums() {
        let xs: Vec<f32> = vec![0.5; 64];
        assert_eq!(pairwise_sum(&xs), 32.0_f32);
    }
}
