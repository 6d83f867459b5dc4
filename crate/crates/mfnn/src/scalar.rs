//! Floating-point element abstraction.
//!
//! The whole network stack is generic over [`Scalar`] with exactly two
//! instantiations: `f64` for verification work (gradient checks, the
//! analysis tolerances) and `f32` for training and inference speed. A
//! process picks one width per run and never mixes them.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A floating-point element type the network can run on.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + std::iter::Sum
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Short name used in reports and manifests ("f32" or "f64").
    const NAME: &'static str;

    fn of_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
    fn of_f32(v: f32) -> Self;
    fn as_f32(self) -> f32;

    /// Uniform draw in `[lo, hi)` performed at this type's native width.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Self;

    /// Standard normal draw performed at this type's native width.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    #[inline(always)]
    fn of_f64(v: f64) -> Self {
        v as f32
    }
    #[inline(always)]
    fn as_f64(self) -> f64 {
        self as f64
    }
    #[inline(always)]
    fn of_f32(v: f32) -> Self {
        v
    }
    #[inline(always)]
    fn as_f32(self) -> f32 {
        self
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Self {
        rng.random_range(lo as f32..hi as f32)
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    #[inline(always)]
    fn of_f64(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn as_f64(self) -> f64 {
        self
    }
    #[inline(always)]
    fn of_f32(v: f32) -> Self {
        v as f64
    }
    #[inline(always)]
    fn as_f32(self) -> f32 {
        self as f32
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Self {
        rng.random_range(lo..hi)
    }

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}
