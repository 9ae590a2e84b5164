use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the numeric code is generic over.
///
/// Anything implementing [`num_traits::Float`] plus lossless-enough
/// conversions qualifies: `f32`, `f64`, and double-double types.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal. Panics only if the type cannot hold it,
    /// which does not happen for the shipped scalar types.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static {}

/// `num / den` with the convention `0/0 = 0` (and `x/0 = 0`), which is the
/// output rule of every FTRL update here.
#[inline]
pub fn ratio_or_zero<S: Scalar>(num: S, den: S) -> S {
    if den > S::zero() {
        num / den
    } else {
        S::zero()
    }
}

/// Radial projection onto `[-bound, bound]`: `x·min(bound/|x|, 1)`, with `clip(0) = 0`.
#[inline]
pub fn clip<S: Scalar>(x: S, bound: S) -> S {
    let a = x.abs();
    if a <= bound {
        x
    } else {
        x * (bound / a)
    }
}

/// Relative tolerance with an absolute floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    pub const fn rel(rel: f64) -> Self {
        Self { rel, abs: 1e-12 }
    }

    /// `|a - b| <= max(abs, rel * max(|a|, |b|))`
    pub fn close(&self, a: f64, b: f64) -> bool {
        if a == b {
            return true;
        }
        let scale = a.abs().max(b.abs());
        (a - b).abs() <= self.abs.max(self.rel * scale)
    }

    /// The deviation of `a` from `b` in units of this tolerance's scale.
    pub fn relative_deviation(a: f64, b: f64) -> f64 {
        let diff = (a - b).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_matches_radial_projection() {
        assert_eq!(clip(0.0_f64, 1.0), 0.0);
        assert_eq!(clip(0.5_f64, 1.0), 0.5);
        assert_eq!(clip(-2.0_f64, 1.0), -1.0);
        assert_eq!(clip(3.0_f32, 2.0), 2.0);
    }

    #[test]
    fn zero_denominator_gives_zero() {
        assert_eq!(ratio_or_zero(0.0_f64, 0.0), 0.0);
        assert_eq!(ratio_or_zero(1.0_f64, 0.0), 0.0);
        assert_eq!(ratio_or_zero(1.0_f64, 2.0), 0.5);
    }

    #[test]
    fn tolerance_has_absolute_floor() {
        let tol = Tolerance::default();
        assert!(tol.close(0.0, 1e-13));
        assert!(!tol.close(0.0, 1e-11));
        assert!(tol.close(1e6, 1e6 * (1.0 + 1e-10)));
    }
}
