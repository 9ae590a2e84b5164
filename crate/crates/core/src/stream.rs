//! Loss and comparator sequences.

use crate::error::{OluError, Result};
use crate::scalar::Scalar;

/// `v_1..v_T`, each a `d`-vector of finite reals. Stored 0-based: `values[t-1] = v_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSequence<S> {
    values: Vec<Vec<S>>,
    dim: usize,
}

impl<S: Scalar> LossSequence<S> {
    pub fn new(values: Vec<Vec<S>>) -> Result<Self> {
        let dim = values.first().map(Vec::len).ok_or_else(|| OluError::config("empty loss sequence"))?;
        if dim == 0 {
            return Err(OluError::config("loss dimension must be positive"));
        }
        for (t, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(OluError::DimensionMismatch { expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(OluError::NonFinite { what: "loss", index: t + 1 });
            }
        }
        Ok(Self { values, dim })
    }

    /// One-dimensional sequence.
    pub fn scalar(values: &[S]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `v_t`, 1-based.
    pub fn at(&self, t: usize) -> &[S] {
        &self.values[t - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[S]> {
        self.values.iter().map(Vec::as_slice)
    }

    /// The stream of coordinate `i`.
    pub fn coordinate(&self, i: usize) -> Vec<S> {
        self.values.iter().map(|v| v[i]).collect()
    }

    pub fn scaled(&self, k: S) -> Self {
        Self {
            values: self.values.iter().map(|v| v.iter().map(|&x| x * k).collect()).collect(),
            dim: self.dim,
        }
    }

    pub fn into_inner(self) -> Vec<Vec<S>> {
        self.values
    }
}

/// `u_0..u_{T-1}` with an optional sup-norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorSequence<S> {
    values: Vec<Vec<S>>,
    bound: Option<S>,
}

impl<S: Scalar> ComparatorSequence<S> {
    pub fn new(values: Vec<Vec<S>>, bound: Option<S>) -> Result<Self> {
        let dim = values.first().map(Vec::len).unwrap_or(0);
        for (t, u) in values.iter().enumerate() {
            if u.len() != dim {
                return Err(OluError::DimensionMismatch { expected: dim, got: u.len() });
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(OluError::NonFinite { what: "comparator", index: t });
            }
        }
        if let Some(b) = bound {
            if b < S::zero() {
                return Err(OluError::config("comparator bound must be nonnegative"));
            }
            if let Some(t) = values.iter().position(|u| u.iter().any(|x| x.abs() > b)) {
                return Err(OluError::config(format!("comparator u_{t} exceeds bound")));
            }
        }
        Ok(Self { values, bound })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bound(&self) -> Option<S> {
        self.bound
    }

    /// `u_t`, 0-based as in the comparator's own indexing.
    pub fn at(&self, t: usize) -> &[S] {
        &self.values[t]
    }

    pub fn coordinate(&self, i: usize) -> Vec<S> {
        self.values.iter().map(|u| u[i]).collect()
    }

    /// Coordinate-wise path length `Σ_{t≥1} |u_t[i] − u_{t−1}[i]|`.
    pub fn path_length(&self, i: usize) -> S {
        self.values
            .windows(2)
            .fold(S::zero(), |acc, w| acc + (w[1][i] - w[0][i]).abs())
    }

    /// Checks the length against a loss sequence.
    pub fn aligned_with(&self, losses: &LossSequence<S>) -> Result<()> {
        if self.len() != losses.horizon() {
            return Err(OluError::Misaligned(format!(
                "{} comparators for horizon {}",
                self.len(),
                losses.horizon()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(LossSequence::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(LossSequence::new(vec![vec![f64::NAN]]).is_err());
        assert!(LossSequence::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn comparator_bound_enforced() {
        assert!(ComparatorSequence::new(vec![vec![2.0]], Some(1.0)).is_err());
        let c = ComparatorSequence::new(vec![vec![-1.0], vec![1.0], vec![1.0]], Some(1.0)).unwrap();
        assert_eq!(c.path_length(0), 2.0);
    }
}
