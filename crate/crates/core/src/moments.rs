//! Discounted first and second moments of a scalar stream.
//!
//! After `t` pushes of `g_1..g_t`:
//!
//! ```text
//! m_t = Σ_{s≤t} β1^{t−s} g_s          (m ← β1·m + g)
//! q_t = Σ_{s≤t} (β2^{t−s} g_s)²       (q ← β2²·q + g²)
//! ```
//!
//! The sums are only ever carried by these recurrences. Rescaling the
//! losses by `β^{-t}` instead overflows `f64` after a few thousand steps.

use crate::error::{OluError, Result};
use crate::scalar::{ratio_or_zero, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountedMoments<S> {
    m: S,
    q: S,
    t: usize,
    beta1: S,
    beta2: S,
}

pub(crate) fn check_discount<S: Scalar>(name: &str, beta: S) -> Result<()> {
    if !(beta > S::zero() && beta <= S::one()) {
        return Err(OluError::config(format!("{name} must lie in (0, 1], got {beta:?}")));
    }
    Ok(())
}

impl<S: Scalar> DiscountedMoments<S> {
    pub fn new(beta1: S, beta2: S) -> Result<Self> {
        check_discount("beta1", beta1)?;
        check_discount("beta2", beta2)?;
        Ok(Self {
            m: S::zero(),
            q: S::zero(),
            t: 0,
            beta1,
            beta2,
        })
    }

    /// Undiscounted sums (`β1 = β2 = 1`).
    pub fn undiscounted() -> Self {
        Self::new(S::one(), S::one()).expect("unit discounts are valid")
    }

    /// Folds in one observation.
    pub fn push(&mut self, g: S) -> Result<()> {
        if !g.is_finite() {
            return Err(OluError::NonFinite { what: "gradient", index: self.t + 1 });
        }
        self.m = self.beta1 * self.m + g;
        self.q = self.beta2 * self.beta2 * self.q + g * g;
        self.t += 1;
        Ok(())
    }

    /// Value-style update: returns the state after folding in `g`.
    pub fn updated(mut self, g: S) -> Result<Self> {
        self.push(g)?;
        Ok(self)
    }

    pub fn first(&self) -> S {
        self.m
    }

    pub fn second(&self) -> S {
        self.q
    }

    pub fn steps(&self) -> usize {
        self.t
    }

    pub fn beta1(&self) -> S {
        self.beta1
    }

    pub fn beta2(&self) -> S {
        self.beta2
    }

    /// `m / sqrt(q)`, zero when `q = 0`.
    pub fn normalized(&self) -> S {
        ratio_or_zero(self.m, self.q.sqrt())
    }
}

fn check_index(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(OluError::OutOfRange { what: "t", value: t, lo: 1, hi: horizon });
    }
    Ok(())
}

/// `V_β(v_{1:t}) = Σ_{s≤t} (β^{t−s} v_s)²`.
pub fn discounted_variance<S: Scalar>(v: &[S], beta: S, t: usize) -> Result<S> {
    check_discount("beta", beta)?;
    check_index(t, v.len())?;
    Ok(v[..t].iter().fold(S::zero(), |q, &x| beta * beta * q + x * x))
}

/// `Σ_{s≤t} β^{t−s} v_s`.
pub fn discounted_sum<S: Scalar>(v: &[S], beta: S, t: usize) -> Result<S> {
    check_discount("beta", beta)?;
    check_index(t, v.len())?;
    Ok(v[..t].iter().fold(S::zero(), |m, &x| beta * m + x))
}

/// All prefixes `V_β(v_{1:t})`, `t = 1..=T`.
pub fn discounted_variance_prefixes<S: Scalar>(v: &[S], beta: S) -> Vec<S> {
    let b2 = beta * beta;
    v.iter()
        .scan(S::zero(), |q, &x| {
            *q = b2 * *q + x * x;
            Some(*q)
        })
        .collect()
}

/// `M = max_{t≤T} |Σ β^{t−s} v_s| / sqrt(V_β(v_{1:t}))`, with `0/0 = 0`.
pub fn m_ratio<S: Scalar>(v: &[S], beta: S, horizon: usize) -> Result<S> {
    check_discount("beta", beta)?;
    check_index(horizon, v.len())?;
    let mut moments = DiscountedMoments::new(beta, beta)?;
    let mut best = S::zero();
    for &x in &v[..horizon] {
        moments.push(x)?;
        best = best.max(moments.normalized().abs());
    }
    Ok(best)
}

/// Cauchy–Schwarz ceiling on `|m_t| / sqrt(q_t)` for discounts `β1 ≤ β2`,
/// with `r = β1/β2`: `sqrt(Σ_{k<T} r^{2k})`.
///
/// With equal discounts (`r = 1`, which covers [`m_ratio`]) this is
/// `sqrt(T)` whatever the discount; a horizon-free cap `sqrt(1/(1−r²))`
/// needs `β1 < β2`.
pub fn m_ratio_ceiling<S: Scalar>(ratio: S, horizon: usize) -> S {
    if ratio == S::one() {
        S::from_usize_lossy(horizon).sqrt()
    } else {
        let r2 = ratio * ratio;
        ((S::one() - r2.powi(horizon as i32)) / (S::one() - r2)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_identity_discount() {
        let s = DiscountedMoments::<f64>::undiscounted().updated(1.0).unwrap();
        assert_eq!((s.first(), s.second(), s.steps()), (1.0, 1.0, 1));
    }

    #[test]
    fn two_steps_with_discounts() {
        let s = DiscountedMoments::<f64>::new(0.9, 0.99)
            .unwrap()
            .updated(1.0)
            .unwrap()
            .updated(1.0)
            .unwrap();
        assert!((s.first() - 1.9).abs() < 1e-15);
        assert!((s.second() - 1.9801).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_with_unit_discounts_is_noop() {
        let mut s = DiscountedMoments::<f64>::undiscounted();
        for g in [1.0, 2.0, 2.0] {
            s.push(g).unwrap();
        }
        // m = 5, q = 9; push a zero
        let before = (s.first(), s.second());
        s.push(0.0).unwrap();
        assert_eq!(before, (s.first(), s.second()));
    }

    #[test]
    fn rejects_nonfinite_and_bad_discounts() {
        let mut s = DiscountedMoments::<f64>::undiscounted();
        assert!(matches!(s.push(f64::INFINITY), Err(OluError::NonFinite { .. })));
        assert!(DiscountedMoments::new(0.0_f64, 0.5).is_err());
        assert!(DiscountedMoments::new(0.5_f64, 1.5).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_eq!(discounted_variance(&[2.0_f64], 1.0, 1).unwrap(), 4.0);
        assert_eq!(discounted_variance(&[1.0_f64, 1.0], 0.5, 2).unwrap(), 1.25);
        assert!(discounted_variance(&[1.0_f64], 0.5, 2).is_err());
        assert!(discounted_variance(&[1.0_f64], 0.5, 0).is_err());
    }

    #[test]
    fn m_ratio_examples() {
        assert_eq!(m_ratio(&[1.0_f64], 0.3, 1).unwrap(), 1.0);
        assert_eq!(m_ratio(&[0.0_f64; 3], 0.9, 3).unwrap(), 0.0);
        let alt: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(m_ratio(&alt, 1.0, 100).unwrap(), 1.0);
    }

    #[test]
    fn ceiling_matches_limits() {
        assert_eq!(m_ratio_ceiling(1.0_f64, 16), 4.0);
        // Equal discounts: [1, 1] at β = 0.3 already exceeds sqrt(1/(1−β²)).
        let r = m_ratio(&[1.0_f64, 1.0], 0.3, 2).unwrap();
        assert!(r > (1.0 / (1.0 - 0.09_f64)).sqrt() && r <= m_ratio_ceiling(1.0, 2));
        let c: f64 = m_ratio_ceiling(0.9, 10_000);
        assert!((c - (1.0 / (1.0 - 0.81_f64)).sqrt()).abs() < 1e-12);
    }
}
