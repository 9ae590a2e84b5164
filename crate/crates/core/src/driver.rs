//! The online-learning-of-updates optimizer loop.
//!
//! Round `t = 1..T`:
//!
//! 1. the learner's current play `Δ_t` (a function of `g_{1:t−1}`) is the increment;
//! 2. `s_t` is drawn from `Unif[0,1]` (or fixed to 1 for convex objectives);
//! 3. `g_t = Grad(w_{t−1} + s_t Δ_t, z_t)`;
//! 4. `w_t = w_{t−1} + Δ_t`, then `g_t` is fed to the learner.
//!
//! Playing before observing makes `Σ ⟨g_t, Δ_t⟩` the learner's total loss in
//! the online game with losses `v_t := g_t`.

use serde::{Deserialize, Serialize};

use crate::error::{OluError, Result};
use crate::learners::{AlphaSchedule, LearnerConfig, VectorLearner};
use crate::rng::{SeededRng, STREAM_DATA, STREAM_QUERY};
use crate::scalar::{ratio_or_zero, Scalar};

/// A differentiable objective with a stochastic gradient oracle.
pub trait Objective<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, w: &[S]) -> S;

    /// Writes an unbiased estimate of `∇F(w)` into `out`, drawing any sample from `rng`.
    fn stochastic_grad(&self, w: &[S], rng: &mut SeededRng, out: &mut [S]);

    fn exact_grad(&self, _w: &[S]) -> Option<Vec<S>> {
        None
    }

    /// `∫₀¹ ∇F(w + sΔ) ds`, when available in closed form.
    fn averaged_grad(&self, _w: &[S], _delta: &[S]) -> Option<Vec<S>> {
        None
    }
}

/// `F(w) = ½ wᵀHw + bᵀw + c` with symmetric `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic<S> {
    dim: usize,
    /// Row-major `d × d`.
    hessian: Vec<S>,
    linear: Vec<S>,
    constant: S,
}

impl<S: Scalar> Quadratic<S> {
    pub fn new(hessian: Vec<Vec<S>>, linear: Vec<S>, constant: S) -> Result<Self> {
        let dim = linear.len();
        if dim == 0 || hessian.len() != dim || hessian.iter().any(|r| r.len() != dim) {
            return Err(OluError::config("hessian must be d x d with d = len(linear) > 0"));
        }
        for i in 0..dim {
            for j in 0..i {
                if hessian[i][j] != hessian[j][i] {
                    return Err(OluError::config("hessian must be symmetric"));
                }
            }
        }
        Ok(Self {
            dim,
            hessian: hessian.into_iter().flatten().collect(),
            linear,
            constant,
        })
    }

    /// `F(w) = ½‖w‖²`.
    pub fn isotropic(dim: usize) -> Self {
        let hessian = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { S::one() } else { S::zero() }).collect())
            .collect();
        Self::new(hessian, vec![S::zero(); dim], S::zero()).expect("valid identity")
    }

    /// `H = AᵀA/d` with `A` uniform on `[−1,1]`, `b` uniform on `[−1,1]`.
    pub fn random_psd(dim: usize, rng: &mut SeededRng) -> Self {
        let a: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
            .collect();
        let mut h = vec![vec![S::zero(); dim]; dim];
        for i in 0..dim {
            for j in 0..=i {
                let x: f64 = (0..dim).map(|k| a[k][i] * a[k][j]).sum::<f64>() / dim as f64;
                h[i][j] = S::lit(x);
                h[j][i] = S::lit(x);
            }
        }
        let b = (0..dim).map(|_| S::lit(rng.uniform_in(-1.0, 1.0))).collect();
        Self::new(h, b, S::zero()).expect("symmetric by construction")
    }

    fn hess_times(&self, x: &[S]) -> Vec<S> {
        self.hessian
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).fold(S::zero(), |acc, (&h, &v)| acc + h * v))
            .collect()
    }

    fn gradient(&self, w: &[S]) -> Vec<S> {
        self.hess_times(w).into_iter().zip(&self.linear).map(|(hw, &b)| hw + b).collect()
    }
}

impl<S: Scalar> Objective<S> for Quadratic<S> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, w: &[S]) -> S {
        let hw = self.hess_times(w);
        let half = S::lit(0.5);
        w.iter()
            .zip(&hw)
            .zip(&self.linear)
            .fold(self.constant, |acc, ((&x, &hx), &b)| acc + half * x * hx + b * x)
    }

    /// Noise-free: returns the exact gradient.
    fn stochastic_grad(&self, w: &[S], _rng: &mut SeededRng, out: &mut [S]) {
        out.copy_from_slice(&self.gradient(w));
    }

    fn exact_grad(&self, w: &[S]) -> Option<Vec<S>> {
        Some(self.gradient(w))
    }

    /// `∇F(w) + ½ H Δ`.
    fn averaged_grad(&self, w: &[S], delta: &[S]) -> Option<Vec<S>> {
        let half = S::lit(0.5);
        Some(
            self.gradient(w)
                .into_iter()
                .zip(self.hess_times(delta))
                .map(|(g, hd)| g + half * hd)
                .collect(),
        )
    }
}

/// How the query-point randomisation `s_t` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    Uniform,
    #[default]
    FixedOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recording {
    /// Full trajectory up to `FULL_RECORD_LIMIT` steps, streaming beyond.
    #[default]
    Auto,
    Full,
    /// Running sums and the current iterate only.
    Streaming,
}

/// Largest horizon recorded in full under [`Recording::Auto`].
pub const FULL_RECORD_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub query: QueryMode,
    pub recording: Recording,
    /// Evaluate `F(w_t)` every `k` steps (and at `t = 0`).
    pub eval_every: Option<usize>,
}

/// Record of an OLU run. In streaming mode the per-step vectors are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub dim: usize,
    pub horizon: usize,
    /// `w_0..w_T`
    pub iterates: Vec<Vec<S>>,
    /// `Δ_1..Δ_T`, `w_t = w_{t−1} + Δ_t`
    pub updates: Vec<Vec<S>>,
    /// `x_t = w_{t−1} + s_t Δ_t`
    pub queries: Vec<Vec<S>>,
    pub gradients: Vec<Vec<S>>,
    pub s: Vec<f64>,
    /// `(t, F(w_t))`
    pub values: Vec<(usize, S)>,
    pub total_loss: S,
    pub final_iterate: Vec<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn is_full(&self) -> bool {
        self.updates.len() == self.horizon
    }
}

/// `Σ_t ⟨g_t, Δ_t⟩`, where `Δ_t` is the play made before `g_t` was seen.
pub fn total_loss<S: Scalar>(trajectory: &Trajectory<S>) -> S {
    trajectory.total_loss
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Runs the OLU loop for `horizon` rounds from `w0`.
///
/// Data samples come from the `data` stream of `rng`'s seed and `s_t` from
/// the `query` stream, so learners sharing a seed see common random numbers.
pub fn run_olu<S: Scalar, O: Objective<S> + ?Sized>(
    objective: &O,
    learner: &LearnerConfig<S>,
    w0: &[S],
    horizon: usize,
    rng: &SeededRng,
    options: &RunOptions,
) -> Result<Trajectory<S>> {
    let dim = objective.dim();
    if w0.len() != dim {
        return Err(OluError::DimensionMismatch { expected: dim, got: w0.len() });
    }
    let mut vl = VectorLearner::new(learner, dim)?;
    run_with_learner(objective, &mut vl, w0, horizon, rng, options)
}

/// [`run_olu`] with a prebuilt (possibly heterogeneous) coordinate-wise learner.
pub fn run_with_learner<S: Scalar, O: Objective<S> + ?Sized>(
    objective: &O,
    learner: &mut VectorLearner<S>,
    w0: &[S],
    horizon: usize,
    rng: &SeededRng,
    options: &RunOptions,
) -> Result<Trajectory<S>> {
    run_observed(objective, learner, w0, horizon, rng, options, |_, _| {})
}

/// [`run_with_learner`], calling `observer(t, w_t)` after every step.
pub fn run_observed<S: Scalar, O: Objective<S> + ?Sized>(
    objective: &O,
    learner: &mut VectorLearner<S>,
    w0: &[S],
    horizon: usize,
    rng: &SeededRng,
    options: &RunOptions,
    mut observer: impl FnMut(usize, &[S]),
) -> Result<Trajectory<S>> {
    let dim = objective.dim();
    if learner.dim() != dim {
        return Err(OluError::DimensionMismatch { expected: dim, got: learner.dim() });
    }
    if w0.len() != dim {
        return Err(OluError::DimensionMismatch { expected: dim, got: w0.len() });
    }
    let full = match options.recording {
        Recording::Full => true,
        Recording::Streaming => false,
        Recording::Auto => horizon <= FULL_RECORD_LIMIT,
    };
    let mut data = rng.fork(STREAM_DATA);
    let mut query = rng.fork(STREAM_QUERY);

    let mut traj = Trajectory {
        dim,
        horizon,
        iterates: Vec::new(),
        updates: Vec::new(),
        queries: Vec::new(),
        gradients: Vec::new(),
        s: Vec::new(),
        values: Vec::new(),
        total_loss: S::zero(),
        final_iterate: Vec::new(),
    };
    let mut w = w0.to_vec();
    if full {
        traj.iterates.push(w.clone());
    }
    if options.eval_every.is_some() {
        traj.values.push((0, objective.value(&w)));
    }
    let mut delta = vec![S::zero(); dim];
    let mut x = vec![S::zero(); dim];
    let mut g = vec![S::zero(); dim];
    for t in 1..=horizon {
        learner.play_into(&mut delta);
        let s = match options.query {
            QueryMode::FixedOne => 1.0,
            QueryMode::Uniform => query.uniform(),
        };
        let s_scalar = S::lit(s);
        for ((xi, &wi), &di) in x.iter_mut().zip(&w).zip(&delta) {
            *xi = wi + s_scalar * di;
        }
        objective.stochastic_grad(&x, &mut data, &mut g);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(OluError::NonFinite { what: "gradient", index: t });
        }
        traj.total_loss = traj.total_loss + dot(&g, &delta);
        for (wi, &di) in w.iter_mut().zip(&delta) {
            *wi = *wi + di;
        }
        learner.step(&g)?;
        observer(t, &w);
        if full {
            traj.iterates.push(w.clone());
            traj.updates.push(delta.clone());
            traj.queries.push(x.clone());
            traj.gradients.push(g.clone());
            traj.s.push(s);
        }
        if let Some(k) = options.eval_every {
            if k > 0 && t % k == 0 {
                traj.values.push((t, objective.value(&w)));
            }
        }
    }
    traj.final_iterate = w;
    Ok(traj)
}

/// Direct evaluation of Adam without debiasing or ε, per coordinate:
/// `−α Σ β1^{t−s} g_s[i] / sqrt(Σ (β2^{t−s} g_s[i])²)`, `0/0 = 0`.
pub fn adam_reference_update<S: Scalar>(history: &[Vec<S>], alpha: S, beta1: S, beta2: S) -> Result<Vec<S>> {
    let t = history.len();
    let dim = history.first().map(Vec::len).ok_or_else(|| OluError::config("empty gradient history"))?;
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut num = S::zero();
        let mut den = S::zero();
        for (s, g) in history.iter().enumerate() {
            if g.len() != dim {
                return Err(OluError::DimensionMismatch { expected: dim, got: g.len() });
            }
            let age = (t - 1 - s) as i32;
            num = num + beta1.powi(age) * g[i];
            let d = beta2.powi(age) * g[i];
            den = den + d * d;
        }
        out.push(-alpha * ratio_or_zero(num, den.sqrt()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub steps: usize,
    pub dim: usize,
    /// `max |recurrence − direct| / (1 + |direct|)`
    pub max_deviation: f64,
}

/// Checks, for every `t` and coordinate, that the recurrence-based learner
/// matches [`adam_reference_update`] within `tol · (1 + |direct|)`.
pub fn verify_adam_equivalence<S: Scalar>(
    stream: &[Vec<S>],
    alpha: &AlphaSchedule<S>,
    beta1: S,
    beta2: S,
    tol: f64,
) -> Result<EquivalenceReport> {
    let dim = stream.first().map(Vec::len).ok_or_else(|| OluError::config("empty gradient stream"))?;
    let config = LearnerConfig::discounted(S::one(), beta1, beta2).with_schedule(alpha.clone());
    let mut learner = VectorLearner::new(&config, dim)?;
    let mut max_dev = 0.0_f64;
    for t in 1..=stream.len() {
        let plays = learner.step(&stream[t - 1])?;
        let direct = adam_reference_update(&stream[..t], alpha.at(t), beta1, beta2)?;
        for (i, (p, d)) in plays.iter().zip(&direct).enumerate() {
            let (p, d) = (p.as_f64(), d.as_f64());
            let dev = (p - d).abs() / (1.0 + d.abs());
            if !(dev <= tol) {
                return Err(OluError::CheckFailed(format!(
                    "Adam equivalence diverges at t={t}, coordinate {i}: recurrence {p}, direct {d}"
                )));
            }
            max_dev = max_dev.max(dev);
        }
    }
    Ok(EquivalenceReport {
        steps: stream.len(),
        dim,
        max_deviation: max_dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelescopingReport {
    pub horizon: usize,
    /// `F(w_T) − F(w_0)`
    pub lhs: f64,
    /// `Σ_t ⟨ḡ_t, Δ_t⟩`
    pub rhs: f64,
    pub relative_error: f64,
}

/// Runs OLU with exact averaged gradients `ḡ_t = ∫₀¹ ∇F(w_{t−1} + sΔ_t) ds`
/// from a start drawn uniformly on `[−1,1]^d`, and compares
/// `F(w_T) − F(w_0)` with `Σ ⟨ḡ_t, Δ_t⟩`.
pub fn verify_telescoping_identity<S: Scalar, O: Objective<S> + ?Sized>(
    objective: &O,
    learner: &LearnerConfig<S>,
    horizon: usize,
    rng: &mut SeededRng,
) -> Result<TelescopingReport> {
    let dim = objective.dim();
    let w0: Vec<S> = (0..dim).map(|_| S::lit(rng.uniform_in(-1.0, 1.0))).collect();
    let mut vl = VectorLearner::new(learner, dim)?;
    let mut w = w0.clone();
    let mut rhs = S::zero();
    let mut delta = vec![S::zero(); dim];
    for _ in 0..horizon {
        vl.play_into(&mut delta);
        let g = objective
            .averaged_grad(&w, &delta)
            .ok_or_else(|| OluError::Unsupported("objective has no closed-form averaged gradient".into()))?;
        rhs = rhs + dot(&g, &delta);
        for (wi, &di) in w.iter_mut().zip(&delta) {
            *wi = *wi + di;
        }
        vl.step(&g)?;
    }
    let lhs = (objective.value(&w) - objective.value(&w0)).as_f64();
    let rhs = rhs.as_f64();
    Ok(TelescopingReport {
        horizon,
        lhs,
        rhs,
        relative_error: crate::scalar::Tolerance::relative_deviation(lhs, rhs),
    })
}
