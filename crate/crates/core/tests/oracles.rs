//! Independent reference computations compared against the library.
//!
//! Every oracle here is written from the defining sums, not from the
//! recurrences the library uses.

use olu::adversarial::make_lower_bound;
use olu::bench::{hinge_subgrad, Dataset, Setting};
use olu::driver::{adam_reference_update, run_olu, Quadratic, QueryMode, Recording, RunOptions};
use olu::learners::play_stream;
use olu::moments::{discounted_sum, discounted_variance};
use olu::regret::{conversion_terms, subinterval_identity};
use olu::{LearnerConfig, Partition, RegretLedger, SeededRng};
use twofloat::TwoFloat;

fn random_stream(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// `a / b` with one residual correction; twofloat's own quotient is only
/// accurate to about one double ulp.
fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b;
    q + (a - q * b) / b
}

/// Discounted FTRL evaluated literally on the scaled losses
/// `ṽ_s = β1^{−s} g_s` with step `η_t = α (β1/β2)^t / sqrt(Σ_{s≤t} (β2^{−s} g_s)²)`,
/// in double-double arithmetic. Returns `Δ_1..Δ_T`.
fn literal_scaled_ftrl(g: &[f64], alpha: f64, beta1: f64, beta2: f64) -> Vec<TwoFloat> {
    let (inv1, inv2) = (div(tf(1.0), tf(beta1)), div(tf(1.0), tf(beta2)));
    let ratio = div(tf(beta1), tf(beta2));
    let (mut p1, mut p2, mut pr) = (tf(1.0), tf(1.0), tf(1.0));
    let (mut sum_scaled, mut sum_sq) = (tf(0.0), tf(0.0));
    let mut out = Vec::with_capacity(g.len());
    for &gs in g {
        p1 = p1 * inv1;
        p2 = p2 * inv2;
        pr = pr * ratio;
        sum_scaled = sum_scaled + p1 * tf(gs);
        let w = p2 * tf(gs);
        sum_sq = sum_sq + w * w;
        if sum_sq == tf(0.0) {
            out.push(tf(0.0));
            continue;
        }
        let eta = div(tf(alpha) * pr, sum_sq.sqrt());
        out.push(-(eta * sum_scaled));
    }
    out
}

#[test]
fn literal_scaled_loss_ftrl_matches_recurrences() {
    let mut rng = SeededRng::new(11, "literal");
    for &beta in &[0.5, 0.9, 0.99] {
        for _ in 0..10 {
            let g = random_stream(&mut rng, 500);
            let cfg = LearnerConfig::discounted(1.0, beta, beta);
            let plays = play_stream(&cfg, &g).unwrap();
            let oracle = literal_scaled_ftrl(&g, 1.0, beta, beta);
            for t in 1..=500 {
                let o: f64 = oracle[t - 1].into();
                assert!(close(plays[t], o, 1e-8), "beta={beta} t={t}: {} vs {o}", plays[t]);
            }
        }
    }
}

#[test]
fn literal_oracle_with_distinct_discounts() {
    // β1 ≤ β2 keeps (β1/β2)^t and the scaled sums inside double range for t ≤ 500.
    let mut rng = SeededRng::new(12, "literal");
    for &(b1, b2) in &[(0.9, 0.99), (0.5, 0.9), (0.9, 0.999)] {
        let g = random_stream(&mut rng, 500);
        let plays = play_stream(&LearnerConfig::discounted(0.3, b1, b2), &g).unwrap();
        let oracle = literal_scaled_ftrl(&g, 0.3, b1, b2);
        for t in 1..=500 {
            let o: f64 = oracle[t - 1].into();
            assert!(close(plays[t], o, 1e-8), "({b1},{b2}) t={t}");
        }
    }
}

/// The generic learner instantiated at a double-double scalar. Its divisions
/// go through twofloat's quotient, so agreement is near double precision
/// rather than double-double.
#[test]
fn learner_runs_in_double_double() {
    let mut rng = SeededRng::new(13, "tf");
    let g = random_stream(&mut rng, 300);
    let gt: Vec<TwoFloat> = g.iter().map(|&x| tf(x)).collect();
    let cfg = LearnerConfig::discounted(tf(1.0), tf(0.9), tf(0.9));
    let plays = play_stream(&cfg, &gt).unwrap();
    let oracle = literal_scaled_ftrl(&g, 1.0, 0.9, 0.9);
    for t in 1..=300 {
        let d: f64 = (plays[t] - oracle[t - 1]).into();
        let scale: f64 = oracle[t - 1].into();
        assert!(d.abs() <= 1e-14 * scale.abs().max(1.0), "t={t}: {:?} vs {:?}", plays[t], oracle[t - 1]);
    }
}

#[test]
fn moments_match_explicit_power_sums() {
    let mut rng = SeededRng::new(14, "moments");
    let v = random_stream(&mut rng, 200);
    for &beta in &[0.5_f64, 0.9, 0.999, 1.0] {
        for t in [1, 2, 17, 200] {
            let brute_sum: f64 = (1..=t).map(|s| beta.powi((t - s) as i32) * v[s - 1]).sum();
            let brute_var: f64 = (1..=t).map(|s| (beta.powi((t - s) as i32) * v[s - 1]).powi(2)).sum();
            assert!(close(discounted_sum(&v, beta, t).unwrap(), brute_sum, 1e-12) || brute_sum.abs() < 1e-12);
            assert!(close(discounted_variance(&v, beta, t).unwrap(), brute_var, 1e-12));
        }
    }
}

#[test]
fn regret_matches_direct_sums() {
    let mut rng = SeededRng::new(15, "regret");
    for _ in 0..20 {
        let v = random_stream(&mut rng, 60);
        let u: Vec<f64> = random_stream(&mut rng, 60);
        let ledger = RegretLedger::from_learner(&LearnerConfig::scale_free(0.7), v.clone(), u.clone()).unwrap();
        let plays = play_stream(&LearnerConfig::scale_free(0.7), &v).unwrap();
        let dynamic: f64 = (0..60).map(|k| v[k] * (plays[k] - u[k])).sum();
        assert!(close(ledger.dynamic_regret(), dynamic, 1e-12));
        let beta: f64 = 0.8;
        let c = 0.3;
        for t in [1, 30, 60] {
            let direct: f64 = (1..=t).map(|s| beta.powi((t - s) as i32) * v[s - 1] * (plays[s - 1] - c)).sum();
            assert!(close(ledger.discounted_regret(c, beta, t).unwrap(), direct, 1e-12));
        }
    }
}

#[test]
fn regret_worked_examples() {
    let l = RegretLedger::new(vec![1.0], vec![0.0], vec![-1.0]).unwrap();
    assert_eq!(l.dynamic_regret(), 1.0);
    let l = RegretLedger::new(vec![1.0, 1.0], vec![0.0, -1.0], vec![0.0, 0.0]).unwrap();
    assert_eq!(l.discounted_regret(0.0, 0.5, 2).unwrap(), -1.0);
    let l = RegretLedger::new(vec![0.3, -2.0, 1.5], vec![0.1, 0.2, -0.4], vec![0.1, 0.2, -0.4]).unwrap();
    assert_eq!(l.dynamic_regret(), 0.0);
    assert!(RegretLedger::new(vec![1.0], vec![], vec![0.0]).is_err());
    assert!(l.discounted_regret(0.0, 0.5, 4).is_err());
}

/// `R_{t;β}(u)` from its definition.
fn discounted_direct(v: &[f64], d: &[f64], u: f64, beta: f64, t: usize) -> f64 {
    (1..=t).map(|s| beta.powi((t - s) as i32) * v[s - 1] * (d[s - 1] - u)).sum()
}

#[test]
fn conversion_terms_match_definitions() {
    let mut rng = SeededRng::new(16, "conv");
    for _ in 0..30 {
        let n = 40;
        let v = random_stream(&mut rng, n);
        let d = random_stream(&mut rng, n);
        let u = random_stream(&mut rng, n);
        let beta = rng.uniform_in(0.5, 1.0);
        let ledger = RegretLedger::new(v.clone(), d.clone(), u.clone()).unwrap();
        let part = Partition::<f64>::random(n, 0.125, 1.0, &mut rng).unwrap();
        let terms = conversion_terms(&ledger, &part, beta).unwrap();
        let reps = part.reps();
        let iv = part.intervals();
        let last = *reps.last().unwrap();
        assert!(close(terms.final_discounted, beta * discounted_direct(&v, &d, last, beta, n), 1e-10));
        let agg: f64 = iv
            .iter()
            .zip(reps)
            .map(|(&(a, b), &r)| (a..=b).map(|t| discounted_direct(&v, &d, r, beta, t)).sum::<f64>())
            .sum();
        assert!(close(terms.aggregated_discounted, (1.0 - beta) * agg, 1e-9) || agg.abs() < 1e-12);
        let inter: f64 = (0..iv.len() - 1)
            .map(|i| {
                let b = iv[i].1;
                let s: f64 = (1..=b).map(|t| beta.powi((b - t) as i32) * v[t - 1]).sum();
                s * (reps[i + 1] - reps[i])
            })
            .sum();
        assert!((terms.inter_partition - beta * inter).abs() <= 1e-10 * (1.0 + inter.abs()));
        let intra: f64 =
            iv.iter().zip(reps).map(|(&(a, b), &r)| (a..=b).map(|t| v[t - 1] * (r - u[t - 1])).sum::<f64>()).sum();
        assert!((terms.intra_partition - intra).abs() <= 1e-12 * (1.0 + intra.abs()));
        assert!((terms.total() - ledger.dynamic_regret()).abs() <= 1e-9 * (1.0 + ledger.dynamic_regret().abs()));
    }
}

#[test]
fn conversion_degenerate_cases() {
    let mut rng = SeededRng::new(17, "conv");
    let v = random_stream(&mut rng, 25);
    let d = random_stream(&mut rng, 25);
    let u = vec![0.4; 25];
    let ledger = RegretLedger::new(v.clone(), d.clone(), u.clone()).unwrap();
    let whole = Partition::whole(25, 0.4).unwrap();
    let rhs = olu::regret::conversion_rhs(&ledger, &whole, 1.0).unwrap();
    assert!(close(rhs, ledger.static_regret(0.4), 1e-12));
    let single = Partition::singletons(u.clone()).unwrap();
    assert_eq!(conversion_terms(&ledger, &single, 0.9).unwrap().intra_partition, 0.0);
}

#[test]
fn subinterval_identity_from_scratch() {
    let mut rng = SeededRng::new(18, "sub");
    let v = random_stream(&mut rng, 50);
    let d = random_stream(&mut rng, 50);
    let ledger = RegretLedger::new(v.clone(), d.clone(), vec![0.0; 50]).unwrap();
    for &(a, b) in &[(1, 1), (1, 50), (7, 19), (50, 50)] {
        let (lhs, rhs) = subinterval_identity(&ledger, a, b, 0.25, 0.9).unwrap();
        let direct: f64 = (a..=b).map(|t| v[t - 1] * (d[t - 1] - 0.25)).sum();
        assert!(close(lhs, direct, 1e-12));
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn olu_adam_updates_match_direct_formula() {
    let mut rng = SeededRng::new(19, "olu");
    let f = Quadratic::<f64>::random_psd(4, &mut rng);
    let opts = RunOptions { query: QueryMode::Uniform, recording: Recording::Full, eval_every: None };
    let tr = run_olu(&f, &LearnerConfig::discounted(0.05, 0.9, 0.99), &[0.5; 4], 80, &rng, &opts).unwrap();
    for t in 2..=80 {
        let direct = adam_reference_update(&tr.gradients[..t - 1], 0.05, 0.9, 0.99).unwrap();
        for i in 0..4 {
            assert!((tr.updates[t - 1][i] - direct[i]).abs() <= 1e-12 * (1.0 + direct[i].abs()));
        }
    }
    assert!(tr.updates[0].iter().all(|&x| x == 0.0));
    // Total loss is the inner product of each gradient with the increment played before it.
    let tl: f64 = tr.gradients.iter().zip(&tr.updates).map(|(g, d)| g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>()).sum();
    assert!(close(tr.total_loss, tl, 1e-12));
}

#[test]
fn lower_bound_matches_written_out_table() {
    for horizon in [4usize, 5, 8, 13, 16, 100, 1023] {
        let inst = make_lower_bound::<f64>(horizon).unwrap();
        let t_hat = horizon / 4 * 4;
        for t in 1..=horizon {
            let expected = if t > t_hat {
                [0.0, 0.0]
            } else {
                let s = if 2 * t <= t_hat { 1.0 } else { -1.0 };
                if t % 2 == 0 {
                    [s, 0.0]
                } else {
                    [0.0, s]
                }
            };
            assert_eq!(inst.losses.at(t), &expected, "T={horizon} t={t}");
            let u = if t - 1 < t_hat / 2 { -1.0 } else { 1.0 };
            assert_eq!(inst.comparators.at(t - 1), &[u, u]);
        }
        assert_eq!(inst.comparator_loss(), -(t_hat as f64));
    }
}

#[test]
fn sgd_step_ledger_on_unit_classification() {
    // Coordinate i moves by exactly η(1−λ) each time it is sampled while below 1.
    let data = Dataset::build(Setting::Unit, 10, 0.25, 3).unwrap();
    let eta = 0.01;
    let opts = RunOptions { recording: Recording::Full, ..RunOptions::default() };
    let tr = run_olu(&data, &LearnerConfig::sgd(eta), &[0.0; 10], 400, &SeededRng::new(3, "classify"), &opts).unwrap();
    let mut hits = [0usize; 10];
    for t in 1..=400 {
        // The increment applied at step t is −η g_{t−1}.
        let w = &tr.iterates[t];
        for i in 0..10 {
            let expected = eta * (1.0 - 0.25) * hits[i] as f64;
            assert!((w[i] - expected).abs() < 1e-12, "t={t} i={i}");
        }
        let g = &tr.gradients[t - 1];
        let support: Vec<usize> = (0..10).filter(|&i| g[i] != 0.0).collect();
        assert_eq!(support.len(), 1);
        assert_eq!(g[support[0]], hinge_subgrad(w[support[0]], 0.25));
        hits[support[0]] += 1;
    }
}

#[test]
fn library_literal_oracle_agrees_with_local_one() {
    let mut rng = SeededRng::new(13, "literal");
    let g: Vec<f64> = (0..300).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
    let gx: Vec<olu::Extended> = g.iter().map(|&x| TwoFloat::from(x)).collect();
    let lib = olu::learners::literal_scaled_ftrl(&gx, &olu::AlphaSchedule::Constant(TwoFloat::from(0.5)), TwoFloat::from(0.9), TwoFloat::from(0.95)).unwrap();
    let local = literal_scaled_ftrl(&g, 0.5, 0.9, 0.95);
    for (a, b) in lib.iter().zip(&local) {
        let (a, b) = (f64::from(*a), f64::from(*b));
        assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()), "{a} vs {b}");
    }
}
