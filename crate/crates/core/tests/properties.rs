use olu::adversarial::{assert_comparator_argmin, assert_no_momentum_orthogonality, make_lower_bound, measure};
use olu::bench::{hinge_value, Dataset, Setting};
use olu::learners::{play_stream, scale_invariance_check};
use olu::moments::{m_ratio, m_ratio_ceiling};
use olu::regret::{
    bound_discounted, bound_dynamic_clipped, bound_dynamic_unbounded, bound_static_scale_free, conversion_rhs,
    subinterval_identity,
};
use olu::{AlphaSchedule, LearnerConfig, Partition, RegretLedger, SeededRng};
use proptest::prelude::*;

fn stream(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..max_len)
}

fn beta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.3..0.9999f64]
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scale_free_kinds_ignore_loss_scale(v in stream(80), k in 1e-3..1e3f64, b in 0.5..1.0f64) {
        for cfg in [
            LearnerConfig::scale_free(0.7),
            LearnerConfig::discounted(0.7, b, b),
            LearnerConfig::discounted(0.7, b * 0.9, b),
            LearnerConfig::clipped(0.7, b, 0.5),
        ] {
            prop_assert!(scale_invariance_check(&cfg, &v, k).unwrap());
        }
    }

    #[test]
    fn sgd_is_not_scale_free(v in prop::collection::vec(0.1..10.0f64, 2..20)) {
        prop_assert!(!scale_invariance_check(&LearnerConfig::sgd(1.0), &v, 3.0).unwrap());
    }

    #[test]
    fn plays_are_bounded(v in stream(200), alpha in 0.1..10.0f64, b in 0.3..0.999f64) {
        let plays = play_stream(&LearnerConfig::scale_free(alpha), &v).unwrap();
        for (t, p) in plays.iter().enumerate() {
            prop_assert!(p.abs() <= alpha * (t as f64).sqrt() * (1.0 + 1e-12));
        }
        let plays = play_stream(&LearnerConfig::discounted(alpha, b, b), &v).unwrap();
        for (t, p) in plays.iter().enumerate() {
            prop_assert!(p.abs() <= alpha * m_ratio_ceiling(1.0, t) * (1.0 + 1e-12));
        }
        // β1 = β2² < β2 admits the horizon-free cap α / sqrt(1 − (β1/β2)²).
        let plays = play_stream(&LearnerConfig::discounted(alpha, b * b, b), &v).unwrap();
        let cap = alpha * (1.0 / (1.0 - b * b)).sqrt();
        prop_assert!(plays.iter().all(|p| p.abs() <= cap * (1.0 + 1e-12)));
        let plays = play_stream(&LearnerConfig::clipped(alpha, b, 0.25), &v).unwrap();
        prop_assert!(plays.iter().all(|p| p.abs() <= 0.25));
    }

    #[test]
    fn unit_discounts_recover_scale_free(v in stream(100), alpha in 0.1..10.0f64) {
        let a = play_stream(&LearnerConfig::scale_free(alpha), &v).unwrap();
        let b = play_stream(&LearnerConfig::discounted(alpha, 1.0, 1.0), &v).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn m_ratio_below_ceiling(v in stream(100), b in beta()) {
        let t = v.len();
        prop_assert!(m_ratio(&v, b, t).unwrap() <= m_ratio_ceiling(1.0, t) * (1.0 + 1e-12));
    }

    #[test]
    fn conversion_identity_holds(
        v in prop::collection::vec(-1.0..1.0f64, 1..60),
        b in beta(),
        seed in any::<u64>(),
        kind in 0usize..4,
    ) {
        let n = v.len();
        let mut rng = SeededRng::new(seed, "prop");
        let comps: Vec<f64> = (0..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        let ledger = match kind {
            0 => RegretLedger::new(v.clone(), (0..n).map(|_| rng.uniform_in(-3.0, 3.0)).collect(), comps).unwrap(),
            1 => RegretLedger::from_learner(&LearnerConfig::scale_free(1.0), v, comps).unwrap(),
            2 => RegretLedger::from_learner(&LearnerConfig::discounted(1.0, 0.9, 0.95), v, comps).unwrap(),
            _ => RegretLedger::from_learner(&LearnerConfig::adagrad(0.5), v, comps).unwrap(),
        };
        let part = Partition::<f64>::random(n, 0.125, 2.0, &mut rng).unwrap();
        let rhs = conversion_rhs(&ledger, &part, b).unwrap();
        prop_assert!(rel_close(rhs, ledger.dynamic_regret(), 1e-9), "{rhs} vs {}", ledger.dynamic_regret());
    }

    #[test]
    fn subinterval_identity_holds(v in prop::collection::vec(-1.0..1.0f64, 2..60), b in beta(), u in -2.0..2.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let n = v.len();
        let ledger = RegretLedger::from_learner(&LearnerConfig::discounted(1.0, 0.9, 0.9), v, vec![0.0; n]).unwrap();
        let (lo, hi) = {
            let a = 1 + (x * (n - 1) as f64) as usize;
            let c = 1 + (y * (n - 1) as f64) as usize;
            (a.min(c), a.max(c))
        };
        let (lhs, rhs) = subinterval_identity(&ledger, lo, hi, u, b).unwrap();
        prop_assert!(rel_close(lhs, rhs, 1e-9));
    }

    #[test]
    fn constant_comparators_give_static_regret(v in stream(60), u in -3.0..3.0f64) {
        let n = v.len();
        let l = RegretLedger::from_learner(&LearnerConfig::scale_free(1.0), v, vec![u; n]).unwrap();
        prop_assert!(rel_close(l.dynamic_regret(), l.static_regret(u), 1e-12));
        prop_assert!(rel_close(l.discounted_regret(u, 1.0, n).unwrap(), l.static_regret(u), 1e-12));
    }

    #[test]
    fn path_length_zero_iff_constant(v in stream(30), u in prop::collection::vec(-1.0..1.0f64, 30)) {
        let n = v.len();
        let u = u[..n].to_vec();
        let l = RegretLedger::new(v, vec![0.0; n], u.clone()).unwrap();
        let constant = u.windows(2).all(|w| w[0] == w[1]);
        prop_assert_eq!(l.path_length() == 0.0, constant);
    }

    #[test]
    fn static_and_discounted_bounds_hold(v in stream(120), alpha in 0.1..10.0f64, b in beta(), uf in -1.0..1.0f64) {
        let u = uf * alpha;
        let n = v.len();
        let l = RegretLedger::from_learner(&LearnerConfig::discounted(alpha, b, b), v, vec![u; n]).unwrap();
        for t in 1..=n {
            let bound = bound_discounted(&l, alpha, u, b, t).unwrap();
            prop_assert!(l.discounted_regret(u, b, t).unwrap() <= bound * (1.0 + 1e-12) + 1e-12);
        }
        if b == 1.0 {
            let bound = bound_static_scale_free(&l, alpha, u).unwrap();
            prop_assert!(l.static_regret(u) <= bound * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn dynamic_bounds_hold(v in prop::collection::vec(-1.0..1.0f64, 2..200), b in 0.5..0.995f64, seed in any::<u64>()) {
        let n = v.len();
        let mut rng = SeededRng::new(seed, "prop");
        let m = m_ratio(&v, b, n).unwrap();
        let comps: Vec<f64> = (0..n).map(|_| rng.uniform_in(-m, m)).collect();
        let l = RegretLedger::from_learner(&LearnerConfig::discounted(1.0, b, b), v.clone(), comps).unwrap();
        prop_assert!(l.dynamic_regret() <= bound_dynamic_unbounded(&l, 1.0, b, m).unwrap() * (1.0 + 1e-12));
        let comps: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let l = RegretLedger::from_learner(&LearnerConfig::clipped(1.0, b, 1.0), v, comps).unwrap();
        prop_assert!(l.dynamic_regret() <= bound_dynamic_clipped(&l, 1.0, b).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn hinge_is_bounded_below_by_lambda(x in -10.0..10.0f64, lambda in 0.01..0.99f64) {
        prop_assert!(hinge_value(x, lambda) >= lambda - 1e-15);
    }

    #[test]
    fn classification_gradients_are_one_hot(seed in any::<u64>(), scaled in any::<bool>()) {
        let setting = if scaled { Setting::Scaled } else { Setting::Unit };
        let data = Dataset::build(setting, 20, 0.25, seed).unwrap();
        let mut rng = SeededRng::new(seed, "data");
        let mut w = vec![0.0; 20];
        let mut g = vec![0.0; 20];
        for _ in 0..50 {
            data.sample_gradient(&w, &mut rng, &mut g);
            prop_assert!(g.iter().filter(|x| **x != 0.0).count() <= 1);
            for (wi, gi) in w.iter_mut().zip(&g) {
                *wi -= 0.3 * gi;
            }
            prop_assert!(data.loss(&w) >= data.optimum_value().value - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lower_bound_invariants(t in 4usize..100_000) {
        let inst = make_lower_bound::<f64>(t).unwrap();
        prop_assert_eq!(inst.t_hat % 4, 0);
        prop_assert!(inst.t_hat <= t && t - inst.t_hat < 4);
        for s in 1..=t {
            let v = inst.losses.at(s);
            let norm = v[0].abs() + v[1].abs();
            if s <= inst.t_hat {
                prop_assert!(norm == 1.0 && (v[0] == 0.0 || v[1] == 0.0));
            } else {
                prop_assert_eq!(norm, 0.0);
            }
        }
        let [p0, p1] = inst.path_lengths();
        prop_assert!(p0 <= 2.0 && p1 <= 2.0);
        prop_assert!(assert_no_momentum_orthogonality(&inst));
        prop_assert!(assert_comparator_argmin(&inst));
        prop_assert_eq!(inst.comparator_loss(), -(inst.t_hat as f64));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn no_momentum_total_loss_vanishes(k in 1usize..200, alpha in 0.01..100.0f64, which in 0usize..4) {
        let t = 4 * k;
        let inst = make_lower_bound::<f64>(t).unwrap();
        let cfg = match which {
            0 => LearnerConfig::sgd(alpha),
            1 => LearnerConfig::adagrad(alpha),
            2 => LearnerConfig::sgd(1.0).with_schedule(AlphaSchedule::InvSqrt(alpha)),
            _ => LearnerConfig::sgd(1.0).with_schedule(AlphaSchedule::Custom(std::sync::Arc::new(move |s| alpha * (1.0 + (s % 7) as f64)))),
        };
        let row = measure(&inst, "nm", &cfg).unwrap();
        prop_assert_eq!(row.total_loss, 0.0);
        prop_assert_eq!(row.dynamic_regret, t as f64);
    }

    #[test]
    fn undiscounted_clipped_plays_stay_in_unit_band(k in 1usize..300) {
        let inst = make_lower_bound::<f64>(4 * k).unwrap();
        for i in 0..2 {
            let plays = play_stream(&LearnerConfig::clipped(1.0, 1.0, 1.0), &inst.losses.coordinate(i)).unwrap();
            prop_assert!(plays.iter().all(|&p| (-1.0..=0.0).contains(&p)));
        }
    }
}
