use jeffreys::harness::{oracle_expect_capital, oracle_metrics, ExperimentConfig};
use jeffreys::metrics::{Evaluator, Method};
use jeffreys::protocol::{order_cost, ForecastPair, ProtocolState, Side};
use jeffreys::scenarios::{scenario, ForecasterSpec, MeasureSpec};
use jeffreys::strategy::{build_hedge, MixtureSceptic, Sceptic};
use jeffreys::Measure;
use proptest::prelude::*;

fn row(a: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..1.0, a).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn markov(a: usize) -> impl Strategy<Value = Measure<f64>> {
    (1usize..=2).prop_flat_map(move |k| {
        let ctx = a.pow(k as u32);
        (prop::collection::vec(row(a), ctx), row(ctx))
            .prop_map(move |(rows, init)| Measure::markov(k, rows, init).unwrap())
    })
}

fn measure(a: usize) -> BoxedStrategy<Measure<f64>> {
    prop_oneof![
        row(a).prop_map(|p| Measure::iid(p).unwrap()),
        markov(a),
        prop::collection::vec(0.2f64..5.0, a).prop_map(|c| Measure::beta_learner(c).unwrap()),
        (prop::collection::vec(row(a), 2), 0.05f64..0.95).prop_map(|(rows, w)| {
            let comps = rows.into_iter().map(|r| Measure::iid(r).unwrap()).collect();
            Measure::mixture(vec![w, 1.0 - w], comps).unwrap()
        }),
    ]
    .boxed()
}

fn pair() -> impl Strategy<Value = (Measure<f64>, Measure<f64>)> {
    (2usize..=3).prop_flat_map(|a| (measure(a), measure(a)))
}

fn word(a: usize, max: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..a, 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cylinders_are_consistent((p, _) in pair(), x in word(2, 5)) {
        let a = p.alphabet_size();
        let total: f64 = (0..a).map(|y| {
            let mut xy = x.clone();
            xy.push(y);
            p.cylinder_prob(&xy).unwrap()
        }).sum();
        prop_assert!((total - p.cylinder_prob(&x).unwrap()).abs() <= 1e-12);
        let one_step = p.one_step(&x).unwrap();
        prop_assert!((one_step.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(one_step.iter().all(|&q| q > 0.0));
    }

    #[test]
    fn conditioning_identity((p, _) in pair(), x in word(2, 4), z in word(2, 4)) {
        let cond = p.condition_on(&x).unwrap();
        let mut xz = x.clone();
        xz.extend(&z);
        let lhs = p.cylinder_log_prob(&xz).unwrap();
        let rhs = p.cylinder_log_prob(&x).unwrap() + cond.cylinder_log_prob(&z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn affinity_monotone_and_sandwiched((p, q) in pair()) {
        let ev = Evaluator::default();
        let (mut h_prev, mut tv_prev) = (1.0f64, 0.0f64);
        for m in 1..=6 {
            let h = ev.hellinger(&p, &q, m).unwrap();
            let tv = ev.total_variation(&p, &q, m).unwrap();
            prop_assert!(h <= h_prev + 1e-12);
            prop_assert!(tv >= tv_prev - 1e-12);
            prop_assert!(2.0 * (1.0 - h) <= tv + 1e-12);
            prop_assert!(tv <= (8.0 * (1.0 - h)).sqrt() + 1e-12);
            h_prev = h;
            tv_prev = tv;
        }
    }

    #[test]
    fn fast_metrics_match_enumeration((p, q) in pair(), m in 1usize..=5) {
        let ev = Evaluator::default();
        let o = oracle_metrics(&p, &q, m).unwrap();
        prop_assert!((ev.hellinger(&p, &q, m).unwrap() - o.hellinger).abs() <= 1e-12);
        prop_assert!((ev.total_variation(&p, &q, m).unwrap() - o.total_variation).abs() <= 1e-12);
    }

    #[test]
    fn dp_matches_enumeration(p in markov(2), q in markov(2), m in 1usize..=10) {
        let dp = Evaluator { method: Method::Dp, ..Evaluator::default() };
        let en = Evaluator { method: Method::Enumerate, ..Evaluator::default() };
        prop_assert!((dp.hellinger(&p, &q, m).unwrap() - en.hellinger(&p, &q, m).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn hedge_costs_its_capital((p, q) in pair(), m in 1usize..=5, k in 0.0f64..50.0) {
        let order = build_hedge(&p, &q, m, k).unwrap();
        let cost = order_cost(&order, &p, &Evaluator::default()).unwrap();
        prop_assert!((cost - k).abs() <= 1e-12 * k.max(1.0));
        prop_assert!(order.stakes().values().all(|&s| s >= 0.0));
    }

    #[test]
    fn geometric_growth_is_outcome_free((p, q) in pair(), m in 1usize..=4, pick in any::<prop::sample::Index>()) {
        let mine = build_hedge(&p, &q, m, 1.0).unwrap();
        let theirs = build_hedge(&q, &p, m, 1.0).unwrap();
        let h = Evaluator::default().hellinger(&p, &q, m).unwrap();
        let x = pick.get(&mine.stakes().keys().cloned().collect::<Vec<_>>()).clone();
        let geo = (mine.stakes()[&x] * theirs.stakes()[&x]).sqrt();
        prop_assert!((geo * h - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn capital_is_a_martingale(a in 0.05f64..0.95, b in 0.05f64..0.95, j in 1usize..=4, mm in 1usize..=4) {
        let mut cfg = ExperimentConfig::from_scenario(&scenario("diverge-iid").unwrap(), 4, 0);
        cfg.forecaster_i = ForecasterSpec::Coherent { measure: MeasureSpec::Bernoulli { p: a } };
        cfg.forecaster_ii = ForecasterSpec::Coherent { measure: MeasureSpec::BetaLearner { pseudo_counts: vec![b, 1.0 - b] } };
        cfg.sceptic.components = j;
        cfg.sceptic.max_horizon = mm;
        for side in Side::BOTH {
            let e = oracle_expect_capital::<f64>(&cfg, side).unwrap();
            prop_assert!((e - 1.0).abs() <= 1e-9, "{side:?}: {e}");
        }
    }

    #[test]
    fn mixture_capital_is_linear_and_nonnegative((p, q) in pair(), path in word(2, 12)) {
        let forecasts = ForecastPair::new(p, q);
        let mut s = MixtureSceptic::new(4, 6).unwrap();
        let mut state = ProtocolState::new(forecasts.clone()).unwrap();
        let mut current = forecasts;
        for y in path {
            let (a, b) = s.decide(&state).unwrap();
            state.place_order(Side::I, a).unwrap();
            state.place_order(Side::II, b).unwrap();
            current = ForecastPair::new(
                current.first.condition_on(&[y]).unwrap(),
                current.second.condition_on(&[y]).unwrap(),
            );
            state.settle_step(y, current.clone()).unwrap();
            for side in Side::BOTH {
                let k = state.capital(side);
                prop_assert!(k >= 0.0);
                let mix = s.capital(side, &state).unwrap();
                prop_assert!((k - mix).abs() <= 1e-9 * k.max(1.0));
            }
        }
    }
}
