use approx::assert_relative_eq;
use jeffreys::protocol::{ForecastPair, ProtocolState, Side};
use jeffreys::strategy::{
    find_horizon, LimWrap, LimWrapConfig, MixtureSceptic, Sceptic, SingleComponent,
};
use jeffreys::Measure;

fn pair(p: f64, q: f64) -> ForecastPair<f64> {
    ForecastPair::new(Measure::bernoulli(p).unwrap(), Measure::bernoulli(q).unwrap())
}

/// Plays `sceptic` against constant forecasts along `path`, calling `check`
/// after every settlement.
fn drive<S: Sceptic<f64>>(
    sceptic: &mut S,
    forecasts: &ForecastPair<f64>,
    path: &[usize],
    mut check: impl FnMut(&mut S, &ProtocolState<f64>),
) -> ProtocolState<f64> {
    let mut state = ProtocolState::new(forecasts.clone()).unwrap();
    for &y in path {
        let (a, b) = sceptic.decide(&state).unwrap();
        state.place_order(Side::I, a).unwrap();
        state.place_order(Side::II, b).unwrap();
        state.settle_step(y, forecasts.clone()).unwrap();
        check(sceptic, &state);
    }
    state
}

#[test]
fn identical_forecasts_never_bet() {
    let f = pair(0.3, 0.3);
    let mut s = MixtureSceptic::new(5, 16).unwrap();
    let state = drive(&mut s, &f, &[0, 1, 1, 0, 1], |s, _| assert_eq!(s.active_count(), 0));
    assert_eq!(state.capital(Side::I), 1.0);
    assert!(s.components().iter().all(|c| c.bet_steps().is_empty()));
}

#[test]
fn half_component_cycles_every_34_steps() {
    let f = pair(0.4, 0.6);
    let mut s = SingleComponent::new(0.5, 64).unwrap();
    let path: Vec<usize> = (0..3 * 34 + 1).map(|i| (i * 7 % 5 < 2) as usize).collect();
    let state = drive(&mut s, &f, &path, |s, st| {
        for side in Side::BOTH {
            let marked = s.component.marked_capital(side, st).unwrap();
            assert_relative_eq!(st.capital(side), marked, max_relative = 1e-9);
        }
    });
    let c = &s.component;
    assert_eq!(c.bet_steps(), &[1, 35, 69, 103]);
    assert_eq!(c.cycles().len(), 3);
    let h34 = 0.96f64.sqrt().powi(34);
    for cyc in c.cycles() {
        assert_eq!(cyc.horizon, 34);
        assert_relative_eq!(cyc.log_geometric_multiplier(), -h34.ln(), epsilon = 1e-9);
    }
    let log_geo = 0.5 * (c.log_capital(Side::I) + c.log_capital(Side::II));
    assert_relative_eq!(log_geo, -3.0 * h34.ln(), epsilon = 1e-9);
    // fourth hedge open after one observation
    assert!(!c.is_idle());
    assert!(state.capital(Side::I) > 0.0);
}

#[test]
fn mixture_capital_is_linear() {
    let f = pair(0.4, 0.6);
    let mut s = MixtureSceptic::new(3, 4).unwrap();
    let path = [1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 1];
    drive(&mut s, &f, &path, |s, st| {
        for side in Side::BOTH {
            let mix = s.capital(side, st).unwrap();
            assert_relative_eq!(st.capital(side), mix, max_relative = 1e-9);
            let first = s.components()[0].marked_capital(side, st).unwrap();
            assert!(mix >= 0.5 * first - 1e-12);
        }
    });
}

#[test]
fn single_weight_mixture_is_half_a_component() {
    let f = pair(0.4, 0.6);
    let path = [1, 1, 0, 1, 0, 0, 1, 1, 1];
    let mut mix = MixtureSceptic::new(1, 8).unwrap();
    let mut single = SingleComponent::new(0.5, 8).unwrap();
    let a = drive(&mut mix, &f, &path, |_, _| {});
    let b = drive(&mut single, &f, &path, |_, _| {});
    for side in Side::BOTH {
        assert_relative_eq!(a.capital(side), 0.5 + 0.5 * b.capital(side), max_relative = 1e-12);
    }
}

#[test]
fn horizon_search_is_sound() {
    let p = Measure::bernoulli(0.45).unwrap();
    let q = Measure::bernoulli(0.6).unwrap();
    let ev = jeffreys::metrics::Evaluator::default();
    for eps in [0.5, 0.25, 0.1, 0.02] {
        let m = find_horizon(&p, &q, eps, 64).unwrap().unwrap();
        assert!(ev.hellinger(&p, &q, m).unwrap() < 1.0 - eps);
        for k in 1..m {
            assert!(ev.hellinger(&p, &q, k).unwrap() >= 1.0 - eps);
        }
    }
}

#[test]
fn wrapped_strategy_tracks_path_transform() {
    let f = pair(0.4, 0.6);
    let base = SingleComponent::new(0.04, 8).unwrap();
    let mut w = LimWrap::new(base, LimWrapConfig { accounts: 6 });
    let path = vec![1; 24];
    let state = drive(&mut w, &f, &path, |w, st| {
        w.sync(st).unwrap();
        for side in Side::BOTH {
            assert_relative_eq!(st.capital(side), w.wrapped_capital(side), max_relative = 1e-9);
        }
    });
    assert!(w.frozen_count(Side::I) >= 2);
    assert!(w.shadow().unwrap().capital(Side::I) > state.capital(Side::I));
}
