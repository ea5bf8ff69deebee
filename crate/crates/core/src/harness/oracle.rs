//! Brute-force reference computations, independent of the fast paths.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{drive, ExperimentConfig};
use crate::error::{Error, Result};
use crate::measure::{Alphabet, Measure, Symbol};
use crate::protocol::{order_cost, BetOrder, ForecastPair, ProtocolState, Side};
use crate::scalar::Scalar;
use crate::scenarios::{ForecasterSpec, Reality};

/// Largest number of paths or strings the oracles will visit.
pub const ORACLE_BUDGET: u128 = 1 << 20;

/// Largest `A^m` for which every event of `Y^m` is scanned.
pub const EVENT_SCAN_LIMIT: u128 = 12;

fn words(alphabet: Alphabet, len: usize, budget: u128) -> Result<Vec<Vec<Symbol>>> {
    let n = alphabet.count_words(len).unwrap_or(u128::MAX);
    if n > budget {
        return Err(Error::BudgetExceeded { terms: n, budget });
    }
    let a = alphabet.size();
    let out = (0..n as usize)
        .map(|mut i| {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = i % a;
                i /= a;
            }
            w
        })
        .collect();
    Ok(out)
}

/// `E[K_T]` for `side`, integrating Reality over that side's own coherent
/// measure by running the configured strategy on every path in `Y^T`.
pub fn oracle_expect_capital<T: Scalar>(cfg: &ExperimentConfig, side: Side) -> Result<T> {
    let spec = match side {
        Side::I => &cfg.forecaster_i,
        Side::II => &cfg.forecaster_ii,
    };
    let ForecasterSpec::Coherent { measure } = spec else {
        return Err(Error::Config(format!("forecaster {side:?} must be coherent for the martingale oracle")));
    };
    let p: Measure<T> = measure.build()?;
    let mut total = T::zero();
    for path in words(cfg.alphabet()?, cfg.steps, ORACLE_BUDGET)? {
        let prob = p.cylinder_prob(&path)?;
        let run = drive(cfg, Reality::Scripted { path, next: 0 }, false)?;
        total = total + prob * run.state.capital(side);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsOracle<T> {
    pub hellinger: T,
    pub total_variation: T,
    /// `2 · max_E |P(E) - Q(E)|` over all events `E ⊆ Y^m`, when `A^m` is
    /// small enough to scan.
    pub total_variation_sup: Option<T>,
}

/// `H_m` and `TV_m` by listing every string of `Y^m`.
pub fn oracle_metrics<T: Scalar>(p: &Measure<T>, q: &Measure<T>, m: usize) -> Result<MetricsOracle<T>> {
    if p.alphabet() != q.alphabet() {
        return Err(Error::DomainError("measures over different alphabets".into()));
    }
    let strings = words(p.alphabet(), m, ORACLE_BUDGET)?;
    let mut ps = Vec::with_capacity(strings.len());
    let mut qs = Vec::with_capacity(strings.len());
    for x in &strings {
        ps.push(p.cylinder_prob(x)?);
        qs.push(q.cylinder_prob(x)?);
    }
    let hellinger = ps.iter().zip(&qs).map(|(&a, &b)| (a * b).sqrt()).sum();
    let total_variation = ps.iter().zip(&qs).map(|(&a, &b)| (a - b).abs()).sum();
    let total_variation_sup = if (strings.len() as u128) <= EVENT_SCAN_LIMIT {
        let diffs: Vec<T> = ps.iter().zip(&qs).map(|(&a, &b)| a - b).collect();
        let mut best = T::zero();
        for mask in 0u32..(1u32 << diffs.len()) {
            let mut d = T::zero();
            for (i, &v) in diffs.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    d = d + v;
                }
            }
            best = best.max(d.abs());
        }
        Some(best + best)
    } else {
        None
    };
    Ok(MetricsOracle {
        hellinger,
        total_variation,
        total_variation_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzConfig {
    pub runs: usize,
    pub steps: usize,
    pub alphabet_size: usize,
    /// Longest contract string.
    pub max_len: usize,
    pub max_stake: f64,
    pub seed: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            runs: 10_000,
            steps: 6,
            alphabet_size: 2,
            max_len: 3,
            max_stake: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccountingReport {
    pub runs: usize,
    /// Largest `|cash+mark capital - incremental capital|`.
    pub max_ledger_gap: f64,
    pub min_capital: f64,
    /// Largest capital change at the instant of a purchase.
    pub max_purchase_drift: f64,
}

fn random_measure<T: Scalar>(rng: &mut ChaCha8Rng, alphabet: Alphabet) -> Result<Measure<T>> {
    let a = alphabet.size();
    let row = |rng: &mut ChaCha8Rng| -> Vec<T> {
        let w: Vec<f64> = (0..a).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| T::lit(x / s)).collect()
    };
    if rng.gen_bool(0.5) {
        Measure::iid(row(rng))
    } else {
        let rows = (0..a).map(|_| row(rng)).collect();
        let initial = row(rng);
        Measure::markov(1, rows, initial)
    }
}

fn random_order<T: Scalar>(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> Result<BetOrder<T>> {
    let mut order = BetOrder::new();
    for _ in 0..rng.gen_range(0..=4) {
        let len = rng.gen_range(1..=cfg.max_len);
        let x = (0..len).map(|_| rng.gen_range(0..cfg.alphabet_size)).collect();
        order.add_stake(x, T::lit(rng.gen_range(0.0..cfg.max_stake)))?;
    }
    Ok(order)
}

/// The protocol's two capital-update lines applied literally to the full position
/// `f_n` (carried contracts plus new stakes).
struct Ledger<T> {
    capital: T,
    carried: BTreeMap<Vec<Symbol>, T>,
}

impl<T: Scalar> Ledger<T> {
    fn step(&mut self, new: &BetOrder<T>, now: &Measure<T>, next: &Measure<T>, y: Symbol, a: usize) -> Result<()> {
        let mut f = std::mem::take(&mut self.carried);
        for (x, &s) in new.stakes() {
            let slot = f.entry(x.clone()).or_insert(T::zero());
            *slot = *slot + s;
        }
        let one = |x: Symbol| f.get(&vec![x]).copied().unwrap_or(T::zero());
        let mut priced = T::zero();
        for b in 0..a {
            priced = priced + one(b) * now.cylinder_prob(&[b])?;
        }
        let pre = self.capital + one(y) - priced;
        let mut remark = T::zero();
        for (x, &s) in &f {
            if x.len() < 2 {
                continue;
            }
            if x[0] == y {
                remark = remark + s * next.cylinder_prob(&x[1..])?;
                self.carried.insert(x[1..].to_vec(), s);
            }
            remark = remark - s * now.cylinder_prob(x)?;
        }
        self.capital = pre + remark;
        Ok(())
    }
}

/// Random nonnegative orders against random (incoherent) forecasts; each
/// purchase is scaled down so its cost never exceeds the side's cash.
pub fn accounting_fuzz<T: Scalar>(cfg: &FuzzConfig) -> Result<AccountingReport> {
    let alphabet = Alphabet::new(cfg.alphabet_size)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut report = AccountingReport {
        runs: cfg.runs,
        max_ledger_gap: 0.0,
        min_capital: f64::INFINITY,
        max_purchase_drift: 0.0,
    };
    for _ in 0..cfg.runs {
        let mut pair = || -> Result<ForecastPair<T>> {
            Ok(ForecastPair::new(random_measure(&mut rng, alphabet)?, random_measure(&mut rng, alphabet)?))
        };
        let forecasts = (0..=cfg.steps).map(|_| pair()).collect::<Result<Vec<_>>>()?;
        let mut state = ProtocolState::new(forecasts[0].clone())?;
        let mut ledgers = [Side::I, Side::II].map(|_| Ledger {
            capital: T::one(),
            carried: BTreeMap::new(),
        });
        for n in 0..cfg.steps {
            let mut orders = Vec::new();
            for side in Side::BOTH {
                let mut order = random_order::<T>(&mut rng, cfg)?;
                let cash = state.portfolio(side).cash();
                let cost = order_cost(&order, state.forecast(side), state.evaluator())?;
                if cost > cash {
                    // shave a little so rounding cannot leave cash negative
                    let factor = cash / cost * (T::one() - T::lit(1e-12));
                    order = order.scaled(factor.max(T::zero()));
                }
                let before = state.capital(side);
                state.place_order(side, order.clone())?;
                let after = state.mark_to_market(side)?;
                report.max_purchase_drift = report.max_purchase_drift.max(f((after - before).abs()));
                orders.push(order);
            }
            let y = rng.gen_range(0..cfg.alphabet_size);
            for (i, side) in Side::BOTH.into_iter().enumerate() {
                ledgers[i].step(
                    &orders[i],
                    forecasts[n].get(side),
                    forecasts[n + 1].get(side),
                    y,
                    cfg.alphabet_size,
                )?;
            }
            state.settle_step(y, forecasts[n + 1].clone())?;
            for (i, side) in Side::BOTH.into_iter().enumerate() {
                let k = state.capital(side);
                report.max_ledger_gap = report.max_ledger_gap.max(f((k - ledgers[i].capital).abs()));
                report.min_capital = report.min_capital.min(f(k));
            }
        }
    }
    Ok(report)
}
