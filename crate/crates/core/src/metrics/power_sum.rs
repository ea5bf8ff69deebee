//! Sums of products of powers of cylinder probabilities over `Y^m`:
//!
//! `ln Σ_{x ∈ Y^m} Π_i P_i(x)^{e_i}`
//!
//! The Hellinger affinity is the case `((P, 1/2), (Q, 1/2))`; the fair price
//! of a density-ratio forward under a forecast `F` is `((F, 1), (Q, 1/2),
//! (P, -1/2))`. Three routes compute it: a dynamic program over shared
//! finite contexts, a closed-form sum over symbol-count classes for
//! exchangeable measures, and plain enumeration of `Y^m`.

use super::{Evaluator, Method};
use crate::error::{Error, Result};
use crate::logspace::{log_factorials, LogSumExp};
use crate::measure::{CountModel, Measure, Symbol};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct Term<'a, T> {
    pub measure: &'a Measure<T>,
    pub exponent: T,
}

impl<'a, T> Term<'a, T> {
    pub fn new(measure: &'a Measure<T>, exponent: T) -> Self {
        Self { measure, exponent }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Route {
    /// Every measure has finite memory; states are the last `order` symbols.
    Context { order: usize },
    /// Every measure is exchangeable; sum over count vectors.
    Counts,
    Enumerate,
}

pub(crate) fn alphabet_of<T: Scalar>(terms: &[Term<'_, T>]) -> Result<usize> {
    let a = terms
        .first()
        .ok_or_else(|| Error::DomainError("no measures given".into()))?
        .measure
        .alphabet_size();
    if terms.iter().any(|t| t.measure.alphabet_size() != a) {
        return Err(Error::DomainError("measures disagree on alphabet size".into()));
    }
    Ok(a)
}

pub(crate) fn dp_route<T: Scalar>(terms: &[Term<'_, T>]) -> Option<Route> {
    let orders: Option<Vec<usize>> = terms.iter().map(|t| t.measure.memory_order()).collect();
    if let Some(orders) = orders {
        return Some(Route::Context {
            order: orders.into_iter().max().unwrap_or(0),
        });
    }
    if terms.iter().all(|t| t.measure.is_exchangeable()) {
        return Some(Route::Counts);
    }
    None
}

pub(crate) fn choose_route<T: Scalar>(terms: &[Term<'_, T>], method: Method) -> Result<Route> {
    match method {
        Method::Enumerate => Ok(Route::Enumerate),
        Method::Dp => dp_route(terms).ok_or_else(|| {
            Error::MethodUnsupported(
                "dp needs finite-memory (IID/Markov) or exchangeable measures".into(),
            )
        }),
        Method::Auto => Ok(dp_route(terms).unwrap_or(Route::Enumerate)),
    }
}

fn budget_check(terms: Option<u128>, budget: u128) -> Result<()> {
    match terms {
        Some(n) if n <= budget => Ok(()),
        Some(n) => Err(Error::BudgetExceeded { terms: n, budget }),
        None => Err(Error::BudgetExceeded {
            terms: u128::MAX,
            budget,
        }),
    }
}

fn pow_u128(a: usize, k: usize) -> Option<u128> {
    (a as u128).checked_pow(u32::try_from(k).ok()?)
}

/// Number of count vectors for strings of length `m` over `a` symbols.
pub(crate) fn count_classes(a: usize, m: usize) -> Option<u128> {
    // C(m + a - 1, a - 1)
    let mut acc: u128 = 1;
    for i in 1..a {
        acc = acc.checked_mul((m + i) as u128)? / i as u128;
    }
    Some(acc)
}

/// `Σ_i e_i ln p_i(y)` for every `y`, given one-step laws after `history`.
fn log_factors<T: Scalar>(terms: &[Term<'_, T>], history: &[Symbol], a: usize) -> Vec<T> {
    let mut out = vec![T::zero(); a];
    for t in terms {
        for (o, p) in out.iter_mut().zip(t.measure.one_step_unchecked(history)) {
            *o = *o + t.exponent * p.ln();
        }
    }
    out
}

fn decode(mut idx: usize, len: usize, a: usize) -> Vec<Symbol> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = idx % a;
        idx /= a;
    }
    word
}

/// Values at depths `0..=max_depth` via the shared-context recursion.
fn context_profile<T: Scalar>(
    terms: &[Term<'_, T>],
    order: usize,
    max_depth: usize,
    budget: u128,
) -> Result<Vec<T>> {
    let a = alphabet_of(terms)?;
    let states = pow_u128(a, order);
    budget_check(states.and_then(|s| s.checked_mul(a as u128)), budget)?;
    let full = states.unwrap_or(0) as usize;

    let full_table: Vec<Vec<T>> = if max_depth > order {
        (0..full)
            .map(|s| exp_all(log_factors(terms, &decode(s, order, a), a)))
            .collect()
    } else {
        Vec::new()
    };

    let mut out = Vec::with_capacity(max_depth + 1);
    out.push(T::zero());
    let mut weights = vec![T::one()];
    let mut log_scale = T::zero();

    for depth in 0..max_depth {
        let len = depth.min(order);
        let next_size = pow_u128(a, (depth + 1).min(order)).unwrap_or(1) as usize;
        let partial: Vec<Vec<T>>;
        let factors = if len == order {
            &full_table
        } else {
            partial = (0..weights.len())
                .map(|s| exp_all(log_factors(terms, &decode(s, len, a), a)))
                .collect();
            &partial
        };
        let mut next = vec![T::zero(); next_size];
        for (s, &w) in weights.iter().enumerate() {
            for (y, &f) in factors[s].iter().enumerate() {
                let target = (s * a + y) % next_size;
                next[target] = next[target] + w * f;
            }
        }
        let total: T = next.iter().copied().sum();
        if total <= T::zero() || !total.is_finite() {
            return Err(Error::DomainError(format!(
                "power sum left the floating-point range at depth {}",
                depth + 1
            )));
        }
        log_scale = log_scale + total.ln();
        out.push(log_scale);
        for w in next.iter_mut() {
            *w = *w / total;
        }
        weights = next;
    }
    Ok(out)
}

fn exp_all<T: Scalar>(v: Vec<T>) -> Vec<T> {
    v.into_iter().map(T::exp).collect()
}

/// Calls `f` with every count vector of `a` entries summing to `m`.
pub(crate) fn for_each_composition(a: usize, m: usize, mut f: impl FnMut(&[usize])) {
    fn rec(slot: usize, left: usize, c: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if slot + 1 == c.len() {
            c[slot] = left;
            f(c);
            return;
        }
        for k in 0..=left {
            c[slot] = k;
            rec(slot + 1, left - k, c, f);
        }
    }
    let mut c = vec![0; a];
    rec(0, m, &mut c, &mut f);
}

pub(crate) fn log_multinomial<T: Scalar>(lf: &[T], counts: &[usize]) -> T {
    let m: usize = counts.iter().sum();
    counts.iter().fold(lf[m], |acc, &c| acc - lf[c])
}

fn count_models<T: Scalar>(terms: &[Term<'_, T>], depth: usize) -> Result<Vec<CountModel<T>>> {
    terms
        .iter()
        .map(|t| {
            t.measure
                .count_model(depth)
                .ok_or_else(|| Error::MethodUnsupported("measure is not exchangeable".into()))
        })
        .collect()
}

fn counts_value<T: Scalar>(terms: &[Term<'_, T>], depth: usize, budget: u128) -> Result<T> {
    let a = alphabet_of(terms)?;
    budget_check(count_classes(a, depth), budget)?;
    let models = count_models(terms, depth)?;
    let lf = log_factorials::<T>(depth);
    let mut acc = LogSumExp::new();
    for_each_composition(a, depth, |c| {
        let lp: T = terms
            .iter()
            .zip(&models)
            .map(|(t, m)| t.exponent * m.log_prob(c))
            .sum();
        acc.add(log_multinomial(&lf, c) + lp);
    });
    Ok(acc.value())
}

/// Depth-first walk of `Y^{≤max_depth}` carrying the conditioned measures.
pub(crate) fn enumerate_walk<T: Scalar>(
    measures: &[&Measure<T>],
    max_depth: usize,
    budget: u128,
    mut visit: impl FnMut(usize, &[T]),
) -> Result<()> {
    let a = measures
        .first()
        .map(|m| m.alphabet_size())
        .ok_or_else(|| Error::DomainError("no measures given".into()))?;
    budget_check(pow_u128(a, max_depth), budget)?;

    fn rec<T: Scalar>(
        current: &[Measure<T>],
        logs: &mut Vec<T>,
        depth: usize,
        max_depth: usize,
        a: usize,
        visit: &mut dyn FnMut(usize, &[T]),
    ) {
        visit(depth, logs);
        if depth == max_depth {
            return;
        }
        let dists: Vec<Vec<T>> = current.iter().map(|m| m.one_step_unchecked(&[])).collect();
        for y in 0..a {
            let saved = logs.clone();
            for (l, d) in logs.iter_mut().zip(&dists) {
                *l = *l + d[y].ln();
            }
            let children: Vec<Measure<T>> = if depth + 1 < max_depth {
                current.iter().map(|m| m.condition_unchecked(&[y])).collect()
            } else {
                Vec::new()
            };
            rec(&children, logs, depth + 1, max_depth, a, visit);
            *logs = saved;
        }
    }

    let roots: Vec<Measure<T>> = measures.iter().map(|&m| m.clone()).collect();
    let mut logs = vec![T::zero(); measures.len()];
    rec(&roots, &mut logs, 0, max_depth, a, &mut visit);
    Ok(())
}

fn enumerate_profile<T: Scalar>(
    terms: &[Term<'_, T>],
    max_depth: usize,
    budget: u128,
) -> Result<Vec<T>> {
    alphabet_of(terms)?;
    let measures: Vec<&Measure<T>> = terms.iter().map(|t| t.measure).collect();
    let mut accs = vec![LogSumExp::new(); max_depth + 1];
    enumerate_walk(&measures, max_depth, budget, |depth, logs| {
        let v: T = logs
            .iter()
            .zip(terms)
            .map(|(&l, t)| t.exponent * l)
            .sum();
        accs[depth].add(v);
    })?;
    Ok(accs.into_iter().map(|a| a.value()).collect())
}

/// Values at every depth `0..=max_depth`.
pub fn log_power_sum_profile<T: Scalar>(
    terms: &[Term<'_, T>],
    max_depth: usize,
    ev: &Evaluator,
) -> Result<Vec<T>> {
    alphabet_of(terms)?;
    match choose_route(terms, ev.method)? {
        Route::Context { order } => context_profile(terms, order, max_depth, ev.budget),
        Route::Counts => (0..=max_depth)
            .map(|d| counts_value(terms, d, ev.budget))
            .collect(),
        Route::Enumerate => enumerate_profile(terms, max_depth, ev.budget),
    }
}

/// Value at a single depth.
pub fn log_power_sum<T: Scalar>(terms: &[Term<'_, T>], depth: usize, ev: &Evaluator) -> Result<T> {
    alphabet_of(terms)?;
    match choose_route(terms, ev.method)? {
        Route::Context { order } => {
            context_profile(terms, order, depth, ev.budget).map(|v| v[depth])
        }
        Route::Counts => counts_value(terms, depth, ev.budget),
        Route::Enumerate => enumerate_profile(terms, depth, ev.budget).map(|v| v[depth]),
    }
}

pub(crate) fn counts_value_at<T: Scalar>(
    terms: &[Term<'_, T>],
    depth: usize,
    budget: u128,
) -> Result<T> {
    counts_value(terms, depth, budget)
}

pub(crate) fn context_values<T: Scalar>(
    terms: &[Term<'_, T>],
    order: usize,
    max_depth: usize,
    budget: u128,
) -> Result<Vec<T>> {
    context_profile(terms, order, max_depth, budget)
}

pub(crate) fn enumerate_values<T: Scalar>(
    terms: &[Term<'_, T>],
    max_depth: usize,
    budget: u128,
) -> Result<Vec<T>> {
    enumerate_profile(terms, max_depth, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compositions_enumerated() {
        let mut n = 0;
        for_each_composition(3, 4, |c| {
            assert_eq!(c.iter().sum::<usize>(), 4);
            n += 1;
        });
        assert_eq!(n as u128, count_classes(3, 4).unwrap());
        assert_eq!(count_classes(2, 64), Some(65));
    }

    #[test]
    fn total_mass_is_one_on_every_route() {
        let m = Measure::<f64>::markov(1, vec![vec![0.7, 0.3], vec![0.2, 0.8]], vec![0.4, 0.6]).unwrap();
        let terms = [Term::new(&m, 1.0f64)];
        let ev = Evaluator::default();
        for v in context_values(&terms, 1, 12, ev.budget).unwrap() {
            assert!(v.abs() < 1e-13);
        }
        for v in enumerate_values(&terms, 8, ev.budget).unwrap() {
            assert!(v.abs() < 1e-13);
        }
        let b = Measure::beta_learner(vec![0.5, 1.5, 3.0]).unwrap();
        let terms = [Term::new(&b, 1.0f64)];
        assert!(counts_value_at(&terms, 20, ev.budget).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hedge_price_matches_enumeration() {
        let f = Measure::beta_learner(vec![1.0, 2.0]).unwrap();
        let p = Measure::bernoulli(0.3).unwrap();
        let q = Measure::mixture(vec![0.5, 0.5], vec![f.clone(), p.clone()]).unwrap();
        let terms = [Term::new(&f, 1.0), Term::new(&q, 0.5), Term::new(&p, -0.5)];
        let by_counts = counts_value_at(&terms, 6, 1 << 22).unwrap();
        let by_enum = enumerate_values(&terms, 6, 1 << 22).unwrap()[6];
        assert_relative_eq!(by_counts, by_enum, epsilon = 1e-12);
    }

    #[test]
    fn budget_enforced() {
        let m = Measure::bernoulli(0.5f64).unwrap();
        let terms = [Term::new(&m, 1.0f64)];
        let err = enumerate_values(&terms, 30, 1 << 22).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
