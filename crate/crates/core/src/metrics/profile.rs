use super::power_sum::{
    alphabet_of, choose_route, context_values, count_classes, counts_value_at, enumerate_values,
    Route, Term,
};
use super::Evaluator;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::scalar::Scalar;

/// Lazily evaluated sequence `H_1(P,Q), H_2(P,Q), ..., H_max(P,Q)` for one
/// pair of forecasts, shared by every horizon search made on that pair.
pub struct AffinityProfile<'a, T> {
    p: &'a Measure<T>,
    q: &'a Measure<T>,
    max_depth: usize,
    budget: u128,
    route: Route,
    reachable: usize,
    values: Vec<Option<T>>,
}

impl<'a, T: Scalar> AffinityProfile<'a, T> {
    pub fn new(p: &'a Measure<T>, q: &'a Measure<T>, max_depth: usize, ev: &Evaluator) -> Result<Self> {
        let half = T::lit(0.5);
        let terms = [Term::new(p, half), Term::new(q, half)];
        let a = alphabet_of(&terms)?;
        let route = choose_route(&terms, ev.method)?;
        let within = |n: Option<u128>| n.is_some_and(|n| n <= ev.budget);
        let reachable = match route {
            Route::Context { order } => {
                let states = (a as u128)
                    .checked_pow(order as u32)
                    .and_then(|s| s.checked_mul(a as u128));
                if within(states) {
                    max_depth
                } else {
                    0
                }
            }
            Route::Counts => (0..=max_depth)
                .take_while(|&d| within(count_classes(a, d)))
                .last()
                .unwrap_or(0),
            Route::Enumerate => (0..=max_depth)
                .take_while(|&d| within((a as u128).checked_pow(d as u32)))
                .last()
                .unwrap_or(0),
        };
        let mut values = vec![None; max_depth + 1];
        values[0] = Some(T::one());
        Ok(Self {
            p,
            q,
            max_depth,
            budget: ev.budget,
            route,
            reachable,
            values,
        })
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Largest horizon computable within the enumeration budget.
    pub fn reachable(&self) -> usize {
        self.reachable
    }

    pub fn get(&mut self, m: usize) -> Result<T> {
        if m > self.max_depth || m > self.reachable {
            return Err(Error::BudgetExceeded {
                terms: (self.p.alphabet_size() as u128).saturating_pow(m as u32),
                budget: self.budget,
            });
        }
        if let Some(v) = self.values[m] {
            return Ok(v);
        }
        let half = T::lit(0.5);
        let terms = [Term::new(self.p, half), Term::new(self.q, half)];
        let clamp = |lv: T| lv.exp().min(T::one()).max(T::zero());
        match self.route {
            Route::Counts => {
                let v = clamp(counts_value_at(&terms, m, self.budget)?);
                self.values[m] = Some(v);
                Ok(v)
            }
            Route::Context { order } => {
                let all = context_values(&terms, order, self.reachable, self.budget)?;
                self.fill(all, clamp);
                Ok(self.values[m].unwrap_or(T::zero()))
            }
            Route::Enumerate => {
                let all = enumerate_values(&terms, self.reachable, self.budget)?;
                self.fill(all, clamp);
                Ok(self.values[m].unwrap_or(T::zero()))
            }
        }
    }

    fn fill(&mut self, logs: Vec<T>, clamp: impl Fn(T) -> T) {
        for (slot, lv) in self.values.iter_mut().zip(logs) {
            *slot = Some(clamp(lv));
        }
    }

    /// Smallest `m ≤ max_depth` with `H_m < threshold` (strict), relying on
    /// `H_m` being non-increasing. Horizons beyond the budget are not
    /// searched; that case is logged and reported as `None`.
    pub fn smallest_below(&mut self, threshold: T) -> Option<usize> {
        let top = self.max_depth.min(self.reachable);
        if top == 0 {
            if self.max_depth > 0 {
                log::warn!("horizon search skipped: no horizon fits the enumeration budget");
            }
            return None;
        }
        match self.get(top) {
            Ok(h) if h < threshold => {}
            Ok(_) => {
                if top < self.max_depth {
                    log::warn!(
                        "horizon search stopped at m = {top} (budget); certificate may lie beyond"
                    );
                }
                return None;
            }
            Err(e) => {
                log::warn!("horizon search failed: {e}");
                return None;
            }
        }
        let (mut lo, mut hi) = (1, top);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            match self.get(mid) {
                Ok(h) if h < threshold => hi = mid,
                Ok(_) => lo = mid + 1,
                Err(e) => {
                    log::warn!("horizon search failed: {e}");
                    return None;
                }
            }
        }
        Some(lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Method;

    #[test]
    fn finds_smallest_horizon() {
        let p = Measure::bernoulli(0.4).unwrap();
        let q = Measure::bernoulli(0.6).unwrap();
        let mut prof = AffinityProfile::new(&p, &q, 100, &Evaluator::default()).unwrap();
        assert_eq!(prof.smallest_below(0.5), Some(34));
        assert_eq!(prof.smallest_below(0.96), Some(3));
        assert_eq!(prof.smallest_below(1e-300), None);
    }

    #[test]
    fn enumeration_profile_respects_budget() {
        let p = Measure::beta_learner(vec![0.5, 0.5]).unwrap();
        let q = Measure::markov(1, vec![vec![0.5, 0.5], vec![0.4, 0.6]], vec![0.5, 0.5]).unwrap();
        let ev = Evaluator {
            method: Method::Auto,
            budget: 1 << 10,
        };
        let mut prof = AffinityProfile::new(&p, &q, 64, &ev).unwrap();
        assert_eq!(prof.reachable(), 10);
        assert!(prof.get(11).is_err());
        assert!(prof.get(10).is_ok());
    }
}
