use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::measure::{Measure, Symbol};
use crate::metrics::{log_power_sum, Evaluator, Term};
use crate::scalar::Scalar;

/// Forward contract paying `scale · √(other(x) / own(x))` on the block
/// `x ∈ Y^horizon` of the next `horizon` observations.
///
/// It is the compact form of the stakes `f(x)` on every string of length
/// `horizon`; [`ForwardContract::expand`] materializes them. After each
/// observation it re-bases itself onto the remaining block.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardContract<T> {
    own: Measure<T>,
    other: Measure<T>,
    horizon: usize,
    scale: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Settlement<T> {
    Paid(T),
    Rolled(ForwardContract<T>),
}

impl<T: Scalar> ForwardContract<T> {
    pub fn density_ratio(own: Measure<T>, other: Measure<T>, horizon: usize, scale: T) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::DomainError("forward contract needs horizon ≥ 1".into()));
        }
        if own.alphabet_size() != other.alphabet_size() {
            return Err(Error::DomainError("measures disagree on alphabet size".into()));
        }
        Ok(Self {
            own,
            other,
            horizon,
            scale,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn own(&self) -> &Measure<T> {
        &self.own
    }

    pub fn other(&self) -> &Measure<T> {
        &self.other
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            scale: self.scale * factor,
            ..self.clone()
        }
    }

    /// Stake on a full block `x`.
    pub fn stake(&self, x: &[Symbol]) -> Result<T> {
        if x.len() != self.horizon {
            return Err(Error::DomainError(format!(
                "block of length {} for a {}-step contract",
                x.len(),
                self.horizon
            )));
        }
        let half = T::lit(0.5);
        let lr = self.other.cylinder_log_prob(x)? - self.own.cylinder_log_prob(x)?;
        Ok(self.scale * (half * lr).exp())
    }

    /// Fair price under `forecast`: `Σ_x stake(x) · forecast(x)`.
    pub fn price(&self, forecast: &Measure<T>, ev: &Evaluator) -> Result<T> {
        if self.scale == T::zero() {
            return Ok(T::zero());
        }
        let half = T::lit(0.5);
        let lv = if *forecast == self.own {
            log_power_sum(
                &[Term::new(&self.own, half), Term::new(&self.other, half)],
                self.horizon,
                ev,
            )?
        } else {
            log_power_sum(
                &[
                    Term::new(forecast, T::one()),
                    Term::new(&self.other, half),
                    Term::new(&self.own, -half),
                ],
                self.horizon,
                ev,
            )?
        };
        Ok(self.scale * lv.exp())
    }

    /// Advances the contract past observation `y`.
    pub fn settle(&self, y: Symbol) -> Settlement<T> {
        let p = self.own.one_step_unchecked(&[])[y];
        let q = self.other.one_step_unchecked(&[])[y];
        let scale = self.scale * (q / p).sqrt();
        if self.horizon == 1 {
            Settlement::Paid(scale)
        } else {
            Settlement::Rolled(Self {
                own: self.own.condition_unchecked(&[y]),
                other: self.other.condition_unchecked(&[y]),
                horizon: self.horizon - 1,
                scale,
            })
        }
    }

    /// Explicit stakes on every string of length `horizon`.
    pub fn expand(&self, budget: u128) -> Result<BTreeMap<Vec<Symbol>, T>> {
        let a = self.own.alphabet_size();
        let n = (a as u128).checked_pow(self.horizon as u32);
        match n {
            Some(n) if n <= budget => {}
            other => {
                return Err(Error::BudgetExceeded {
                    terms: other.unwrap_or(u128::MAX),
                    budget,
                })
            }
        }
        let mut out = BTreeMap::new();
        let mut word = vec![0; self.horizon];
        loop {
            out.insert(word.clone(), self.stake(&word)?);
            // odometer increment, last symbol fastest
            let mut i = self.horizon;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                word[i] += 1;
                if word[i] < a {
                    break;
                }
                word[i] = 0;
            }
        }
    }
}

/// Sceptic's move against one Forecaster: stakes on finitely many futures
/// contracts `[x]`, `x` a nonempty string of future observations, plus any
/// number of density-ratio forwards.
#[derive(Debug, Clone, PartialEq)]
pub struct BetOrder<T> {
    stakes: BTreeMap<Vec<Symbol>, T>,
    forwards: Vec<ForwardContract<T>>,
}

impl<T> Default for BetOrder<T> {
    fn default() -> Self {
        Self {
            stakes: BTreeMap::new(),
            forwards: Vec::new(),
        }
    }
}

impl<T: Scalar> BetOrder<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_stakes(stakes: BTreeMap<Vec<Symbol>, T>) -> Result<Self> {
        let mut order = Self::new();
        for (x, s) in stakes {
            order.add_stake(x, s)?;
        }
        Ok(order)
    }

    pub fn add_stake(&mut self, x: Vec<Symbol>, stake: T) -> Result<()> {
        if x.is_empty() {
            return Err(Error::DomainError("stake on the empty string".into()));
        }
        if !stake.is_finite() {
            return Err(Error::DomainError(format!("stake {stake} on {x:?}")));
        }
        if stake != T::zero() {
            let slot = self.stakes.entry(x).or_insert(T::zero());
            *slot = *slot + stake;
        }
        Ok(())
    }

    pub fn add_forward(&mut self, contract: ForwardContract<T>) {
        if contract.scale != T::zero() {
            self.forwards.push(contract);
        }
    }

    pub fn stakes(&self) -> &BTreeMap<Vec<Symbol>, T> {
        &self.stakes
    }

    pub fn forwards(&self) -> &[ForwardContract<T>] {
        &self.forwards
    }

    pub fn is_zero(&self) -> bool {
        self.stakes.values().all(|s| *s == T::zero()) && self.forwards.is_empty()
    }

    pub fn scaled(&self, factor: T) -> Self {
        if factor == T::zero() {
            return Self::new();
        }
        Self {
            stakes: self.stakes.iter().map(|(x, &s)| (x.clone(), s * factor)).collect(),
            forwards: self.forwards.iter().map(|f| f.scaled(factor)).collect(),
        }
    }

    pub fn merge(&mut self, other: BetOrder<T>) {
        for (x, s) in other.stakes {
            let slot = self.stakes.entry(x).or_insert(T::zero());
            *slot = *slot + s;
        }
        self.forwards.extend(other.forwards);
    }

    /// All stakes as explicit strings, forwards expanded.
    pub fn expand(&self, budget: u128) -> Result<BTreeMap<Vec<Symbol>, T>> {
        let mut out = self.stakes.clone();
        for f in &self.forwards {
            for (x, s) in f.expand(budget)? {
                let slot = out.entry(x).or_insert(T::zero());
                *slot = *slot + s;
            }
        }
        Ok(out)
    }

    pub(crate) fn into_parts(self) -> (BTreeMap<Vec<Symbol>, T>, Vec<ForwardContract<T>>) {
        (self.stakes, self.forwards)
    }
}

/// `Σ_x stake(x) · forecast([x])`.
pub fn order_cost<T: Scalar>(order: &BetOrder<T>, forecast: &Measure<T>, ev: &Evaluator) -> Result<T> {
    let mut total = T::zero();
    for (x, &s) in &order.stakes {
        total = total + s * forecast.cylinder_prob(x)?;
    }
    for f in &order.forwards {
        total = total + f.price(forecast, ev)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_order_costs_nothing() {
        let f = Measure::bernoulli(0.4).unwrap();
        let order = BetOrder::<f64>::new();
        assert!(order.is_zero());
        assert_eq!(order_cost(&order, &f, &Evaluator::default()).unwrap(), 0.0);
    }

    #[test]
    fn single_contract_cost() {
        let f = Measure::bernoulli(0.4).unwrap();
        let mut order = BetOrder::new();
        order.add_stake(vec![0], 2.0).unwrap();
        assert_relative_eq!(order_cost(&order, &f, &Evaluator::default()).unwrap(), 1.2, epsilon = 1e-15);
        assert!(order.add_stake(vec![], 1.0).is_err());
    }

    #[test]
    fn forward_price_matches_expanded_stakes() {
        let own = Measure::beta_learner(vec![0.5, 0.5]).unwrap();
        let other = Measure::bernoulli(0.7).unwrap();
        let fc = ForwardContract::density_ratio(own.clone(), other, 5, 1.7).unwrap();
        let ev = Evaluator::default();
        let forecast = Measure::bernoulli(0.2).unwrap();
        let explicit = BetOrder::from_stakes(fc.expand(1 << 10).unwrap()).unwrap();
        for f in [&own, &forecast] {
            assert_relative_eq!(
                fc.price(f, &ev).unwrap(),
                order_cost(&explicit, f, &ev).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn settle_rebases_onto_remaining_block() {
        let own = Measure::bernoulli(0.4).unwrap();
        let other = Measure::bernoulli(0.6).unwrap();
        let fc = ForwardContract::density_ratio(own, other, 2, 1.0).unwrap();
        let Settlement::Rolled(rest) = fc.settle(1) else {
            panic!("two-step contract paid early");
        };
        assert_eq!(rest.horizon(), 1);
        for y in 0..2 {
            let Settlement::Paid(v) = rest.settle(y) else {
                panic!("one-step contract rolled");
            };
            assert_relative_eq!(v, fc.stake(&[1, y]).unwrap(), epsilon = 1e-15);
        }
    }
}
