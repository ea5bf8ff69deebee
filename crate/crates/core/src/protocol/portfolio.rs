use std::collections::BTreeMap;

use super::order::{BetOrder, ForwardContract, Settlement};
use crate::error::Result;
use crate::measure::{Measure, Symbol};
use crate::metrics::Evaluator;
use crate::scalar::Scalar;

/// Cash plus open positions against one Forecaster.
///
/// Contract strings are future-relative: position 0 is the next
/// observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio<T> {
    cash: T,
    contracts: BTreeMap<Vec<Symbol>, T>,
    forwards: Vec<ForwardContract<T>>,
}

impl<T: Scalar> Portfolio<T> {
    pub fn with_cash(cash: T) -> Self {
        Self {
            cash,
            contracts: BTreeMap::new(),
            forwards: Vec::new(),
        }
    }

    pub fn cash(&self) -> T {
        self.cash
    }

    pub fn contracts(&self) -> &BTreeMap<Vec<Symbol>, T> {
        &self.contracts
    }

    pub fn forwards(&self) -> &[ForwardContract<T>] {
        &self.forwards
    }

    pub fn is_flat(&self) -> bool {
        self.contracts.is_empty() && self.forwards.is_empty()
    }

    /// Marked value of open positions under `forecast`.
    pub fn positions_value(&self, forecast: &Measure<T>, ev: &Evaluator) -> Result<T> {
        let mut total = T::zero();
        for (x, &s) in &self.contracts {
            total = total + s * forecast.cylinder_prob(x)?;
        }
        for f in &self.forwards {
            total = total + f.price(forecast, ev)?;
        }
        Ok(total)
    }

    pub fn value(&self, forecast: &Measure<T>, ev: &Evaluator) -> Result<T> {
        Ok(self.cash + self.positions_value(forecast, ev)?)
    }

    pub(crate) fn buy(&mut self, order: BetOrder<T>, cost: T) {
        self.cash = self.cash - cost;
        let (stakes, forwards) = order.into_parts();
        for (x, s) in stakes {
            let slot = self.contracts.entry(x).or_insert(T::zero());
            *slot = *slot + s;
        }
        self.forwards.extend(forwards);
    }

    pub(crate) fn settle(&mut self, y: Symbol) {
        let old = std::mem::take(&mut self.contracts);
        for (x, s) in old {
            if x[0] != y {
                continue;
            }
            if x.len() == 1 {
                self.cash = self.cash + s;
            } else {
                let slot = self.contracts.entry(x[1..].to_vec()).or_insert(T::zero());
                *slot = *slot + s;
            }
        }
        let old = std::mem::take(&mut self.forwards);
        for f in old {
            match f.settle(y) {
                Settlement::Paid(v) => self.cash = self.cash + v,
                Settlement::Rolled(rest) => self.forwards.push(rest),
            }
        }
    }
}
