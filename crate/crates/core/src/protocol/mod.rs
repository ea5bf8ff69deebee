//! The two-forecaster futures-trading protocol.
//!
//! Each step runs in a fixed order: both Forecasters announce measures over
//! the continuation, Sceptic places one order against each, Reality
//! announces the next symbol, and every open contract is settled and
//! re-marked at the next forecasts' prices. Capitals are accounted as cash
//! plus the mark-to-market value of open contracts, which is equivalent to
//! the incremental two-line update of the protocol when one-step contracts
//! are settled once and longer contracts are bought once.

mod order;
mod portfolio;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Alphabet, Measure, Symbol};
use crate::metrics::Evaluator;
use crate::scalar::Scalar;

pub use order::{order_cost, BetOrder, ForwardContract, Settlement};
pub use portfolio::Portfolio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    I,
    II,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::I, Side::II];

    fn index(self) -> usize {
        match self {
            Side::I => 0,
            Side::II => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::I => Side::II,
            Side::II => Side::I,
        }
    }
}

/// The two Forecasters' announcements for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPair<T> {
    pub first: Measure<T>,
    pub second: Measure<T>,
}

impl<T: Scalar> ForecastPair<T> {
    pub fn new(first: Measure<T>, second: Measure<T>) -> Self {
        Self { first, second }
    }

    pub fn get(&self, side: Side) -> &Measure<T> {
        match side {
            Side::I => &self.first,
            Side::II => &self.second,
        }
    }
}

#[derive(Debug, Clone)]
struct Account<T> {
    portfolio: Portfolio<T>,
    forecast: Measure<T>,
    capital: T,
    placed: bool,
}

#[derive(Debug, Clone)]
pub struct ProtocolState<T> {
    alphabet: Alphabet,
    step: usize,
    history: Vec<Symbol>,
    accounts: [Account<T>; 2],
    evaluator: Evaluator,
}

impl<T: Scalar> ProtocolState<T> {
    /// Starts step 1 with both capitals at 1.
    pub fn new(forecasts: ForecastPair<T>) -> Result<Self> {
        Self::with_evaluator(forecasts, Evaluator::default())
    }

    pub fn with_evaluator(forecasts: ForecastPair<T>, evaluator: Evaluator) -> Result<Self> {
        let alphabet = forecasts.first.alphabet();
        if forecasts.second.alphabet() != alphabet {
            return Err(Error::DomainError("forecasts disagree on alphabet size".into()));
        }
        let account = |forecast: Measure<T>| Account {
            portfolio: Portfolio::with_cash(T::one()),
            forecast,
            capital: T::one(),
            placed: false,
        };
        Ok(Self {
            alphabet,
            step: 1,
            history: Vec::new(),
            accounts: [account(forecasts.first), account(forecasts.second)],
            evaluator,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Current step `n` (1-based); observations `y_1..y_{n-1}` are known.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn history(&self) -> &[Symbol] {
        &self.history
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn forecast(&self, side: Side) -> &Measure<T> {
        &self.accounts[side.index()].forecast
    }

    pub fn forecasts(&self) -> ForecastPair<T> {
        ForecastPair::new(self.forecast(Side::I).clone(), self.forecast(Side::II).clone())
    }

    pub fn portfolio(&self, side: Side) -> &Portfolio<T> {
        &self.accounts[side.index()].portfolio
    }

    /// `K_n` for the side: cash plus marked value of open contracts.
    pub fn capital(&self, side: Side) -> T {
        self.accounts[side.index()].capital
    }

    pub fn log2_capital(&self, side: Side) -> T {
        let k = self.capital(side);
        if k > T::zero() {
            k.log2()
        } else {
            T::neg_infinity()
        }
    }

    /// Recomputes the capital from scratch under the current forecast.
    pub fn mark_to_market(&self, side: Side) -> Result<T> {
        let acc = &self.accounts[side.index()];
        acc.portfolio.value(&acc.forecast, &self.evaluator)
    }

    pub fn has_placed(&self, side: Side) -> bool {
        self.accounts[side.index()].placed
    }

    /// Buys `order` from the side's Forecaster at the current forecast's
    /// prices. At most one order per side per step.
    pub fn place_order(&mut self, side: Side, order: BetOrder<T>) -> Result<()> {
        let acc = &mut self.accounts[side.index()];
        if acc.placed {
            return Err(Error::PhaseError(format!(
                "second order against Forecaster {side:?} in step {}",
                self.step
            )));
        }
        for x in order.stakes().keys() {
            self.alphabet.check(x)?;
        }
        if order.forwards().iter().any(|f| f.own().alphabet() != self.alphabet) {
            return Err(Error::DomainError("forward contract over a different alphabet".into()));
        }
        let cost = order_cost(&order, &acc.forecast, &self.evaluator)?;
        acc.portfolio.buy(order, cost);
        acc.placed = true;
        Ok(())
    }

    /// Reality announces `y`; contracts settle and are re-marked under the
    /// next step's forecasts.
    pub fn settle_step(&mut self, y: Symbol, next: ForecastPair<T>) -> Result<()> {
        self.alphabet.check(&[y])?;
        if next.first.alphabet() != self.alphabet || next.second.alphabet() != self.alphabet {
            return Err(Error::DomainError("next forecasts use a different alphabet".into()));
        }
        let ForecastPair { first, second } = next;
        for (acc, forecast) in self.accounts.iter_mut().zip([first, second]) {
            acc.portfolio.settle(y);
            acc.capital = acc.portfolio.value(&forecast, &self.evaluator)?;
            acc.forecast = forecast;
            acc.placed = false;
        }
        self.history.push(y);
        self.step += 1;
        Ok(())
    }
}
