//! Sceptic strategies.
//!
//! The core routine, for a fixed `ε`, waits until the two forecasts have
//! restricted affinity `H_m < 1 - ε` for some horizon `m`, then buys from
//! each Forecaster an `m`-step forward paying its capital times
//! `√(P_other / P_own) / H_m` on the realized block. Whatever the block, the
//! product of the two multipliers is `1 / H_m²`, so the geometric mean of the
//! two capitals grows by `1 / H_m > 1 / (1 - ε)` per completed cycle.

mod component;
mod limwrap;
mod mixture;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::metrics::{AffinityProfile, Evaluator};
use crate::protocol::{BetOrder, ForwardContract, ProtocolState};
use crate::scalar::Scalar;

pub use component::{Cycle, EpsilonComponent, Holding, SingleComponent};
pub use limwrap::{wrap_capital_path, LimWrap, LimWrapConfig, WrappedPoint};
pub use mixture::MixtureSceptic;

/// Default cap on the horizon searched for an affinity certificate.
pub const DEFAULT_MAX_HORIZON: usize = 64;
/// Default number of mixture components.
pub const DEFAULT_COMPONENTS: usize = 20;

pub trait Sceptic<T: Scalar> {
    /// Orders against Forecasters I and II for the current step. Called once
    /// per step, after the forecasts are announced.
    fn decide(&mut self, state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)>;

    /// Number of sub-strategies currently holding a position.
    fn active_count(&self) -> usize {
        0
    }

    /// Indices of sub-strategies that opened a position in the last call to
    /// [`Sceptic::decide`].
    fn last_bettors(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// Never bets.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullSceptic;

impl<T: Scalar> Sceptic<T> for NullSceptic {
    fn decide(&mut self, _state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)> {
        Ok((BetOrder::new(), BetOrder::new()))
    }
}

pub(crate) fn check_epsilon<T: Scalar>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("epsilon {epsilon} outside (0, 1)")))
    }
}

/// Smallest `m ≤ max_horizon` with `H_m(P, Q) < 1 - ε`, if any.
///
/// A returned `m` certifies that the full-sequence affinity is below
/// `1 - ε`; `None` means it is not, or that the certificate lies beyond
/// `max_horizon` (or beyond the enumeration budget).
pub fn find_horizon<T: Scalar>(
    p: &Measure<T>,
    q: &Measure<T>,
    epsilon: T,
    max_horizon: usize,
) -> Result<Option<usize>> {
    check_epsilon(epsilon)?;
    let mut profile = AffinityProfile::new(p, q, max_horizon, &Evaluator::default())?;
    Ok(profile.smallest_below(T::one() - epsilon))
}

/// Density-ratio forward staking `capital` against `own`:
/// pays `capital · √(other(x) / own(x)) / H_m` on the block `x ∈ Y^m`.
/// Returns the contract and `H_m`.
pub fn hedge_contract<T: Scalar>(
    own: &Measure<T>,
    other: &Measure<T>,
    horizon: usize,
    capital: T,
    ev: &Evaluator,
) -> Result<(ForwardContract<T>, T)> {
    let affinity = ev.hellinger(own, other, horizon)?;
    if affinity <= T::zero() {
        return Err(Error::DomainError(format!("affinity H_{horizon} vanished")));
    }
    let contract =
        ForwardContract::density_ratio(own.clone(), other.clone(), horizon, capital / affinity)?;
    Ok((contract, affinity))
}

/// The same hedge as explicit stakes `f(x)` on every `x ∈ Y^m`.
pub fn build_hedge<T: Scalar>(
    own: &Measure<T>,
    other: &Measure<T>,
    horizon: usize,
    capital: T,
) -> Result<BetOrder<T>> {
    let ev = Evaluator::default();
    let (contract, _) = hedge_contract(own, other, horizon, capital, &ev)?;
    BetOrder::from_stakes(contract.expand(ev.budget)?)
}
