use super::Sceptic;
use crate::error::{Error, Result};
use crate::protocol::{BetOrder, ProtocolState, Side};
use crate::scalar::Scalar;

/// Accounts `k = 1..=accounts` get weight `2^{-k}` and freeze once the base
/// capital reaches `2^k`; the leftover `2^{-accounts}` is held as cash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LimWrapConfig {
    pub accounts: usize,
}

impl Default for LimWrapConfig {
    fn default() -> Self {
        Self { accounts: 30 }
    }
}

impl LimWrapConfig {
    pub fn weight<T: Scalar>(&self, k: usize) -> T {
        T::lit(0.5).powi(k as i32)
    }

    pub fn threshold<T: Scalar>(&self, k: usize) -> T {
        T::lit(2.0).powi(k as i32)
    }

    pub fn reserve<T: Scalar>(&self) -> T {
        self.weight(self.accounts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedPoint<T> {
    pub capital: T,
    pub frozen: usize,
}

/// Frozen-account bookkeeping for one side.
#[derive(Debug, Clone)]
struct Accounts<T> {
    frozen: Vec<Option<T>>,
}

impl<T: Scalar> Accounts<T> {
    fn new(cfg: &LimWrapConfig) -> Self {
        Self { frozen: vec![None; cfg.accounts] }
    }

    /// Freezes every account whose threshold `base` has reached; returns the
    /// total weight frozen now.
    fn freeze(&mut self, cfg: &LimWrapConfig, base: T) -> T {
        let mut newly = T::zero();
        for (i, slot) in self.frozen.iter_mut().enumerate() {
            let k = i + 1;
            if slot.is_none() && base >= cfg.threshold(k) {
                let w: T = cfg.weight(k);
                *slot = Some(w * base);
                newly = newly + w;
            }
        }
        newly
    }

    fn active_weight(&self, cfg: &LimWrapConfig) -> T {
        self.frozen
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_none())
            .map(|(i, _)| cfg.weight::<T>(i + 1))
            .sum()
    }

    fn frozen_count(&self) -> usize {
        self.frozen.iter().filter(|f| f.is_some()).count()
    }

    fn wrapped(&self, cfg: &LimWrapConfig, base: T) -> T {
        let held: T = self.frozen.iter().flatten().copied().sum();
        cfg.reserve::<T>() + held + self.active_weight(cfg) * base
    }
}

/// Wrapped capital along a base capital path (`path[0]` is the initial
/// capital, normally 1).
pub fn wrap_capital_path<T: Scalar>(path: &[T], cfg: &LimWrapConfig) -> Vec<WrappedPoint<T>> {
    let mut acc = Accounts::new(cfg);
    path.iter()
        .map(|&k| {
            acc.freeze(cfg, k);
            WrappedPoint {
                capital: acc.wrapped(cfg, k),
                frozen: acc.frozen_count(),
            }
        })
        .collect()
}

/// Runs `base` on a private copy of the protocol at unit capital and trades
/// the scaled positions of the accounts still active.
#[derive(Debug, Clone)]
pub struct LimWrap<T, S> {
    base: S,
    cfg: LimWrapConfig,
    shadow: Option<ProtocolState<T>>,
    accounts: [Accounts<T>; 2],
}

impl<T: Scalar, S: Sceptic<T>> LimWrap<T, S> {
    pub fn new(base: S, cfg: LimWrapConfig) -> Self {
        Self {
            base,
            cfg,
            shadow: None,
            accounts: [Accounts::new(&cfg), Accounts::new(&cfg)],
        }
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn config(&self) -> &LimWrapConfig {
        &self.cfg
    }

    pub fn base_mut(&mut self) -> &mut S {
        &mut self.base
    }

    /// The unwrapped strategy's protocol state.
    pub fn shadow(&self) -> Option<&ProtocolState<T>> {
        self.shadow.as_ref()
    }

    pub fn frozen_count(&self, side: Side) -> usize {
        self.accounts[index(side)].frozen_count()
    }

    /// Wrapped capital computed from the shadow capital (current as of the
    /// last [`LimWrap::sync`]).
    pub fn wrapped_capital(&self, side: Side) -> T {
        let base = self.shadow.as_ref().map_or(T::one(), |s| s.capital(side));
        self.accounts[index(side)].wrapped(&self.cfg, base)
    }

    /// Brings the shadow state up to `state`'s step. Idempotent within a step.
    pub fn sync(&mut self, state: &ProtocolState<T>) -> Result<()> {
        let shadow = match &mut self.shadow {
            None => {
                if state.step() != 1 {
                    return Err(Error::PhaseError("lim_wrap must start at step 1".into()));
                }
                self.shadow = Some(ProtocolState::with_evaluator(
                    state.forecasts(),
                    *state.evaluator(),
                )?);
                return Ok(());
            }
            Some(s) => s,
        };
        if shadow.step() == state.step() {
            return Ok(());
        }
        if shadow.step() + 1 != state.step() {
            return Err(Error::PhaseError(format!(
                "lim_wrap at step {} but shadow at step {}",
                state.step(),
                shadow.step()
            )));
        }
        let y = state.history()[shadow.step() - 1];
        shadow.settle_step(y, state.forecasts())
    }

    fn liquidation(shadow: &ProtocolState<T>, side: Side, weight: T) -> Result<BetOrder<T>> {
        let p = shadow.portfolio(side);
        let mut order = BetOrder::new();
        for (x, &s) in p.contracts() {
            order.add_stake(x.clone(), -weight * s)?;
        }
        for f in p.forwards() {
            order.add_forward(f.scaled(-weight));
        }
        Ok(order)
    }
}

fn index(side: Side) -> usize {
    match side {
        Side::I => 0,
        Side::II => 1,
    }
}

impl<T: Scalar, S: Sceptic<T>> Sceptic<T> for LimWrap<T, S> {
    fn decide(&mut self, state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)> {
        self.sync(state)?;
        let shadow = self.shadow.as_mut().expect("synced");
        let mut out = [BetOrder::new(), BetOrder::new()];
        for side in Side::BOTH {
            let acc = &mut self.accounts[index(side)];
            let newly = acc.freeze(&self.cfg, shadow.capital(side));
            if newly > T::zero() {
                out[index(side)] = Self::liquidation(shadow, side, newly)?;
            }
        }
        let (first, second) = self.base.decide(shadow)?;
        for (side, order) in Side::BOTH.into_iter().zip([first, second]) {
            let w = self.accounts[index(side)].active_weight(&self.cfg);
            if !order.is_zero() && w > T::zero() {
                out[index(side)].merge(order.scaled(w));
            }
            shadow.place_order(side, order)?;
        }
        let [a, b] = out;
        Ok((a, b))
    }

    fn active_count(&self) -> usize {
        self.base.active_count()
    }

    fn last_bettors(&self) -> Vec<usize> {
        self.base.last_bettors()
    }
}
