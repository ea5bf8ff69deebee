use super::{EpsilonComponent, Sceptic, DEFAULT_COMPONENTS, DEFAULT_MAX_HORIZON};
use crate::error::{Error, Result};
use crate::metrics::AffinityProfile;
use crate::protocol::{BetOrder, ProtocolState, Side};
use crate::scalar::Scalar;

/// Weighted mixture of fixed-`ε` components. The weight not allotted to any
/// component is kept as cash on each side.
#[derive(Debug, Clone)]
pub struct MixtureSceptic<T> {
    components: Vec<EpsilonComponent<T>>,
    weights: Vec<T>,
    reserve: T,
    max_horizon: usize,
    last_bettors: Vec<usize>,
}

impl<T: Scalar> MixtureSceptic<T> {
    /// Components `ε_j = 2^{-j}` with weights `2^{-j}`, `j = 1..=J`.
    pub fn new(components: usize, max_horizon: usize) -> Result<Self> {
        if components == 0 {
            return Err(Error::Config("mixture needs at least one component".into()));
        }
        let schedule = (1..=components)
            .map(|j| {
                let w = T::lit(0.5).powi(j as i32);
                (w, w)
            })
            .collect();
        Self::with_schedule(schedule, max_horizon)
    }

    /// Arbitrary `(ε, weight)` pairs; the weights must sum to at most 1.
    pub fn with_schedule(schedule: Vec<(T, T)>, max_horizon: usize) -> Result<Self> {
        if max_horizon == 0 {
            return Err(Error::Config("M_max must be at least 1".into()));
        }
        let mut components = Vec::with_capacity(schedule.len());
        let mut weights = Vec::with_capacity(schedule.len());
        for (eps, w) in schedule {
            if w.is_nan() || w < T::zero() {
                return Err(Error::Config(format!("negative mixture weight {w}")));
            }
            components.push(EpsilonComponent::new(eps)?);
            weights.push(w);
        }
        let total: T = weights.iter().copied().sum();
        let reserve = T::one() - total;
        if reserve < -T::normalization_tol() {
            return Err(Error::Config(format!("mixture weights sum to {total} > 1")));
        }
        Ok(Self {
            components,
            weights,
            reserve: reserve.max(T::zero()),
            max_horizon,
            last_bettors: Vec::new(),
        })
    }

    pub fn standard() -> Result<Self> {
        Self::new(DEFAULT_COMPONENTS, DEFAULT_MAX_HORIZON)
    }

    pub fn components(&self) -> &[EpsilonComponent<T>] {
        &self.components
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn reserve(&self) -> T {
        self.reserve
    }

    pub fn max_horizon(&self) -> usize {
        self.max_horizon
    }

    /// `reserve + Σ_j w_j · K_j`, with each component's open hedge marked at
    /// the current forecasts.
    pub fn capital(&self, side: Side, state: &ProtocolState<T>) -> Result<T> {
        let mut total = self.reserve;
        for (c, &w) in self.components.iter().zip(&self.weights) {
            total = total + w * c.marked_capital(side, state)?;
        }
        Ok(total)
    }

    /// Records cycles whose blocks have been fully observed.
    pub fn settle_expired(&mut self, state: &ProtocolState<T>) -> Result<()> {
        for c in &mut self.components {
            c.settle_expired(state)?;
        }
        Ok(())
    }

    /// One mixture step: every component sees the same affinity profile of
    /// the current forecasts.
    pub fn step(&mut self, state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)> {
        let forecasts = state.forecasts();
        let mut profile = AffinityProfile::new(
            &forecasts.first,
            &forecasts.second,
            self.max_horizon,
            state.evaluator(),
        )?;
        let mut first = BetOrder::new();
        let mut second = BetOrder::new();
        self.last_bettors.clear();
        for (j, (c, &w)) in self.components.iter_mut().zip(&self.weights).enumerate() {
            let before = c.bet_steps().len();
            let (a, b) = c.step_with_profile(state, &mut profile)?;
            if c.bet_steps().len() > before {
                self.last_bettors.push(j);
            }
            if !a.is_zero() {
                first.merge(a.scaled(w));
            }
            if !b.is_zero() {
                second.merge(b.scaled(w));
            }
        }
        Ok((first, second))
    }
}

impl<T: Scalar> Sceptic<T> for MixtureSceptic<T> {
    fn decide(&mut self, state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)> {
        self.step(state)
    }

    fn active_count(&self) -> usize {
        self.components.iter().filter(|c| !c.is_idle()).count()
    }

    fn last_bettors(&self) -> Vec<usize> {
        self.last_bettors.clone()
    }
}
