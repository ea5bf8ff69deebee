use super::{check_epsilon, hedge_contract, Sceptic};
use crate::error::Result;
use crate::metrics::{AffinityProfile, Evaluator};
use crate::protocol::{BetOrder, ForecastPair, ForwardContract, ProtocolState, Settlement, Side};
use crate::scalar::Scalar;

/// An open hedge cycle.
#[derive(Debug, Clone)]
pub struct Holding<T> {
    /// Step at which the hedge was bought; it covers observations
    /// `start..start + horizon`.
    pub start: usize,
    pub horizon: usize,
    pub affinity: T,
    pub forecasts: ForecastPair<T>,
}

/// A completed hedge cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle<T> {
    pub start: usize,
    pub horizon: usize,
    pub affinity: T,
    /// Natural-log capital multipliers for sides I and II.
    pub log_multipliers: [T; 2],
}

impl<T: Scalar> Cycle<T> {
    /// `ln √(mult_I · mult_II)`, which equals `-ln H_m` on every block.
    pub fn log_geometric_multiplier(&self) -> T {
        (self.log_multipliers[0] + self.log_multipliers[1]) * T::lit(0.5)
    }
}

/// Fixed-`ε` gambling routine with its own capitals (both start at 1).
#[derive(Debug, Clone)]
pub struct EpsilonComponent<T> {
    epsilon: T,
    holding: Option<Holding<T>>,
    log_capital: [T; 2],
    cycles: Vec<Cycle<T>>,
    bet_steps: Vec<usize>,
}

impl<T: Scalar> EpsilonComponent<T> {
    pub fn new(epsilon: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            holding: None,
            log_capital: [T::zero(); 2],
            cycles: Vec::new(),
            bet_steps: Vec::new(),
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn holding(&self) -> Option<&Holding<T>> {
        self.holding.as_ref()
    }

    pub fn is_idle(&self) -> bool {
        self.holding.is_none()
    }

    pub fn cycles(&self) -> &[Cycle<T>] {
        &self.cycles
    }

    /// Steps at which this component bought hedges.
    pub fn bet_steps(&self) -> &[usize] {
        &self.bet_steps
    }

    /// Component capital as of the last completed cycle.
    pub fn capital(&self, side: Side) -> T {
        self.log_capital(side).exp()
    }

    pub fn log_capital(&self, side: Side) -> T {
        self.log_capital[side_index(side)]
    }

    fn contract(&self, holding: &Holding<T>, side: Side, ev: &Evaluator) -> Result<ForwardContract<T>> {
        let own = holding.forecasts.get(side);
        let other = holding.forecasts.get(side.opposite());
        let (c, _) = hedge_contract(own, other, holding.horizon, self.capital(side), ev)?;
        Ok(c)
    }

    /// Capital including the marked value of an open hedge at `state`.
    pub fn marked_capital(&self, side: Side, state: &ProtocolState<T>) -> Result<T> {
        let Some(h) = &self.holding else {
            return Ok(self.capital(side));
        };
        let mut contract = self.contract(h, side, state.evaluator())?;
        let seen = &state.history()[h.start - 1..];
        for &y in seen.iter().take(h.horizon) {
            match contract.settle(y) {
                Settlement::Paid(v) => return Ok(v),
                Settlement::Rolled(rest) => contract = rest,
            }
        }
        contract.price(state.forecast(side), state.evaluator())
    }

    /// Closes the open hedge if its block has been fully observed. Called
    /// automatically at the start of each step; call it once more after the
    /// final observation to record a cycle that ends there.
    pub fn settle_expired(&mut self, state: &ProtocolState<T>) -> Result<()> {
        let Some(h) = &self.holding else {
            return Ok(());
        };
        if state.step() < h.start + h.horizon {
            return Ok(());
        }
        let block = &state.history()[h.start - 1..h.start - 1 + h.horizon];
        let lp_first = h.forecasts.first.cylinder_log_prob(block)?;
        let lp_second = h.forecasts.second.cylinder_log_prob(block)?;
        let half = T::lit(0.5);
        let ln_h = h.affinity.ln();
        let mult = [
            half * (lp_second - lp_first) - ln_h,
            half * (lp_first - lp_second) - ln_h,
        ];
        for (cap, m) in self.log_capital.iter_mut().zip(mult) {
            *cap = *cap + m;
        }
        self.cycles.push(Cycle {
            start: h.start,
            horizon: h.horizon,
            affinity: h.affinity,
            log_multipliers: mult,
        });
        self.holding = None;
        Ok(())
    }

    /// One step of the routine using a shared affinity profile of the
    /// current forecasts. Returns unscaled orders (zero unless a hedge is
    /// opened now).
    pub fn step_with_profile(
        &mut self,
        state: &ProtocolState<T>,
        profile: &mut AffinityProfile<'_, T>,
    ) -> Result<(BetOrder<T>, BetOrder<T>)> {
        self.settle_expired(state)?;
        if self.holding.is_some() {
            return Ok((BetOrder::new(), BetOrder::new()));
        }
        let Some(horizon) = profile.smallest_below(T::one() - self.epsilon) else {
            return Ok((BetOrder::new(), BetOrder::new()));
        };
        let affinity = profile.get(horizon)?;
        let holding = Holding {
            start: state.step(),
            horizon,
            affinity,
            forecasts: state.forecasts(),
        };
        let mut orders = [BetOrder::new(), BetOrder::new()];
        for side in Side::BOTH {
            let own = holding.forecasts.get(side);
            let other = holding.forecasts.get(side.opposite());
            let contract = ForwardContract::density_ratio(
                own.clone(),
                other.clone(),
                horizon,
                self.capital(side) / affinity,
            )?;
            orders[side_index(side)].add_forward(contract);
        }
        self.holding = Some(holding);
        self.bet_steps.push(state.step());
        let [first, second] = orders;
        Ok((first, second))
    }

    /// One step with a private profile capped at `max_horizon`.
    pub fn step(
        &mut self,
        state: &ProtocolState<T>,
        max_horizon: usize,
    ) -> Result<(BetOrder<T>, BetOrder<T>)> {
        let f = state.forecasts();
        let mut profile = AffinityProfile::new(&f.first, &f.second, max_horizon, state.evaluator())?;
        self.step_with_profile(state, &mut profile)
    }
}

fn side_index(side: Side) -> usize {
    match side {
        Side::I => 0,
        Side::II => 1,
    }
}

/// A lone component trading its whole capital, with a fixed horizon cap.
#[derive(Debug, Clone)]
pub struct SingleComponent<T> {
    pub component: EpsilonComponent<T>,
    pub max_horizon: usize,
    last_bet: bool,
}

impl<T: Scalar> SingleComponent<T> {
    pub fn new(epsilon: T, max_horizon: usize) -> Result<Self> {
        Ok(Self {
            component: EpsilonComponent::new(epsilon)?,
            max_horizon,
            last_bet: false,
        })
    }
}

impl<T: Scalar> Sceptic<T> for SingleComponent<T> {
    fn decide(&mut self, state: &ProtocolState<T>) -> Result<(BetOrder<T>, BetOrder<T>)> {
        let before = self.component.bet_steps().len();
        let out = self.component.step(state, self.max_horizon)?;
        self.last_bet = self.component.bet_steps().len() > before;
        Ok(out)
    }

    fn active_count(&self) -> usize {
        usize::from(!self.component.is_idle())
    }

    fn last_bettors(&self) -> Vec<usize> {
        if self.last_bet {
            vec![0]
        } else {
            Vec::new()
        }
    }
}
