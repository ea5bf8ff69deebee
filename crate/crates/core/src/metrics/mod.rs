//! Horizon-`m` Hellinger affinity and total variation between measures.
//!
//! `H_m(P, Q) = Σ_{x ∈ Y^m} √(P(x) Q(x))` and
//! `TV_m(P, Q) = Σ_{x ∈ Y^m} |P(x) - Q(x)|`, both accumulated in log space.
//! `H_m` is non-increasing in `m` and converges to the affinity of the full
//! measures, so any `m` with `H_m < c` certifies `H < c`.

mod power_sum;
mod profile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{log_abs_diff, log_factorials, LogSumExp};
use crate::measure::Measure;
use crate::scalar::Scalar;

pub use power_sum::{log_power_sum, log_power_sum_profile, Term};
pub use profile::AffinityProfile;

pub(crate) use power_sum::{count_classes, enumerate_walk, for_each_composition, log_multinomial};

/// Default cap on the number of strings an enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dynamic programming when eligible, enumeration otherwise.
    #[default]
    Auto,
    Enumerate,
    /// Shared-context recursion for finite-memory measures, or count-class
    /// sums for exchangeable ones.
    Dp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluator {
    pub method: Method,
    pub budget: u128,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Evaluator {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn hellinger<T: Scalar>(&self, p: &Measure<T>, q: &Measure<T>, m: usize) -> Result<T> {
        let half = T::lit(0.5);
        let lv = log_power_sum(&[Term::new(p, half), Term::new(q, half)], m, self)?;
        Ok(lv.exp().min(T::one()).max(T::zero()))
    }

    pub fn total_variation<T: Scalar>(
        &self,
        p: &Measure<T>,
        q: &Measure<T>,
        m: usize,
    ) -> Result<T> {
        if p.alphabet_size() != q.alphabet_size() {
            return Err(Error::DomainError("measures disagree on alphabet size".into()));
        }
        let a = p.alphabet_size();
        let use_counts =
            self.method != Method::Enumerate && p.is_exchangeable() && q.is_exchangeable();
        let lv = if use_counts {
            match count_classes(a, m) {
                Some(n) if n <= self.budget => {}
                other => {
                    return Err(Error::BudgetExceeded {
                        terms: other.unwrap_or(u128::MAX),
                        budget: self.budget,
                    })
                }
            }
            let (mp, mq) = match (p.count_model(m), q.count_model(m)) {
                (Some(mp), Some(mq)) => (mp, mq),
                _ => unreachable!("exchangeable measures have count models"),
            };
            let lf = log_factorials::<T>(m);
            let mut acc = LogSumExp::new();
            for_each_composition(a, m, |c| {
                acc.add(log_multinomial(&lf, c) + log_abs_diff(mp.log_prob(c), mq.log_prob(c)));
            });
            acc.value()
        } else {
            let mut acc = LogSumExp::new();
            enumerate_walk(&[p, q], m, self.budget, |depth, logs| {
                if depth == m {
                    acc.add(log_abs_diff(logs[0], logs[1]));
                }
            })?;
            acc.value()
        };
        Ok(lv.exp().min(T::lit(2.0)).max(T::zero()))
    }
}

/// `H_m(P, Q)` with the default enumeration budget.
pub fn hellinger_restricted<T: Scalar>(
    p: &Measure<T>,
    q: &Measure<T>,
    m: usize,
    method: Method,
) -> Result<T> {
    Evaluator::with_method(method).hellinger(p, q, m)
}

/// `TV_m(P, Q)` in `[0, 2]`.
pub fn tv_restricted<T: Scalar>(p: &Measure<T>, q: &Measure<T>, m: usize) -> Result<T> {
    Evaluator::default().total_variation(p, q, m)
}

/// The interval `[2(1-h), √(8(1-h))]` that must contain the total variation
/// of any pair with Hellinger affinity `h`.
pub fn hellinger_tv_bounds<T: Scalar>(h: T) -> Result<(T, T)> {
    if !(h >= T::zero() && h <= T::one()) {
        return Err(Error::DomainError(format!("affinity {h} outside [0, 1]")));
    }
    let gap = T::one() - h;
    Ok((T::lit(2.0) * gap, (T::lit(8.0) * gap).sqrt()))
}
