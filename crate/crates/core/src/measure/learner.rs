use super::Symbol;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sequential Dirichlet-categorical predictor.
///
/// Predicts symbol `y` after a history with counts `n_y` as
/// `(a_y + n_y) / (Σa + n)`. With prior `(1/2, 1/2)` this is the
/// Krichevsky–Trofimov estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaLearner<T> {
    pseudo: Vec<T>,
}

impl<T: Scalar> BetaLearner<T> {
    pub fn new(pseudo_counts: Vec<T>) -> Result<Self> {
        if pseudo_counts.is_empty() {
            return Err(Error::InvalidDistribution("learner: empty prior".into()));
        }
        if let Some(a) = pseudo_counts.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidDistribution(format!("learner: pseudo-count {a}")));
        }
        if let Some(a) = pseudo_counts.iter().find(|a| **a <= T::zero()) {
            return Err(Error::CromwellViolation(format!(
                "learner: pseudo-count {a} gives zero predictive probability"
            )));
        }
        Ok(Self { pseudo: pseudo_counts })
    }

    pub fn alphabet_size(&self) -> usize {
        self.pseudo.len()
    }

    /// Current pseudo-counts (prior plus everything conditioned on).
    pub fn pseudo_counts(&self) -> &[T] {
        &self.pseudo
    }

    fn counts_with(&self, history: &[Symbol]) -> Vec<T> {
        let mut c = self.pseudo.clone();
        for &y in history {
            c[y] = c[y] + T::one();
        }
        c
    }

    pub(crate) fn one_step(&self, history: &[Symbol]) -> Vec<T> {
        let c = self.counts_with(history);
        let total: T = c.iter().copied().sum();
        c.into_iter().map(|a| a / total).collect()
    }

    pub(crate) fn log_prob(&self, x: &[Symbol]) -> T {
        let mut c = self.pseudo.clone();
        let mut total: T = c.iter().copied().sum();
        let mut lp = T::zero();
        for &y in x {
            lp = lp + (c[y] / total).ln();
            c[y] = c[y] + T::one();
            total = total + T::one();
        }
        lp
    }

    pub(crate) fn condition_on(&self, prefix: &[Symbol]) -> Self {
        Self {
            pseudo: self.counts_with(prefix),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::measure::Measure;
    use approx::assert_relative_eq;

    #[test]
    fn kt_posterior_predictive() {
        let m = Measure::beta_learner(vec![0.5, 0.5]).unwrap();
        let p = m.one_step(&[1, 1]).unwrap();
        assert_relative_eq!(p[1], 2.5 / 3.0, epsilon = 1e-15);
        let c = m.condition_on(&[1, 1]).unwrap();
        assert_relative_eq!(c.one_step(&[]).unwrap()[1], 2.5 / 3.0, epsilon = 1e-15);
    }

    /// Bayes mixture over a fine grid of Bernoulli parameters with the
    /// Beta(1/2, 1/2) prior density, integrated by the midpoint rule after the
    /// substitution `θ = sin²(u)` that removes the endpoint singularities.
    #[test]
    fn predictive_matches_grid_bayes_mixture() {
        let grid = 200_000;
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for i in 0..grid {
            let u = (i as f64 + 0.5) / grid as f64 * std::f64::consts::FRAC_PI_2;
            let theta = u.sin().powi(2);
            // Beta(1/2,1/2) density dθ = (2/π) du after the substitution
            let like = theta * theta;
            den += like;
            num += like * theta;
        }
        assert!((num / den - 2.5 / 3.0).abs() < 1e-9);
        let m = Measure::beta_learner(vec![0.5, 0.5]).unwrap();
        assert!((m.one_step(&[1, 1]).unwrap()[1] - num / den).abs() < 1e-9);
    }

    #[test]
    fn exchangeable_log_prob() {
        let m = Measure::beta_learner(vec![1.0, 2.0, 0.5]).unwrap();
        let a = m.cylinder_log_prob(&[0, 1, 2, 1]).unwrap();
        let b = m.cylinder_log_prob(&[1, 1, 2, 0]).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-14);
    }
}
