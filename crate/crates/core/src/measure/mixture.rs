use super::{Measure, Symbol};
use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogSumExp};
use crate::scalar::Scalar;

/// Finite Bayesian mixture of measures over a common alphabet.
///
/// Weights are stored as log posterior weights, so conditioning only
/// re-weights and conditions the components.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture<T> {
    log_weights: Vec<T>,
    components: Vec<Measure<T>>,
}

impl<T: Scalar> Mixture<T> {
    pub fn new(weights: Vec<T>, components: Vec<Measure<T>>) -> Result<Self> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(Error::InvalidDistribution(format!(
                "mixture: {} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::InvalidDistribution("mixture: negative weight".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::normalization_tol() {
            return Err(Error::InvalidDistribution(format!(
                "mixture: weights sum to {total}"
            )));
        }
        let a = components[0].alphabet_size();
        if components.iter().any(|c| c.alphabet_size() != a) {
            return Err(Error::InvalidDistribution(
                "mixture: components disagree on alphabet".into(),
            ));
        }
        let (log_weights, components) = weights
            .into_iter()
            .zip(components)
            .filter(|(w, _)| *w > T::zero())
            .map(|(w, c)| ((w / total).ln(), c))
            .unzip();
        Ok(Self {
            log_weights,
            components,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.components[0].alphabet_size()
    }

    pub fn components(&self) -> &[Measure<T>] {
        &self.components
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    fn posterior(&self, history: &[Symbol]) -> Vec<T> {
        let joint: Vec<T> = self
            .log_weights
            .iter()
            .zip(&self.components)
            .map(|(&lw, c)| lw + c.log_prob_unchecked(history))
            .collect();
        let norm = log_sum_exp(joint.iter().copied());
        joint.into_iter().map(|l| l - norm).collect()
    }

    pub(crate) fn one_step(&self, history: &[Symbol]) -> Vec<T> {
        let post = if history.is_empty() {
            self.log_weights.clone()
        } else {
            self.posterior(history)
        };
        let mut out = vec![T::zero(); self.alphabet_size()];
        for (lw, c) in post.iter().zip(&self.components) {
            let w = lw.exp();
            for (o, p) in out.iter_mut().zip(c.one_step_unchecked(history)) {
                *o = *o + w * p;
            }
        }
        out
    }

    pub(crate) fn log_prob(&self, x: &[Symbol]) -> T {
        self.log_weights
            .iter()
            .zip(&self.components)
            .map(|(&lw, c)| lw + c.log_prob_unchecked(x))
            .collect::<LogSumExp<T>>()
            .value()
    }

    pub(crate) fn condition_on(&self, prefix: &[Symbol]) -> Self {
        Self {
            log_weights: self.posterior(prefix),
            components: self
                .components
                .iter()
                .map(|c| c.condition_unchecked(prefix))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::measure::Measure;
    use approx::assert_relative_eq;

    fn mix() -> Measure<f64> {
        Measure::mixture(
            vec![0.3, 0.7],
            vec![
                Measure::bernoulli(0.1).unwrap(),
                Measure::bernoulli(0.8).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn one_step_is_posterior_average() {
        let m = mix();
        let p = m.one_step(&[]).unwrap();
        assert_relative_eq!(p[1], 0.3 * 0.1 + 0.7 * 0.8, epsilon = 1e-15);
        let w1 = 0.3 * 0.1;
        let w2 = 0.7 * 0.8;
        let p = m.one_step(&[1]).unwrap();
        assert_relative_eq!(p[1], (w1 * 0.1 + w2 * 0.8) / (w1 + w2), epsilon = 1e-15);
    }

    #[test]
    fn conditioning_matches_cylinder_ratio() {
        let m = mix();
        let c = m.condition_on(&[1, 0, 1]).unwrap();
        let lhs = c.cylinder_log_prob(&[0, 1]).unwrap();
        let rhs = m.cylinder_log_prob(&[1, 0, 1, 0, 1]).unwrap()
            - m.cylinder_log_prob(&[1, 0, 1]).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn zero_weights_dropped() {
        let m = Measure::mixture(
            vec![0.0, 1.0],
            vec![
                Measure::bernoulli(0.1).unwrap(),
                Measure::bernoulli(0.8).unwrap(),
            ],
        )
        .unwrap();
        match m {
            Measure::Mixture(mx) => assert_eq!(mx.components().len(), 1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let comps = vec![Measure::bernoulli(0.1).unwrap(), Measure::bernoulli(0.8).unwrap()];
        assert!(Measure::mixture(vec![0.5, 0.6], comps.clone()).is_err());
        assert!(Measure::mixture(vec![1.0], comps).is_err());
    }
}
