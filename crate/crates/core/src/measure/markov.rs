use std::sync::Arc;

use super::{validate_distribution, Measure, Symbol};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Order-`k` Markov chain over a finite alphabet.
///
/// Contexts are indexed base `A` with the oldest symbol most significant.
/// A chain either starts from its initial block law or, once conditioned on
/// at least `k` symbols, from a fixed context.
#[derive(Debug, Clone, PartialEq)]
pub struct Markov<T> {
    alphabet: usize,
    order: usize,
    transitions: Arc<[T]>,
    initial: Arc<[T]>,
    context: Option<usize>,
}

fn pow(a: usize, k: usize) -> Option<usize> {
    a.checked_pow(u32::try_from(k).ok()?)
}

impl<T: Scalar> Markov<T> {
    pub fn new(order: usize, transitions: Vec<Vec<T>>, initial: Vec<T>) -> Result<Self> {
        let alphabet = transitions
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDistribution("markov: no transition rows".into()))?;
        let rows = pow(alphabet, order)
            .ok_or_else(|| Error::DomainError(format!("markov: order {order} too large")))?;
        if transitions.len() != rows {
            return Err(Error::InvalidDistribution(format!(
                "markov: expected {rows} transition rows for order {order}, got {}",
                transitions.len()
            )));
        }
        if initial.len() != rows {
            return Err(Error::InvalidDistribution(format!(
                "markov: initial law must have {rows} entries, got {}",
                initial.len()
            )));
        }
        let mut flat = Vec::with_capacity(rows * alphabet);
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != alphabet {
                return Err(Error::InvalidDistribution(format!(
                    "markov: row {i} has {} entries, expected {alphabet}",
                    row.len()
                )));
            }
            flat.extend(validate_distribution(row, &format!("markov row {i}"))?);
        }
        let initial = validate_distribution(&initial, "markov initial law")?;
        Ok(Self {
            alphabet,
            order,
            transitions: flat.into(),
            initial: initial.into(),
            context: None,
        })
    }

    /// Order-1 chain with the given row-stochastic matrix and first-symbol law.
    pub fn order_one(matrix: Vec<Vec<T>>, initial: Vec<T>) -> Result<Self> {
        Self::new(1, matrix, initial)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn context(&self) -> Option<usize> {
        self.context
    }

    fn rows(&self) -> usize {
        self.transitions.len() / self.alphabet
    }

    fn row(&self, ctx: usize) -> &[T] {
        &self.transitions[ctx * self.alphabet..(ctx + 1) * self.alphabet]
    }

    fn push(&self, ctx: usize, y: Symbol) -> usize {
        if self.order == 0 {
            0
        } else {
            (ctx * self.alphabet + y) % self.rows()
        }
    }

    fn index_of(&self, word: &[Symbol]) -> usize {
        word.iter().fold(0, |acc, &y| acc * self.alphabet + y)
    }

    /// Context reached after `history`, when determined.
    fn context_after(&self, history: &[Symbol]) -> Option<usize> {
        match self.context {
            Some(c) => Some(history.iter().fold(c, |acc, &y| self.push(acc, y))),
            None if history.len() >= self.order => {
                Some(self.index_of(&history[history.len() - self.order..]))
            }
            None => None,
        }
    }

    /// Mass the initial block law gives to blocks starting with `head`.
    fn initial_mass(&self, head: &[Symbol]) -> T {
        let width = pow(self.alphabet, self.order - head.len()).unwrap_or(1);
        let start = self.index_of(head) * width;
        self.initial[start..start + width].iter().copied().sum()
    }

    pub(crate) fn one_step(&self, history: &[Symbol]) -> Vec<T> {
        if let Some(ctx) = self.context_after(history) {
            return self.row(ctx).to_vec();
        }
        let mut head = history.to_vec();
        let total = self.initial_mass(&head);
        (0..self.alphabet)
            .map(|y| {
                head.push(y);
                let m = self.initial_mass(&head);
                head.pop();
                m / total
            })
            .collect()
    }

    pub(crate) fn log_prob(&self, x: &[Symbol]) -> T {
        let mut lp = T::zero();
        let mut i = 0;
        let mut ctx = match self.context {
            Some(c) => c,
            None => {
                let k = self.order.min(x.len());
                lp = self.initial_mass(&x[..k]).ln();
                i = k;
                if k < self.order {
                    return lp;
                }
                self.index_of(&x[..k])
            }
        };
        for &y in &x[i..] {
            lp = lp + self.row(ctx)[y].ln();
            ctx = self.push(ctx, y);
        }
        lp
    }

    pub(crate) fn condition_on(&self, prefix: &[Symbol]) -> Measure<T> {
        match self.context_after(prefix) {
            Some(ctx) => Measure::Markov(Self {
                context: Some(ctx),
                ..self.clone()
            }),
            None => Measure::generic_conditioned(&Measure::Markov(self.clone()), prefix),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain() -> Measure<f64> {
        Measure::markov(1, vec![vec![0.9, 0.1], vec![0.3, 0.7]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn one_step_follows_last_symbol() {
        let m = chain();
        assert_eq!(m.one_step(&[]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(m.one_step(&[0, 1]).unwrap(), vec![0.3, 0.7]);
        assert_eq!(m.one_step(&[1, 0]).unwrap(), vec![0.9, 0.1]);
    }

    #[test]
    fn conditioning_starts_from_last_state() {
        let m = chain();
        let c = m.condition_on(&[0, 1]).unwrap();
        match &c {
            Measure::Markov(mk) => assert_eq!(mk.context(), Some(1)),
            other => panic!("expected a Markov measure, got {other:?}"),
        }
        // cylinder identity by enumeration to depth 4
        for len in 0..=4usize {
            for idx in 0..(1usize << len) {
                let x: Vec<usize> = (0..len).map(|b| (idx >> (len - 1 - b)) & 1).collect();
                let mut full = vec![0, 1];
                full.extend(&x);
                let lhs = c.cylinder_log_prob(&x).unwrap();
                let rhs = m.cylinder_log_prob(&full).unwrap() - m.cylinder_log_prob(&[0, 1]).unwrap();
                assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn order_two_initial_block() {
        let rows = vec![
            vec![0.2, 0.8],
            vec![0.6, 0.4],
            vec![0.5, 0.5],
            vec![0.1, 0.9],
        ];
        let m = Measure::markov(2, rows, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let first = m.one_step(&[]).unwrap();
        assert_relative_eq!(first[0], 0.3, epsilon = 1e-15);
        let second = m.one_step(&[1]).unwrap();
        assert_relative_eq!(second[1], 0.4 / 0.7, epsilon = 1e-15);
        // short prefixes fall back to the generic conditioned form
        let c = m.condition_on(&[1]).unwrap();
        assert!(matches!(c, Measure::Conditioned(_)));
        assert_relative_eq!(
            c.cylinder_log_prob(&[1, 0]).unwrap(),
            m.cylinder_log_prob(&[1, 1, 0]).unwrap() - m.cylinder_log_prob(&[1]).unwrap(),
            epsilon = 1e-14
        );
        // and re-conditioning resolves into a context-started chain
        let cc = c.condition_on(&[0]).unwrap();
        assert!(matches!(cc, Measure::Markov(_)));
        assert_eq!(cc.one_step(&[]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Measure::<f64>::markov(1, vec![vec![1.0, 0.0], vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(Measure::<f64>::markov(1, vec![vec![0.5, 0.5]], vec![0.5, 0.5]).is_err());
        assert!(Measure::<f64>::markov(1, vec![vec![0.5, 0.5]; 2], vec![1.0]).is_err());
    }
}
