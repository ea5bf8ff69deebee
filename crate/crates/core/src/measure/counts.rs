use super::{Measure, Symbol};
use crate::logspace::LogSumExp;
use crate::scalar::Scalar;

/// Log-probability of a single string as a function of its symbol counts,
/// for exchangeable measures, tabulated for strings up to a fixed length.
#[derive(Debug, Clone)]
pub enum CountModel<T> {
    Iid {
        log_probs: Vec<T>,
    },
    /// Dirichlet-categorical: `rising[y][c] = ln(a_y (a_y+1) ... (a_y+c-1))`.
    Learner {
        rising: Vec<Vec<T>>,
        total_rising: Vec<T>,
    },
    Mixture {
        log_weights: Vec<T>,
        components: Vec<CountModel<T>>,
    },
    /// Base model evaluated at `offset + counts`, normalized by `offset`.
    Shifted {
        base: Box<CountModel<T>>,
        offset: Vec<usize>,
        base_log_prob: T,
    },
}

fn rising_table<T: Scalar>(a: T, n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for i in 0..n {
        acc = acc + (a + T::from_count(i)).ln();
        out.push(acc);
    }
    out
}

impl<T: Scalar> CountModel<T> {
    pub(crate) fn build(measure: &Measure<T>, max_len: usize) -> Option<Self> {
        match measure {
            Measure::Iid(m) => Some(Self::Iid {
                log_probs: m.probs().iter().map(|p| p.ln()).collect(),
            }),
            Measure::Markov(m) if m.order() == 0 => Some(Self::Iid {
                log_probs: m.one_step(&[]).into_iter().map(|p| p.ln()).collect(),
            }),
            Measure::Markov(_) => None,
            Measure::Learner(m) => {
                let a = m.pseudo_counts();
                let total: T = a.iter().copied().sum();
                Some(Self::Learner {
                    rising: a.iter().map(|&ay| rising_table(ay, max_len)).collect(),
                    total_rising: rising_table(total, max_len),
                })
            }
            Measure::Mixture(m) => {
                let components = m
                    .components()
                    .iter()
                    .map(|c| Self::build(c, max_len))
                    .collect::<Option<Vec<_>>>()?;
                Some(Self::Mixture {
                    log_weights: m.log_weights().to_vec(),
                    components,
                })
            }
            Measure::Conditioned(m) => {
                let prefix: &[Symbol] = m.prefix();
                let base = Self::build(m.base(), max_len + prefix.len())?;
                let mut offset = vec![0; measure.alphabet_size()];
                for &y in prefix {
                    offset[y] += 1;
                }
                let base_log_prob = base.log_prob(&offset);
                Some(Self::Shifted {
                    base: Box::new(base),
                    offset,
                    base_log_prob,
                })
            }
        }
    }

    /// `ln P(x)` for any string `x` with symbol counts `counts`.
    pub fn log_prob(&self, counts: &[usize]) -> T {
        match self {
            Self::Iid { log_probs } => counts
                .iter()
                .zip(log_probs)
                .map(|(&c, &lp)| if c == 0 { T::zero() } else { T::from_count(c) * lp })
                .sum(),
            Self::Learner {
                rising,
                total_rising,
            } => {
                let n: usize = counts.iter().sum();
                let num: T = counts.iter().zip(rising).map(|(&c, r)| r[c]).sum();
                num - total_rising[n]
            }
            Self::Mixture {
                log_weights,
                components,
            } => log_weights
                .iter()
                .zip(components)
                .map(|(&lw, c)| lw + c.log_prob(counts))
                .collect::<LogSumExp<T>>()
                .value(),
            Self::Shifted {
                base,
                offset,
                base_log_prob,
            } => {
                let shifted: Vec<usize> = counts.iter().zip(offset).map(|(c, o)| c + o).collect();
                base.log_prob(&shifted) - *base_log_prob
            }
        }
    }
}
