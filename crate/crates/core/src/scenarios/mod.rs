//! Forecaster and Reality behaviors, and the named scenario catalog.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{draw, Alphabet, Measure, Symbol};
use crate::protocol::ForecastPair;
use crate::scalar::Scalar;

/// Serializable description of a measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MeasureSpec {
    Iid { probs: Vec<f64> },
    /// IID over `{0, 1}` with `P(1) = p`.
    Bernoulli { p: f64 },
    Markov {
        order: usize,
        transitions: Vec<Vec<f64>>,
        initial: Vec<f64>,
    },
    BetaLearner { pseudo_counts: Vec<f64> },
    Mixture {
        weights: Vec<f64>,
        components: Vec<MeasureSpec>,
    },
}

impl MeasureSpec {
    pub fn build<T: Scalar>(&self) -> Result<Measure<T>> {
        let conv = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        match self {
            MeasureSpec::Iid { probs } => Measure::iid(conv(probs)),
            MeasureSpec::Bernoulli { p } => Measure::bernoulli(T::lit(*p)),
            MeasureSpec::Markov {
                order,
                transitions,
                initial,
            } => Measure::markov(
                *order,
                transitions.iter().map(|r| conv(r)).collect(),
                conv(initial),
            ),
            MeasureSpec::BetaLearner { pseudo_counts } => Measure::beta_learner(conv(pseudo_counts)),
            MeasureSpec::Mixture {
                weights,
                components,
            } => {
                let comps = components.iter().map(|c| c.build()).collect::<Result<Vec<_>>>()?;
                Measure::mixture(conv(weights), comps)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterSpec {
    /// Announces the base measure conditioned on the history so far.
    Coherent { measure: MeasureSpec },
    /// Announces the listed measures verbatim, cycling when exhausted.
    Scripted { measures: Vec<MeasureSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealitySpec {
    /// Samples from the measure; `seed` defaults to the experiment seed.
    SampleFrom {
        measure: MeasureSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// Fixed observations written as digits, e.g. `"0101"`.
    Scripted { path: String },
    /// Samples from `before` through step `step`, then from `after`
    /// conditioned on everything seen.
    SwitchAt {
        step: usize,
        before: MeasureSpec,
        after: MeasureSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

/// Per-step forecast source.
#[derive(Debug, Clone)]
pub enum Forecaster<T> {
    Coherent { current: Measure<T> },
    Scripted { measures: Vec<Measure<T>>, next: usize },
}

impl<T: Scalar> Forecaster<T> {
    /// The announcement for the current step.
    pub fn forecast(&self) -> &Measure<T> {
        match self {
            Forecaster::Coherent { current } => current,
            Forecaster::Scripted { measures, next } => &measures[next % measures.len()],
        }
    }

    /// Moves to the next step after observing `y`.
    pub fn advance(&mut self, y: Symbol) -> Result<()> {
        match self {
            Forecaster::Coherent { current } => *current = current.condition_on(&[y])?,
            Forecaster::Scripted { next, .. } => *next += 1,
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Alphabet {
        match self {
            Forecaster::Coherent { current } => current.alphabet(),
            Forecaster::Scripted { measures, .. } => measures[0].alphabet(),
        }
    }
}

pub fn make_forecaster<T: Scalar>(spec: &ForecasterSpec) -> Result<Forecaster<T>> {
    match spec {
        ForecasterSpec::Coherent { measure } => Ok(Forecaster::Coherent {
            current: measure.build()?,
        }),
        ForecasterSpec::Scripted { measures } => {
            if measures.is_empty() {
                return Err(Error::Config("scripted forecaster needs at least one measure".into()));
            }
            let measures = measures.iter().map(|m| m.build()).collect::<Result<Vec<Measure<T>>>>()?;
            let a = measures[0].alphabet();
            if measures.iter().any(|m| m.alphabet() != a) {
                return Err(Error::Config("scripted measures use different alphabets".into()));
            }
            Ok(Forecaster::Scripted { measures, next: 0 })
        }
    }
}

/// Per-step outcome source.
#[derive(Debug, Clone)]
pub enum Reality<T> {
    Sample {
        current: Measure<T>,
        rng: ChaCha8Rng,
    },
    Scripted {
        path: Vec<Symbol>,
        next: usize,
    },
    Switch {
        current: Measure<T>,
        after: Option<Measure<T>>,
        step: usize,
        seen: Vec<Symbol>,
        rng: ChaCha8Rng,
    },
}

impl<T: Scalar> Reality<T> {
    /// Outcome for step `n` (1-based), given that steps before it have been
    /// drawn through this object.
    pub fn next(&mut self, n: usize) -> Result<Symbol> {
        match self {
            Reality::Sample { current, rng } => {
                let y = draw(&current.one_step(&[])?, rng);
                *current = current.condition_on(&[y])?;
                Ok(y)
            }
            Reality::Scripted { path, next } => {
                let y = *path.get(*next).ok_or_else(|| {
                    Error::Config(format!("scripted reality has only {} symbols", path.len()))
                })?;
                *next += 1;
                Ok(y)
            }
            Reality::Switch {
                current,
                after,
                step,
                seen,
                rng,
            } => {
                if n > *step {
                    if let Some(b) = after.take() {
                        *current = b.condition_on(seen)?;
                    }
                }
                let y = draw(&current.one_step(&[])?, rng);
                *current = current.condition_on(&[y])?;
                if after.is_some() {
                    seen.push(y);
                }
                Ok(y)
            }
        }
    }
}

/// Parses a digit string (`0`-`9`, then `a`-`z`) into symbols.
pub fn parse_path(path: &str, alphabet: Alphabet) -> Result<Vec<Symbol>> {
    let symbols = path
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as Symbol)
                .ok_or_else(|| Error::Config(format!("bad symbol {c:?} in scripted path")))
        })
        .collect::<Result<Vec<_>>>()?;
    alphabet
        .check(&symbols)
        .map_err(|_| Error::Config(format!("scripted path {path:?} outside alphabet of size {}", alphabet.size())))?;
    Ok(symbols)
}

pub fn make_reality<T: Scalar>(spec: &RealitySpec, alphabet: Alphabet, default_seed: u64) -> Result<Reality<T>> {
    match spec {
        RealitySpec::SampleFrom { measure, seed } => Ok(Reality::Sample {
            current: measure.build()?,
            rng: ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed)),
        }),
        RealitySpec::Scripted { path } => Ok(Reality::Scripted {
            path: parse_path(path, alphabet)?,
            next: 0,
        }),
        RealitySpec::SwitchAt {
            step,
            before,
            after,
            seed,
        } => Ok(Reality::Switch {
            current: before.build()?,
            after: Some(after.build()?),
            step: *step,
            seen: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed)),
        }),
    }
}

/// Two forecasters agreeing on a common law `R` except for small weight on
/// mutually singular carriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPairSpec {
    pub base: MeasureSpec,
    pub carrier_i: MeasureSpec,
    pub carrier_ii: MeasureSpec,
    pub delta: f64,
}

impl Default for SingularPairSpec {
    fn default() -> Self {
        Self {
            base: MeasureSpec::Bernoulli { p: 0.5 },
            carrier_i: MeasureSpec::Bernoulli { p: 1e-3 },
            carrier_ii: MeasureSpec::Bernoulli { p: 1.0 - 1e-3 },
            delta: 1e-6,
        }
    }
}

impl SingularPairSpec {
    pub fn measure_specs(&self) -> (MeasureSpec, MeasureSpec) {
        let mix = |carrier: &MeasureSpec| MeasureSpec::Mixture {
            weights: vec![1.0 - self.delta, self.delta],
            components: vec![self.base.clone(), carrier.clone()],
        };
        (mix(&self.carrier_i), mix(&self.carrier_ii))
    }
}

/// `P^I = (1-δ) R + δ S_I`, `P^II = (1-δ) R + δ S_II`.
pub fn singular_pair<T: Scalar>(spec: &SingularPairSpec) -> Result<ForecastPair<T>> {
    if !(0.0..1.0).contains(&spec.delta) {
        return Err(Error::Config(format!("delta {} outside [0, 1)", spec.delta)));
    }
    let (a, b) = spec.measure_specs();
    Ok(ForecastPair::new(a.build()?, b.build()?))
}

/// A named forecaster/reality setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub alphabet_size: usize,
    #[serde(rename = "forecaster_I")]
    pub forecaster_i: ForecasterSpec,
    #[serde(rename = "forecaster_II")]
    pub forecaster_ii: ForecasterSpec,
    pub reality: RealitySpec,
}

pub fn catalog() -> Vec<Scenario> {
    let fair = MeasureSpec::Bernoulli { p: 0.5 };
    let coherent = |m: MeasureSpec| ForecasterSpec::Coherent { measure: m };
    let (sp_i, sp_ii) = SingularPairSpec::default().measure_specs();
    vec![
        Scenario {
            name: "merge-beta".into(),
            description: "Beta(1/2,1/2) and Beta(5,5) learners on a fair coin".into(),
            alphabet_size: 2,
            forecaster_i: coherent(MeasureSpec::BetaLearner {
                pseudo_counts: vec![0.5, 0.5],
            }),
            forecaster_ii: coherent(MeasureSpec::BetaLearner {
                pseudo_counts: vec![5.0, 5.0],
            }),
            reality: RealitySpec::SampleFrom {
                measure: fair.clone(),
                seed: None,
            },
        },
        Scenario {
            name: "diverge-iid".into(),
            description: "IID Bernoulli(0.4) against Bernoulli(0.6)".into(),
            alphabet_size: 2,
            forecaster_i: coherent(MeasureSpec::Bernoulli { p: 0.4 }),
            forecaster_ii: coherent(MeasureSpec::Bernoulli { p: 0.6 }),
            reality: RealitySpec::SampleFrom {
                measure: fair.clone(),
                seed: None,
            },
        },
        Scenario {
            name: "singular-pair".into(),
            description: "fair coin mixed with weight 1e-6 on Bernoulli(1e-3) or Bernoulli(1-1e-3)".into(),
            alphabet_size: 2,
            forecaster_i: coherent(sp_i),
            forecaster_ii: coherent(sp_ii),
            reality: RealitySpec::SampleFrom {
                measure: fair.clone(),
                seed: None,
            },
        },
        Scenario {
            name: "incoherent-scripted".into(),
            description: "forecasters alternating between Bernoulli(0.3) and Bernoulli(0.7)".into(),
            alphabet_size: 2,
            forecaster_i: ForecasterSpec::Scripted {
                measures: vec![MeasureSpec::Bernoulli { p: 0.3 }, MeasureSpec::Bernoulli { p: 0.7 }],
            },
            forecaster_ii: ForecasterSpec::Scripted {
                measures: vec![MeasureSpec::Bernoulli { p: 0.7 }, MeasureSpec::Bernoulli { p: 0.3 }],
            },
            reality: RealitySpec::SampleFrom {
                measure: fair,
                seed: None,
            },
        },
    ]
}

pub fn scenario(name: &str) -> Result<Scenario> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Evaluator;
    use approx::assert_relative_eq;

    #[test]
    fn coherent_learner_after_two_ones() {
        let spec = ForecasterSpec::Coherent {
            measure: MeasureSpec::BetaLearner {
                pseudo_counts: vec![0.5, 0.5],
            },
        };
        let mut f = make_forecaster::<f64>(&spec).unwrap();
        f.advance(1).unwrap();
        f.advance(1).unwrap();
        assert_relative_eq!(f.forecast().one_step(&[]).unwrap()[1], 2.5 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn scripted_forecasts_cycle() {
        let spec = ForecasterSpec::Scripted {
            measures: vec![MeasureSpec::Bernoulli { p: 0.2 }, MeasureSpec::Bernoulli { p: 0.9 }],
        };
        let mut f = make_forecaster::<f64>(&spec).unwrap();
        let mut seen = Vec::new();
        for y in [0, 1, 1, 0] {
            seen.push(f.forecast().one_step(&[]).unwrap()[1]);
            f.advance(y).unwrap();
        }
        assert_eq!(seen, vec![0.2, 0.9, 0.2, 0.9]);
    }

    #[test]
    fn scripted_reality() {
        let mut r = make_reality::<f64>(
            &RealitySpec::Scripted { path: "0101".into() },
            Alphabet::binary(),
            0,
        )
        .unwrap();
        let got: Vec<_> = (1..=4).map(|n| r.next(n).unwrap()).collect();
        assert_eq!(got, vec![0, 1, 0, 1]);
        assert!(r.next(5).is_err());
        assert!(parse_path("012", Alphabet::binary()).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = RealitySpec::SampleFrom {
            measure: MeasureSpec::Bernoulli { p: 0.5 },
            seed: Some(7),
        };
        let run = || {
            let mut r = make_reality::<f64>(&spec, Alphabet::binary(), 0).unwrap();
            (1..=200).map(|n| r.next(n).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        let m = Measure::<f64>::bernoulli(0.5).unwrap();
        assert_eq!(run(), m.sample_path(7, 200));
    }

    #[test]
    fn switch_changes_law() {
        let spec = RealitySpec::SwitchAt {
            step: 100,
            before: MeasureSpec::Bernoulli { p: 0.5 },
            after: MeasureSpec::Bernoulli { p: 0.9 },
            seed: Some(3),
        };
        let mut r = make_reality::<f64>(&spec, Alphabet::binary(), 0).unwrap();
        let path: Vec<_> = (1..=10100).map(|n| r.next(n).unwrap()).collect();
        let freq = path[100..].iter().sum::<usize>() as f64 / 10000.0;
        assert!((freq - 0.9).abs() < 0.01, "{freq}");
    }

    #[test]
    fn singular_pair_floor() {
        let pair = singular_pair::<f64>(&SingularPairSpec::default()).unwrap();
        let ev = Evaluator::default();
        for m in 1..=10 {
            let h = ev.hellinger(&pair.first, &pair.second, m).unwrap();
            assert!(1.0 - h <= 2e-6, "m={m} h={h}");
        }
        let degenerate = singular_pair::<f64>(&SingularPairSpec {
            delta: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(ev.hellinger(&degenerate.first, &degenerate.second, 6).unwrap(), 1.0);
    }

    #[test]
    fn catalog_builds() {
        for s in catalog() {
            make_forecaster::<f64>(&s.forecaster_i).unwrap();
            make_forecaster::<f64>(&s.forecaster_ii).unwrap();
            make_reality::<f64>(&s.reality, Alphabet::new(s.alphabet_size).unwrap(), 1).unwrap();
        }
        assert!(scenario("nope").is_err());
    }
}
