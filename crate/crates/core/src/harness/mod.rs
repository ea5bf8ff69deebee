//! Experiment configuration, execution, traces and summaries.

mod oracle;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Alphabet, Symbol};
use crate::metrics::{Evaluator, Method};
use crate::protocol::{ForecastPair, ProtocolState, Side};
use crate::scalar::Scalar;
use crate::scenarios::{make_forecaster, make_reality, Forecaster, ForecasterSpec, Reality, RealitySpec, Scenario};
use crate::strategy::{
    Cycle, LimWrap, LimWrapConfig, MixtureSceptic, Sceptic, DEFAULT_COMPONENTS, DEFAULT_MAX_HORIZON,
};

pub use oracle::{
    accounting_fuzz, oracle_expect_capital, oracle_metrics, AccountingReport, FuzzConfig, MetricsOracle,
};

pub const TRACE_HEADER: &str = "n,y,h_m,tv_m,log2_k1,log2_k2,log2_geomean,components_active,bet_placed";

fn default_components() -> usize {
    DEFAULT_COMPONENTS
}

fn default_max_horizon() -> usize {
    DEFAULT_MAX_HORIZON
}

fn default_m_report() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScepticConfig {
    #[serde(rename = "J", default = "default_components")]
    pub components: usize,
    #[serde(rename = "M_max", default = "default_max_horizon")]
    pub max_horizon: usize,
    #[serde(default)]
    pub lim_wrap: bool,
    /// Number of lim_wrap accounts (30 when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lim_wrap_accounts: Option<usize>,
    /// Explicit ε values, weighted `2^{-j}` in order. Defaults to `2^{-j}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
}

impl Default for ScepticConfig {
    fn default() -> Self {
        Self {
            components: DEFAULT_COMPONENTS,
            max_horizon: DEFAULT_MAX_HORIZON,
            lim_wrap: false,
            lim_wrap_accounts: None,
            epsilons: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryThresholds {
    #[serde(default = "SummaryThresholds::default_tol_merge")]
    pub tol_merge: f64,
    #[serde(default = "SummaryThresholds::default_growth_floor")]
    pub growth_floor: f64,
}

impl SummaryThresholds {
    fn default_tol_merge() -> f64 {
        1e-3
    }

    fn default_growth_floor() -> f64 {
        20.0
    }
}

impl Default for SummaryThresholds {
    fn default() -> Self {
        Self {
            tol_merge: Self::default_tol_merge(),
            growth_floor: Self::default_growth_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alphabet_size: usize,
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(rename = "forecaster_I")]
    pub forecaster_i: ForecasterSpec,
    #[serde(rename = "forecaster_II")]
    pub forecaster_ii: ForecasterSpec,
    pub reality: RealitySpec,
    #[serde(default)]
    pub sceptic: ScepticConfig,
    #[serde(default = "default_m_report")]
    pub m_report: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub summary: SummaryThresholds,
    #[serde(default)]
    pub method: Method,
}

impl ExperimentConfig {
    pub fn from_scenario(s: &Scenario, steps: usize, seed: u64) -> Self {
        Self {
            alphabet_size: s.alphabet_size,
            steps,
            forecaster_i: s.forecaster_i.clone(),
            forecaster_ii: s.forecaster_ii.clone(),
            reality: s.reality.clone(),
            sceptic: ScepticConfig::default(),
            m_report: default_m_report(),
            seed,
            output: None,
            summary: SummaryThresholds::default(),
            method: Method::Auto,
        }
    }

    /// Parses JSON; errors carry the line and column of the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.alphabet_size).map_err(|e| Error::Config(format!("alphabet_size: {e}")))
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            method: self.method,
            ..Evaluator::default()
        }
    }

    /// Structural checks that do not require building measures.
    pub fn validate(&self) -> Result<()> {
        let a = self.alphabet()?;
        if self.m_report == 0 {
            return Err(Error::Config("m_report must be at least 1".into()));
        }
        let words = a.count_words(self.m_report);
        if words.is_none_or(|w| w > self.evaluator().budget) {
            return Err(Error::Config(format!(
                "m_report = {} exceeds the enumeration budget for alphabet size {}",
                self.m_report, self.alphabet_size
            )));
        }
        if self.sceptic.components == 0 && self.sceptic.epsilons.is_none() {
            return Err(Error::Config("sceptic.J must be at least 1".into()));
        }
        if self.sceptic.max_horizon == 0 {
            return Err(Error::Config("sceptic.M_max must be at least 1".into()));
        }
        if let Some(eps) = &self.sceptic.epsilons {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                return Err(Error::Config("sceptic.epsilons must be nonempty values in (0, 1)".into()));
            }
        }
        Ok(())
    }

    fn build_mixture<T: Scalar>(&self) -> Result<MixtureSceptic<T>> {
        let sc = &self.sceptic;
        match &sc.epsilons {
            None => MixtureSceptic::new(sc.components, sc.max_horizon),
            Some(eps) => {
                let schedule = eps
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| (T::lit(e), T::lit(0.5).powi(j as i32 + 1)))
                    .collect();
                MixtureSceptic::with_schedule(schedule, sc.max_horizon)
            }
        }
    }

    fn build_sceptic<T: Scalar>(&self) -> Result<BuiltSceptic<T>> {
        let mix = self.build_mixture()?;
        Ok(if self.sceptic.lim_wrap {
            let cfg = LimWrapConfig {
                accounts: self.sceptic.lim_wrap_accounts.unwrap_or(LimWrapConfig::default().accounts),
            };
            BuiltSceptic::Wrapped(Box::new(LimWrap::new(mix, cfg)))
        } else {
            BuiltSceptic::Plain(mix)
        })
    }
}

enum BuiltSceptic<T> {
    Plain(MixtureSceptic<T>),
    Wrapped(Box<LimWrap<T, MixtureSceptic<T>>>),
}

impl<T: Scalar> BuiltSceptic<T> {
    fn as_dyn(&mut self) -> &mut dyn Sceptic<T> {
        match self {
            BuiltSceptic::Plain(m) => m,
            BuiltSceptic::Wrapped(w) => w.as_mut(),
        }
    }

    fn settle_expired(&mut self, state: &ProtocolState<T>) -> Result<()> {
        match self {
            BuiltSceptic::Plain(m) => m.settle_expired(state),
            BuiltSceptic::Wrapped(w) => {
                if state.step() > 1 {
                    w.sync(state)?;
                }
                match w.shadow().cloned() {
                    Some(shadow) => w.base_mut().settle_expired(&shadow),
                    None => Ok(()),
                }
            }
        }
    }

    fn mixture(&self) -> &MixtureSceptic<T> {
        match self {
            BuiltSceptic::Plain(m) => m,
            BuiltSceptic::Wrapped(w) => w.base(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub n: usize,
    pub y: Symbol,
    pub h_m: T,
    pub tv_m: T,
    pub log2_k1: T,
    pub log2_k2: T,
    pub log2_geomean: T,
    pub components_active: usize,
    pub bet_placed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport<T> {
    pub epsilon: T,
    pub weight: T,
    pub bet_steps: Vec<usize>,
    pub cycles: Vec<Cycle<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub m_report: usize,
    pub records: Vec<StepRecord<T>>,
    pub components: Vec<ComponentReport<T>>,
    /// Affinity and total variation at `m_report` of the forecasts
    /// announced after the last step.
    pub final_h_m: T,
    pub final_tv_m: T,
}

impl<T: Scalar> Trace<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let f = |x: T| format!("{:.16e}", x.to_f64().unwrap_or(f64::NAN));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.y,
                f(r.h_m),
                f(r.tv_m),
                f(r.log2_k1),
                f(r.log2_k2),
                f(r.log2_geomean),
                r.components_active,
                u8::from(r.bet_placed)
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Per-step capitals of a run driven by an explicit reality.
pub(crate) struct Run<T> {
    pub trace: Trace<T>,
    pub state: ProtocolState<T>,
}

fn forecast_pair<T: Scalar>(a: &Forecaster<T>, b: &Forecaster<T>) -> ForecastPair<T> {
    ForecastPair::new(a.forecast().clone(), b.forecast().clone())
}

pub(crate) fn drive<T: Scalar>(cfg: &ExperimentConfig, mut reality: Reality<T>, metrics: bool) -> Result<Run<T>> {
    cfg.validate()?;
    let alphabet = cfg.alphabet()?;
    let mut fa = make_forecaster::<T>(&cfg.forecaster_i)?;
    let mut fb = make_forecaster::<T>(&cfg.forecaster_ii)?;
    for f in [&fa, &fb] {
        if f.alphabet() != alphabet {
            return Err(Error::Config(format!(
                "forecaster alphabet {} differs from alphabet_size {}",
                f.alphabet().size(),
                cfg.alphabet_size
            )));
        }
    }
    let ev = cfg.evaluator();
    let mut sceptic = cfg.build_sceptic::<T>()?;
    let mut state = ProtocolState::with_evaluator(forecast_pair(&fa, &fb), ev)?;
    let mut records = Vec::with_capacity(cfg.steps);
    let mut bet_steps = vec![Vec::new(); sceptic.mixture().components().len()];
    let m = cfg.m_report;
    let ln2 = T::LN_2();
    for n in 1..=cfg.steps {
        let (h_m, tv_m) = if metrics {
            let (p, q) = (fa.forecast(), fb.forecast());
            (ev.hellinger(p, q, m)?, ev.total_variation(p, q, m)?)
        } else {
            (T::nan(), T::nan())
        };
        let s = sceptic.as_dyn();
        let (a, b) = s.decide(&state)?;
        let bettors = s.last_bettors();
        for &j in &bettors {
            bet_steps[j].push(n);
        }
        state.place_order(Side::I, a)?;
        state.place_order(Side::II, b)?;
        let y = reality.next(n)?;
        fa.advance(y)?;
        fb.advance(y)?;
        state.settle_step(y, forecast_pair(&fa, &fb))?;
        let k1 = state.capital(Side::I).ln() / ln2;
        let k2 = state.capital(Side::II).ln() / ln2;
        records.push(StepRecord {
            n,
            y,
            h_m,
            tv_m,
            log2_k1: k1,
            log2_k2: k2,
            log2_geomean: (k1 + k2) * T::lit(0.5),
            components_active: s.active_count(),
            bet_placed: !bettors.is_empty(),
        });
    }
    sceptic.settle_expired(&state)?;
    let (final_h_m, final_tv_m) = if metrics {
        let (p, q) = (fa.forecast(), fb.forecast());
        (ev.hellinger(p, q, m)?, ev.total_variation(p, q, m)?)
    } else {
        (T::nan(), T::nan())
    };
    let mix = sceptic.mixture();
    let components = mix
        .components()
        .iter()
        .zip(mix.weights())
        .zip(bet_steps)
        .map(|((c, &w), steps)| ComponentReport {
            epsilon: c.epsilon(),
            weight: w,
            bet_steps: steps,
            cycles: c.cycles().to_vec(),
        })
        .collect();
    Ok(Run {
        trace: Trace {
            m_report: m,
            records,
            components,
            final_h_m,
            final_tv_m,
        },
        state,
    })
}

/// Runs the configured experiment. Deterministic given the config.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig) -> Result<Trace<T>> {
    let reality = make_reality::<T>(&cfg.reality, cfg.alphabet()?, cfg.seed)?;
    Ok(drive(cfg, reality, true)?.trace)
}

/// Like [`run_experiment`] but skips the per-step `H_m`/`TV_m` columns
/// (left as NaN); the final values are still computed.
pub fn run_experiment_fast<T: Scalar>(cfg: &ExperimentConfig) -> Result<Trace<T>> {
    let reality = make_reality::<T>(&cfg.reality, cfg.alphabet()?, cfg.seed)?;
    let mut run = drive(cfg, reality, false)?;
    let ev = cfg.evaluator();
    let (p, q) = (run.state.forecast(Side::I).clone(), run.state.forecast(Side::II).clone());
    run.trace.final_h_m = ev.hellinger(&p, &q, cfg.m_report)?;
    run.trace.final_tv_m = ev.total_variation(&p, &q, cfg.m_report)?;
    Ok(run.trace)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub steps: usize,
    pub final_log2_k1: f64,
    pub final_log2_k2: f64,
    pub final_log2_geomean: f64,
    pub max_log2_k1: f64,
    pub max_log2_k2: f64,
    pub max_log2_geomean: f64,
    pub m_report: usize,
    pub final_h_m: f64,
    pub final_tv_m: f64,
    pub bets_per_component: Vec<usize>,
    pub tol_merge: f64,
    pub growth_floor: f64,
    pub merge_arm: bool,
    pub growth_arm: bool,
    pub disjunction: bool,
}

pub fn summarize<T: Scalar>(trace: &Trace<T>, thresholds: &SummaryThresholds) -> Result<Summary> {
    let last = trace
        .records
        .last()
        .ok_or_else(|| Error::DomainError("cannot summarize an empty trace".into()))?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let max = |g: fn(&StepRecord<T>) -> T| trace.records.iter().map(|r| f(g(r))).fold(f64::NEG_INFINITY, f64::max);
    let max_geo = max(|r| r.log2_geomean);
    let final_h = f(trace.final_h_m);
    let merge_arm = 1.0 - final_h < thresholds.tol_merge;
    let growth_arm = max_geo >= thresholds.growth_floor;
    Ok(Summary {
        steps: trace.records.len(),
        final_log2_k1: f(last.log2_k1),
        final_log2_k2: f(last.log2_k2),
        final_log2_geomean: f(last.log2_geomean),
        max_log2_k1: max(|r| r.log2_k1),
        max_log2_k2: max(|r| r.log2_k2),
        max_log2_geomean: max_geo,
        m_report: trace.m_report,
        final_h_m: final_h,
        final_tv_m: f(trace.final_tv_m),
        bets_per_component: trace.components.iter().map(|c| c.bet_steps.len()).collect(),
        tol_merge: thresholds.tol_merge,
        growth_floor: thresholds.growth_floor,
        merge_arm,
        growth_arm,
        disjunction: merge_arm || growth_arm,
    })
}
