use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use jeffreys::harness::{
    accounting_fuzz, oracle_expect_capital, oracle_metrics, run_experiment, summarize, ExperimentConfig,
    FuzzConfig, Summary,
};
use jeffreys::protocol::Side;
use jeffreys::scenarios::{catalog, make_forecaster, scenario};
use jeffreys::Error;

#[derive(Parser)]
#[command(name = "jeffreys", version, about = "Sceptic-versus-two-forecasters experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the same experiment for a range of seeds (`a..b` or `a..=b`).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force checks against the fast code paths.
    Oracle {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        config: PathBuf,
        /// Number of fuzzed runs for `accounting`.
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
    },
    /// Show the built-in scenarios.
    Scenarios {
        #[arg(long)]
        list: bool,
        /// Print a ready-to-edit config for the named scenario.
        #[arg(long)]
        show: Option<String>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Martingale,
    Metrics,
    Accounting,
}

fn parse_seeds(s: &str) -> anyhow::Result<Vec<u64>> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        let n: u64 = s.trim().parse().map_err(|_| Error::Config(format!("bad seed range {s:?}")))?;
        return Ok(vec![n]);
    };
    let parse = |x: &str| x.trim().parse::<u64>().map_err(|_| Error::Config(format!("bad seed range {s:?}")));
    let (a, b) = (parse(a)?, parse(b)?);
    let seeds: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
    if seeds.is_empty() {
        bail!(Error::Config(format!("empty seed range {s:?}")));
    }
    Ok(seeds)
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `output`".into()))?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn run_one(cfg: &ExperimentConfig, dir: &Path) -> anyhow::Result<Summary> {
    let trace = run_experiment::<f64>(cfg)?;
    trace.write_csv(&dir.join("trace.csv"))?;
    let summary = if trace.records.is_empty() {
        None
    } else {
        Some(summarize(&trace, &cfg.summary)?)
    };
    fs::write(dir.join("config.json"), cfg.to_json())?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    info!("wrote {}", dir.display());
    summary.ok_or_else(|| anyhow!("empty run (T = 0): trace has no rows"))
}

fn print_summary(seed: u64, s: &Summary) {
    println!(
        "seed {seed}: log2 K_I {:.4}  log2 K_II {:.4}  log2 geomean {:.4} (max {:.4})  1-H_{} {:.3e}  disjunction {}{}",
        s.final_log2_k1,
        s.final_log2_k2,
        s.final_log2_geomean,
        s.max_log2_geomean,
        s.m_report,
        1.0 - s.final_h_m,
        s.disjunction,
        match (s.merge_arm, s.growth_arm) {
            (true, true) => " (merge, growth)",
            (true, false) => " (merge)",
            (false, true) => " (growth)",
            _ => "",
        }
    );
}

fn oracle(check: Check, cfg: &ExperimentConfig, runs: usize) -> anyhow::Result<bool> {
    match check {
        Check::Martingale => {
            let mut ok = true;
            for side in Side::BOTH {
                let e = oracle_expect_capital::<f64>(cfg, side)?;
                let pass = (e - 1.0).abs() <= 1e-9;
                ok &= pass;
                println!("E[K_{side:?}_T] = {e:.15} ({})", if pass { "ok" } else { "MISMATCH" });
            }
            Ok(ok)
        }
        Check::Metrics => {
            let p = make_forecaster::<f64>(&cfg.forecaster_i)?.forecast().clone();
            let q = make_forecaster::<f64>(&cfg.forecaster_ii)?.forecast().clone();
            let ev = cfg.evaluator();
            let m = cfg.m_report;
            let o = oracle_metrics(&p, &q, m)?;
            let h = ev.hellinger(&p, &q, m)?;
            let tv = ev.total_variation(&p, &q, m)?;
            let mut ok = (h - o.hellinger).abs() <= 1e-12 && (tv - o.total_variation).abs() <= 1e-12;
            println!("H_{m}:  fast {h:.15}  enumerated {:.15}", o.hellinger);
            println!("TV_{m}: fast {tv:.15}  enumerated {:.15}", o.total_variation);
            if let Some(sup) = o.total_variation_sup {
                ok &= (sup - o.total_variation).abs() <= 1e-12;
                println!("TV_{m} over events: {sup:.15}");
            }
            Ok(ok)
        }
        Check::Accounting => {
            let fuzz = FuzzConfig {
                runs,
                steps: cfg.steps,
                alphabet_size: cfg.alphabet_size,
                seed: cfg.seed,
                ..FuzzConfig::default()
            };
            let r = accounting_fuzz::<f64>(&fuzz)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(r.max_ledger_gap <= 1e-9 && r.min_capital >= 0.0 && r.max_purchase_drift <= 1e-12)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out_dir(&cfg, out)?;
            let s = run_one(&cfg, &dir)?;
            print_summary(cfg.seed, &s);
            Ok(true)
        }
        Command::Sweep { config, seeds, out } => {
            let base = ExperimentConfig::load(&config)?;
            let seeds = parse_seeds(&seeds)?;
            let dir = out_dir(&base, out)?;
            let mut all = Vec::new();
            for seed in seeds {
                let cfg = ExperimentConfig { seed, ..base.clone() };
                let sub = dir.join(format!("seed_{seed}"));
                fs::create_dir_all(&sub)?;
                let s = run_one(&cfg, &sub)?;
                print_summary(seed, &s);
                all.push(serde_json::json!({ "seed": seed, "summary": s }));
            }
            fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(&all)?)?;
            Ok(true)
        }
        Command::Oracle { check, config, runs } => {
            let cfg = ExperimentConfig::load(&config)?;
            oracle(check, &cfg, runs)
        }
        Command::Scenarios { list, show, steps } => {
            if let Some(name) = show {
                let cfg = ExperimentConfig::from_scenario(&scenario(&name)?, steps, 0);
                println!("{}", cfg.to_json());
            } else if list {
                for s in catalog() {
                    println!("{:<22} {}", s.name, s.description);
                }
            } else {
                bail!(Error::Config("pass --list or --show <name>".into()));
            }
            Ok(true)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(Error::Config(_)) => 2,
        Some(Error::CromwellViolation(_)) => 3,
        Some(Error::BudgetExceeded { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
