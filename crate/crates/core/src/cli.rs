//! Command-line front end.
//!
//! ```text
//! cellsim run <config> --out DIR
//! cellsim figure <1-4> --out DIR [--scale desk|full]
//! cellsim validate <suite> [--scale desk|full]
//! cellsim print-config [--model symmetric|asymmetric]
//! ```
//!
//! `--seed` and `--workers` apply to every subcommand. `CELLSIM_SEED`
//! overrides the seed of a config; `--seed` overrides both.
//! Exit codes: 0 success, 1 failed validation, 2 usage, 3 config, 4 runtime.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::channel_model::ChannelModel;
use crate::error::Error;
use crate::montecarlo::output::write_outputs;
use crate::montecarlo::{convergence_verdict, pow2_grid, run_scenario, CurvePoint, Quantity, ScenarioConfig};
use crate::scheduling::SchedulerKind;
use crate::validation::{run_suite, Scale, Suite, ValidationOptions};

pub const SEED_ENV: &str = "CELLSIM_SEED";

pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cellsim", version, about = "Multicell downlink scheduling simulator")]
struct Args {
    /// Master seed; wins over CELLSIM_SEED and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write the data behind one of the four figures.
    Figure {
        id: u8,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "desk")]
        scale: String,
    },
    /// Run a validation suite.
    Validate {
        suite: String,
        #[arg(long, default_value = "desk")]
        scale: String,
    },
    /// Print a default config.
    PrintConfig {
        #[arg(long, default_value = "symmetric")]
        model: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run { config: PathBuf, out: PathBuf },
    Figure { id: u8, out: PathBuf, scale: Scale },
    Validate { suite: Suite, scale: Scale },
    PrintConfig { model: ChannelModel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Error carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `argv` (including the program name).
///
/// `--help` and `--version` come back as an error with code 0.
pub fn parse_args<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| CliError {
        code: if e.use_stderr() { EXIT_USAGE } else { 0 },
        message: e.render().to_string(),
    })?;
    let usage = |e: Error| CliError::usage(e.to_string());
    let command = match args.command {
        Sub::Run { config, out } => Command::Run { config, out },
        Sub::Figure { id, out, scale } => {
            if !(1..=4).contains(&id) {
                return Err(CliError::usage(format!("figure id must be 1-4, got {id}")));
            }
            Command::Figure {
                id,
                out,
                scale: scale.parse().map_err(usage)?,
            }
        }
        Sub::Validate { suite, scale } => Command::Validate {
            suite: suite.parse().map_err(usage)?,
            scale: scale.parse().map_err(usage)?,
        },
        Sub::PrintConfig { model } => Command::PrintConfig {
            model: model.parse().map_err(CliError::usage)?,
        },
    };
    if args.workers == Some(0) {
        return Err(CliError::usage("--workers must be >= 1"));
    }
    Ok(Invocation {
        command,
        seed: args.seed,
        workers: args.workers,
    })
}

/// Macro-cell default scenario behind figure `id`.
///
/// Figures 1 and 2 share the symmetric scenario, 3 and 4 the asymmetric one;
/// each pair differs only in the columns a plot reads.
pub fn figure_scenario(id: u8, scale: Scale) -> Result<ScenarioConfig, Error> {
    let model = match id {
        1 | 2 => ChannelModel::Symmetric,
        3 | 4 => ChannelModel::Asymmetric,
        _ => return Err(Error::arg("id", format!("figure id must be 1-4, got {id}"))),
    };
    let (grid, trials) = match scale {
        Scale::Desk => (pow2_grid(4, 14), 20_000),
        Scale::Full => (pow2_grid(4, 17), 100_000),
    };
    Ok(ScenarioConfig {
        n_grid: grid,
        trials_per_n: trials,
        schedulers: SchedulerKind::ALL.to_vec(),
        jp_enabled: true,
        ..ScenarioConfig::macro_default(model)
    })
}

/// Seed precedence: flag, then environment, then config.
pub fn resolve_seed(config_seed: u64, env: Option<&str>, flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|_| CliError {
            code: EXIT_CONFIG,
            message: format!("{SEED_ENV} must be an unsigned integer, got {v:?}"),
        }),
        None => Ok(config_seed),
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_CONFIG,
        message: format!("cannot read config {}: {e}", path.display()),
    })?;
    ScenarioConfig::parse(&text).map_err(|e| CliError {
        code: EXIT_CONFIG,
        message: format!("{}: {e}", path.display()),
    })
}

fn verdict_lines(points: &[CurvePoint], config: &ScenarioConfig) -> Vec<String> {
    let mut quantities = vec![Quantity::DeltaR];
    for k in &config.schedulers {
        quantities.push(Quantity::MeanBeta(*k));
    }
    quantities
        .into_iter()
        .filter_map(|q| convergence_verdict(points, q).ok())
        .map(|v| {
            format!(
                "verdict {} = {} (limit estimate {:.4} +- {:.4})",
                v.quantity,
                v.label(),
                v.limit_estimate.mean,
                v.limit_estimate.ci
            )
        })
        .collect()
}

fn simulate(
    config: &ScenarioConfig,
    out: &Path,
    stem: &str,
    workers: usize,
    extra_meta: &[(&str, String)],
) -> Result<Vec<String>, CliError> {
    config.validate()?;
    let points = run_scenario(config, workers)?;
    let (csv, cfg) = write_outputs(out, stem, config, &points, extra_meta)?;
    let mut lines = vec![format!("wrote {}", csv.display()), format!("wrote {}", cfg.display())];
    lines.extend(verdict_lines(&points, config));
    Ok(lines)
}

/// Executes a parsed invocation; returns the lines to print and the exit code.
pub fn execute(inv: &Invocation, env_seed: Option<&str>) -> Result<(Vec<String>, i32), CliError> {
    let workers = inv.workers.unwrap_or_else(rayon::current_num_threads);
    match &inv.command {
        Command::Run { config, out } => {
            let mut cfg = read_config(config)?;
            cfg.master_seed = resolve_seed(cfg.master_seed, env_seed, inv.seed)?;
            let stem = config
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario")
                .to_string();
            let source = config.display().to_string();
            let lines = simulate(&cfg, out, &stem, workers, &[("source", source)])?;
            Ok((lines, 0))
        }
        Command::Figure { id, out, scale } => {
            let mut cfg = figure_scenario(*id, *scale)?;
            cfg.master_seed = resolve_seed(cfg.master_seed, env_seed, inv.seed)?;
            let meta = [("figure", id.to_string()), ("scale", scale.to_string())];
            let lines = simulate(&cfg, out, &format!("figure{id}"), workers, &meta)?;
            Ok((lines, 0))
        }
        Command::Validate { suite, scale } => {
            let opts = ValidationOptions {
                scale: *scale,
                workers,
                seed: resolve_seed(1, env_seed, inv.seed)?,
            };
            let reports = run_suite(*suite, &opts);
            let pass = reports.iter().all(|r| r.pass);
            let mut lines: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
            lines.push(format!(
                "suite {suite}: {}/{} passed",
                reports.iter().filter(|r| r.pass).count(),
                reports.len()
            ));
            Ok((lines, if pass { 0 } else { EXIT_VALIDATION_FAILED }))
        }
        Command::PrintConfig { model } => {
            let mut cfg = ScenarioConfig::macro_default(*model);
            cfg.master_seed = resolve_seed(cfg.master_seed, env_seed, inv.seed)?;
            Ok((vec![cfg.to_config_string()], 0))
        }
    }
}

/// Full entry point: parse, execute, print, and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) if e.code == 0 => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            if !e.message.ends_with('\n') {
                eprintln!();
            }
            return e.code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&inv, env_seed.as_deref()) {
        Ok((lines, code)) => {
            for l in lines {
                println!("{}", l.trim_end());
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Invocation, CliError> {
        parse_args(std::iter::once("cellsim").chain(args.iter().copied()))
    }

    #[test]
    fn figure_command() {
        let inv = parse(&["figure", "2", "--out", "out/"]).unwrap();
        assert_eq!(
            inv.command,
            Command::Figure {
                id: 2,
                out: "out/".into(),
                scale: Scale::Desk
            }
        );
    }

    #[test]
    fn validate_command() {
        let inv = parse(&["validate", "evt-cdf", "--seed", "9"]).unwrap();
        assert_eq!(
            inv.command,
            Command::Validate {
                suite: Suite::EvtCdf,
                scale: Scale::Desk
            }
        );
        assert_eq!(inv.seed, Some(9));
    }

    #[test]
    fn usage_errors_exit_2() {
        for args in [
            &["figure", "5"][..],
            &["validate", "nope"],
            &["run"],
            &["bogus"],
            &["figure", "1", "--frobnicate"],
            &["figure", "1", "--scale", "huge"],
            &["figure", "1", "--workers", "0"],
        ] {
            assert_eq!(parse(args).unwrap_err().code, EXIT_USAGE, "{args:?}");
        }
    }

    #[test]
    fn missing_config_exits_3_naming_path() {
        let inv = parse(&["run", "missing.cfg"]).unwrap();
        let err = execute(&inv, None).unwrap_err();
        assert_eq!(err.code, EXIT_CONFIG);
        assert!(err.message.contains("missing.cfg"));
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(1, None, None).unwrap(), 1);
        assert_eq!(resolve_seed(1, Some("7"), None).unwrap(), 7);
        assert_eq!(resolve_seed(1, Some("7"), Some(3)).unwrap(), 3);
        assert_eq!(resolve_seed(1, Some("x"), None).unwrap_err().code, EXIT_CONFIG);
    }

    #[test]
    fn figure_pairs_share_scenario() {
        for scale in [Scale::Desk, Scale::Full] {
            assert_eq!(figure_scenario(1, scale).unwrap(), figure_scenario(2, scale).unwrap());
            assert_eq!(figure_scenario(3, scale).unwrap(), figure_scenario(4, scale).unwrap());
        }
        let f1 = figure_scenario(1, Scale::Desk).unwrap();
        assert_eq!(f1.model, ChannelModel::Symmetric);
        assert!(f1.jp_enabled);
        assert_eq!(*f1.n_grid.last().unwrap(), 1 << 14);
        assert_eq!(f1.trials_per_n, 20_000);
        assert_eq!(figure_scenario(4, Scale::Desk).unwrap().model, ChannelModel::Asymmetric);
        assert!(figure_scenario(0, Scale::Desk).is_err());
    }

    #[test]
    fn print_config_parses_back() {
        let inv = parse(&["print-config", "--model", "asymmetric"]).unwrap();
        let (lines, code) = execute(&inv, Some("42")).unwrap();
        assert_eq!(code, 0);
        let cfg = ScenarioConfig::parse(&lines[0]).unwrap();
        assert_eq!(cfg.model, ChannelModel::Asymmetric);
        assert_eq!(cfg.master_seed, 42);
    }
}
