//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 usage error, 3 configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, scenario_preset, sweep_preset, ExperimentConfig, Preset};
use crate::engine::{replay, run, sweep, SweepParameter};
use crate::error::{Error, Result};
use crate::metrics::{export, export_sweep, summarize, Summary};
use crate::oracle::oracle_check;
use crate::traffic::read_trace;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mpsplit", version, about = "Uplink multi-path traffic splitting simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct Source {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in scenario: scenario1 or scenario2.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Total bandwidth in Hz (presets default to 100e6).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Root seed; overrides the file and the MPSPLIT_SEED variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dotted `key=value` override, e.g. `radio.shadowing_sigma_db=6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every enabled solution and write records, CDFs and a summary.
    Run {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// One full run per parameter value; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// bandwidth | distance_to_bs2 | packet_size
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated values (Hz, metres or bytes).
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Load and validate a configuration without running it.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Re-run the solutions over a recorded interval sample trace.
    Replay {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        overrides: Overrides,
        /// Trace written as records/samples.csv by `run`.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Compare the optimizer with a brute-force search on random instances.
    OracleCheck {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 10_001)]
        power_points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fail when the largest relative error exceeds this.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
}

/// Resolves a configuration. `single_traffic` selects the sweep variant of a preset.
pub fn resolve_config(source: &Source, overrides: &Overrides, single_traffic: bool) -> Result<ExperimentConfig> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(path), None) => {
            let mut cfg = load_config(path)?;
            if let Some(bw) = overrides.bandwidth {
                cfg.radio.total_bandwidth_hz = bw;
            }
            cfg
        }
        (None, Some(name)) => {
            let preset: Preset = name.parse()?;
            let bw = overrides.bandwidth.unwrap_or(100e6);
            if single_traffic {
                sweep_preset(preset, bw)
            } else {
                scenario_preset(preset, bw)
            }
        }
        _ => return Err(Error::validation("source", "give exactly one of --config or --preset")),
    };
    cfg.apply_seed_env()?;
    for item in &overrides.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::validation(item.as_str(), "override must be KEY=VALUE"))?;
        cfg.apply_override(key.trim(), value)?;
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(summary: &Summary) {
    for s in &summary.solutions {
        let lat: Vec<String> = s
            .traffic
            .iter()
            .enumerate()
            .map(|(i, t)| format!("traffic {}: {:.4} ms", i + 1, t.mean_instant_latency_s * 1e3))
            .collect();
        println!("{:<16} {}", s.kind.as_str(), lat.join("  "));
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { source, overrides, out } => {
            let cfg = resolve_config(&source, &overrides, false)?;
            let result = run(&cfg)?;
            let summary = summarize(&result)?;
            export(&summary, &result, &out)?;
            print_summary(&summary);
            println!("wrote {}", out.display());
        }
        Command::Sweep {
            source,
            overrides,
            param,
            values,
            out,
        } => {
            let cfg = resolve_config(&source, &overrides, true)?;
            let points = sweep(&cfg, param, &values)?;
            let path = out.join("sweep.csv");
            export_sweep(param, &points, &path)?;
            for p in &points {
                println!("{} = {}", param.as_str(), p.value);
                print_summary(&p.summary);
            }
            println!("wrote {}", path.display());
        }
        Command::Validate { source, overrides } => {
            let cfg = resolve_config(&source, &overrides, false)?;
            println!(
                "ok: {} traffic type(s), {} interval(s), solutions {:?}",
                cfg.traffic.len(),
                cfg.scenario.interval_count(),
                cfg.solutions.iter().map(|s| s.as_str()).collect::<Vec<_>>()
            );
        }
        Command::Replay {
            source,
            overrides,
            trace,
            out,
        } => {
            let cfg = resolve_config(&source, &overrides, false)?;
            let samples = read_trace(BufReader::new(File::open(&trace)?))?;
            let result = replay(&cfg, samples)?;
            let summary = summarize(&result)?;
            export(&summary, &result, &out)?;
            print_summary(&summary);
            println!("wrote {}", out.display());
        }
        Command::OracleCheck {
            instances,
            power_points,
            seed,
            tolerance,
        } => {
            let cfg = ExperimentConfig::default();
            let report = oracle_check(seed, instances, power_points.max(2), &cfg.solver)?;
            println!(
                "instances: {}  max relative error: {:.3e}  max improvement over brute force: {:.3e}",
                report.instances, report.max_relative_error, report.max_improvement
            );
            if report.max_relative_error > tolerance {
                return Err(Error::Domain(format!(
                    "max relative error {:.3e} exceeds tolerance {tolerance:.1e}",
                    report.max_relative_error
                )));
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}
