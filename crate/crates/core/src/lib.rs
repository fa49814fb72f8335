//! Uplink multi-path traffic splitting: a time-slotted simulator that, each
//! interval, picks per-traffic split ratios and a transmit power split across
//! two radio paths to minimize the summed worst-path latency, and compares it
//! with single-path and path-selection strategies.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod config;
pub mod engine;
pub mod error;
pub mod latency;
pub mod metrics;
pub mod mobility;
pub mod optimizer;
pub mod oracle;
pub mod streams;
pub mod traffic;

pub use baselines::SolutionKind;
pub use config::{load_config, scenario_preset, sweep_preset, ExperimentConfig, Preset};
pub use engine::{run, sweep, RunResult, SweepParameter};
pub use error::{Error, Result};
pub use latency::{Decision, IntervalRecord};
pub use metrics::{summarize, Summary};
