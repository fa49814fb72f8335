//! Time-slotted simulation loop and parameter sweeps.
//!
//! A run draws the trajectory and one [`IntervalSample`] per interval up
//! front, then evaluates every enabled solution against the same samples.
//! Decisions are pure functions of a sample, so intervals are solved in
//! parallel once the draws exist.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{path_selection_decision, single_path_decision, SolutionKind};
use crate::channel::{pathloss_uma_nlos, LinkState};
use crate::config::{ExperimentConfig, MobilityMode};
use crate::error::{Error, Result};
use crate::latency::IntervalRecord;
use crate::metrics::{summarize, Summary};
use crate::mobility::{build_trajectory, Point, Trajectory};
use crate::optimizer::{decision_record, solve, Problem};
use crate::streams::{stream, Stream};
use crate::traffic::{IntervalSample, IntervalSampler};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRun {
    pub kind: SolutionKind,
    pub records: Vec<IntervalRecord>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub trajectory: Trajectory,
    pub samples: Vec<IntervalSample>,
    /// One entry per enabled solution, in configuration order.
    pub solutions: Vec<SolutionRun>,
    pub wall_clock_s: f64,
}

impl RunResult {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn records(&self, kind: SolutionKind) -> Option<&[IntervalRecord]> {
        self.solutions.iter().find(|s| s.kind == kind).map(|s| s.records.as_slice())
    }

    pub fn interval_count(&self) -> usize {
        self.samples.len()
    }
}

/// Draws the trajectory and interval samples for a configuration.
pub fn draw_samples(cfg: &ExperimentConfig) -> (Trajectory, Vec<IntervalSample>) {
    let trajectory = build_trajectory(cfg, &mut stream(cfg.seed, Stream::Mobility));
    let mut sampler = IntervalSampler::new(cfg);
    let samples = trajectory
        .positions
        .iter()
        .map(|&p| sampler.next_sample(cfg, p))
        .collect();
    (trajectory, samples)
}

/// Runs every enabled solution over freshly drawn samples.
pub fn run(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let (trajectory, samples) = draw_samples(cfg);
    simulate(cfg, trajectory, samples)
}

/// Runs every enabled solution over samples read from a trace.
pub fn replay(cfg: &ExperimentConfig, samples: Vec<IntervalSample>) -> Result<RunResult> {
    cfg.validate()?;
    if let Some(bad) = samples.iter().find(|s| s.traffic.len() != cfg.traffic.len()) {
        return Err(Error::Trace(format!(
            "interval {} has {} traffic types, configuration has {}",
            bad.interval,
            bad.traffic.len(),
            cfg.traffic.len()
        )));
    }
    let trajectory = Trajectory {
        positions: samples.iter().map(|s| s.ue_position).collect(),
        anchor: cfg.scenario.ue_initial_position,
        roam_radius_m: cfg.scenario.roam_radius_m,
    };
    simulate(cfg, trajectory, samples)
}

fn simulate(cfg: &ExperimentConfig, trajectory: Trajectory, samples: Vec<IntervalSample>) -> Result<RunResult> {
    let started = Instant::now();
    let per_interval: Vec<Result<Vec<IntervalRecord>>> = samples
        .par_iter()
        .map(|s| {
            evaluate_interval(cfg, s).map_err(|e| Error::AtInterval {
                interval: s.interval,
                source: Box::new(e),
            })
        })
        .collect();

    let mut solutions: Vec<SolutionRun> = cfg
        .solutions
        .iter()
        .map(|&kind| SolutionRun {
            kind,
            records: Vec::with_capacity(samples.len()),
        })
        .collect();
    for interval in per_interval {
        for (run, rec) in solutions.iter_mut().zip(interval?) {
            run.records.push(rec);
        }
    }
    Ok(RunResult {
        config: cfg.clone(),
        trajectory,
        samples,
        solutions,
        wall_clock_s: started.elapsed().as_secs_f64(),
    })
}

/// Pathloss from the UE to each base station.
pub fn pathlosses_db(cfg: &ExperimentConfig, ue: Point) -> Result<[f64; 2]> {
    let r = &cfg.radio;
    let pl = |bs: Point| pathloss_uma_nlos(ue.distance(bs), r.carrier_frequency_hz, r.bs_height_m, r.ue_height_m);
    Ok([pl(cfg.scenario.bs_positions[0])?, pl(cfg.scenario.bs_positions[1])?])
}

/// Link states for one interval under a solution's bandwidth rule.
pub fn link_states(cfg: &ExperimentConfig, pathloss_db: [f64; 2], shadowing_db: [f64; 2], kind: SolutionKind) -> [LinkState; 2] {
    let bw = kind.bandwidth_per_bs_hz(cfg.radio.total_bandwidth_hz);
    let psd = cfg.radio.noise_psd_dbm_per_hz;
    [
        LinkState::new(bw, pathloss_db[0], shadowing_db[0], psd),
        LinkState::new(bw, pathloss_db[1], shadowing_db[1], psd),
    ]
}

/// Decision and evaluation of every enabled solution for one interval.
pub fn evaluate_interval(cfg: &ExperimentConfig, sample: &IntervalSample) -> Result<Vec<IntervalRecord>> {
    let pathloss = pathlosses_db(cfg, sample.ue_position)?;
    let p_total = cfg.total_tx_power_w();
    cfg.solutions
        .iter()
        .map(|&kind| {
            let links = link_states(cfg, pathloss, sample.shadowing_db, kind);
            let problem = Problem {
                sample,
                links: &links,
                traffic: &cfg.traffic,
                p_total_watts: p_total,
            };
            Ok(match kind {
                SolutionKind::MultiPath => solve(&problem, &cfg.solver)?,
                SolutionKind::SinglePath1 => decision_record(&problem, &single_path_decision(0, cfg.traffic.len(), p_total)),
                SolutionKind::SinglePath2 => decision_record(&problem, &single_path_decision(1, cfg.traffic.len(), p_total)),
                SolutionKind::PathSelection => decision_record(&problem, &path_selection_decision(&problem)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Total bandwidth in Hz.
    Bandwidth,
    /// Fixed UE distance to BS 2 in metres, on the segment towards BS 1.
    DistanceToBs2,
    /// Packet size in bytes, applied to every traffic type.
    PacketSize,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Bandwidth => "bandwidth",
            SweepParameter::DistanceToBs2 => "distance_to_bs2",
            SweepParameter::PacketSize => "packet_size",
        }
    }

    /// Configuration for one sweep point.
    pub fn apply(self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParameter::Bandwidth => cfg.radio.total_bandwidth_hz = value,
            SweepParameter::DistanceToBs2 => {
                let [bs1, bs2] = cfg.scenario.bs_positions;
                let span = bs1.distance(bs2);
                if !(value > 0.0 && value <= span) {
                    return Err(Error::validation("distance_to_bs2", format!("must lie in (0, {span}] m")));
                }
                let t = value / span;
                cfg.scenario.ue_initial_position = Point::new(bs2.x + t * (bs1.x - bs2.x), bs2.y + t * (bs1.y - bs2.y));
                cfg.scenario.mobility = MobilityMode::Fixed;
            }
            SweepParameter::PacketSize => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::validation("packet_size", "must be a whole number of bytes >= 1"));
                }
                for t in &mut cfg.traffic {
                    t.packet_size_bits = value as u64 * 8;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bandwidth" => Ok(SweepParameter::Bandwidth),
            "distance_to_bs2" | "distance" => Ok(SweepParameter::DistanceToBs2),
            "packet_size" => Ok(SweepParameter::PacketSize),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: Summary,
}

/// One full run per value; points run in parallel and come back in input order.
pub fn sweep(base: &ExperimentConfig, parameter: SweepParameter, values: &[f64]) -> Result<Vec<SweepPoint>> {
    values
        .par_iter()
        .map(|&value| {
            let cfg = parameter.apply(base, value)?;
            let result = run(&cfg)?;
            Ok(SweepPoint {
                value,
                summary: summarize(&result)?,
            })
        })
        .collect()
}
