//! Brute-force reference for the interval optimizer, used by `oracle-check`.
//!
//! The reference recomputes rates and per-path costs from first principles
//! over a dense power grid and never calls into the optimizer.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::LinkState;
use crate::config::{SolverSettings, TrafficTypeSpec};
use crate::error::Result;
use crate::mobility::Point;
use crate::optimizer::{solve, Problem};
use crate::streams::{stream, Stream};
use crate::traffic::{IntervalSample, TrafficSample};

/// A self-contained optimizer input.
#[derive(Debug, Clone)]
pub struct Instance {
    pub bandwidth_hz: [f64; 2],
    pub snr_per_watt: [f64; 2],
    pub p_total_watts: f64,
    pub traffic: Vec<TrafficTypeSpec>,
    pub sample: IntervalSample,
}

impl Instance {
    pub fn links(&self) -> [LinkState; 2] {
        [
            LinkState::from_snr_per_watt(self.bandwidth_hz[0], self.snr_per_watt[0]),
            LinkState::from_snr_per_watt(self.bandwidth_hz[1], self.snr_per_watt[1]),
        ]
    }

    /// Bits queued for each traffic type.
    fn bits(&self) -> impl Iterator<Item = f64> + '_ {
        self.traffic
            .iter()
            .zip(&self.sample.traffic)
            .map(|(spec, s)| (s.arrivals_pkts + s.queued_pkts) as f64 * spec.packet_size_bits as f64)
    }
}

/// Random instance: 1-4 traffic types, SNR at full power in [-20, 50] dB,
/// 1-100 MHz per path, GBRs 10-500 Mbit/s, up to 300 packets per type.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> Instance {
    let p_total_watts = 10f64.powf(rng.random_range(-2.0..0.0));
    let n = rng.random_range(1..=4);
    let mut traffic = Vec::with_capacity(n);
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        let gbr = [rng.random_range(10e6..500e6), rng.random_range(10e6..500e6)];
        traffic.push(TrafficTypeSpec {
            packet_size_bits: rng.random_range(50..=1500) * 8,
            mean_arrival_rate_pps: 0.0,
            mean_queue_packets: 0.0,
            latency_constraint_s: 1.0,
            gbr_path1_range_bps: [gbr[0], gbr[0]],
            gbr_path2_range_bps: [gbr[1], gbr[1]],
        });
        draws.push(TrafficSample {
            arrivals_pkts: if rng.random_bool(0.05) { 0 } else { rng.random_range(1..=300) },
            queued_pkts: 0,
            gbr_bps: gbr,
        });
    }
    let snr_db: [f64; 2] = [rng.random_range(-20.0..50.0), rng.random_range(-20.0..50.0)];
    Instance {
        bandwidth_hz: [rng.random_range(1e6..100e6), rng.random_range(1e6..100e6)],
        snr_per_watt: snr_db.map(|db| 10f64.powf(db / 10.0) / p_total_watts),
        p_total_watts,
        traffic,
        sample: IntervalSample {
            interval: 0,
            ue_position: Point::default(),
            shadowing_db: [0.0; 2],
            traffic: draws,
        },
    }
}

/// Minimum of `max(alpha * a1, (1 - alpha) * a2)` over an `alpha` grid of
/// `points` values in [0, 1]. `0 * inf` counts as zero.
pub fn alpha_grid_min(a1: f64, a2: f64, points: usize) -> f64 {
    let term = |share: f64, a: f64| if share == 0.0 { 0.0 } else { share * a };
    (0..points)
        .map(|j| {
            let alpha = j as f64 / (points - 1) as f64;
            term(alpha, a1).max(term(1.0 - alpha, a2))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Crossing-point value of the two cost lines, written out directly.
fn crossing_value(a1: f64, a2: f64) -> f64 {
    if a1.is_infinite() {
        a2
    } else if a2.is_infinite() {
        a1
    } else if a1 + a2 == 0.0 {
        0.0
    } else {
        1.0 / (1.0 / a1 + 1.0 / a2)
    }
}

fn costs(inst: &Instance, p1: f64) -> Vec<(f64, f64)> {
    let p2 = (inst.p_total_watts - p1).max(0.0);
    let shannon = |b: f64, g: f64, p: f64| b * (1.0 + g * p).log2();
    let r1 = shannon(inst.bandwidth_hz[0], inst.snr_per_watt[0], p1);
    let r2 = shannon(inst.bandwidth_hz[1], inst.snr_per_watt[1], p2);
    inst.bits()
        .zip(&inst.sample.traffic)
        .map(|(bits, s)| {
            let cost = |r: f64, c: f64| {
                if bits == 0.0 {
                    0.0
                } else if r == 0.0 {
                    f64::INFINITY
                } else {
                    bits / r + bits / c
                }
            };
            (cost(r1, s.gbr_bps[0]), cost(r2, s.gbr_bps[1]))
        })
        .collect()
}

/// Brute-force minimum over `power_points` evenly spaced values of P1.
/// Returns `(p1_watts, objective_s)`.
pub fn brute_force(inst: &Instance, power_points: usize) -> (f64, f64) {
    (0..power_points)
        .map(|k| {
            let p1 = inst.p_total_watts * k as f64 / (power_points - 1) as f64;
            let total: f64 = costs(inst, p1).into_iter().map(|(a1, a2)| crossing_value(a1, a2)).sum();
            (p1, total)
        })
        .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Objective at a fixed P1 with the inner split found by an alpha grid.
pub fn alpha_grid_objective(inst: &Instance, p1: f64, alpha_points: usize) -> f64 {
    costs(inst, p1)
        .into_iter()
        .map(|(a1, a2)| alpha_grid_min(a1, a2, alpha_points))
        .sum()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub instances: usize,
    pub max_relative_error: f64,
    /// Largest amount by which the solver beat the brute force, relative.
    pub max_improvement: f64,
}

/// Solves `instances` random instances and compares against the brute force.
pub fn oracle_check(seed: u64, instances: usize, power_points: usize, settings: &SolverSettings) -> Result<OracleReport> {
    let mut rng = stream(seed, Stream::Mobility);
    let all: Vec<Instance> = (0..instances).map(|_| random_instance(&mut rng)).collect();
    let errors = all
        .par_iter()
        .map(|inst| {
            let links = inst.links();
            let problem = Problem {
                sample: &inst.sample,
                links: &links,
                traffic: &inst.traffic,
                p_total_watts: inst.p_total_watts,
            };
            let solved = solve(&problem, settings)?.objective_s;
            let (_, reference) = brute_force(inst, power_points);
            let rel = if reference == 0.0 {
                solved.abs()
            } else {
                (solved - reference) / reference
            };
            Ok(rel)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(OracleReport {
        instances,
        max_relative_error: errors.iter().fold(0.0f64, |m, e| m.max(e.abs())),
        max_improvement: errors.iter().fold(0.0f64, |m, e| m.max(-e)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grid_handles_dead_paths() {
        assert_eq!(alpha_grid_min(2.0, f64::INFINITY, 11), 2.0);
        assert_eq!(alpha_grid_min(0.0, 0.0, 11), 0.0);
        assert!((alpha_grid_min(3.0, 1.0, 10_001) - 0.75).abs() < 1e-3);
    }

    #[test]
    fn small_oracle_run_agrees() {
        let report = oracle_check(9, 40, 2001, &SolverSettings::default()).unwrap();
        assert!(report.max_relative_error < 1e-3, "{report:?}");
    }
}
