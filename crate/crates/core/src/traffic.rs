//! Per-interval random draws: Poisson arrivals and queue backlog, uniform N3
//! guaranteed bit rates, shadowing, plus trace export and replay.

use std::io::{Read, Write};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::sample_shadowing;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::mobility::Point;
use crate::streams::{stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficSample {
    pub arrivals_pkts: u64,
    pub queued_pkts: u64,
    /// N3 guaranteed bit rate on path 1 and path 2.
    pub gbr_bps: [f64; 2],
}

impl TrafficSample {
    pub fn packets(&self) -> u64 {
        self.arrivals_pkts + self.queued_pkts
    }
}

/// Everything random about one interval. Shared by every compared solution.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSample {
    pub interval: usize,
    pub ue_position: Point,
    pub shadowing_db: [f64; 2],
    pub traffic: Vec<TrafficSample>,
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw as u64
}

/// Packets arriving in one interval: Poisson with mean `rate * dt`.
pub fn sample_arrivals<R: Rng + ?Sized>(mean_rate_pps: f64, dt_s: f64, rng: &mut R) -> u64 {
    poisson(mean_rate_pps * dt_s, rng)
}

/// Packets waiting at the UE at the start of an interval.
pub fn sample_queue<R: Rng + ?Sized>(mean_pkts: f64, rng: &mut R) -> u64 {
    poisson(mean_pkts, rng)
}

pub fn sample_gbr<R: Rng + ?Sized>(range_bps: [f64; 2], rng: &mut R) -> Result<f64> {
    let [lo, hi] = range_bps;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid GBR range [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(lo);
    }
    Ok(rng.random_range(lo..=hi))
}

struct TrafficStreams {
    arrivals: ChaCha8Rng,
    queue: ChaCha8Rng,
    gbr: [ChaCha8Rng; 2],
}

/// Draws the per-interval samples of a run from the seed's substreams.
pub struct IntervalSampler {
    shadowing: [ChaCha8Rng; 2],
    traffic: Vec<TrafficStreams>,
    next_interval: usize,
}

impl IntervalSampler {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let seed = cfg.seed;
        Self {
            shadowing: [stream(seed, Stream::Shadowing(0)), stream(seed, Stream::Shadowing(1))],
            traffic: (0..cfg.traffic.len())
                .map(|i| TrafficStreams {
                    arrivals: stream(seed, Stream::Arrivals(i)),
                    queue: stream(seed, Stream::Queue(i)),
                    gbr: [
                        stream(seed, Stream::Gbr { traffic: i, path: 0 }),
                        stream(seed, Stream::Gbr { traffic: i, path: 1 }),
                    ],
                })
                .collect(),
            next_interval: 0,
        }
    }

    pub fn next_sample(&mut self, cfg: &ExperimentConfig, ue_position: Point) -> IntervalSample {
        let sigma = cfg.radio.shadowing_sigma_db;
        let dt = cfg.scenario.interval_duration_s;
        let shadowing_db = [
            sample_shadowing(sigma, &mut self.shadowing[0]),
            sample_shadowing(sigma, &mut self.shadowing[1]),
        ];
        let traffic = cfg
            .traffic
            .iter()
            .zip(self.traffic.iter_mut())
            .map(|(spec, s)| TrafficSample {
                arrivals_pkts: sample_arrivals(spec.mean_arrival_rate_pps, dt, &mut s.arrivals),
                queued_pkts: sample_queue(spec.mean_queue_packets, &mut s.queue),
                gbr_bps: [
                    sample_gbr(spec.gbr_path1_range_bps, &mut s.gbr[0]).expect("validated range"),
                    sample_gbr(spec.gbr_path2_range_bps, &mut s.gbr[1]).expect("validated range"),
                ],
            })
            .collect();
        let interval = self.next_interval;
        self.next_interval += 1;
        IntervalSample {
            interval,
            ue_position,
            shadowing_db,
            traffic,
        }
    }
}

/// One trace row: an interval/traffic pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceRow {
    interval: usize,
    traffic: usize,
    x_m: f64,
    y_m: f64,
    shadowing_path1_db: f64,
    shadowing_path2_db: f64,
    arrivals_pkts: u64,
    queued_pkts: u64,
    gbr_path1_bps: f64,
    gbr_path2_bps: f64,
}

/// Writes a sample trace, one row per interval per traffic type.
pub fn write_trace<W: Write>(samples: &[IntervalSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        for (i, t) in s.traffic.iter().enumerate() {
            w.serialize(TraceRow {
                interval: s.interval,
                traffic: i,
                x_m: s.ue_position.x,
                y_m: s.ue_position.y,
                shadowing_path1_db: s.shadowing_db[0],
                shadowing_path2_db: s.shadowing_db[1],
                arrivals_pkts: t.arrivals_pkts,
                queued_pkts: t.queued_pkts,
                gbr_path1_bps: t.gbr_bps[0],
                gbr_path2_bps: t.gbr_bps[1],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace`]. Rows must be grouped by interval
/// in increasing order with traffic indices `0..n` inside each group.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<IntervalSample>> {
    let mut samples: Vec<IntervalSample> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        let row: TraceRow = row?;
        let t = TrafficSample {
            arrivals_pkts: row.arrivals_pkts,
            queued_pkts: row.queued_pkts,
            gbr_bps: [row.gbr_path1_bps, row.gbr_path2_bps],
        };
        if !(t.gbr_bps[0] > 0.0 && t.gbr_bps[1] > 0.0) {
            return Err(Error::Trace(format!("interval {}: GBR must be positive", row.interval)));
        }
        match samples.last_mut() {
            Some(last) if last.interval == row.interval => {
                if row.traffic != last.traffic.len() {
                    return Err(Error::Trace(format!(
                        "interval {}: expected traffic {}, found {}",
                        row.interval,
                        last.traffic.len(),
                        row.traffic
                    )));
                }
                last.traffic.push(t);
            }
            _ => {
                if row.interval != samples.len() || row.traffic != 0 {
                    return Err(Error::Trace(format!(
                        "expected interval {} traffic 0, found interval {} traffic {}",
                        samples.len(),
                        row.interval,
                        row.traffic
                    )));
                }
                samples.push(IntervalSample {
                    interval: row.interval,
                    ue_position: Point::new(row.x_m, row.y_m),
                    shadowing_db: [row.shadowing_path1_db, row.shadowing_path2_db],
                    traffic: vec![t],
                });
            }
        }
    }
    if let Some(n) = samples.first().map(|s| s.traffic.len()) {
        if let Some(bad) = samples.iter().find(|s| s.traffic.len() != n) {
            return Err(Error::Trace(format!("interval {} has {} traffic rows, expected {n}", bad.interval, bad.traffic.len())));
        }
    }
    Ok(samples)
}
