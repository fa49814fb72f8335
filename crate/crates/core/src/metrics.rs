//! Aggregation of run results and the on-disk output layout.
//!
//! Latencies are seconds in memory and milliseconds in every exported file.
//!
//! Output directory layout:
//!
//! ```text
//! out/
//!   manifest.json            schema version, seed, config snapshot, timing
//!   config.toml              configuration the run used
//!   summary.json             per solution / traffic aggregates
//!   records/records.csv      one row per interval x solution x traffic
//!   records/decisions.csv    one row per interval x solution
//!   records/samples.csv      interval sample trace (replayable)
//!   records/trajectory.csv   UE positions
//!   cdf/cdf.csv              empirical instant-latency CDFs
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::SolutionKind;
use crate::channel::watts_to_dbm;
use crate::engine::{RunResult, SweepParameter, SweepPoint};
use crate::error::{Error, Result};
use crate::latency::IntervalRecord;
use crate::traffic::write_trace;

pub const SCHEMA_VERSION: &str = "mpsplit-output-v1";

const MS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub latency_s: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSummary {
    pub mean_instant_latency_s: f64,
    pub deadline_miss_rate: f64,
    /// Sorted distinct latencies with cumulative probabilities.
    pub cdf: Vec<CdfPoint>,
    /// Mean share routed to path 1. Multi-path only.
    pub mean_alpha_path1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSummary {
    pub kind: SolutionKind,
    pub intervals: usize,
    pub mean_objective_s: f64,
    pub traffic: Vec<TrafficSummary>,
    /// Mean transmit power per path in watts. Multi-path only.
    pub mean_power_w: Option<[f64; 2]>,
}

impl SolutionSummary {
    pub fn mean_power_dbm(&self) -> Option<[f64; 2]> {
        self.mean_power_w.map(|[a, b]| [watts_to_dbm(a), watts_to_dbm(b)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub solutions: Vec<SolutionSummary>,
}

impl Summary {
    pub fn solution(&self, kind: SolutionKind) -> Option<&SolutionSummary> {
        self.solutions.iter().find(|s| s.kind == kind)
    }

    /// Mean instant latency of `traffic` under `kind`, in seconds.
    pub fn mean_latency_s(&self, kind: SolutionKind, traffic: usize) -> Option<f64> {
        self.solution(kind).map(|s| s.traffic[traffic].mean_instant_latency_s)
    }

    /// Field-wise comparison with a relative tolerance on every real value.
    pub fn approx_eq(&self, other: &Summary, rel: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= rel * a.abs().max(b.abs());
        self.seed == other.seed
            && self.solutions.len() == other.solutions.len()
            && self.solutions.iter().zip(&other.solutions).all(|(a, b)| {
                a.kind == b.kind
                    && a.intervals == b.intervals
                    && close(a.mean_objective_s, b.mean_objective_s)
                    && match (a.mean_power_w, b.mean_power_w) {
                        (Some(x), Some(y)) => close(x[0], y[0]) && close(x[1], y[1]),
                        (None, None) => true,
                        _ => false,
                    }
                    && a.traffic.len() == b.traffic.len()
                    && a.traffic.iter().zip(&b.traffic).all(|(s, t)| {
                        close(s.mean_instant_latency_s, t.mean_instant_latency_s)
                            && close(s.deadline_miss_rate, t.deadline_miss_rate)
                            && match (s.mean_alpha_path1, t.mean_alpha_path1) {
                                (Some(x), Some(y)) => close(x, y),
                                (None, None) => true,
                                _ => false,
                            }
                            && s.cdf.len() == t.cdf.len()
                            && s.cdf
                                .iter()
                                .zip(&t.cdf)
                                .all(|(p, q)| close(p.latency_s, q.latency_s) && close(p.probability, q.probability))
                    })
            })
    }
}

/// Empirical CDF of `values`: distinct sorted values, each with the fraction
/// of samples at or below it.
pub fn empirical_cdf(values: &[f64]) -> Vec<CdfPoint> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let probability = if i + 1 == sorted.len() { 1.0 } else { (i + 1) as f64 / n };
        match out.last_mut() {
            Some(last) if last.latency_s == v => last.probability = probability,
            _ => out.push(CdfPoint { latency_s: v, probability }),
        }
    }
    out
}

/// Mean of the distribution described by a CDF.
pub fn cdf_mean(cdf: &[CdfPoint]) -> f64 {
    let mut prev = 0.0;
    let mut mean = 0.0;
    for p in cdf {
        mean += p.latency_s * (p.probability - prev);
        prev = p.probability;
    }
    mean
}

/// Smallest latency whose cumulative probability reaches `q`.
pub fn cdf_quantile(cdf: &[CdfPoint], q: f64) -> Option<f64> {
    cdf.iter().find(|p| p.probability >= q - 1e-12).map(|p| p.latency_s)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn summarize_solution(kind: SolutionKind, records: &[IntervalRecord]) -> Result<SolutionSummary> {
    if records.is_empty() {
        return Err(Error::EmptyRun);
    }
    let n_traffic = records[0].traffic.len();
    let multi = kind == SolutionKind::MultiPath;
    let traffic = (0..n_traffic)
        .map(|i| {
            let lat: Vec<f64> = records.iter().map(|r| r.traffic[i].instant_latency_s).collect();
            TrafficSummary {
                mean_instant_latency_s: mean(lat.iter().copied()),
                deadline_miss_rate: records.iter().filter(|r| !r.traffic[i].deadline_met).count() as f64
                    / records.len() as f64,
                cdf: empirical_cdf(&lat),
                mean_alpha_path1: multi.then(|| mean(records.iter().map(|r| r.decision.alphas[i]))),
            }
        })
        .collect();
    Ok(SolutionSummary {
        kind,
        intervals: records.len(),
        mean_objective_s: mean(records.iter().map(|r| r.objective_s)),
        traffic,
        mean_power_w: multi.then(|| {
            [
                mean(records.iter().map(|r| r.decision.p1_watts)),
                mean(records.iter().map(|r| r.decision.p2_watts)),
            ]
        }),
    })
}

pub fn summarize(result: &RunResult) -> Result<Summary> {
    if result.solutions.is_empty() {
        return Err(Error::EmptyRun);
    }
    Ok(Summary {
        seed: result.seed(),
        solutions: result
            .solutions
            .iter()
            .map(|s| summarize_solution(s.kind, &s.records))
            .collect::<Result<_>>()?,
    })
}

#[derive(Serialize, Deserialize)]
struct RecordRow {
    interval: usize,
    solution: SolutionKind,
    traffic: usize,
    alpha_path1: f64,
    p1_w: f64,
    p2_w: f64,
    wireless_path1_ms: f64,
    wireless_path2_ms: f64,
    n3_path1_ms: f64,
    n3_path2_ms: f64,
    total_path1_ms: f64,
    total_path2_ms: f64,
    instant_latency_ms: f64,
    deadline_met: bool,
    objective_ms: f64,
    feasible: bool,
}

#[derive(Serialize, Deserialize)]
struct CdfRow {
    solution: SolutionKind,
    traffic: usize,
    latency_ms: f64,
    cumulative_probability: f64,
}

#[derive(Serialize, Deserialize)]
struct TrafficSummaryFile {
    traffic: usize,
    mean_instant_latency_ms: f64,
    deadline_miss_rate: f64,
    mean_alpha_path1: Option<f64>,
    mean_alpha_path2: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SolutionSummaryFile {
    solution: SolutionKind,
    intervals: usize,
    mean_objective_ms: f64,
    mean_power_w: Option<[f64; 2]>,
    mean_power_dbm: Option<[f64; 2]>,
    traffic: Vec<TrafficSummaryFile>,
}

#[derive(Serialize, Deserialize)]
struct SummaryFile {
    schema_version: String,
    seed: u64,
    solutions: Vec<SolutionSummaryFile>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: &'a str,
    tool_version: &'a str,
    seed: u64,
    interval_count: usize,
    solutions: Vec<SolutionKind>,
    created_unix_s: u64,
    wall_clock_s: f64,
    config: &'a str,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_records(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for run in &result.solutions {
        for rec in &run.records {
            for (i, t) in rec.traffic.iter().enumerate() {
                w.serialize(RecordRow {
                    interval: rec.interval,
                    solution: run.kind,
                    traffic: i,
                    alpha_path1: rec.decision.alphas[i],
                    p1_w: rec.decision.p1_watts,
                    p2_w: rec.decision.p2_watts,
                    wireless_path1_ms: t.wireless_latency_s[0] * MS,
                    wireless_path2_ms: t.wireless_latency_s[1] * MS,
                    n3_path1_ms: t.n3_latency_s[0] * MS,
                    n3_path2_ms: t.n3_latency_s[1] * MS,
                    total_path1_ms: t.path_total_s[0] * MS,
                    total_path2_ms: t.path_total_s[1] * MS,
                    instant_latency_ms: t.instant_latency_s * MS,
                    deadline_met: t.deadline_met,
                    objective_ms: rec.objective_s * MS,
                    feasible: rec.feasible,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Decision trace: `interval,solution,alpha_1..alpha_N,p1_dbm,p2_dbm,p1_w,p2_w,objective_ms,feasible`.
pub fn write_decisions(result: &RunResult, path: &Path) -> Result<()> {
    let n = result.config.traffic.len();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["interval".to_string(), "solution".to_string()];
    header.extend((1..=n).map(|i| format!("alpha_{i}")));
    header.extend(["p1_dbm", "p2_dbm", "p1_w", "p2_w", "objective_ms", "feasible"].map(String::from));
    w.write_record(&header)?;
    for run in &result.solutions {
        for rec in &run.records {
            let d = &rec.decision;
            let mut row = vec![rec.interval.to_string(), run.kind.to_string()];
            row.extend(d.alphas.iter().map(|a| a.to_string()));
            row.extend([
                watts_to_dbm(d.p1_watts).to_string(),
                watts_to_dbm(d.p2_watts).to_string(),
                d.p1_watts.to_string(),
                d.p2_watts.to_string(),
                (rec.objective_s * MS).to_string(),
                rec.feasible.to_string(),
            ]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_cdf(summary: &Summary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for s in &summary.solutions {
        for (i, t) in s.traffic.iter().enumerate() {
            for p in &t.cdf {
                w.serialize(CdfRow {
                    solution: s.kind,
                    traffic: i,
                    latency_ms: p.latency_s * MS,
                    cumulative_probability: p.probability,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn summary_file(summary: &Summary) -> SummaryFile {
    SummaryFile {
        schema_version: SCHEMA_VERSION.to_string(),
        seed: summary.seed,
        solutions: summary
            .solutions
            .iter()
            .map(|s| SolutionSummaryFile {
                solution: s.kind,
                intervals: s.intervals,
                mean_objective_ms: s.mean_objective_s * MS,
                mean_power_w: s.mean_power_w,
                mean_power_dbm: s.mean_power_dbm().map(|p| p.map(|v| if v.is_finite() { v } else { -999.0 })),
                traffic: s
                    .traffic
                    .iter()
                    .enumerate()
                    .map(|(i, t)| TrafficSummaryFile {
                        traffic: i,
                        mean_instant_latency_ms: t.mean_instant_latency_s * MS,
                        deadline_miss_rate: t.deadline_miss_rate,
                        mean_alpha_path1: t.mean_alpha_path1,
                        mean_alpha_path2: t.mean_alpha_path1.map(|a| 1.0 - a),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Writes the full output directory for a run.
pub fn export(summary: &Summary, result: &RunResult, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    write_records(result, &out_dir.join("records/records.csv"))?;
    write_decisions(result, &out_dir.join("records/decisions.csv"))?;
    write_trace(&result.samples, create(&out_dir.join("records/samples.csv"))?)?;
    result
        .trajectory
        .write_csv(result.config.scenario.bs_positions, create(&out_dir.join("records/trajectory.csv"))?)?;
    write_cdf(summary, &out_dir.join("cdf/cdf.csv"))?;
    serde_json::to_writer_pretty(create(&out_dir.join("summary.json"))?, &summary_file(summary))?;

    let config_text = result.config.to_toml_string();
    fs::write(out_dir.join("config.toml"), &config_text)?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed: result.seed(),
        interval_count: result.interval_count(),
        solutions: result.solutions.iter().map(|s| s.kind).collect(),
        created_unix_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_clock_s: result.wall_clock_s,
        config: &config_text,
    };
    serde_json::to_writer_pretty(create(&out_dir.join("manifest.json"))?, &manifest)?;
    Ok(())
}

/// Rebuilds a [`Summary`] from `summary.json` and `cdf/cdf.csv`.
pub fn import_summary(out_dir: &Path) -> Result<Summary> {
    let file: SummaryFile = serde_json::from_reader(BufReader::new(File::open(out_dir.join("summary.json"))?))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Trace(format!("unsupported schema version {}", file.schema_version)));
    }
    let mut solutions: Vec<SolutionSummary> = file
        .solutions
        .into_iter()
        .map(|s| SolutionSummary {
            kind: s.solution,
            intervals: s.intervals,
            mean_objective_s: s.mean_objective_ms / MS,
            mean_power_w: s.mean_power_w,
            traffic: s
                .traffic
                .into_iter()
                .map(|t| TrafficSummary {
                    mean_instant_latency_s: t.mean_instant_latency_ms / MS,
                    deadline_miss_rate: t.deadline_miss_rate,
                    cdf: Vec::new(),
                    mean_alpha_path1: t.mean_alpha_path1,
                })
                .collect(),
        })
        .collect();

    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(out_dir.join("cdf/cdf.csv"))?));
    for row in reader.deserialize() {
        let row: CdfRow = row?;
        let target = solutions
            .iter_mut()
            .find(|s| s.kind == row.solution)
            .and_then(|s| s.traffic.get_mut(row.traffic))
            .ok_or_else(|| Error::Trace(format!("CDF row for unknown {}/{}", row.solution, row.traffic)))?;
        target.cdf.push(CdfPoint {
            latency_s: row.latency_ms / MS,
            probability: row.cumulative_probability,
        });
    }
    Ok(Summary { seed: file.seed, solutions })
}

#[derive(Serialize)]
struct SweepRow {
    parameter: &'static str,
    value: f64,
    solution: SolutionKind,
    traffic: usize,
    mean_latency_ms: f64,
    deadline_miss_rate: f64,
    intervals: usize,
}

/// Sweep table: one row per (value, solution, traffic).
pub fn export_sweep(parameter: SweepParameter, points: &[SweepPoint], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for p in points {
        for s in &p.summary.solutions {
            for (i, t) in s.traffic.iter().enumerate() {
                w.serialize(SweepRow {
                    parameter: parameter.as_str(),
                    value: p.value,
                    solution: s.kind,
                    traffic: i,
                    mean_latency_ms: t.mean_instant_latency_s * MS,
                    deadline_miss_rate: t.deadline_miss_rate,
                    intervals: s.intervals,
                })?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
