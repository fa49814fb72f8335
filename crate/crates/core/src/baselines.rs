//! Comparison strategies: a fixed single path and per-interval path selection.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::latency::Decision;
use crate::optimizer::{decision_record, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SolutionKind {
    #[serde(rename = "multi_path")]
    MultiPath,
    #[serde(rename = "single_path_1")]
    SinglePath1,
    #[serde(rename = "single_path_2")]
    SinglePath2,
    #[serde(rename = "path_selection")]
    PathSelection,
}

impl SolutionKind {
    pub const ALL: [SolutionKind; 4] = [
        SolutionKind::MultiPath,
        SolutionKind::SinglePath1,
        SolutionKind::SinglePath2,
        SolutionKind::PathSelection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolutionKind::MultiPath => "multi_path",
            SolutionKind::SinglePath1 => "single_path_1",
            SolutionKind::SinglePath2 => "single_path_2",
            SolutionKind::PathSelection => "path_selection",
        }
    }

    /// Bandwidth each base station grants the UE: half the total when both
    /// paths are in play, the whole total when only one BS is ever used.
    pub fn bandwidth_per_bs_hz(self, total_bandwidth_hz: f64) -> f64 {
        match self {
            SolutionKind::MultiPath | SolutionKind::PathSelection => total_bandwidth_hz / 2.0,
            SolutionKind::SinglePath1 | SolutionKind::SinglePath2 => total_bandwidth_hz,
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SolutionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SolutionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown solution `{s}`"))
    }
}

/// All traffic and the full power budget on one path (`0` = path 1).
pub fn single_path_decision(path: usize, traffic_types: usize, p_total_watts: f64) -> Decision {
    if path == 0 {
        Decision::with_power_split(vec![1.0; traffic_types], p_total_watts, p_total_watts)
    } else {
        Decision::with_power_split(vec![0.0; traffic_types], 0.0, p_total_watts)
    }
}

/// Picks whichever single path gives the smaller summed instant latency this
/// interval. Ties go to path 1. `problem` must carry half-bandwidth links.
pub fn path_selection_decision(problem: &Problem<'_>) -> Decision {
    let n = problem.traffic.len();
    let on1 = single_path_decision(0, n, problem.p_total_watts);
    let on2 = single_path_decision(1, n, problem.p_total_watts);
    let f1 = decision_record(problem, &on1).objective_s;
    let f2 = decision_record(problem, &on2).objective_s;
    if f2 < f1 {
        on2
    } else {
        on1
    }
}
