//! Joint split-ratio and power allocation for one interval.
//!
//! At a fixed power pair the objective separates per traffic type, and each
//! term `max(alpha * a1, (1 - alpha) * a2)` is minimized in closed form where
//! the two lines cross. What remains is a one-dimensional search over the
//! power on path 1, done with a dense grid followed by trisection around the
//! best grid point. The single-path corners are always evaluated as well, so
//! the returned decision is never worse than sending everything on one path
//! at full power.

use crate::channel::LinkState;
use crate::config::{FeasibilityMode, SolverSettings, TrafficTypeSpec};
use crate::error::{Error, Result};
use crate::latency::{evaluate, Decision, IntervalRecord};
use crate::traffic::IntervalSample;

/// Latency of sending all of a traffic type over each path at the current
/// rates: `pkts * M * (1/R_p + 1/c_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCostCoefficients {
    pub per_path_s: [f64; 2],
}

impl PathCostCoefficients {
    pub fn new(bits: f64, rates_bps: [f64; 2], gbr_bps: [f64; 2]) -> Self {
        let cost = |p: usize| {
            if bits == 0.0 {
                0.0
            } else if rates_bps[p] <= 0.0 {
                f64::INFINITY
            } else {
                bits * (1.0 / rates_bps[p] + 1.0 / gbr_bps[p])
            }
        };
        Self {
            per_path_s: [cost(0), cost(1)],
        }
    }
}

/// Minimizer of `max(alpha * a1, (1 - alpha) * a2)` over `alpha` in [0, 1].
///
/// Returns `(alpha, min_max_value)`. An infinite coefficient forces all
/// traffic onto the other path; `a1 = a2 = 0` returns the tie-break 0.5.
pub fn optimal_split(a1: f64, a2: f64) -> Result<(f64, f64)> {
    match (a1.is_infinite(), a2.is_infinite()) {
        (true, true) => Err(Error::NoFeasibleSplit),
        (true, false) => Ok((0.0, a2)),
        (false, true) => Ok((1.0, a1)),
        (false, false) => {
            let sum = a1 + a2;
            if sum == 0.0 {
                Ok((0.5, 0.0))
            } else {
                Ok((a2 / sum, a1 * a2 / sum))
            }
        }
    }
}

/// Interval data the optimizer works on.
pub struct Problem<'a> {
    pub sample: &'a IntervalSample,
    pub links: &'a [LinkState; 2],
    pub traffic: &'a [TrafficTypeSpec],
    pub p_total_watts: f64,
}

impl Problem<'_> {
    fn coefficients(&self, p1_watts: f64) -> impl Iterator<Item = PathCostCoefficients> + '_ {
        let p2 = self.p_total_watts - p1_watts;
        let rates = [self.links[0].rate_bps(p1_watts), self.links[1].rate_bps(p2)];
        self.traffic.iter().zip(&self.sample.traffic).map(move |(spec, draw)| {
            let bits = draw.packets() as f64 * spec.packet_size_bits as f64;
            PathCostCoefficients::new(bits, rates, draw.gbr_bps)
        })
    }

    /// Objective after the inner split minimization, `+inf` when some traffic
    /// type has no usable path at this power.
    pub fn objective_at_power(&self, p1_watts: f64) -> f64 {
        let mut total = 0.0;
        for c in self.coefficients(p1_watts) {
            match optimal_split(c.per_path_s[0], c.per_path_s[1]) {
                Ok((_, v)) => total += v,
                Err(_) => return f64::INFINITY,
            }
        }
        total
    }

    pub fn decision_at_power(&self, p1_watts: f64) -> Result<Decision> {
        let alphas = self
            .coefficients(p1_watts)
            .map(|c| optimal_split(c.per_path_s[0], c.per_path_s[1]).map(|(a, _)| a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Decision::with_power_split(alphas, p1_watts, self.p_total_watts))
    }

    fn single_path(&self, path: usize) -> Decision {
        let n = self.traffic.len();
        match path {
            0 => Decision::with_power_split(vec![1.0; n], self.p_total_watts, self.p_total_watts),
            _ => Decision::with_power_split(vec![0.0; n], 0.0, self.p_total_watts),
        }
    }
}

/// Best power on path 1 by grid search plus trisection refinement.
/// Returns `(p1_watts, objective)`.
pub fn search_power(problem: &Problem<'_>, settings: &SolverSettings) -> (f64, f64) {
    let p_tot = problem.p_total_watts;
    let n = settings.power_grid_points.max(2);
    let step = p_tot / (n - 1) as f64;
    let grid_point = |k: usize| if k == n - 1 { p_tot } else { k as f64 * step };

    let mut best = (0.0, f64::INFINITY);
    let mut best_k = 0;
    for k in 0..n {
        let p = grid_point(k);
        let f = problem.objective_at_power(p);
        if f < best.1 {
            best = (p, f);
            best_k = k;
        }
    }
    if !best.1.is_finite() {
        return best;
    }

    let mut lo = grid_point(best_k.saturating_sub(1));
    let mut hi = grid_point((best_k + 1).min(n - 1));
    for _ in 0..settings.refinement_iterations {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let f1 = problem.objective_at_power(m1);
        let f2 = problem.objective_at_power(m2);
        for (p, f) in [(m1, f1), (m2, f2)] {
            if f < best.1 {
                best = (p, f);
            }
        }
        if f1 < f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best
}

/// Solves one interval. The returned record always satisfies the ratio and
/// power constraints; latency constraints are checked against
/// `settings.feasibility_mode`.
pub fn solve(problem: &Problem<'_>, settings: &SolverSettings) -> Result<IntervalRecord> {
    let (p1, f) = search_power(problem, settings);

    let mut candidates = vec![problem.single_path(0), problem.single_path(1)];
    if f.is_finite() {
        candidates.insert(0, problem.decision_at_power(p1)?);
    }
    let best = candidates
        .iter()
        .map(|d| decision_record(problem, d))
        .filter(|r| r.objective_s.is_finite())
        .min_by(|a, b| a.objective_s.total_cmp(&b.objective_s))
        .ok_or(Error::NoFeasibleSplit)?;

    if !best.feasible && settings.feasibility_mode == FeasibilityMode::Reject {
        return Err(Error::Infeasible {
            interval: problem.sample.interval,
            objective_s: best.objective_s,
        });
    }
    Ok(best)
}

/// Evaluates an externally supplied decision.
pub fn decision_record(problem: &Problem<'_>, decision: &Decision) -> IntervalRecord {
    evaluate(decision, problem.sample, problem.links, problem.traffic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Point;
    use crate::traffic::TrafficSample;
    use approx::assert_relative_eq;

    /// Minimum over a uniform alpha grid; independent of the closed form.
    fn grid_min(a1: f64, a2: f64, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|j| {
                let a = j as f64 / n as f64;
                (a, (a * a1).max((1.0 - a) * a2))
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(optimal_split(2.0, 2.0).unwrap(), (0.5, 1.0));
        let (a, v) = optimal_split(3.0, 1.0).unwrap();
        assert_relative_eq!(a, 0.25);
        assert_relative_eq!(v, 0.75);
        let (ga, gv) = grid_min(3.0, 1.0, 1000);
        assert_relative_eq!(ga, 0.25);
        assert_relative_eq!(gv, 0.75);
        assert_eq!(optimal_split(5.0, f64::INFINITY).unwrap(), (1.0, 5.0));
        assert_eq!(optimal_split(f64::INFINITY, 5.0).unwrap(), (0.0, 5.0));
        assert_eq!(optimal_split(0.0, 0.0).unwrap(), (0.5, 0.0));
        assert!(matches!(optimal_split(f64::INFINITY, f64::INFINITY), Err(Error::NoFeasibleSplit)));
    }

    fn specs(n: usize) -> Vec<TrafficTypeSpec> {
        let mut t = TrafficTypeSpec::reference_traffic1();
        t.gbr_path1_range_bps = [120e6, 120e6];
        t.gbr_path2_range_bps = [120e6, 120e6];
        vec![t; n]
    }

    fn sample(pkts: &[u64], gbr: [f64; 2]) -> IntervalSample {
        IntervalSample {
            interval: 3,
            ue_position: Point::default(),
            shadowing_db: [0.0; 2],
            traffic: pkts
                .iter()
                .map(|&p| TrafficSample {
                    arrivals_pkts: p,
                    queued_pkts: 0,
                    gbr_bps: gbr,
                })
                .collect(),
        }
    }

    #[test]
    fn symmetric_interval_splits_evenly() {
        let link = LinkState::new(50e6, 115.6, 0.0, -174.0);
        let links = [link, link];
        let s = sample(&[110, 30], [120e6, 120e6]);
        let traffic = specs(2);
        let problem = Problem {
            sample: &s,
            links: &links,
            traffic: &traffic,
            p_total_watts: 0.2,
        };
        let rec = solve(&problem, &SolverSettings::default()).unwrap();
        assert!((rec.decision.p1_watts - 0.1).abs() < 1e-6, "{:?}", rec.decision);
        for a in &rec.decision.alphas {
            assert!((a - 0.5).abs() < 1e-6);
        }
        rec.decision.check_constraints(0.2).unwrap();
    }

    #[test]
    fn weak_path_gets_little_traffic() {
        let good = LinkState::new(5e6, 100.0, 0.0, -174.0);
        let bad = LinkState::new(5e6, 160.0, 0.0, -174.0);
        let links = [bad, good];
        let s = sample(&[110, 30], [120e6, 120e6]);
        let traffic = specs(2);
        let problem = Problem {
            sample: &s,
            links: &links,
            traffic: &traffic,
            p_total_watts: 0.2,
        };
        let rec = solve(&problem, &SolverSettings::default()).unwrap();
        assert!(rec.decision.alphas.iter().all(|&a| a < 0.05), "{:?}", rec.decision);
        // Brute force over power confirms the objective.
        let brute = (0..=10_000)
            .map(|k| problem.objective_at_power(0.2 * k as f64 / 10_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(rec.objective_s <= brute * (1.0 + 1e-6));
    }

    #[test]
    fn solved_objective_matches_re_evaluation() {
        let links = [LinkState::new(50e6, 112.0, 2.0, -174.0), LinkState::new(50e6, 118.0, -3.0, -174.0)];
        let s = sample(&[90, 40], [110e6, 130e6]);
        let traffic = specs(2);
        let problem = Problem {
            sample: &s,
            links: &links,
            traffic: &traffic,
            p_total_watts: 0.2,
        };
        let rec = solve(&problem, &SolverSettings::default()).unwrap();
        assert_eq!(decision_record(&problem, &rec.decision).objective_s, rec.objective_s);
        assert_eq!(rec.interval, 3);

        let p1_only = decision_record(&problem, &problem.single_path(0));
        assert!(p1_only.traffic.iter().all(|t| t.path_total_s[1] == 0.0));
        let p2_only = decision_record(&problem, &problem.single_path(1));
        assert!(p2_only.traffic.iter().all(|t| t.path_total_s[0] == 0.0));
        assert!(rec.objective_s <= p1_only.objective_s.min(p2_only.objective_s));
    }

    #[test]
    fn reject_mode_reports_infeasible_interval() {
        let link = LinkState::new(1e3, 150.0, 0.0, -174.0);
        let s = sample(&[500], [120e6, 120e6]);
        let traffic = specs(1);
        let problem = Problem {
            sample: &s,
            links: &[link, link],
            traffic: &traffic,
            p_total_watts: 0.2,
        };
        let flag = solve(&problem, &SolverSettings::default()).unwrap();
        assert!(!flag.feasible);
        let reject = SolverSettings {
            feasibility_mode: FeasibilityMode::Reject,
            ..SolverSettings::default()
        };
        assert!(matches!(solve(&problem, &reject), Err(Error::Infeasible { interval: 3, .. })));
    }

    #[test]
    fn dead_links_are_degenerate() {
        let dead = LinkState::from_snr_per_watt(1e6, 0.0);
        let s = sample(&[5], [120e6, 120e6]);
        let traffic = specs(1);
        let problem = Problem {
            sample: &s,
            links: &[dead, dead],
            traffic: &traffic,
            p_total_watts: 0.2,
        };
        assert!(matches!(solve(&problem, &SolverSettings::default()), Err(Error::NoFeasibleSplit)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn closed_form_split_beats_every_grid_alpha(a1 in 0.0f64..10.0, a2 in 0.0f64..10.0) {
                let (alpha, v) = optimal_split(a1, a2).unwrap();
                prop_assert!((0.0..=1.0).contains(&alpha));
                let at_opt = (alpha * a1).max((1.0 - alpha) * a2);
                prop_assert!((at_opt - v).abs() <= 1e-12 * v.max(1.0));
                for j in 0..=1000 {
                    let a = j as f64 / 1000.0;
                    prop_assert!(at_opt <= (a * a1).max((1.0 - a) * a2) * (1.0 + 1e-12) + 1e-15);
                }
            }

            #[test]
            fn solution_is_balanced_and_compliant(
                g1 in -20.0f64..40.0,
                g2 in -20.0f64..40.0,
                pkts1 in 1u64..300,
                pkts2 in 0u64..300,
            ) {
                let p_tot = 0.2;
                let links = [
                    LinkState::from_snr_per_watt(20e6, 10f64.powf(g1 / 10.0) / p_tot),
                    LinkState::from_snr_per_watt(20e6, 10f64.powf(g2 / 10.0) / p_tot),
                ];
                let s = sample(&[pkts1, pkts2], [120e6, 150e6]);
                let traffic = specs(2);
                let problem = Problem { sample: &s, links: &links, traffic: &traffic, p_total_watts: p_tot };
                let settings = SolverSettings::default();
                let rec = solve(&problem, &settings).unwrap();
                rec.decision.check_constraints(p_tot).unwrap();
                for (t, &a) in rec.traffic.iter().zip(&rec.decision.alphas) {
                    let [u1, u2] = t.path_total_s;
                    if a > 0.0 && a < 1.0 && u1.is_finite() && u2.is_finite() && u1 > 0.0 {
                        prop_assert!((u1 - u2).abs() <= settings.alpha_tolerance * u1.max(u2));
                    }
                }
                if rec.feasible {
                    for (t, spec) in rec.traffic.iter().zip(&traffic) {
                        prop_assert!(t.path_total_s.iter().all(|&u| u <= spec.latency_constraint_s));
                    }
                }
            }
        }
    }
}
