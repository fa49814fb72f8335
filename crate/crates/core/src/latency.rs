//! Per-path latency model: wireless transmission time over the Shannon rate
//! plus N3 transport time over the flow's guaranteed bit rate.
//!
//! Path indices are zero-based internally (`0` is path 1 via BS 1).

use serde::{Deserialize, Serialize};

use crate::channel::LinkState;
use crate::config::TrafficTypeSpec;
use crate::error::{Error, Result};
use crate::traffic::IntervalSample;

/// Relative tolerance on `p1 + p2 = P_tot`.
pub const POWER_SUM_TOLERANCE: f64 = 1e-9;

/// Split ratios and power pair chosen for one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    /// Fraction of each traffic type routed over path 1.
    pub alphas: Vec<f64>,
    pub p1_watts: f64,
    pub p2_watts: f64,
}

impl Decision {
    /// Decision with `p2 = p_total - p1`.
    pub fn with_power_split(alphas: Vec<f64>, p1_watts: f64, p_total_watts: f64) -> Self {
        let p1 = p1_watts.clamp(0.0, p_total_watts);
        Self {
            alphas,
            p1_watts: p1,
            p2_watts: p_total_watts - p1,
        }
    }

    pub fn powers(&self) -> [f64; 2] {
        [self.p1_watts, self.p2_watts]
    }

    /// Checks the box and sum constraints on ratios and powers.
    pub fn check_constraints(&self, p_total_watts: f64) -> Result<()> {
        if let Some((i, a)) = self.alphas.iter().enumerate().find(|(_, a)| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Domain(format!("alpha[{i}] = {a} outside [0, 1]")));
        }
        for (name, p) in [("p1", self.p1_watts), ("p2", self.p2_watts)] {
            if !(0.0..=p_total_watts).contains(&p) {
                return Err(Error::Domain(format!("{name} = {p} W outside [0, {p_total_watts}]")));
            }
        }
        let sum = self.p1_watts + self.p2_watts;
        if (sum - p_total_watts).abs() > POWER_SUM_TOLERANCE * p_total_watts {
            return Err(Error::Domain(format!("p1 + p2 = {sum} W differs from total {p_total_watts} W")));
        }
        Ok(())
    }
}

/// Latency breakdown of one traffic type in one interval. Array index is the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficRecord {
    pub wireless_latency_s: [f64; 2],
    pub n3_latency_s: [f64; 2],
    pub path_total_s: [f64; 2],
    /// Larger of the two path totals.
    pub instant_latency_s: f64,
    pub deadline_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub interval: usize,
    pub decision: Decision,
    pub traffic: Vec<TrafficRecord>,
    /// Sum of instant latencies over traffic types.
    pub objective_s: f64,
    /// Every per-path total within its traffic type's deadline.
    pub feasible: bool,
}

/// Time to push `portion` of `pkts` packets of `pkt_bits` bits over a radio
/// link of `rate_bps`. Zero traffic costs nothing even on a dead link; any
/// traffic on a dead link takes forever.
pub fn wireless_latency(portion: f64, pkts: u64, pkt_bits: u64, rate_bps: f64) -> f64 {
    let bits = portion * pkts as f64 * pkt_bits as f64;
    if bits == 0.0 {
        0.0
    } else if rate_bps <= 0.0 {
        f64::INFINITY
    } else {
        bits / rate_bps
    }
}

/// Time to carry the same load over the N3 link at the flow's GBR.
pub fn n3_latency(portion: f64, pkts: u64, pkt_bits: u64, gbr_bps: f64) -> Result<f64> {
    if gbr_bps.is_nan() || gbr_bps <= 0.0 {
        return Err(Error::Domain(format!("GBR must be positive, got {gbr_bps}")));
    }
    Ok(portion * pkts as f64 * pkt_bits as f64 / gbr_bps)
}

/// Evaluates a decision against one interval's draws and link states.
pub fn evaluate(
    decision: &Decision,
    sample: &IntervalSample,
    links: &[LinkState; 2],
    traffic: &[TrafficTypeSpec],
) -> IntervalRecord {
    debug_assert_eq!(decision.alphas.len(), traffic.len());
    debug_assert_eq!(sample.traffic.len(), traffic.len());
    let rates = [links[0].rate_bps(decision.p1_watts), links[1].rate_bps(decision.p2_watts)];

    let records: Vec<TrafficRecord> = traffic
        .iter()
        .zip(&sample.traffic)
        .zip(&decision.alphas)
        .map(|((spec, draw), &alpha)| {
            let portions = [alpha, 1.0 - alpha];
            let pkts = draw.packets();
            let mut wireless = [0.0; 2];
            let mut n3 = [0.0; 2];
            let mut total = [0.0; 2];
            for p in 0..2 {
                wireless[p] = wireless_latency(portions[p], pkts, spec.packet_size_bits, rates[p]);
                n3[p] = n3_latency(portions[p], pkts, spec.packet_size_bits, draw.gbr_bps[p])
                    .expect("sampled GBR is positive");
                total[p] = wireless[p] + n3[p];
            }
            let instant = total[0].max(total[1]);
            TrafficRecord {
                wireless_latency_s: wireless,
                n3_latency_s: n3,
                path_total_s: total,
                instant_latency_s: instant,
                deadline_met: instant <= spec.latency_constraint_s,
            }
        })
        .collect();

    let objective_s = records.iter().map(|r| r.instant_latency_s).sum();
    let feasible = records.iter().zip(traffic).all(|(r, spec)| {
        r.path_total_s[0] <= spec.latency_constraint_s && r.path_total_s[1] <= spec.latency_constraint_s
    });
    IntervalRecord {
        interval: sample.interval,
        decision: decision.clone(),
        traffic: records,
        objective_s,
        feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::Point;
    use crate::traffic::TrafficSample;
    use approx::assert_relative_eq;

    #[test]
    fn wireless_latency_examples() {
        // 110 * 800 = 88 000 bits over 95 Mbit/s.
        assert_relative_eq!(wireless_latency(1.0, 110, 800, 95e6), 88_000.0 / 95e6);
        assert!((wireless_latency(1.0, 110, 800, 95e6) - 0.926e-3).abs() < 1e-6);
        assert_eq!(wireless_latency(0.0, 110, 800, 0.0), 0.0);
        assert_relative_eq!(wireless_latency(0.5, 100, 800, 40e6), 1.0e-3);
        assert_eq!(wireless_latency(0.2, 100, 800, 0.0), f64::INFINITY);
        assert_eq!(wireless_latency(0.7, 0, 800, 0.0), 0.0);
    }

    #[test]
    fn n3_latency_examples() {
        assert!((n3_latency(0.5, 110, 800, 120e6).unwrap() - 0.367e-3).abs() < 1e-6);
        assert_eq!(n3_latency(0.0, 999, 12_000, 120e6).unwrap(), 0.0);
        assert_relative_eq!(n3_latency(1.0, 55, 2400, 200e6).unwrap(), 0.66e-3);
        assert!(n3_latency(1.0, 1, 8, 0.0).is_err());
    }

    fn sample(pkts: [u64; 2], gbr: [f64; 2]) -> IntervalSample {
        IntervalSample {
            interval: 0,
            ue_position: Point::default(),
            shadowing_db: [0.0, 0.0],
            traffic: pkts
                .iter()
                .map(|&p| TrafficSample {
                    arrivals_pkts: p,
                    queued_pkts: 3,
                    gbr_bps: gbr,
                })
                .collect(),
        }
    }

    fn specs() -> Vec<TrafficTypeSpec> {
        vec![TrafficTypeSpec::reference_traffic1(), TrafficTypeSpec::reference_traffic2()]
    }

    #[test]
    fn full_path1_boundary() {
        let links = [LinkState::from_snr_per_watt(50e6, 1e3), LinkState::from_snr_per_watt(50e6, 1e3)];
        let d = Decision::with_power_split(vec![1.0, 1.0], 0.2, 0.2);
        let rec = evaluate(&d, &sample([100, 20], [120e6, 120e6]), &links, &specs());
        for t in &rec.traffic {
            assert_eq!(t.path_total_s[1], 0.0);
            assert_eq!(t.instant_latency_s, t.path_total_s[0]);
            assert!(t.path_total_s[0] > 0.0);
        }
    }

    #[test]
    fn symmetric_paths_balance_exactly() {
        let link = LinkState::from_snr_per_watt(50e6, 1e3);
        let d = Decision::with_power_split(vec![0.5, 0.5], 0.1, 0.2);
        let rec = evaluate(&d, &sample([100, 20], [125e6, 125e6]), &[link, link], &specs());
        for t in &rec.traffic {
            assert_eq!(t.path_total_s[0], t.path_total_s[1]);
        }
        let sum: f64 = rec.traffic.iter().map(|t| t.instant_latency_s).sum();
        assert_eq!(rec.objective_s, sum);
        assert!(rec.feasible);
    }

    #[test]
    fn dead_path_with_traffic_is_infeasible() {
        let link = LinkState::from_snr_per_watt(50e6, 1e3);
        let d = Decision::with_power_split(vec![0.5, 0.5], 0.2, 0.2);
        let rec = evaluate(&d, &sample([100, 20], [125e6, 125e6]), &[link, link], &specs());
        assert_eq!(rec.traffic[0].wireless_latency_s[1], f64::INFINITY);
        assert!(!rec.feasible);
        assert!(!rec.traffic[0].deadline_met);
    }

    #[test]
    fn decision_constraints() {
        let d = Decision::with_power_split(vec![0.0, 1.0, 0.3], 0.05, 0.2);
        d.check_constraints(0.2).unwrap();
        let bad = Decision {
            alphas: vec![1.2],
            p1_watts: 0.1,
            p2_watts: 0.1,
        };
        assert!(bad.check_constraints(0.2).is_err());
        let bad_sum = Decision {
            alphas: vec![0.5],
            p1_watts: 0.1,
            p2_watts: 0.2,
        };
        assert!(bad_sum.check_constraints(0.2).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn latencies_scale_linearly_with_packets(
                alpha in 0.0f64..=1.0,
                p1 in 0.001f64..0.199,
                pkts in 1u64..500,
                k in 1u64..20,
                gain1 in 1.0f64..1e6,
                gain2 in 1.0f64..1e6,
            ) {
                let links = [LinkState::from_snr_per_watt(20e6, gain1), LinkState::from_snr_per_watt(40e6, gain2)];
                let d = Decision::with_power_split(vec![alpha, alpha], p1, 0.2);
                let mut base = sample([pkts, pkts], [110e6, 190e6]);
                for t in &mut base.traffic { t.queued_pkts = 0; }
                let mut scaled = base.clone();
                for t in &mut scaled.traffic { t.arrivals_pkts *= k; }
                let a = evaluate(&d, &base, &links, &specs());
                let b = evaluate(&d, &scaled, &links, &specs());
                for (ta, tb) in a.traffic.iter().zip(&b.traffic) {
                    for p in 0..2 {
                        prop_assert!((tb.path_total_s[p] - k as f64 * ta.path_total_s[p]).abs()
                            <= 1e-12 * tb.path_total_s[p].max(1e-300));
                    }
                }
            }

            #[test]
            fn path_totals_monotone_in_alpha_and_power(
                a_lo in 0.0f64..0.99,
                da in 0.001f64..0.5,
                p_lo in 0.001f64..0.15,
                dp in 0.001f64..0.04,
                gain in 10.0f64..1e6,
            ) {
                let a_hi = (a_lo + da).min(1.0);
                let links = [LinkState::from_snr_per_watt(30e6, gain), LinkState::from_snr_per_watt(30e6, gain * 0.5)];
                let s = sample([80, 30], [120e6, 120e6]);
                let lo = evaluate(&Decision::with_power_split(vec![a_lo; 2], p_lo, 0.2), &s, &links, &specs());
                let hi = evaluate(&Decision::with_power_split(vec![a_hi; 2], p_lo, 0.2), &s, &links, &specs());
                for (l, h) in lo.traffic.iter().zip(&hi.traffic) {
                    prop_assert!(h.path_total_s[0] > l.path_total_s[0]);
                    prop_assert!(h.path_total_s[1] < l.path_total_s[1]);
                }
                let more_p1 = evaluate(&Decision::with_power_split(vec![a_lo; 2], p_lo + dp, 0.2), &s, &links, &specs());
                for (l, m) in lo.traffic.iter().zip(&more_p1.traffic) {
                    prop_assert!(m.path_total_s[0] <= l.path_total_s[0]);
                    prop_assert!(m.path_total_s[1] >= l.path_total_s[1]);
                }
            }
        }
    }
}
