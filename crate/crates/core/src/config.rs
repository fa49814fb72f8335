//! Experiment description: traffic types, radio parameters, scenario geometry,
//! solver settings and seed.
//!
//! The on-disk format is TOML with one table per concern:
//!
//! ```toml
//! seed = 42
//! solutions = ["multi_path", "single_path_1", "single_path_2", "path_selection"]
//!
//! [radio]
//! total_bandwidth_hz = 100e6
//! shadowing_sigma_db = 7.8
//!
//! [scenario]
//! ue_initial_position = [250.0, 0.0]
//!
//! [solver]
//! power_grid_points = 201
//!
//! [[traffic]]
//! packet_size_bytes = 100
//! mean_arrival_rate_pps = 200.0
//! mean_queue_packets = 10.0
//! latency_constraint_s = 0.9
//! gbr_path1_range_bps = [100e6, 140e6]
//! gbr_path2_range_bps = [110e6, 130e6]
//! ```
//!
//! Every key is optional; omitted keys take the scenario-1 defaults at
//! 100 MHz (see [`ExperimentConfig::default`]).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::SolutionKind;
use crate::error::{Error, Result};
use crate::mobility::Point;

/// Environment variable that overrides the seed of a loaded configuration.
pub const SEED_ENV_VAR: &str = "MPSPLIT_SEED";

/// Distance between the two base stations along the x axis.
pub const BS_SEPARATION_M: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficTypeSpec {
    /// Packet size in bits. Stored on disk in bytes.
    #[serde(rename = "packet_size_bytes", with = "bytes_as_bits")]
    pub packet_size_bits: u64,
    pub mean_arrival_rate_pps: f64,
    pub mean_queue_packets: f64,
    pub latency_constraint_s: f64,
    pub gbr_path1_range_bps: [f64; 2],
    pub gbr_path2_range_bps: [f64; 2],
}

impl TrafficTypeSpec {
    pub fn packet_size_bytes(&self) -> u64 {
        self.packet_size_bits / 8
    }

    /// Traffic type 1: small packets at a high rate.
    pub fn reference_traffic1() -> Self {
        Self {
            packet_size_bits: 100 * 8,
            mean_arrival_rate_pps: 200.0,
            mean_queue_packets: 10.0,
            latency_constraint_s: 0.9,
            gbr_path1_range_bps: [100e6, 140e6],
            gbr_path2_range_bps: [110e6, 130e6],
        }
    }

    /// Traffic type 2: large packets at a low rate.
    pub fn reference_traffic2() -> Self {
        Self {
            packet_size_bits: 300 * 8,
            mean_arrival_rate_pps: 50.0,
            mean_queue_packets: 5.0,
            latency_constraint_s: 0.85,
            gbr_path1_range_bps: [200e6, 220e6],
            gbr_path2_range_bps: [180e6, 200e6],
        }
    }

    /// The single traffic type used by the bandwidth, distance and packet-size
    /// sweeps: 500-byte packets at 50 packets/s. Queue, deadline and GBR
    /// supports are those of traffic type 1.
    pub fn sweep_traffic() -> Self {
        Self {
            packet_size_bits: 500 * 8,
            mean_arrival_rate_pps: 50.0,
            ..Self::reference_traffic1()
        }
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let field = |name: &str| format!("traffic[{idx}].{name}");
        if self.packet_size_bits == 0 {
            return Err(Error::validation(field("packet_size_bytes"), "must be > 0"));
        }
        if !(self.mean_arrival_rate_pps.is_finite() && self.mean_arrival_rate_pps >= 0.0) {
            return Err(Error::validation(field("mean_arrival_rate_pps"), "must be finite and >= 0"));
        }
        if !(self.mean_queue_packets.is_finite() && self.mean_queue_packets >= 0.0) {
            return Err(Error::validation(field("mean_queue_packets"), "must be finite and >= 0"));
        }
        if !(self.latency_constraint_s.is_finite() && self.latency_constraint_s > 0.0) {
            return Err(Error::validation(field("latency_constraint_s"), "must be finite and > 0"));
        }
        for (name, [lo, hi]) in [
            ("gbr_path1_range_bps", self.gbr_path1_range_bps),
            ("gbr_path2_range_bps", self.gbr_path2_range_bps),
        ] {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::validation(field(name), "bounds must be finite"));
            }
            if lo <= 0.0 {
                return Err(Error::validation(field(name), format!("lower bound must be > 0 (got {lo})")));
            }
            if lo > hi {
                return Err(Error::validation(field(name), format!("lower bound {lo} exceeds upper bound {hi}")));
            }
        }
        Ok(())
    }
}

mod bytes_as_bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(bits / 8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let bytes = u64::deserialize(d)?;
        bytes
            .checked_mul(8)
            .ok_or_else(|| serde::de::Error::custom("packet size overflows"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub total_bandwidth_hz: f64,
    pub carrier_frequency_hz: f64,
    pub total_tx_power_dbm: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub shadowing_sigma_db: f64,
    pub bs_height_m: f64,
    pub ue_height_m: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            total_bandwidth_hz: 100e6,
            carrier_frequency_hz: 2.6e9,
            total_tx_power_dbm: 23.0,
            noise_psd_dbm_per_hz: -174.0,
            shadowing_sigma_db: 7.8,
            bs_height_m: 25.0,
            ue_height_m: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityMode {
    /// 2-D random walk confined to a disc around the initial position.
    RandomWalk,
    /// The UE stays at its initial position for the whole run.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub bs_positions: [Point; 2],
    /// Starting point of the UE and centre of its roam disc.
    pub ue_initial_position: Point,
    pub ue_speed_mps: f64,
    pub roam_radius_m: f64,
    pub mobility: MobilityMode,
    pub interval_duration_s: f64,
    pub simulation_time_s: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs_positions: [Point::new(0.0, 0.0), Point::new(BS_SEPARATION_M, 0.0)],
            ue_initial_position: Point::new(BS_SEPARATION_M / 2.0, 0.0),
            ue_speed_mps: 1.0,
            roam_radius_m: 50.0,
            mobility: MobilityMode::RandomWalk,
            interval_duration_s: 0.5,
            simulation_time_s: 500.0,
        }
    }
}

impl ScenarioConfig {
    /// Number of whole intervals in the simulated time.
    pub fn interval_count(&self) -> usize {
        // Tolerate representation error in ratios like 500 / 0.5.
        (self.simulation_time_s / self.interval_duration_s * (1.0 + 1e-12)).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityMode {
    /// Fail the interval when the optimum violates a latency constraint.
    Reject,
    /// Keep the latency-minimizing decision and mark the record infeasible.
    FlagAndUse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub power_grid_points: usize,
    pub refinement_iterations: usize,
    pub alpha_tolerance: f64,
    pub feasibility_mode: FeasibilityMode,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            power_grid_points: 201,
            refinement_iterations: 60,
            alpha_tolerance: 1e-6,
            feasibility_mode: FeasibilityMode::FlagAndUse,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.power_grid_points < 2 {
            return Err(Error::validation("solver.power_grid_points", "must be >= 2"));
        }
        if !(self.alpha_tolerance > 0.0 && self.alpha_tolerance < 0.5) {
            return Err(Error::validation("solver.alpha_tolerance", "must lie in (0, 0.5)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub solutions: Vec<SolutionKind>,
    pub radio: RadioConfig,
    pub scenario: ScenarioConfig,
    pub solver: SolverSettings,
    pub traffic: Vec<TrafficTypeSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            solutions: SolutionKind::ALL.to_vec(),
            radio: RadioConfig::default(),
            scenario: ScenarioConfig::default(),
            solver: SolverSettings::default(),
            traffic: vec![TrafficTypeSpec::reference_traffic1(), TrafficTypeSpec::reference_traffic2()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// UE walks around the midpoint between the base stations.
    Scenario1,
    /// UE walks around base station 2.
    Scenario2,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scenario1" => Ok(Preset::Scenario1),
            "scenario2" => Ok(Preset::Scenario2),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Reference parameters for the named scenario at the given total bandwidth.
///
/// Base stations sit at (0, 0) and (500, 0). Scenario 1 starts the UE at the
/// midpoint; scenario 2 starts it on the axis 25 m from base station 2.
pub fn scenario_preset(preset: Preset, total_bandwidth_hz: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.radio.total_bandwidth_hz = total_bandwidth_hz;
    cfg.scenario.ue_initial_position = match preset {
        Preset::Scenario1 => Point::new(BS_SEPARATION_M / 2.0, 0.0),
        Preset::Scenario2 => Point::new(BS_SEPARATION_M - 25.0, 0.0),
    };
    cfg
}

/// Same geometry as [`scenario_preset`] but with the single sweep traffic type.
pub fn sweep_preset(preset: Preset, total_bandwidth_hz: f64) -> ExperimentConfig {
    let mut cfg = scenario_preset(preset, total_bandwidth_hz);
    cfg.traffic = vec![TrafficTypeSpec::sweep_traffic()];
    cfg
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.traffic.is_empty() {
            return Err(Error::validation("traffic", "at least one traffic type is required"));
        }
        for (i, t) in self.traffic.iter().enumerate() {
            t.validate(i)?;
        }
        if self.solutions.is_empty() {
            return Err(Error::validation("solutions", "at least one solution must be enabled"));
        }
        for (i, s) in self.solutions.iter().enumerate() {
            if self.solutions[..i].contains(s) {
                return Err(Error::validation("solutions", format!("duplicate entry {s}")));
            }
        }

        let r = &self.radio;
        positive("radio.total_bandwidth_hz", r.total_bandwidth_hz)?;
        positive("radio.carrier_frequency_hz", r.carrier_frequency_hz)?;
        finite("radio.total_tx_power_dbm", r.total_tx_power_dbm)?;
        finite("radio.noise_psd_dbm_per_hz", r.noise_psd_dbm_per_hz)?;
        non_negative("radio.shadowing_sigma_db", r.shadowing_sigma_db)?;
        positive("radio.bs_height_m", r.bs_height_m)?;
        positive("radio.ue_height_m", r.ue_height_m)?;

        let s = &self.scenario;
        for (i, p) in s.bs_positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::validation(format!("scenario.bs_positions[{i}]"), "must be finite"));
            }
        }
        if s.bs_positions[0] == s.bs_positions[1] {
            return Err(Error::validation("scenario.bs_positions", "base stations must be distinct points"));
        }
        if !s.ue_initial_position.is_finite() {
            return Err(Error::validation("scenario.ue_initial_position", "must be finite"));
        }
        non_negative("scenario.ue_speed_mps", s.ue_speed_mps)?;
        positive("scenario.roam_radius_m", s.roam_radius_m)?;
        positive("scenario.interval_duration_s", s.interval_duration_s)?;
        positive("scenario.simulation_time_s", s.simulation_time_s)?;
        if s.interval_count() < 1 {
            return Err(Error::validation(
                "scenario.simulation_time_s",
                "must cover at least one whole interval",
            ));
        }

        self.solver.validate()
    }

    /// Total transmit power in watts.
    pub fn total_tx_power_w(&self) -> f64 {
        crate::channel::dbm_to_watts(self.radio.total_tx_power_dbm)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the seed with the value of [`SEED_ENV_VAR`] when it is set.
    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| Error::validation(SEED_ENV_VAR, format!("`{raw}` is not an unsigned integer")))?;
        }
        Ok(())
    }

    /// Applies a dotted `key=value` override, e.g. `radio.total_bandwidth_hz=50e6`
    /// or `traffic.0.packet_size_bytes=500`. The key must name an existing field.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let mut doc = toml::Value::try_from(&*self).expect("configuration always serializes");
        let slot = lookup_mut(&mut doc, key)?;
        *slot = coerce_like(slot, value).map_err(|c| Error::validation(key, c))?;
        let updated: ExperimentConfig = doc
            .try_into()
            .map_err(|e: toml::de::Error| Error::validation(key, e.message().to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

fn lookup_mut<'a>(doc: &'a mut toml::Value, key: &str) -> Result<&'a mut toml::Value> {
    let mut cur = doc;
    for part in key.split('.') {
        cur = match cur {
            toml::Value::Table(t) => t.get_mut(part),
            toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
    }
    Ok(cur)
}

fn coerce_like(existing: &toml::Value, raw: &str) -> std::result::Result<toml::Value, String> {
    use toml::Value;
    let raw = raw.trim();
    match existing {
        Value::Float(_) => raw
            .parse::<f64>()
            .map(Value::Float)
            .map_err(|_| format!("`{raw}` is not a number")),
        Value::Integer(_) => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
            .map(|v| Value::Integer(v as i64))
            .ok_or_else(|| format!("`{raw}` is not an integer")),
        Value::Boolean(_) => raw
            .parse::<bool>()
            .map(Value::Boolean)
            .map_err(|_| format!("`{raw}` is not a boolean")),
        Value::String(_) => Ok(Value::String(raw.trim_matches('"').to_string())),
        Value::Array(_) | Value::Table(_) | Value::Datetime(_) => {
            let wrapped = format!("v = {raw}");
            let parsed: toml::Table = wrapped.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
            Ok(parsed["v"].clone())
        }
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and > 0 (got {v})")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite and >= 0 (got {v})")))
    }
}

/// Reads, defaults and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_toml_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn packet_sizes_convert_bytes_to_bits() {
        let cfg = parse(
            r#"
            [[traffic]]
            packet_size_bytes = 100
            mean_arrival_rate_pps = 200
            mean_queue_packets = 10
            latency_constraint_s = 0.9
            gbr_path1_range_bps = [100e6, 140e6]
            gbr_path2_range_bps = [110e6, 130e6]

            [[traffic]]
            packet_size_bytes = 300
            mean_arrival_rate_pps = 50
            mean_queue_packets = 5
            latency_constraint_s = 0.85
            gbr_path1_range_bps = [200e6, 220e6]
            gbr_path2_range_bps = [180e6, 200e6]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.traffic[0].packet_size_bits, 800);
        assert_eq!(cfg.traffic[1].packet_size_bits, 2400);
    }

    #[test]
    fn omitted_shadowing_defaults_to_table_value() {
        let cfg = parse("[radio]\ntotal_bandwidth_hz = 50e6\n").unwrap();
        assert_eq!(cfg.radio.shadowing_sigma_db, 7.8);
        assert_eq!(cfg.radio.total_bandwidth_hz, 50e6);
    }

    #[test]
    fn zero_gbr_lower_bound_is_rejected() {
        let err = parse(
            r#"
            [[traffic]]
            packet_size_bytes = 100
            mean_arrival_rate_pps = 200
            mean_queue_packets = 10
            latency_constraint_s = 0.9
            gbr_path1_range_bps = [0, 1e8]
            gbr_path2_range_bps = [110e6, 130e6]
            "#,
        )
        .unwrap_err();
        match err {
            Error::Validation { field, .. } => assert_eq!(field, "traffic[0].gbr_path1_range_bps"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_file_is_a_parse_error() {
        assert!(matches!(parse("[radio\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse("[radio]\nbogus = 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn presets_match_table_values() {
        let s1 = scenario_preset(Preset::Scenario1, 100e6);
        let [bs1, bs2] = s1.scenario.bs_positions;
        assert_eq!(s1.scenario.ue_initial_position.distance(bs1), 250.0);
        assert_eq!(s1.scenario.ue_initial_position.distance(bs2), 250.0);
        assert_eq!(s1.radio.total_tx_power_dbm, 23.0);
        assert_eq!(s1.radio.noise_psd_dbm_per_hz, -174.0);
        assert_eq!(s1.radio.carrier_frequency_hz, 2.6e9);
        assert_eq!(s1.scenario.ue_speed_mps, 1.0);
        assert_eq!(s1.scenario.interval_count(), 1000);

        let s2 = scenario_preset(Preset::Scenario2, 100e6);
        let p = s2.scenario.ue_initial_position;
        assert_eq!(p.distance(bs2), 25.0);
        // 474 m is not reachable with 500 m separation; the axis point gives 475.
        assert!((p.distance(bs1) - 474.0).abs() <= 1.0);
        assert!("scenario3".parse::<Preset>().is_err());
    }

    #[test]
    fn overrides_touch_only_known_keys() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_override("radio.total_bandwidth_hz", "50e6").unwrap();
        assert_eq!(cfg.radio.total_bandwidth_hz, 50e6);
        cfg.apply_override("traffic.1.packet_size_bytes", "500").unwrap();
        assert_eq!(cfg.traffic[1].packet_size_bits, 4000);
        cfg.apply_override("scenario.mobility", "fixed").unwrap();
        assert_eq!(cfg.scenario.mobility, MobilityMode::Fixed);
        cfg.apply_override("solutions", r#"["multi_path"]"#).unwrap();
        assert_eq!(cfg.solutions, vec![SolutionKind::MultiPath]);

        assert!(matches!(cfg.apply_override("radio.nope", "1"), Err(Error::UnknownKey(_))));
        assert!(matches!(
            cfg.apply_override("solver.power_grid_points", "1"),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.scenario.bs_positions[1] = cfg.scenario.bs_positions[0];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.scenario.simulation_time_s = 0.25;
        assert!(cfg.validate().is_err());
    }
}
