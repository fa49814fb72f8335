//! Large-scale fading radio model: UMa NLOS pathloss, lognormal shadowing,
//! thermal noise and Shannon rate per path.
//!
//! All SNR arithmetic is linear (watts); dB and dBm appear only at the edges.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

const SPEED_OF_LIGHT_MPS: f64 = 3.0e8;
/// Effective environment height of the UMa LOS breakpoint model.
const ENVIRONMENT_HEIGHT_M: f64 = 1.0;
/// Lower edge of the distance range the UMa model is specified for.
pub const MIN_VALID_DISTANCE_M: f64 = 10.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    if dbm == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf((dbm - 30.0) / 10.0)
    }
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    if watts <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * watts.log10() + 30.0
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Thermal noise power over `bandwidth_hz` for the given noise density.
pub fn noise_power_dbm(noise_psd_dbm_per_hz: f64, bandwidth_hz: f64) -> f64 {
    noise_psd_dbm_per_hz + 10.0 * bandwidth_hz.log10()
}

fn distance_3d(d2d_m: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    (d2d_m * d2d_m + (h_bs_m - h_ut_m).powi(2)).sqrt()
}

/// UMa LOS pathloss with the two-slope breakpoint model.
pub fn pathloss_uma_los(d2d_m: f64, fc_hz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    let fc_ghz = fc_hz / 1e9;
    let d3d = distance_3d(d2d_m, h_bs_m, h_ut_m);
    let breakpoint =
        4.0 * (h_bs_m - ENVIRONMENT_HEIGHT_M) * (h_ut_m - ENVIRONMENT_HEIGHT_M) * fc_hz / SPEED_OF_LIGHT_MPS;
    if d2d_m <= breakpoint {
        28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
    } else {
        28.0 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10()
            - 9.0 * (breakpoint * breakpoint + (h_bs_m - h_ut_m).powi(2)).log10()
    }
}

/// UMa NLOS pathloss in dB: `max(PL_LOS, PL'_NLOS)` with
/// `PL'_NLOS = 13.54 + 39.08 log10(d3D) + 20 log10(fc/GHz) - 0.6 (h_UT - 1.5)`.
pub fn pathloss_uma_nlos(d2d_m: f64, fc_hz: f64, h_bs_m: f64, h_ut_m: f64) -> Result<f64> {
    if !(d2d_m > 0.0 && d2d_m.is_finite()) {
        return Err(Error::Domain(format!("pathloss distance must be positive, got {d2d_m}")));
    }
    if !(fc_hz > 0.0 && h_bs_m > 0.0 && h_ut_m > 0.0) {
        return Err(Error::Domain("pathloss frequency and antenna heights must be positive".into()));
    }
    if d2d_m < MIN_VALID_DISTANCE_M {
        log::warn!("UMa pathloss evaluated at {d2d_m:.2} m, below the {MIN_VALID_DISTANCE_M} m validity range");
    }
    let d3d = distance_3d(d2d_m, h_bs_m, h_ut_m);
    let nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * (fc_hz / 1e9).log10() - 0.6 * (h_ut_m - 1.5);
    Ok(nlos.max(pathloss_uma_los(d2d_m, fc_hz, h_bs_m, h_ut_m)))
}

/// Zero-mean Gaussian shadowing draw in dB.
pub fn sample_shadowing<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("sigma validated as finite and non-negative")
        .sample(rng)
}

/// Received power: transmit power minus pathloss plus the shadowing gain.
pub fn rx_power_dbm(p_tx_dbm: f64, pathloss_db: f64, shadowing_db: f64) -> f64 {
    p_tx_dbm - pathloss_db + shadowing_db
}

/// Radio state of one path for one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub bandwidth_hz: f64,
    pub pathloss_db: f64,
    pub shadowing_db: f64,
    pub noise_power_dbm: f64,
    /// Linear received-SNR per transmitted watt.
    snr_per_watt: f64,
}

impl LinkState {
    pub fn new(bandwidth_hz: f64, pathloss_db: f64, shadowing_db: f64, noise_psd_dbm_per_hz: f64) -> Self {
        let noise_power_dbm = noise_power_dbm(noise_psd_dbm_per_hz, bandwidth_hz);
        // P_RX[W] / N[W] = P_tx[W] * 10^((-PL + shadow)/10) / N[W]
        let snr_per_watt = db_to_linear(shadowing_db - pathloss_db) / dbm_to_watts(noise_power_dbm);
        Self {
            bandwidth_hz,
            pathloss_db,
            shadowing_db,
            noise_power_dbm,
            snr_per_watt,
        }
    }

    /// Builds a link directly from bandwidth and linear SNR per watt. Pathloss
    /// is reported as the equivalent dB loss over a 0 dBm noise floor.
    pub fn from_snr_per_watt(bandwidth_hz: f64, snr_per_watt: f64) -> Self {
        Self {
            bandwidth_hz,
            pathloss_db: -10.0 * snr_per_watt.log10() - 30.0,
            shadowing_db: 0.0,
            noise_power_dbm: 0.0,
            snr_per_watt,
        }
    }

    pub fn snr_per_watt(&self) -> f64 {
        self.snr_per_watt
    }

    pub fn snr(&self, p_tx_watts: f64) -> f64 {
        p_tx_watts * self.snr_per_watt
    }

    pub fn rate_bps(&self, p_tx_watts: f64) -> f64 {
        link_rate_bps(self, p_tx_watts)
    }
}

/// Shannon rate `B log2(1 + P_RX/N)` at the given transmit power.
pub fn link_rate_bps(state: &LinkState, p_tx_watts: f64) -> f64 {
    if p_tx_watts <= 0.0 {
        return 0.0;
    }
    // ln_1p keeps precision when the SNR is tiny.
    state.bandwidth_hz * state.snr(p_tx_watts).ln_1p() / std::f64::consts::LN_2
}
