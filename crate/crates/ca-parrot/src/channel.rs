//! Radio environment prototypes: pathloss models, RSS sampling, reception,
//! and communication-range derivation.
//!
//! Three prototypes are supported, selected by name in scenario files:
//! `rural` (log-distance Friis, exponent 2.75), `suburban` (two-ray ground
//! with the classic crossover), and `urban` (log-distance mean with
//! per-frame Nakagami fading). Friis and two-ray are deterministic; only
//! Nakagami consumes the seeded generator.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Minimum antenna height for the two-ray ground model, meters.
const MIN_ANTENNA_HEIGHT_M: f64 = 1.5;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
}

/// Pathloss model of a radio environment prototype.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ChannelModel {
    /// Log-distance freespace attenuation with exponent `eta`.
    Friis { eta: f64 },
    /// Two-ray ground reflection; node altitudes act as antenna heights.
    TwoRayGround,
    /// Log-distance mean pathloss with per-frame Nakagami-m fading.
    Nakagami { eta: f64, m: f64 },
}

impl ChannelModel {
    /// The Table-style prototype for a named environment.
    pub fn by_name(name: &str) -> Option<ChannelModel> {
        match name {
            "rural" => Some(ChannelModel::Friis { eta: 2.75 }),
            "suburban" => Some(ChannelModel::TwoRayGround),
            "urban" => Some(ChannelModel::Nakagami { eta: 2.75, m: 2.0 }),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Friis { .. } => "rural",
            ChannelModel::TwoRayGround => "suburban",
            ChannelModel::Nakagami { .. } => "urban",
        }
    }
}

/// Transceiver parameters shared by all nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub sensitivity_dbm: f64,
    pub frequency_hz: f64,
    /// Exponent of the freespace model used to derive the assumed range.
    pub range_exponent: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            tx_power_dbm: 20.0,
            sensitivity_dbm: -85.0,
            frequency_hz: 2.4e9,
            range_exponent: 2.75,
        }
    }
}

/// Reference pathloss at 1 m, `20·log10(4π·f/c)` dB.
pub fn reference_pathloss_db(frequency_hz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * frequency_hz / SPEED_OF_LIGHT).log10()
}

/// Mean pathloss in dB at `distance` meters.
///
/// Antenna altitudes only matter for [`ChannelModel::TwoRayGround`], which
/// switches from a log-distance near field (exponent 2) to the fourth-power
/// reflection regime beyond the crossover `4π·h_t·h_r/λ`.
pub fn pathloss_db(
    model: ChannelModel,
    distance: f64,
    alt_tx: f64,
    alt_rx: f64,
    frequency_hz: f64,
) -> Result<f64, ChannelError> {
    if distance <= 0.0 {
        return Err(ChannelError::NonPositiveDistance(distance));
    }
    let pl0 = reference_pathloss_db(frequency_hz);
    let loss = match model {
        ChannelModel::Friis { eta } | ChannelModel::Nakagami { eta, .. } => {
            pl0 + 10.0 * eta * distance.log10()
        }
        ChannelModel::TwoRayGround => {
            let h_t = alt_tx.max(MIN_ANTENNA_HEIGHT_M);
            let h_r = alt_rx.max(MIN_ANTENNA_HEIGHT_M);
            let wavelength = SPEED_OF_LIGHT / frequency_hz;
            let crossover = 4.0 * std::f64::consts::PI * h_t * h_r / wavelength;
            if distance > crossover {
                40.0 * distance.log10() - 10.0 * (h_t * h_t * h_r * h_r).log10()
            } else {
                pl0 + 20.0 * distance.log10()
            }
        }
    };
    Ok(loss)
}

/// Samples the received signal strength in dBm for one transmission.
///
/// Deterministic for Friis and two-ray; Nakagami multiplies the linear
/// received power by a unit-mean Gamma draw (block fading per frame).
pub fn sample_rss<R: Rng>(
    model: ChannelModel,
    cfg: &RadioConfig,
    distance: f64,
    alts: (f64, f64),
    rng: &mut R,
) -> Result<f64, ChannelError> {
    let pl = pathloss_db(model, distance, alts.0, alts.1, cfg.frequency_hz)?;
    let mut rss = cfg.tx_power_dbm - pl;
    if let ChannelModel::Nakagami { m, .. } = model {
        let gamma = Gamma::new(m, 1.0 / m).expect("valid Nakagami shape");
        let gain: f64 = gamma.sample(rng);
        rss += 10.0 * gain.log10();
    }
    Ok(rss)
}

/// Reception succeeds at or above the receiver sensitivity.
pub fn reception(rss_dbm: f64, cfg: &RadioConfig) -> bool {
    rss_dbm >= cfg.sensitivity_dbm
}

/// Assumed maximum communication range from the freespace link budget:
/// solves `tx − (PL₀ + 10·k·log10(d)) = sensitivity` for `d`.
pub fn derive_range(cfg: &RadioConfig) -> f64 {
    let budget = cfg.tx_power_dbm - cfg.sensitivity_dbm - reference_pathloss_db(cfg.frequency_hz);
    10f64.powf(budget / (10.0 * cfg.range_exponent))
}
