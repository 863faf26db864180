//! Physical parameters, unit normalization, and thermal occupations.
//!
//! Every frequency or rate in a configuration file carries an explicit unit
//! tag: `rad_s` for angular frequencies, or `hz` for cycle frequencies
//! (multiplied by 2 pi on ingestion). Internally everything is rad/s.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::consts::{HBAR, K_B};
use crate::error::{Error, Result};

/// A number with an explicit unit tag, as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tagged {
    pub value: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Angular frequency, rad/s. Used verbatim.
    RadS,
    /// Cycle frequency, cycles/s. Multiplied by 2 pi.
    Hz,
}

impl Tagged {
    pub fn rad_s(value: f64) -> Self {
        Tagged { value, unit: Unit::RadS }
    }

    /// Value in rad/s.
    pub fn angular(&self) -> f64 {
        match self.unit {
            Unit::RadS => self.value,
            Unit::Hz => TAU * self.value,
        }
    }
}

/// Raw configuration as parsed from TOML, before unit normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawConfig {
    pub cavity: RawCavity,
    pub drive: RawDrive,
    pub modes: Vec<RawMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<crate::sweep::RawSweep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawCavity {
    /// Delta = omega_c - omega_L.
    pub detuning: Tagged,
    /// kappa.
    pub decay: Tagged,
    /// omega_L.
    pub laser_frequency: Tagged,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDrive {
    /// Input laser power P, watts.
    pub power_watts: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawMode {
    /// omega_j.
    pub frequency: Tagged,
    /// gamma_j.
    pub damping: Tagged,
    /// Single-photon optomechanical coupling g_j.
    pub coupling: Tagged,
    /// Cross-Kerr coupling g_ck,j. Zero disables CK for this mode; either
    /// sign is allowed.
    pub ck_coupling: Tagged,
    /// n_th,j given directly. Exactly one of this and
    /// `bath_temperature_kelvin` must be present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath_occupation: Option<f64>,
    /// Bath temperature T in kelvin; n_th,j = 1/(exp(hbar omega_j / kB T) - 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath_temperature_kelvin: Option<f64>,
}

/// Per-mode physical parameters, all rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub frequency: f64,
    pub damping: f64,
    pub coupling: f64,
    pub ck_coupling: f64,
    pub bath_occupation: f64,
}

/// Validated system parameters for 1 cavity + N mechanical modes.
/// Immutable after construction; safe to share across sweep workers.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Delta, rad/s.
    pub detuning: f64,
    /// kappa, rad/s.
    pub cavity_decay: f64,
    /// omega_L, rad/s.
    pub laser_frequency: f64,
    /// P, watts.
    pub input_power: f64,
    pub modes: Vec<ModeParams>,
}

/// Driving laser amplitude epsilon = sqrt(2 kappa P / (hbar omega_L)), rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveAmplitude(pub f64);

/// Bose occupation n_th = 1/(exp(hbar omega / kB T) - 1).
pub fn thermal_occupation(frequency: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * frequency / (K_B * temperature);
    if x > 700.0 {
        // exp would overflow; occupation is indistinguishable from zero
        0.0
    } else {
        1.0 / (x.exp() - 1.0)
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Validation(format!("{name} must be >= 0 and finite, got {v}")));
    }
    Ok(())
}

/// Validate a raw config and convert every field to internal units.
pub fn normalize_params(raw: &RawConfig) -> Result<SystemParams> {
    let detuning = raw.cavity.detuning.angular();
    let cavity_decay = raw.cavity.decay.angular();
    let laser_frequency = raw.cavity.laser_frequency.angular();
    let input_power = raw.drive.power_watts;

    if !detuning.is_finite() {
        return Err(Error::Validation("cavity.detuning must be finite".into()));
    }
    require_positive("cavity.decay", cavity_decay)?;
    require_positive("cavity.laser_frequency", laser_frequency)?;
    require_nonnegative("drive.power_watts", input_power)?;

    if raw.modes.is_empty() {
        return Err(Error::Validation("at least one [[modes]] entry is required".into()));
    }

    let mut modes = Vec::with_capacity(raw.modes.len());
    for (i, m) in raw.modes.iter().enumerate() {
        let frequency = m.frequency.angular();
        let damping = m.damping.angular();
        let coupling = m.coupling.angular();
        let ck_coupling = m.ck_coupling.angular();
        require_positive(&format!("modes[{i}].frequency"), frequency)?;
        require_positive(&format!("modes[{i}].damping"), damping)?;
        if !coupling.is_finite() || !ck_coupling.is_finite() {
            return Err(Error::Validation(format!("modes[{i}] couplings must be finite")));
        }
        let bath_occupation = match (m.bath_occupation, m.bath_temperature_kelvin) {
            (Some(n), None) => {
                require_nonnegative(&format!("modes[{i}].bath_occupation"), n)?;
                n
            }
            (None, Some(t)) => {
                require_nonnegative(&format!("modes[{i}].bath_temperature_kelvin"), t)?;
                thermal_occupation(frequency, t)
            }
            (Some(_), Some(_)) => {
                return Err(Error::Validation(format!(
                    "modes[{i}]: give bath_occupation or bath_temperature_kelvin, not both"
                )))
            }
            (None, None) => {
                return Err(Error::Validation(format!(
                    "modes[{i}]: missing bath_occupation (or bath_temperature_kelvin)"
                )))
            }
        };
        modes.push(ModeParams { frequency, damping, coupling, ck_coupling, bath_occupation });
    }

    Ok(SystemParams { detuning, cavity_decay, laser_frequency, input_power, modes })
}

/// Drive amplitude from validated parameters. Zero iff P = 0.
pub fn drive_amplitude(params: &SystemParams) -> DriveAmplitude {
    DriveAmplitude(
        (2.0 * params.cavity_decay * params.input_power / (HBAR * params.laser_frequency)).sqrt(),
    )
}

impl SystemParams {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn parse(text: &str) -> Result<SystemParams> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Validation(format!("config parse: {e}")))?;
        normalize_params(&raw)
    }

    pub fn load(path: &std::path::Path) -> Result<(SystemParams, Option<crate::sweep::RawSweep>)> {
        let text = std::fs::read_to_string(path)?;
        let raw: RawConfig =
            toml::from_str(&text).map_err(|e| Error::Validation(format!("config parse: {e}")))?;
        Ok((normalize_params(&raw)?, raw.sweep))
    }

    /// Serialize back to a raw config with everything tagged `rad_s`.
    /// Re-normalizing the result reproduces this value bit-for-bit.
    pub fn to_raw_config(&self) -> RawConfig {
        RawConfig {
            cavity: RawCavity {
                detuning: Tagged::rad_s(self.detuning),
                decay: Tagged::rad_s(self.cavity_decay),
                laser_frequency: Tagged::rad_s(self.laser_frequency),
            },
            drive: RawDrive { power_watts: self.input_power },
            modes: self
                .modes
                .iter()
                .map(|m| RawMode {
                    frequency: Tagged::rad_s(m.frequency),
                    damping: Tagged::rad_s(m.damping),
                    coupling: Tagged::rad_s(m.coupling),
                    ck_coupling: Tagged::rad_s(m.ck_coupling),
                    bath_occupation: Some(m.bath_occupation),
                    bath_temperature_kelvin: None,
                })
                .collect(),
            sweep: None,
        }
    }
}
