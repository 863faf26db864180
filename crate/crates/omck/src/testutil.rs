//! Shared parameter fixtures for unit tests.

use std::f64::consts::TAU;

use crate::params::{ModeParams, SystemParams};

/// Two- or three-mode parameter set matching the shipped default configs:
/// degenerate modes at 2 pi x 6.3 MHz, CK coupling `ck` on mode 1 only.
pub fn paper_params(ck: f64, power: f64, n: usize) -> SystemParams {
    SystemParams {
        detuning: TAU * 6.3e6,
        cavity_decay: TAU * 0.1e6,
        laser_frequency: TAU * 1.3e9,
        input_power: power,
        modes: (0..n)
            .map(|j| ModeParams {
                frequency: TAU * 6.3e6,
                damping: 40.0,
                coupling: 250.0,
                ck_coupling: if j == 0 { ck } else { 0.0 },
                bath_occupation: 100.0,
            })
            .collect(),
    }
}
