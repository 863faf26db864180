//! Steady states, stability, and final phonon occupations for an
//! optomechanical cavity coupled to N degenerate mechanical modes with
//! cross-Kerr couplings.
//!
//! The pipeline for one parameter point is
//! polynomial -> roots -> stability -> branch selection -> Lyapunov -> phonons;
//! [`sweep`] runs that chain over parameter grids and writes CSV.

pub mod consts;
pub mod covariance;
pub mod error;
pub mod linearized;
pub mod oracle;
pub mod params;
pub mod steady;
pub mod sweep;
#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use params::{DriveAmplitude, ModeParams, SystemParams};
