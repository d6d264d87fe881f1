//! Simulation and analysis of a parametrically driven resonant MEMS scanning
//! mirror exposed to single-tone translational vibration.
//!
//! * [`params`], [`curve`], [`model`], [`vibration`]: the mirror, its
//!   characteristic curves and the torque terms of the equation of motion.
//! * [`sim`]: adaptive and fixed-step integration with drive-edge
//!   segmentation, zero-crossing events and per-cycle measurement.
//! * [`control`]: rectangular comb drive, open loop or period-domain PI PLL.
//! * [`analysis`]: energy-coupling coefficients, per-period energy series and
//!   STD error statistics.
//! * [`experiments`]: response curves, transients, vibration frequency sweeps
//!   and the misalignment check.

pub mod analysis;
pub mod config;
pub mod control;
pub mod curve;
pub mod error;
pub mod experiments;
pub mod model;
pub mod params;
pub mod sim;
pub mod vibration;

pub use error::{Error, Result};
