//! End-to-end protocols: response curves, transients, vibration sweeps and
//! the command line front end.

pub mod cli;
pub mod response;
pub mod sweep;
pub mod transient;

pub use response::{
    backbone, detect_jumps, hysteresis_gap, run_response_curve, Jump, ResponseCurve, ResponsePoint, ResponseSpec,
    SweepDirection,
};
pub use sweep::{
    beat_frequency, locate_features, run_frequency_sweep, run_misalignment_check, Feature, FeatureKind,
    sweep_summary_json, write_sweep_csv, FrequencyGrid, Metric, MisalignmentReport, SweepResult, SweepRow, SweepSpec,
    WindowPolicy,
};
pub use transient::{run_transient, TransientReport, TransientSpec};

use crate::control::DriveConfig;
use crate::error::Result;
use crate::params::MirrorParams;
use crate::sim::{settle, IntegratorConfig, OperatingPoint, StartupConfig};

/// Default startup to the oscillating branch at normalized actuation 1.
pub fn operating_point(params: &MirrorParams, drive: DriveConfig, integ: &IntegratorConfig) -> Result<OperatingPoint> {
    settle(params, drive, &StartupConfig::default(), integ)
}
