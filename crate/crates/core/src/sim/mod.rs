//! Time integration, events and per-cycle measurement.

pub mod cycles;
pub mod engine;
pub mod startup;
pub mod stepper;
pub mod trace;

pub use cycles::{measure_cycles, CyclePeriods, CycleRecorder};
pub use startup::{hold_at, settle, Branch, HoldOutcome, OperatingPoint, StartupConfig};
pub use engine::{simulate, ConstantDrive, Drive, IntegratorConfig, Method, Observer, Step};
pub use trace::{detect_crossings, detect_extrema, Crossing, Direction, Extremum, Trace, TraceRecorder};

use crate::error::Result;
use crate::model::SimState;
use crate::params::MirrorParams;
use crate::vibration::VibrationProfile;

/// Integrates over `[initial.t, t_end]` and returns the sampled trace.
pub fn integrate<D: Drive + ?Sized>(
    params: &MirrorParams,
    initial: SimState,
    drive: &mut D,
    profile: &VibrationProfile,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trace> {
    config.validate(2.0 * params.f_ref)?;
    let mut rec = TraceRecorder::new(config.output_rate);
    simulate(params, initial, drive, profile, t_end, config, &mut rec)?;
    Ok(rec.trace)
}
