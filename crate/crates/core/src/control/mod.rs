//! Comb-drive voltage generation, open loop or phase locked.

pub mod drive;
pub mod pll;

pub use drive::{drive_voltage, ActuationPeriod, DriveConfig, DriveMode, DriveSource, PeriodPlan};
pub use pll::{
    phase_error, pi_period_step, pll_update, write_history_csv, PllController, PllGains, PllRecord, PllState,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SimState;
use crate::params::MirrorParams;
use crate::sim::startup::OperatingPoint;
use crate::sim::{simulate, Crossing, IntegratorConfig, Observer, Step, Trace, TraceRecorder};
use crate::vibration::VibrationProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllOptions {
    pub gains: PllGains,
    /// Phase reference; `None` takes the settled open-loop phase.
    pub t_beta_ref: Option<f64>,
    /// First PLL period relative to the settled actuation period.
    pub initial_period_scale: f64,
}

impl Default for PllOptions {
    fn default() -> Self {
        PllOptions {
            gains: PllGains::default(),
            t_beta_ref: None,
            initial_period_scale: 1.0,
        }
    }
}

impl PllOptions {
    pub fn with_gains(gains: PllGains) -> Self {
        PllOptions { gains, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Control {
    OpenLoop,
    Pll(PllOptions),
}

impl Control {
    pub fn is_pll(&self) -> bool {
        matches!(self, Control::Pll(_))
    }

    /// Drive continuing from a settled operating point.
    pub fn drive_from(&self, op: &OperatingPoint) -> Result<DriveSource> {
        match self {
            Control::OpenLoop => op.open_loop_drive(),
            Control::Pll(o) => {
                let t_beta = op.t_beta();
                let reference = o.t_beta_ref.unwrap_or(t_beta);
                let mut state = PllState::new(op.period * o.initial_period_scale, t_beta, reference, o.gains)?;
                // Clamp limits refer to the settled period, not the perturbed start.
                state.t_nominal = op.period;
                DriveSource::pll(op.drive, op.state.t, PllController::new(state, op.last_crossing))
            }
        }
    }
}

/// Fails the run once a half cycle peaks below `floor` or no crossing has
/// been seen for `max_gap`.
#[derive(Debug, Clone)]
pub struct LockMonitor {
    floor: f64,
    max_gap: f64,
    last: f64,
    peak: f64,
    failed: Option<(f64, f64)>,
}

impl LockMonitor {
    pub fn new(floor: f64, max_gap: f64, start: f64) -> Self {
        LockMonitor {
            floor,
            max_gap,
            last: start,
            peak: f64::INFINITY,
            failed: None,
        }
    }

    pub fn for_mirror(p: &MirrorParams, start: f64) -> Self {
        Self::new(0.01 * p.theta_ref, 4.0 / p.f_ref, start)
    }
}

impl Observer for LockMonitor {
    fn on_step(&mut self, step: &Step<'_>) -> Result<()> {
        if self.failed.is_none() && step.t1 - self.last > self.max_gap {
            self.failed = Some((step.t1, step.state(step.t1).theta.abs()));
        }
        match self.failed {
            Some((t, amplitude)) => Err(Error::LockLost { t, amplitude, history: Vec::new() }),
            None => Ok(()),
        }
    }

    fn on_crossing(&mut self, c: &Crossing) {
        if self.peak < self.floor && self.failed.is_none() {
            self.failed = Some((c.time, self.peak));
        }
        self.last = c.time;
        self.peak = 0.0;
    }

    fn on_extremum(&mut self, _t: f64, theta: f64) {
        self.peak = self.peak.max(theta.abs());
    }
}

#[derive(Debug, Clone)]
pub struct PllRun {
    pub trace: Trace,
    pub history: Vec<PllRecord>,
    pub resyncs: usize,
}

/// Runs from a settled operating point under `control`, feeding `obs`.
/// PLL runs are watched by a [`LockMonitor`]; the controller is returned
/// (also when the run fails) so its history can be inspected.
pub fn simulate_controlled<O: Observer>(
    params: &MirrorParams,
    initial: &OperatingPoint,
    profile: &VibrationProfile,
    control: &Control,
    t_end: f64,
    config: &IntegratorConfig,
    obs: &mut O,
) -> (Result<SimState>, Option<PllController>) {
    let mut drive = match control.drive_from(initial) {
        Ok(d) => d,
        Err(e) => return (Err(e), None),
    };
    let res = if control.is_pll() {
        let mut both = (LockMonitor::for_mirror(params, initial.last_crossing), obs);
        simulate(params, initial.state, &mut drive, profile, t_end, config, &mut both)
    } else {
        simulate(params, initial.state, &mut drive, profile, t_end, config, obs)
    };
    (res, drive.into_controller())
}

/// Event-driven PLL simulation from a settled operating point up to `t_end`.
pub fn run_pll_loop(
    params: &MirrorParams,
    initial: &OperatingPoint,
    profile: &VibrationProfile,
    options: PllOptions,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<PllRun> {
    config.validate(2.0 * params.f_ref)?;
    let mut rec = TraceRecorder::new(config.output_rate);
    let (res, ctrl) = simulate_controlled(params, initial, profile, &Control::Pll(options), t_end, config, &mut rec);
    let ctrl = ctrl.expect("PLL drive");
    match res {
        Ok(_) => Ok(PllRun {
            trace: rec.trace,
            history: ctrl.history,
            resyncs: ctrl.resyncs,
        }),
        Err(Error::LockLost { t, amplitude, .. }) => Err(Error::LockLost {
            t,
            amplitude,
            history: ctrl.history,
        }),
        Err(e) => Err(e),
    }
}
