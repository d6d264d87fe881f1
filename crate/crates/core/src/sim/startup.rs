//! Bringing the mirror onto the high-amplitude branch.

use serde::{Deserialize, Serialize};

use super::cycles::CycleRecorder;
use super::engine::{simulate, IntegratorConfig};
use crate::control::{DriveConfig, DriveSource, PeriodPlan};
use crate::error::{Error, Result};
use crate::model::SimState;
use crate::params::MirrorParams;
use crate::vibration::VibrationProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartupConfig {
    /// Normalized actuation frequency (actuation / 2 f_ref) at the start of the ramp.
    pub from: f64,
    /// ... and at its end, where the drive is then held.
    pub to: f64,
    /// Ramp length in mirror periods.
    pub ramp_cycles: usize,
    /// Settling check interval in mirror periods.
    pub check_cycles: usize,
    /// Relative amplitude change per check interval regarded as settled.
    pub settle_tol: f64,
    /// Give up after this many mirror periods of holding.
    pub max_hold_cycles: usize,
    /// Initial angle relative to theta_ref.
    pub seed_angle: f64,
}

impl Default for StartupConfig {
    fn default() -> Self {
        StartupConfig {
            from: 1.10,
            to: 1.00,
            ramp_cycles: 2000,
            check_cycles: 100,
            settle_tol: 1e-5,
            max_hold_cycles: 20_000,
            seed_angle: 1e-3,
        }
    }
}

/// Settled open-loop state, re-based so that `state.t = 0` is a rising drive
/// edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub state: SimState,
    pub drive: DriveConfig,
    /// Actuation period [s].
    pub period: f64,
    /// Latest mirror zero crossing before `t = 0` (negative) [s].
    pub last_crossing: f64,
    /// Settled amplitude [rad].
    pub amplitude: f64,
    /// Mirror periods simulated to get here.
    pub cycles_used: usize,
}

impl OperatingPoint {
    /// Phase from the last crossing to the rising edge at `t = 0`.
    pub fn t_beta(&self) -> f64 {
        -self.last_crossing
    }

    pub fn actuation_frequency(&self) -> f64 {
        1.0 / self.period
    }

    /// Fresh open-loop drive continuing the settled schedule.
    pub fn open_loop_drive(&self) -> Result<DriveSource> {
        DriveSource::open_loop(self.drive, self.state.t, self.period)
    }
}

fn mean_amplitude(rec: &CycleRecorder, last: usize) -> Option<f64> {
    let a = &rec.cycles.amplitudes;
    // Even count so the positive and negative half cycles weigh equally.
    let n = (last.min(a.len()) / 2) * 2;
    if n == 0 {
        return None;
    }
    Some(a[a.len() - n..].iter().sum::<f64>() / n as f64)
}

/// Ramp-down startup followed by holding at `cfg.to` until settled.
pub fn settle(
    params: &MirrorParams,
    drive: DriveConfig,
    cfg: &StartupConfig,
    integ: &IntegratorConfig,
) -> Result<OperatingPoint> {
    let f_act = |nu: f64| 2.0 * params.f_ref * nu;
    let plan = PeriodPlan::Ramp {
        f_start: f_act(cfg.from),
        f_end: f_act(cfg.to),
        periods: 2 * cfg.ramp_cycles,
    };
    let state = SimState::new(0.0, cfg.seed_angle * params.theta_ref, 0.0);
    let out = hold(params, drive, plan, 2 * cfg.ramp_cycles, state, cfg, integ)?;
    match out.branch {
        Branch::Oscillating => Ok(out.point),
        Branch::Rest => Err(Error::Protocol(format!(
            "mirror did not reach the oscillating branch (amplitude {:.3e} rad)",
            out.point.amplitude
        ))),
        Branch::Unsettled => Err(Error::Protocol(format!(
            "amplitude not settled after {} mirror periods (last {:.6e} rad)",
            cfg.max_hold_cycles, out.point.amplitude
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Oscillating,
    /// Amplitude decayed below `1e-4 theta_ref`; reported as zero.
    Rest,
    /// Hold limit reached before the amplitude settled.
    Unsettled,
}

#[derive(Debug, Clone, Copy)]
pub struct HoldOutcome {
    pub point: OperatingPoint,
    pub branch: Branch,
}

/// Holds the drive at normalized actuation frequency `nu`, starting from
/// `state` (taken as a rising edge), until the amplitude settles or decays.
pub fn hold_at(
    params: &MirrorParams,
    drive: DriveConfig,
    nu: f64,
    state: SimState,
    cfg: &StartupConfig,
    integ: &IntegratorConfig,
) -> Result<HoldOutcome> {
    let plan = PeriodPlan::Constant(1.0 / (2.0 * params.f_ref * nu));
    hold(params, drive, plan, 0, state, cfg, integ)
}

fn run_to_edge(
    params: &MirrorParams,
    state: SimState,
    drive: &mut DriveSource,
    edge: usize,
    integ: &IntegratorConfig,
    rec: &mut CycleRecorder,
) -> Result<SimState> {
    while drive.schedule().len() <= edge {
        let t = drive.schedule_end();
        drive.extend_to(t);
    }
    let t_end = drive.schedule()[edge].start;
    simulate(params, state, drive, &VibrationProfile::none(), t_end, integ, rec)
}

fn hold(
    params: &MirrorParams,
    drive_cfg: DriveConfig,
    plan: PeriodPlan,
    lead_periods: usize,
    mut state: SimState,
    cfg: &StartupConfig,
    integ: &IntegratorConfig,
) -> Result<HoldOutcome> {
    let mut drive = DriveSource::open_loop_plan(drive_cfg, state.t, plan)?;
    let mut rec = CycleRecorder::new();
    let mut edge = 0usize;
    if lead_periods > 0 {
        edge = lead_periods;
        state = run_to_edge(params, state, &mut drive, edge, integ, &mut rec)?;
    }
    let mut prev: Option<f64> = None;
    let mut held = 0usize;
    loop {
        edge += 2 * cfg.check_cycles;
        state = run_to_edge(params, state, &mut drive, edge, integ, &mut rec)?;
        held += cfg.check_cycles;
        let amp = mean_amplitude(&rec, 2).unwrap_or(state.theta.abs());
        let recent = rec.last_crossing().is_some_and(|c| state.t - c < 2.0 * drive.schedule()[edge - 1].length);
        let decaying = prev.is_some_and(|p| amp <= p);
        let branch = if (amp < 1e-4 * params.theta_ref && decaying) || !recent {
            Some(Branch::Rest)
        } else if prev.is_some_and(|p| ((amp - p) / p).abs() < cfg.settle_tol) {
            Some(Branch::Oscillating)
        } else if held >= cfg.max_hold_cycles {
            Some(Branch::Unsettled)
        } else {
            None
        };
        if let Some(branch) = branch {
            let t0 = state.t;
            let last = rec.last_crossing().unwrap_or(t0);
            let point = OperatingPoint {
                state: SimState::new(0.0, state.theta, state.omega),
                drive: drive_cfg,
                period: drive.schedule()[edge - 1].length,
                last_crossing: last - t0,
                amplitude: if branch == Branch::Rest { 0.0 } else { amp },
                cycles_used: edge / 2,
            };
            return Ok(HoldOutcome { point, branch });
        }
        prev = Some(amp);
    }
}
