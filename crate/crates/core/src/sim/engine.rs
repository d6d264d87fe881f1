//! Time integration of the mirror equation with drive-edge segmentation and
//! zero-crossing / extremum events.

use serde::{Deserialize, Serialize};

use super::stepper::{dopri_step, rk4_step, Dense, State};
use super::trace::{Crossing, Direction};
use crate::error::{Error, Result};
use crate::model::{Dynamics, SimState};
use crate::params::MirrorParams;
use crate::vibration::VibrationProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Fixed step; each constant-voltage segment is split into equal steps no
    /// longer than `dt`.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4). `abs_tol` applies to theta [rad]; omega uses
    /// `abs_tol * 2 pi f_ref`.
    Dopri5 { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Trace sample rate [Hz].
    pub output_rate: f64,
    /// [s]
    pub max_step: f64,
}

impl IntegratorConfig {
    pub fn for_mirror(p: &MirrorParams) -> Self {
        IntegratorConfig {
            method: Method::Dopri5 {
                rel_tol: 1e-9,
                abs_tol: 1e-12 * p.theta_ref,
            },
            output_rate: 64.0 * p.f_ref,
            max_step: 1.0 / (20.0 * p.f_ref),
        }
    }

    pub fn rk4(p: &MirrorParams, dt: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4 { dt },
            ..Self::for_mirror(p)
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.method = Method::Dopri5 { rel_tol, abs_tol };
        self
    }

    pub fn with_output_rate(mut self, rate: f64) -> Self {
        self.output_rate = rate;
        self
    }

    pub fn validate(&self, actuation_frequency: f64) -> Result<()> {
        let ok_method = match self.method {
            Method::Rk4 { dt } => dt > 0.0 && dt.is_finite(),
            Method::Dopri5 { rel_tol, abs_tol } => rel_tol > 0.0 && abs_tol > 0.0,
        };
        if !ok_method {
            return Err(Error::InvalidParameter("step size and tolerances must be > 0".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be > 0".into()));
        }
        if !(self.output_rate >= 20.0 * actuation_frequency) {
            return Err(Error::InvalidParameter(format!(
                "output rate {} Hz below 20x the actuation frequency {} Hz",
                self.output_rate, actuation_frequency
            )));
        }
        Ok(())
    }
}

/// Piecewise-constant voltage source queried during integration.
pub trait Drive {
    /// Voltage on the constant interval containing `t`, and the end of that
    /// interval (strictly after `t`).
    fn segment(&mut self, t: f64) -> Result<(f64, f64)>;

    /// Called at every theta zero crossing, in time order.
    fn on_crossing(&mut self, _c: &Crossing) -> Result<()> {
        Ok(())
    }
}

/// DC voltage, mostly for tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDrive(pub f64);

impl Drive for ConstantDrive {
    fn segment(&mut self, _t: f64) -> Result<(f64, f64)> {
        Ok((self.0, f64::INFINITY))
    }
}

/// One accepted integration step.
pub struct Step<'a> {
    pub t0: f64,
    pub t1: f64,
    pub voltage: f64,
    pub dense: &'a Dense<2>,
}

impl Step<'_> {
    pub fn state(&self, t: f64) -> SimState {
        let y = self.dense.eval(t);
        SimState::new(t, y[0], y[1])
    }
}

pub trait Observer {
    fn on_start(&mut self, _state: &SimState, _voltage: f64) {}
    fn on_step(&mut self, _step: &Step<'_>) -> Result<()> {
        Ok(())
    }
    fn on_crossing(&mut self, _c: &Crossing) {}
    /// Turning point of theta (omega = 0).
    fn on_extremum(&mut self, _t: f64, _theta: f64) {}
}

impl Observer for () {}

impl<O: Observer + ?Sized> Observer for &mut O {
    fn on_start(&mut self, s: &SimState, v: f64) {
        (**self).on_start(s, v);
    }
    fn on_step(&mut self, step: &Step<'_>) -> Result<()> {
        (**self).on_step(step)
    }
    fn on_crossing(&mut self, c: &Crossing) {
        (**self).on_crossing(c);
    }
    fn on_extremum(&mut self, t: f64, th: f64) {
        (**self).on_extremum(t, th);
    }
}

impl<A: Observer, B: Observer> Observer for (A, B) {
    fn on_start(&mut self, s: &SimState, v: f64) {
        self.0.on_start(s, v);
        self.1.on_start(s, v);
    }
    fn on_step(&mut self, step: &Step<'_>) -> Result<()> {
        self.0.on_step(step)?;
        self.1.on_step(step)
    }
    fn on_crossing(&mut self, c: &Crossing) {
        self.0.on_crossing(c);
        self.1.on_crossing(c);
    }
    fn on_extremum(&mut self, t: f64, th: f64) {
        self.0.on_extremum(t, th);
        self.1.on_extremum(t, th);
    }
}

/// Integrates from `initial` to `t_end`, feeding events to `drive` and
/// `obs`. Returns the final state.
pub fn simulate<D, O>(
    params: &MirrorParams,
    initial: SimState,
    drive: &mut D,
    profile: &VibrationProfile,
    t_end: f64,
    config: &IntegratorConfig,
    obs: &mut O,
) -> Result<SimState>
where
    D: Drive + ?Sized,
    O: Observer + ?Sized,
{
    if !initial.is_finite() {
        return Err(Error::InvalidParameter("initial state must be finite".into()));
    }
    if !(t_end > initial.t) {
        return Err(Error::InvalidParameter(format!(
            "empty span [{}, {t_end}]",
            initial.t
        )));
    }
    profile.validate()?;
    let dynamics = Dynamics::new(params, profile);
    let mut engine = Engine {
        dynamics,
        config: *config,
        scale_omega: 2.0 * std::f64::consts::PI * params.f_ref,
        h_min_base: 1e-14 / params.f_ref,
        h_next: (1.0 / (200.0 * params.f_ref)).min(config.max_step),
    };
    let mut t = initial.t;
    let mut y = [initial.theta, initial.omega];
    let (v0, _) = drive.segment(t)?;
    obs.on_start(&initial, v0);
    while t < t_end {
        let (v, mut seg_end) = drive.segment(t)?;
        if !(seg_end > t) {
            return Err(Error::Protocol(format!("drive segment at t = {t} has no length")));
        }
        if profile.amplitude > 0.0 && profile.t_on > t && profile.t_on < seg_end {
            seg_end = profile.t_on;
        }
        seg_end = seg_end.min(t_end);
        y = engine.segment(t, y, seg_end, v, drive, obs)?;
        t = seg_end;
    }
    Ok(SimState::new(t, y[0], y[1]))
}

struct Engine<'a> {
    dynamics: Dynamics<'a>,
    config: IntegratorConfig,
    scale_omega: f64,
    h_min_base: f64,
    h_next: f64,
}

impl Engine<'_> {
    fn segment<D: Drive + ?Sized, O: Observer + ?Sized>(
        &mut self,
        t_start: f64,
        y_start: State<2>,
        t_end: f64,
        voltage: f64,
        drive: &mut D,
        obs: &mut O,
    ) -> Result<State<2>> {
        let v2 = voltage * voltage;
        let dynamics = self.dynamics;
        let f = move |t: f64, y: &State<2>| [y[1], dynamics.accel(t, y[0], y[1], v2)];
        let mut t = t_start;
        let mut y = y_start;
        let mut f0 = f(t, &y);
        match self.config.method {
            Method::Rk4 { dt } => {
                let n = ((t_end - t_start) / dt - 1e-9).ceil().max(1.0) as usize;
                let h = (t_end - t_start) / n as f64;
                for k in 0..n {
                    let t1 = if k + 1 == n { t_end } else { t_start + (k + 1) as f64 * h };
                    let y1 = rk4_step(&f, t, &y, &f0, t1 - t);
                    let f1 = f(t1, &y1);
                    if !(y1[0].is_finite() && y1[1].is_finite() && f1[1].is_finite()) {
                        return Err(Error::Divergence { t });
                    }
                    let dense = Dense::Hermite { t0: t, h: t1 - t, y0: y, y1, f0, f1 };
                    self.accept(&dense, voltage, t, &y, t1, &y1, drive, obs)?;
                    t = t1;
                    y = y1;
                    f0 = f1;
                }
            }
            Method::Dopri5 { rel_tol, abs_tol } => {
                let atol = [abs_tol, abs_tol * self.scale_omega];
                while t < t_end {
                    let h_min = self.h_min_base.max(16.0 * f64::EPSILON * t.abs());
                    let remaining = t_end - t;
                    let mut h = self.h_next.min(self.config.max_step);
                    let last = h >= remaining * (1.0 - 1e-9);
                    if last {
                        h = remaining;
                    }
                    let step = dopri_step(&f, t, &y, &f0, h);
                    let finite = step.y1.iter().chain(step.f1.iter()).all(|v| v.is_finite());
                    if !finite {
                        self.h_next = 0.25 * h;
                        if self.h_next < h_min {
                            return Err(Error::Divergence { t });
                        }
                        continue;
                    }
                    let mut acc = 0.0;
                    for i in 0..2 {
                        let sc = atol[i] + rel_tol * y[i].abs().max(step.y1[i].abs());
                        acc += (step.err[i] / sc).powi(2);
                    }
                    let err = (acc / 2.0).sqrt();
                    if err <= 1.0 {
                        let t1 = if last { t_end } else { t + h };
                        self.accept(&step.dense, voltage, t, &y, t1, &step.y1, drive, obs)?;
                        t = t1;
                        y = step.y1;
                        f0 = step.f1;
                        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        // A truncated final step says nothing about the natural step size.
                        if !last || fac < 1.0 {
                            self.h_next = h * fac;
                        }
                    } else {
                        self.h_next = h * (0.9 * err.powf(-0.2)).max(0.2);
                        if self.h_next < h_min {
                            return Err(Error::StepUnderflow { t, h: self.h_next });
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    #[allow(clippy::too_many_arguments)]
    fn accept<D: Drive + ?Sized, O: Observer + ?Sized>(
        &mut self,
        dense: &Dense<2>,
        voltage: f64,
        t0: f64,
        y0: &State<2>,
        t1: f64,
        y1: &State<2>,
        drive: &mut D,
        obs: &mut O,
    ) -> Result<()> {
        // Extremum and crossing cannot both occur in one step unless the step
        // spans a quarter period; order them by time anyway.
        let mut ext = None;
        if (y0[1] > 0.0 && y1[1] <= 0.0) || (y0[1] < 0.0 && y1[1] >= 0.0) {
            let te = dense.root(1, y0[1], y1[1]);
            ext = Some((te, dense.eval(te)[0]));
        }
        let mut cross = None;
        let rising = y0[0] < 0.0 && y1[0] >= 0.0;
        let falling = y0[0] > 0.0 && y1[0] <= 0.0;
        if rising || falling {
            let tc = dense.root(0, y0[0], y1[0]);
            let om = dense.eval(tc)[1];
            let direction = if om > 0.0 || (om == 0.0 && rising) {
                Direction::Rising
            } else {
                Direction::Falling
            };
            cross = Some(Crossing { time: tc.clamp(t0, t1), direction });
        }
        let ext_first = matches!((ext, cross), (Some((te, _)), Some(c)) if te < c.time);
        if ext_first {
            let (te, th) = ext.take().unwrap();
            obs.on_extremum(te, th);
        }
        if let Some(c) = cross {
            obs.on_crossing(&c);
            drive.on_crossing(&c)?;
        }
        if let Some((te, th)) = ext {
            obs.on_extremum(te, th);
        }
        obs.on_step(&Step { t0, t1, voltage, dense })
    }
}
