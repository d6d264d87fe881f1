//! Torque terms and the first-order equation of motion
//! `I theta'' + c(theta, omega) omega + k(theta) theta = 1/2 dC/dtheta V^2 + tau_v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MirrorParams;
use crate::vibration::VibrationProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub theta: f64,
    pub omega: f64,
}

impl SimState {
    pub fn new(t: f64, theta: f64, omega: f64) -> Self {
        SimState { t, theta, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.theta.is_finite() && self.omega.is_finite()
    }
}

pub fn restoring_torque(p: &MirrorParams, theta: f64) -> Result<f64> {
    Ok(p.stiffness.eval(theta)? * theta)
}

pub fn damping_torque(p: &MirrorParams, theta: f64, omega: f64) -> Result<f64> {
    let c = p.damping_base.eval(theta)? + p.damping_amp.eval(theta)? * omega.abs();
    Ok(c * omega)
}

pub fn comb_torque(p: &MirrorParams, theta: f64, voltage: f64) -> Result<f64> {
    if !(voltage >= 0.0) {
        return Err(Error::InvalidParameter(format!("drive voltage {voltage} < 0")));
    }
    Ok(0.5 * p.cap_deriv.eval(theta)? * voltage * voltage)
}

pub fn vibration_torque(p: &MirrorParams, theta: f64, t: f64, profile: &VibrationProfile) -> Result<f64> {
    if !(theta.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite angle or time".into()));
    }
    Ok(vib_torque(p, theta, t, profile))
}

#[inline]
fn vib_torque(p: &MirrorParams, theta: f64, t: f64, profile: &VibrationProfile) -> f64 {
    let (dy, dz) = profile.components(t);
    if dy == 0.0 && dz == 0.0 {
        return 0.0;
    }
    let (s, c) = theta.sin_cos();
    p.mass_offset() * (dy * c + dz * s)
}

/// `(dtheta/dt, domega/dt)`.
pub fn equation_rhs(
    p: &MirrorParams,
    state: &SimState,
    voltage: f64,
    profile: &VibrationProfile,
) -> Result<(f64, f64)> {
    let SimState { t, theta, omega } = *state;
    let num = comb_torque(p, theta, voltage)? + vibration_torque(p, theta, t, profile)?
        - damping_torque(p, theta, omega)?
        - restoring_torque(p, theta)?;
    Ok((omega, num / p.inertia))
}

/// Power terms along a trajectory: (comb, vibration, damping) [W].
pub fn powers(p: &MirrorParams, state: &SimState, voltage: f64, profile: &VibrationProfile) -> Result<(f64, f64, f64)> {
    let SimState { t, theta, omega } = *state;
    Ok((
        comb_torque(p, theta, voltage)? * omega,
        vibration_torque(p, theta, t, profile)? * omega,
        damping_torque(p, theta, omega)? * omega,
    ))
}

/// `1/2 I omega^2 + integral_0^theta k(s) s ds`.
pub fn mechanical_energy(p: &MirrorParams, theta: f64, omega: f64) -> Result<f64> {
    Ok(0.5 * p.inertia * omega * omega + p.stiffness.moment_integral(theta)?)
}

/// Right-hand side with a single domain check, used by the integrators.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dynamics<'a> {
    pub params: &'a MirrorParams,
    pub profile: &'a VibrationProfile,
    hi: f64,
    inv_i: f64,
    ml: f64,
    amp_free: bool,
}

impl<'a> Dynamics<'a> {
    pub fn new(params: &'a MirrorParams, profile: &'a VibrationProfile) -> Self {
        Dynamics {
            params,
            profile,
            hi: params.domain().1,
            inv_i: 1.0 / params.inertia,
            ml: params.mass_offset(),
            amp_free: params.damping_amp.is_zero(),
        }
    }

    /// Angular acceleration; NaN outside the curve domain so the caller
    /// treats it like any other non-finite state.
    #[inline]
    pub fn accel(&self, t: f64, theta: f64, omega: f64, v2: f64) -> f64 {
        if !(theta.abs() <= self.hi) {
            return f64::NAN;
        }
        let p = self.params;
        let k = p.stiffness.eval_unchecked(theta);
        let mut c = p.damping_base.eval_unchecked(theta);
        if !self.amp_free {
            c += p.damping_amp.eval_unchecked(theta) * omega.abs();
        }
        let mut tau = 0.5 * p.cap_deriv.eval_unchecked(theta) * v2 - c * omega - k * theta;
        let (dy, dz) = self.profile.components(t);
        if dy != 0.0 || dz != 0.0 {
            let (s, co) = theta.sin_cos();
            tau += self.ml * (dy * co + dz * s);
        }
        tau * self.inv_i
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SyntheticMirror;
    use crate::vibration::Axis;

    fn p() -> MirrorParams {
        SyntheticMirror::default().build().unwrap()
    }

    #[test]
    fn restoring_at_reference_matches_hardening_form() {
        let s = SyntheticMirror::default();
        let p = s.build().unwrap();
        let want = (2.0 * std::f64::consts::PI * s.f0_lin).powi(2) * s.inertia * s.theta_ref * (1.0 + s.hardening);
        let got = restoring_torque(&p, s.theta_ref).unwrap();
        assert!((got / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vibration_hand_value() {
        let mut p = p();
        p.mass = 1.0;
        p.com_offset = 1.0;
        let v = VibrationProfile::tone(Axis::Ty, 1.0, 50.0);
        let tau = vibration_torque(&p, 0.1, 0.0, &v).unwrap();
        assert!((tau - 0.995_004_165_278_025_8).abs() < 1e-15);
        let z = VibrationProfile::tone(Axis::Tz, 3.0, 50.0);
        assert_eq!(vibration_torque(&p, 0.0, 0.0, &z).unwrap(), 0.0);
    }

    #[test]
    fn rest_is_equilibrium() {
        let r = equation_rhs(&p(), &SimState::new(0.0, 0.0, 0.0), 0.0, &VibrationProfile::none()).unwrap();
        assert_eq!(r, (0.0, 0.0));
    }

    #[test]
    fn comb_rejects_negative_voltage_and_scales_quadratically() {
        let p = p();
        assert!(comb_torque(&p, 0.1, -1.0).is_err());
        let a = comb_torque(&p, 0.1, 50.0).unwrap();
        let b = comb_torque(&p, 0.1, 100.0).unwrap();
        assert!((b / a - 4.0).abs() < 1e-14);
        assert_eq!(comb_torque(&p, 0.0, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn fast_path_matches_checked_rhs() {
        let p = p();
        let v = VibrationProfile::tone(Axis::Ty, 27.7, 2003.0).with_misalignment(0.03);
        let d = Dynamics::new(&p, &v);
        for &(t, th, om) in &[(0.0, 0.1, -300.0), (1.3e-4, -0.25, 2000.0), (2e-3, 0.5, 1.0)] {
            let (_, a) = equation_rhs(&p, &SimState::new(t, th, om), 100.0, &v).unwrap();
            let b = d.accel(t, th, om, 1e4);
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        assert!(d.accel(0.0, 0.9, 0.0, 0.0).is_nan());
    }
}
