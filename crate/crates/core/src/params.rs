//! Physical constants and characteristic curves of the mirror.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::{NonlinearCurve, Parity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct MirrorParams {
    /// [kg m^2]
    pub inertia: f64,
    /// [kg]
    pub mass: f64,
    /// Torsion axis to centre of mass [m].
    pub com_offset: f64,
    /// k(theta) [N m/rad]
    pub stiffness: NonlinearCurve,
    /// Angle-only part of c(theta, omega) [N m s/rad].
    pub damping_base: NonlinearCurve,
    /// Multiplies |omega| in c(theta, omega).
    pub damping_amp: NonlinearCurve,
    /// dC/dtheta [F/rad]
    pub cap_deriv: NonlinearCurve,
    /// [rad]
    pub theta_ref: f64,
    /// [Hz]
    pub f_ref: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    inertia: f64,
    mass: f64,
    com_offset: f64,
    theta_ref: f64,
    f_ref: f64,
    stiffness: NonlinearCurve,
    damping_base: NonlinearCurve,
    damping_amp: NonlinearCurve,
    cap_deriv: NonlinearCurve,
}

impl TryFrom<RawParams> for MirrorParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        let p = MirrorParams {
            inertia: r.inertia,
            mass: r.mass,
            com_offset: r.com_offset,
            stiffness: r.stiffness,
            damping_base: r.damping_base,
            damping_amp: r.damping_amp,
            cap_deriv: r.cap_deriv,
            theta_ref: r.theta_ref,
            f_ref: r.f_ref,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<MirrorParams> for RawParams {
    fn from(p: MirrorParams) -> Self {
        RawParams {
            inertia: p.inertia,
            mass: p.mass,
            com_offset: p.com_offset,
            theta_ref: p.theta_ref,
            f_ref: p.f_ref,
            stiffness: p.stiffness,
            damping_base: p.damping_base,
            damping_amp: p.damping_amp,
            cap_deriv: p.cap_deriv,
        }
    }
}

const CHECK_POINTS: usize = 2001;

impl MirrorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.inertia > 0.0 && self.inertia.is_finite()) {
            return bad("inertia must be > 0");
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return bad("mass must be > 0");
        }
        if !(self.com_offset >= 0.0 && self.com_offset.is_finite()) {
            return bad("com_offset must be >= 0");
        }
        if !(self.theta_ref > 0.0 && self.f_ref > 0.0) {
            return bad("theta_ref and f_ref must be > 0");
        }
        if self.stiffness.parity() != Parity::Even {
            return bad("stiffness k(theta) must be even so that k(theta) theta is odd");
        }
        if self.cap_deriv.parity() != Parity::Odd {
            return bad("cap_deriv must be odd");
        }
        if self.damping_base.parity() != Parity::Even || self.damping_amp.parity() != Parity::Even {
            return bad("damping curves must be even");
        }
        let (_, hi) = self.domain();
        if self.theta_ref > hi {
            return bad("theta_ref lies outside the curve domains");
        }
        let mut prev_torque = 0.0;
        let mut prev_k = self.stiffness.eval_unchecked(0.0);
        for i in 0..=CHECK_POINTS {
            let th = hi * i as f64 / CHECK_POINTS as f64;
            let k = self.stiffness.eval_unchecked(th);
            let torque = k * th;
            if i > 0 && torque <= prev_torque {
                return bad("restoring torque k(theta) theta must increase with theta");
            }
            if k < prev_k {
                return bad("stiffness must be non-decreasing in |theta| (hardening)");
            }
            if self.damping_base.eval_unchecked(th) < 0.0 || self.damping_amp.eval_unchecked(th) < 0.0 {
                return bad("damping curves must be non-negative");
            }
            prev_torque = torque;
            prev_k = k;
        }
        Ok(())
    }

    /// Intersection of all curve domains; symmetric because every curve has a parity.
    pub fn domain(&self) -> (f64, f64) {
        let hi = [&self.stiffness, &self.damping_base, &self.damping_amp, &self.cap_deriv]
            .iter()
            .map(|c| c.domain().1)
            .fold(f64::INFINITY, f64::min);
        (-hi, hi)
    }

    /// m L, the only way mass and offset enter the dynamics.
    pub fn mass_offset(&self) -> f64 {
        self.mass * self.com_offset
    }

    /// Small-angle natural frequency sqrt(k(0)/I) / 2 pi [Hz].
    pub fn linear_frequency(&self) -> f64 {
        (self.stiffness.eval_unchecked(0.0) / self.inertia).sqrt() / (2.0 * PI)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Builder for the synthetic curve family shipped as the default:
/// `k = k0 (1 + h (theta/theta_ref)^2)`, `c = c0 (1 + g (theta/theta_ref)^2)`,
/// `dC/dtheta = -g1 theta exp(-(theta/w)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMirror {
    /// Small-angle natural frequency [Hz].
    pub f0_lin: f64,
    /// Relative stiffness increase at theta_ref.
    pub hardening: f64,
    /// Small-angle quality factor.
    pub quality: f64,
    /// Relative damping increase at theta_ref.
    pub damping_growth: f64,
    /// Width of the capacitance gradient [rad].
    pub cap_width: f64,
    /// Small-angle comb stiffness at the reference voltage relative to k0, g1 V^2 / (2 k0).
    pub drive_depth: f64,
    /// [V]
    pub reference_voltage: f64,
    pub inertia: f64,
    pub mass: f64,
    pub com_offset: f64,
    pub theta_ref: f64,
    pub f_ref: f64,
    /// Half-width of the curve domains [rad].
    pub max_angle: f64,
}

impl Default for SyntheticMirror {
    fn default() -> Self {
        SyntheticMirror {
            f0_lin: 1919.468,
            hardening: 0.07,
            quality: 150.0,
            damping_growth: 2.0,
            cap_width: 0.8,
            drive_depth: 0.11,
            reference_voltage: 100.0,
            inertia: 6.0e-13,
            mass: 2.3e-6,
            com_offset: 100e-6,
            theta_ref: 15f64.to_radians(),
            f_ref: 2000.0,
            max_angle: 0.8,
        }
    }
}

impl SyntheticMirror {
    pub fn k0(&self) -> f64 {
        (2.0 * PI * self.f0_lin).powi(2) * self.inertia
    }

    pub fn build(&self) -> Result<MirrorParams> {
        let dom = (-self.max_angle, self.max_angle);
        let k0 = self.k0();
        let tr2 = self.theta_ref * self.theta_ref;
        let c0 = self.inertia * 2.0 * PI * self.f0_lin / self.quality;
        let g1 = 2.0 * self.drive_depth * k0 / (self.reference_voltage * self.reference_voltage);
        let p = MirrorParams {
            inertia: self.inertia,
            mass: self.mass,
            com_offset: self.com_offset,
            stiffness: NonlinearCurve::polynomial(vec![k0, 0.0, k0 * self.hardening / tr2], Parity::Even, dom)?,
            damping_base: NonlinearCurve::polynomial(
                vec![c0, 0.0, c0 * self.damping_growth / tr2],
                Parity::Even,
                dom,
            )?,
            damping_amp: NonlinearCurve::constant(0.0, dom)?,
            cap_deriv: NonlinearCurve::gaussian(-g1, self.cap_width, dom)?,
            theta_ref: self.theta_ref,
            f_ref: self.f_ref,
        };
        p.validate()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_default_is_valid() {
        let p = SyntheticMirror::default().build().unwrap();
        assert!((p.linear_frequency() - 1919.468).abs() < 1e-9);
        assert!((p.mass_offset() - 2.3e-10).abs() < 1e-24);
    }

    #[test]
    fn softening_rejected() {
        let s = SyntheticMirror { hardening: -0.1, ..Default::default() };
        assert!(s.build().is_err());
    }

    #[test]
    fn negative_offset_rejected() {
        let mut p = SyntheticMirror::default().build().unwrap();
        p.com_offset = -1.0;
        assert!(p.validate().is_err());
        p.com_offset = 0.0;
        assert!(p.validate().is_ok());
    }
}
