//! Single-tone translational vibration acting through the centre-of-mass offset.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravity [m/s^2].
pub const G0: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// In-plane, perpendicular to the torsion axis.
    Ty,
    /// Out of plane.
    Tz,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ty" | "y" => Ok(Axis::Ty),
            "tz" | "z" => Ok(Axis::Tz),
            _ => Err(Error::InvalidParameter(format!("unknown axis '{s}'"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Ty => "ty",
            Axis::Tz => "tz",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibrationProfile {
    pub axis: Axis,
    /// Peak acceleration [m/s^2].
    pub amplitude: f64,
    /// [Hz]
    pub frequency: f64,
    /// [rad]
    pub phase: f64,
    /// Onset of the tone [s]; zero torque before.
    pub t_on: f64,
    /// Rotation of the vibration axis in the y-z plane [rad].
    pub misalignment: f64,
}

/// Peak acceleration of a single tone with the given rms level in g.
pub fn peak_from_g_rms(g_rms: f64) -> f64 {
    std::f64::consts::SQRT_2 * g_rms * G0
}

impl VibrationProfile {
    pub fn tone(axis: Axis, amplitude: f64, frequency: f64) -> Self {
        VibrationProfile {
            axis,
            amplitude,
            frequency,
            phase: 0.0,
            t_on: 0.0,
            misalignment: 0.0,
        }
    }

    pub fn none() -> Self {
        Self::tone(Axis::Ty, 0.0, 1.0)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_onset(mut self, t_on: f64) -> Self {
        self.t_on = t_on;
        self
    }

    pub fn with_misalignment(mut self, eps: f64) -> Self {
        self.misalignment = eps;
        self
    }

    pub fn is_silent(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.amplitude >= 0.0
            && self.amplitude.is_finite()
            && self.frequency > 0.0
            && self.frequency.is_finite()
            && self.phase.is_finite()
            && self.t_on.is_finite()
            && (-0.1..=0.1).contains(&self.misalignment);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad vibration profile {self:?}")))
        }
    }

    /// Scalar acceleration `a cos(2 pi f t + phi)`, zero before onset.
    pub fn acceleration(&self, t: f64) -> f64 {
        if t < self.t_on || self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).cos()
    }

    /// Share of the acceleration along (y, z).
    pub fn direction(&self) -> (f64, f64) {
        let (s, c) = self.misalignment.sin_cos();
        match self.axis {
            Axis::Ty => (c, s),
            Axis::Tz => (s, c),
        }
    }

    /// `(d_y, d_z)` at time `t`.
    pub fn components(&self, t: f64) -> (f64, f64) {
        let d = self.acceleration(t);
        let (uy, uz) = self.direction();
        (d * uy, d * uz)
    }
}
