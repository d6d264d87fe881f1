//! Stepped actuation-frequency sweeps without vibration and the backbone
//! curve.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::control::DriveConfig;
use crate::error::{Error, Result};
use crate::model::{comb_torque, restoring_torque, SimState};
use crate::params::MirrorParams;
use crate::sim::{hold_at, Branch, IntegratorConfig, StartupConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Up,
    Down,
}

impl std::str::FromStr for SweepDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "up" => Ok(SweepDirection::Up),
            "down" => Ok(SweepDirection::Down),
            _ => Err(Error::InvalidParameter(format!("unknown sweep direction {s:?}"))),
        }
    }
}

impl std::fmt::Display for SweepDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepDirection::Up => "up",
            SweepDirection::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSpec {
    /// Normalized actuation frequency (actuation / 2 f_ref).
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Settling rule applied at every step.
    pub hold: StartupConfig,
    /// Relative amplitude change between adjacent steps that counts as a jump.
    pub jump_threshold: f64,
}

impl Default for ResponseSpec {
    fn default() -> Self {
        ResponseSpec {
            start: 0.95,
            end: 1.20,
            step: 0.005,
            hold: StartupConfig {
                check_cycles: 100,
                settle_tol: 1e-4,
                max_hold_cycles: 4000,
                ..StartupConfig::default()
            },
            jump_threshold: 0.2,
        }
    }
}

impl ResponseSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.end > self.start && self.step > 0.0) {
            return Err(Error::InvalidParameter("need 0 < start < end and step > 0".into()));
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    /// Normalized actuation frequency.
    pub fnorm: f64,
    /// Steady amplitude [rad]; zero on the rest branch.
    pub amplitude: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub from: ResponsePoint,
    pub to: ResponsePoint,
}

impl Jump {
    pub fn is_upward(&self) -> bool {
        self.to.amplitude > self.from.amplitude
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    pub direction: SweepDirection,
    /// In sweep order.
    pub points: Vec<ResponsePoint>,
    pub jumps: Vec<Jump>,
}

impl ResponseCurve {
    /// Highest and lowest frequency with a nonzero amplitude.
    pub fn oscillating_range(&self) -> Option<(f64, f64)> {
        let f = self.points.iter().filter(|p| p.amplitude > 0.0).map(|p| p.fnorm);
        let lo = f.clone().fold(f64::INFINITY, f64::min);
        let hi = f.fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// Points sorted by frequency.
    pub fn sorted(&self) -> Vec<ResponsePoint> {
        let mut p = self.points.clone();
        p.sort_by(|a, b| a.fnorm.total_cmp(&b.fnorm));
        p
    }
}

pub fn detect_jumps(points: &[ResponsePoint], threshold: f64) -> Vec<Jump> {
    points
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].amplitude, w[1].amplitude);
            let m = a.max(b);
            m > 0.0 && (a - b).abs() / m > threshold
        })
        .map(|w| Jump { from: w[0], to: w[1] })
        .collect()
}

/// Quasi-static stepped sweep: every step starts from the previous steady
/// state; a step that starts at rest is seeded with a small angle.
pub fn run_response_curve(
    params: &MirrorParams,
    drive: DriveConfig,
    direction: SweepDirection,
    spec: &ResponseSpec,
    integ: &IntegratorConfig,
) -> Result<ResponseCurve> {
    let mut grid = spec.grid()?;
    if direction == SweepDirection::Down {
        grid.reverse();
    }
    let seed = SimState::new(0.0, spec.hold.seed_angle * params.theta_ref, 0.0);
    let mut state = seed;
    let mut points = Vec::with_capacity(grid.len());
    for nu in grid {
        let out = hold_at(params, drive, nu, state, &spec.hold, integ)?;
        log::debug!("{direction} {nu:.4}: {:?} {:.5}", out.branch, out.point.amplitude / params.theta_ref);
        state = if out.branch == Branch::Rest { seed } else { out.point.state };
        points.push(ResponsePoint {
            fnorm: nu,
            amplitude: out.point.amplitude,
            branch: out.branch,
        });
    }
    let jumps = detect_jumps(&points, spec.jump_threshold);
    Ok(ResponseCurve { direction, points, jumps })
}

/// Largest relative amplitude difference between two sweeps at common
/// frequencies, relative to the larger amplitude at that frequency.
pub fn hysteresis_gap(a: &ResponseCurve, b: &ResponseCurve) -> f64 {
    let mut worst: f64 = 0.0;
    for p in &a.points {
        if let Some(q) = b.points.iter().find(|q| (q.fnorm - p.fnorm).abs() < 1e-9) {
            let m = p.amplitude.max(q.amplitude);
            if m > 0.0 {
                worst = worst.max((p.amplitude - q.amplitude).abs() / m);
            }
        }
    }
    worst
}

const GL8: [(f64, f64); 8] = [
    (-0.9602898564975363, 0.1012285362903763),
    (-0.7966664774136267, 0.2223810344533745),
    (-0.525_532_409_916_329, 0.3137066458778873),
    (-0.1834346424956498, 0.362_683_783_378_362),
    (0.1834346424956498, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.3137066458778873),
    (0.7966664774136267, 0.2223810344533745),
    (0.9602898564975363, 0.1012285362903763),
];

fn gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        for (x, w) in GL8 {
            s += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * s
}

/// Free-oscillation frequency [Hz] at each amplitude [rad] of the undamped
/// mirror under the constant mean-square voltage `mean_v2` [V^2]:
/// `T = 4 int_0^A dtheta / sqrt(2 (U(A) - U(theta)) / I)`.
pub fn backbone(params: &MirrorParams, mean_v2: f64, amplitudes: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = params.domain();
    let v = mean_v2.max(0.0).sqrt();
    let torque = |th: f64| -> f64 {
        restoring_torque(params, th).unwrap_or(f64::NAN) - comb_torque(params, th, v).unwrap_or(f64::NAN)
    };
    amplitudes
        .iter()
        .map(|&a| {
            if !(a > 0.0 && a < hi.min(-lo)) {
                return Err(Error::InvalidParameter(format!("backbone amplitude {a} outside the curve domain")));
            }
            // theta = a sin(phi); U(a) - U(theta) as an integral keeps full accuracy near phi = pi/2.
            let integrand = |phi: f64| {
                let th = a * phi.sin();
                let du = gauss(torque, th, a, 2);
                a * phi.cos() / (2.0 * du / params.inertia).sqrt()
            };
            let period = 4.0 * gauss(integrand, 0.0, 0.5 * PI, 32);
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::Validity(format!("no oscillation at amplitude {a}")));
            }
            Ok((a, 1.0 / period))
        })
        .collect()
}

pub fn write_response_csv<W: Write>(curves: &[&ResponseCurve], theta_ref: f64, mut w: W) -> Result<()> {
    writeln!(w, "# memsvib respcurve v1")?;
    writeln!(w, "# fnorm = actuation frequency / (2 f_ref); amplitude / theta_ref")?;
    writeln!(w, "direction,fnorm,amplitude,branch")?;
    for c in curves {
        for p in &c.points {
            let b = match p.branch {
                Branch::Oscillating => "oscillating",
                Branch::Rest => "rest",
                Branch::Unsettled => "unsettled",
            };
            writeln!(w, "{},{:.6},{:.10},{b}", c.direction, p.fnorm, p.amplitude / theta_ref)?;
        }
    }
    Ok(())
}

pub fn write_jumps_csv<W: Write>(curves: &[&ResponseCurve], theta_ref: f64, mut w: W) -> Result<()> {
    writeln!(w, "# memsvib jumps v1")?;
    writeln!(w, "# fnorm = actuation frequency / (2 f_ref); amplitude / theta_ref")?;
    writeln!(w, "direction,from_fnorm,to_fnorm,from_amplitude,to_amplitude")?;
    for c in curves {
        for j in &c.jumps {
            writeln!(
                w,
                "{},{:.6},{:.6},{:.10},{:.10}",
                c.direction,
                j.from.fnorm,
                j.to.fnorm,
                j.from.amplitude / theta_ref,
                j.to.amplitude / theta_ref
            )?;
        }
    }
    Ok(())
}
