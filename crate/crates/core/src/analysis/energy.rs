//! Vibration-induced energy per mirror period: closed-form coupling
//! coefficients and a quadrature of `tau_v * omega` along a trace.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::vibration_torque;
use crate::params::MirrorParams;
use crate::sim::{measure_cycles, Trace};
use crate::vibration::{Axis, VibrationProfile};

/// Largest amplitude for which the fourth-order expansion of the vibration
/// torque is used (about 20 degrees).
pub const MAX_EXPANSION_AMPLITUDE: f64 = 0.35;

/// Coupling coefficients [N m per m/s^2 of acceleration, i.e. kg m].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCoeffs {
    pub v0: f64,
    pub vy1: f64,
    pub vy3: f64,
    pub vz2: f64,
    pub vz4: f64,
}

pub fn coupling_coeffs(m: f64, l: f64, amplitude: f64) -> Result<EnergyCoeffs> {
    if !(amplitude > 0.0 && amplitude <= MAX_EXPANSION_AMPLITUDE) {
        return Err(Error::Validity(format!(
            "amplitude {amplitude} rad outside (0, {MAX_EXPANSION_AMPLITUDE}]"
        )));
    }
    let th = amplitude;
    let th2 = th * th;
    let v0 = 2.0 * PI * m * l * th;
    Ok(EnergyCoeffs {
        v0,
        vy1: v0 * (8.0 - th2) / 16.0,
        vy3: v0 * th2 / 16.0,
        vz2: v0 * (12.0 * th - th2 * th) / 48.0,
        vz4: v0 * th2 * th / 96.0,
    })
}

const MAX_DETUNING: f64 = 0.2;
const WARN_DETUNING: f64 = 0.05;

/// Slowly varying energy gain per period,
/// `a_y vy1 cos(2 pi (f_m - f_y) t - phi) + a_z vz2 sin(2 pi (2 f_m - f_z) t - phi)`.
/// A term is kept only when its tone lies within `0.2 f_m` of the
/// corresponding mirror harmonic; the primary axis must satisfy that.
pub fn analytic_energy_series(
    coeffs: &EnergyCoeffs,
    f_m: f64,
    profile: &VibrationProfile,
    times: &[f64],
) -> Result<Vec<f64>> {
    profile.validate()?;
    if !(f_m > 0.0) {
        return Err(Error::InvalidParameter("mirror frequency must be > 0".into()));
    }
    let fv = profile.frequency;
    let dy_detune = f_m - fv;
    let dz_detune = 2.0 * f_m - fv;
    let primary = match profile.axis {
        Axis::Ty => dy_detune,
        Axis::Tz => dz_detune,
    };
    if primary.abs() > MAX_DETUNING * f_m {
        return Err(Error::Validity(format!(
            "detuning {:.4} f_m exceeds {MAX_DETUNING} f_m",
            primary / f_m
        )));
    }
    if primary.abs() > WARN_DETUNING * f_m {
        log::warn!("detuning {:.4} f_m: averaged energy model is approximate", primary / f_m);
    }
    let (uy, uz) = profile.direction();
    let ay = profile.amplitude * uy;
    let az = profile.amplitude * uz;
    let use_y = dy_detune.abs() <= MAX_DETUNING * f_m && ay != 0.0;
    let use_z = dz_detune.abs() <= MAX_DETUNING * f_m && az != 0.0;
    let phi = profile.phase;
    Ok(times
        .iter()
        .map(|&t| {
            if t < profile.t_on {
                return 0.0;
            }
            let mut e = 0.0;
            if use_y {
                e += ay * coeffs.vy1 * (2.0 * PI * dy_detune * t - phi).cos();
            }
            if use_z {
                e += az * coeffs.vz2 * (2.0 * PI * dz_detune * t - phi).sin();
            }
            e
        })
        .collect())
}

/// Cumulative integral of uniformly sampled data using the quadratic through
/// three neighbouring samples on every interval; pairs of intervals
/// reproduce Simpson's rule.
#[derive(Debug, Clone)]
pub struct CumulativeSimpson {
    t0: f64,
    h: f64,
    values: Vec<f64>,
    cum: Vec<f64>,
}

impl CumulativeSimpson {
    pub fn new(t0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 || !(h > 0.0) {
            return Err(Error::InvalidParameter("need >= 3 uniform samples".into()));
        }
        let n = values.len();
        let mut cum = vec![0.0; n];
        for k in 0..n - 1 {
            cum[k + 1] = cum[k] + h * Self::partial(&values, k, 1.0);
        }
        Ok(CumulativeSimpson { t0, h, values, cum })
    }

    // Integral over [k, k + u] (u in [0, 1]) in units of h.
    fn partial(p: &[f64], k: usize, u: f64) -> f64 {
        if k + 2 < p.len() {
            let (p0, p1, p2) = (p[k], p[k + 1], p[k + 2]);
            p0 * u + (-3.0 * p0 + 4.0 * p1 - p2) * u * u / 4.0 + (p0 - 2.0 * p1 + p2) * u * u * u / 6.0
        } else {
            // Last interval: quadratic through k-1, k, k+1, shifted by one.
            let (p0, p1, p2) = (p[k - 1], p[k], p[k + 1]);
            let q = |s: f64| p0 * s + (-3.0 * p0 + 4.0 * p1 - p2) * s * s / 4.0 + (p0 - 2.0 * p1 + p2) * s * s * s / 6.0;
            q(1.0 + u) - q(1.0)
        }
    }

    /// Integral from the first sample to `t`.
    pub fn at(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / self.h).max(0.0);
        let n = self.values.len();
        let k = (x.floor() as usize).min(n - 2);
        let u = (x - k as f64).min(1.0);
        self.cum[k] + self.h * Self::partial(&self.values, k, u)
    }

    pub fn between(&self, a: f64, b: f64) -> f64 {
        self.at(b) - self.at(a)
    }
}

/// `Delta E(t) = integral_t^{t + 1/f_m} tau_v omega`, for every sample time whose
/// window fits in the trace. `f_m` is the median half-cycle frequency near `t`.
pub fn numeric_energy_series(trace: &Trace, params: &MirrorParams, profile: &VibrationProfile) -> Result<Vec<(f64, f64)>> {
    let n = trace.len();
    let cycles = measure_cycles(trace)?;
    if cycles.len() < 4 {
        return Err(Error::TooFewCrossings { needed: 5, found: trace.crossings.len() });
    }
    let (t_first, t_last) = trace.span();
    let h = (t_last - t_first) / (n - 1) as f64;
    let uniform = trace
        .sample_times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-6 * h);
    if !uniform {
        return Err(Error::InvalidParameter("energy quadrature needs uniformly sampled traces".into()));
    }
    let power: Vec<f64> = (0..n)
        .map(|i| {
            let (t, th, om) = (trace.sample_times[i], trace.theta[i], trace.omega[i]);
            vibration_torque(params, th, t, profile).map(|tau| tau * om)
        })
        .collect::<Result<_>>()?;
    let integral = CumulativeSimpson::new(t_first, h, power)?;
    let freqs = cycles.frequencies();
    let mut sorted = freqs.clone();
    sorted.sort_by(f64::total_cmp);
    let period = 1.0 / sorted[sorted.len() / 2];
    if t_last - t_first < 2.0 * period {
        return Err(Error::WindowTooShort { cycles: cycles.len() / 2, needed: 2 });
    }
    let mut out = Vec::new();
    let mut buf = Vec::new();
    for &t in &trace.sample_times {
        let a = cycles.times.partition_point(|&x| x < t - period);
        let b = cycles.times.partition_point(|&x| x < t + 2.0 * period);
        buf.clear();
        buf.extend_from_slice(&freqs[a..b]);
        let f_m = if buf.is_empty() {
            1.0 / period
        } else {
            buf.sort_by(f64::total_cmp);
            buf[buf.len() / 2]
        };
        let end = t + 1.0 / f_m;
        if end > t_last {
            break;
        }
        out.push((t, integral.between(t, end)));
    }
    Ok(out)
}

/// `theta = amplitude sin(2 pi f_m t)` sampled at `samples_per_period` points
/// per mirror period over `[0, periods / f_m]`.
pub fn imposed_trajectory(amplitude: f64, f_m: f64, periods: usize, samples_per_period: usize) -> Result<Trace> {
    if !(amplitude > 0.0 && f_m > 0.0) || periods < 2 || samples_per_period < 8 {
        return Err(Error::InvalidParameter("imposed trajectory needs >= 2 periods and >= 8 samples each".into()));
    }
    let n = periods * samples_per_period + 1;
    let h = 1.0 / (f_m * samples_per_period as f64);
    let w = 2.0 * PI * f_m;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let th = t.iter().map(|&x| amplitude * (w * x).sin()).collect();
    let om = t.iter().map(|&x| amplitude * w * (w * x).cos()).collect();
    Trace::from_samples(t, th, om)
}

pub fn write_energy_csv<W: Write>(times: &[f64], numeric: &[f64], analytic: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "# memsvib energy v1")?;
    writeln!(w, "# units: time [s], delta_e [J]")?;
    writeln!(w, "time,delta_e_numeric,delta_e_analytic")?;
    for i in 0..times.len().min(numeric.len()).min(analytic.len()) {
        writeln!(w, "{:.15e},{:.15e},{:.15e}", times[i], numeric[i], analytic[i])?;
    }
    Ok(())
}
