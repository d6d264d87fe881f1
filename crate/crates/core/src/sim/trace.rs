//! Sampled trajectories and zero-crossing events.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::engine::{Observer, Step};
use crate::error::{Error, Result};
use crate::model::SimState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Rising => "rising",
            Direction::Falling => "falling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub direction: Direction,
}

/// Turning point of the angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub time: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub sample_times: Vec<f64>,
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub voltage: Vec<f64>,
    pub crossings: Vec<Crossing>,
    pub extrema: Vec<Extremum>,
}

impl Trace {
    /// Builds a trace from externally produced samples; events come from
    /// cubic Hermite interpolation between samples.
    pub fn from_samples(times: Vec<f64>, theta: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        if times.len() != theta.len() || times.len() != omega.len() {
            return Err(Error::InvalidParameter("sample vectors differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("sample times must increase strictly".into()));
        }
        let crossings = detect_crossings(&theta, &omega, &times);
        let extrema = detect_extrema(&theta, &omega, &times);
        let voltage = vec![0.0; times.len()];
        Ok(Trace {
            sample_times: times,
            theta,
            omega,
            voltage,
            crossings,
            extrema,
        })
    }

    pub fn len(&self) -> usize {
        self.sample_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_times.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        match (self.sample_times.first(), self.sample_times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        }
    }

    /// Cubic Hermite interpolation of (theta, omega) from the samples; omega
    /// uses a linear blend since its derivative is not stored.
    pub fn interpolate(&self, t: f64) -> Option<(f64, f64)> {
        let ts = &self.sample_times;
        if ts.len() < 2 || t < ts[0] || t > ts[ts.len() - 1] {
            return None;
        }
        let i = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1) - 1;
        let h = ts[i + 1] - ts[i];
        let s = (t - ts[i]) / h;
        let th = hermite(self.theta[i], self.theta[i + 1], self.omega[i] * h, self.omega[i + 1] * h, s);
        let om = self.omega[i] + s * (self.omega[i + 1] - self.omega[i]);
        Some((th, om))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# memsvib trace v1")?;
        writeln!(w, "# units: time [s], theta [rad], omega [rad/s], voltage [V]")?;
        writeln!(w, "time,theta,omega,voltage")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{:.15e},{:.15e},{:.15e},{}",
                self.sample_times[i], self.theta[i], self.omega[i], self.voltage[i]
            )?;
        }
        Ok(())
    }

    pub fn write_crossings_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# memsvib crossings v1")?;
        writeln!(w, "# units: time [s]")?;
        writeln!(w, "time,direction")?;
        for c in &self.crossings {
            writeln!(w, "{:.15e},{}", c.time, c.direction.as_str())?;
        }
        Ok(())
    }

    /// Reads a trace written by [`Trace::write_csv`]; events are rebuilt from
    /// the samples.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let (mut t, mut th, mut om, mut v) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("time") {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
            if cols.len() != 4 {
                return Err(Error::Config(format!("line {}: expected 4 columns", n + 1)));
            }
            t.push(cols[0]);
            th.push(cols[1]);
            om.push(cols[2]);
            v.push(cols[3]);
        }
        let mut tr = Trace::from_samples(t, th, om)?;
        tr.voltage = v;
        Ok(tr)
    }
}

#[inline]
fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (3.0 * s2 - 2.0 * s3) * y1 + (s3 - s2) * m1
}

/// Zero crossings of sampled `theta`, located on the cubic Hermite
/// interpolant built from `theta` and its derivative `omega`.
pub fn detect_crossings(theta: &[f64], omega: &[f64], times: &[f64]) -> Vec<Crossing> {
    let mut out = Vec::new();
    let n = theta.len().min(omega.len()).min(times.len());
    for i in 1..n {
        let (a, b) = (theta[i - 1], theta[i]);
        let rising = a < 0.0 && b >= 0.0;
        let falling = a > 0.0 && b <= 0.0;
        if !(rising || falling) {
            continue;
        }
        let h = times[i] - times[i - 1];
        let (m0, m1) = (omega[i - 1] * h, omega[i] * h);
        let g = |s: f64| hermite(a, b, m0, m1, s);
        let s = super::stepper::bracketed_root(g, 0.0, 1.0, a, b);
        let om = omega[i - 1] + s * (omega[i] - omega[i - 1]);
        let direction = if om > 0.0 || (om == 0.0 && rising) {
            Direction::Rising
        } else {
            Direction::Falling
        };
        out.push(Crossing { time: times[i - 1] + s * h, direction });
    }
    out
}

/// Turning points of the Hermite interpolant wherever omega changes sign.
pub fn detect_extrema(theta: &[f64], omega: &[f64], times: &[f64]) -> Vec<Extremum> {
    let mut out = Vec::new();
    let n = theta.len().min(omega.len()).min(times.len());
    for i in 1..n {
        let (w0, w1) = (omega[i - 1], omega[i]);
        if !((w0 > 0.0 && w1 <= 0.0) || (w0 < 0.0 && w1 >= 0.0)) {
            continue;
        }
        let h = times[i] - times[i - 1];
        let (y0, y1, m0, m1) = (theta[i - 1], theta[i], w0 * h, w1 * h);
        let d = |s: f64| {
            let s2 = s * s;
            (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (6.0 * s - 6.0 * s2) * y1 + (3.0 * s2 - 2.0 * s) * m1
        };
        let s = super::stepper::bracketed_root(d, 0.0, 1.0, m0, m1);
        out.push(Extremum {
            time: times[i - 1] + s * h,
            theta: hermite(y0, y1, m0, m1, s),
        });
    }
    out
}

/// Observer that samples the dense output on a uniform grid.
#[derive(Debug, Clone)]
pub struct TraceRecorder {
    rate: f64,
    t_start: f64,
    next: u64,
    pub trace: Trace,
}

impl TraceRecorder {
    pub fn new(rate: f64) -> Self {
        TraceRecorder {
            rate,
            t_start: 0.0,
            next: 0,
            trace: Trace::default(),
        }
    }

    fn push(&mut self, s: &SimState, v: f64) {
        self.trace.sample_times.push(s.t);
        self.trace.theta.push(s.theta);
        self.trace.omega.push(s.omega);
        self.trace.voltage.push(v);
    }
}

impl Observer for TraceRecorder {
    fn on_start(&mut self, s: &SimState, v: f64) {
        self.t_start = s.t;
        self.next = 1;
        self.push(s, v);
    }

    fn on_step(&mut self, step: &Step<'_>) -> Result<()> {
        loop {
            let t = self.t_start + self.next as f64 / self.rate;
            if t > step.t1 {
                break;
            }
            let s = step.state(t);
            self.push(&s, step.voltage);
            self.next += 1;
        }
        Ok(())
    }

    fn on_crossing(&mut self, c: &Crossing) {
        self.trace.crossings.push(*c);
    }

    fn on_extremum(&mut self, t: f64, theta: f64) {
        self.trace.extrema.push(Extremum { time: t, theta });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(rate: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..n).map(|i| i as f64 / rate + 0.25e-3).collect();
        let th = t.iter().map(|&x| (2.0 * PI * x).sin()).collect();
        let om = t.iter().map(|&x| 2.0 * PI * (2.0 * PI * x).cos()).collect();
        (t, th, om)
    }

    #[test]
    fn sine_crossings_at_half_seconds() {
        let (t, th, om) = sine(1000.0, 3000);
        let c = detect_crossings(&th, &om, &t);
        assert_eq!(c.len(), 5);
        for (k, e) in c.iter().enumerate() {
            let want = 0.5 * (k + 1) as f64;
            assert!((e.time - want).abs() < 1e-8, "{} vs {want}", e.time);
        }
        assert_eq!(c[0].direction, Direction::Falling);
        assert_eq!(c[1].direction, Direction::Rising);
    }

    #[test]
    fn constant_signal_has_no_crossings() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(detect_crossings(&[0.3; 100], &[0.0; 100], &t).is_empty());
    }

    #[test]
    fn extrema_of_sine() {
        let (t, th, om) = sine(200.0, 600);
        let e = detect_extrema(&th, &om, &t);
        assert!((e[0].time - 0.25).abs() < 1e-6);
        assert!((e[0].theta - 1.0).abs() < 1e-7);
        assert!((e[1].theta + 1.0).abs() < 1e-7);
    }

    #[test]
    fn csv_roundtrip() {
        let (t, th, om) = sine(100.0, 250);
        let tr = Trace::from_samples(t, th, om).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = Trace::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.len(), tr.len());
        assert_eq!(back.crossings.len(), tr.crossings.len());
        for (a, b) in back.theta.iter().zip(&tr.theta) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
