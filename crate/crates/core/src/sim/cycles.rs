//! Per-half-cycle periods and amplitudes.

use serde::{Deserialize, Serialize};

use super::engine::Observer;
use super::trace::{Crossing, Trace};
use crate::error::{Error, Result};

/// Half-cycle `i` runs from crossing `i` to crossing `i + 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CyclePeriods {
    /// Start time of each half cycle [s].
    pub times: Vec<f64>,
    /// T_m,i [s]
    pub half_periods: Vec<f64>,
    /// Peak |theta| inside the half cycle [rad].
    pub amplitudes: Vec<f64>,
}

impl CyclePeriods {
    pub fn len(&self) -> usize {
        self.half_periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_periods.is_empty()
    }

    /// f_i = 1 / (2 T_m,i).
    pub fn frequencies(&self) -> Vec<f64> {
        self.half_periods.iter().map(|t| 0.5 / t).collect()
    }

    /// Half cycles starting inside `[t0, t1)`.
    pub fn window(&self, t0: f64, t1: f64) -> CyclePeriods {
        let a = self.times.partition_point(|&t| t < t0);
        let b = self.times.partition_point(|&t| t < t1);
        CyclePeriods {
            times: self.times[a..b].to_vec(),
            half_periods: self.half_periods[a..b].to_vec(),
            amplitudes: self.amplitudes[a..b].to_vec(),
        }
    }

    pub fn last_amplitude(&self) -> Option<f64> {
        self.amplitudes.last().copied()
    }
}

pub fn measure_cycles(trace: &Trace) -> Result<CyclePeriods> {
    let c = &trace.crossings;
    if c.len() < 3 {
        return Err(Error::TooFewCrossings { needed: 3, found: c.len() });
    }
    let mut out = CyclePeriods::default();
    let mut e = 0;
    for w in c.windows(2) {
        let (a, b) = (w[0].time, w[1].time);
        while e < trace.extrema.len() && trace.extrema[e].time <= a {
            e += 1;
        }
        let mut peak: f64 = 0.0;
        let mut k = e;
        while k < trace.extrema.len() && trace.extrema[k].time < b {
            peak = peak.max(trace.extrema[k].theta.abs());
            k += 1;
        }
        if peak == 0.0 {
            let i0 = trace.sample_times.partition_point(|&t| t <= a);
            let i1 = trace.sample_times.partition_point(|&t| t < b);
            peak = trace.theta[i0..i1].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        }
        out.times.push(a);
        out.half_periods.push(b - a);
        out.amplitudes.push(peak);
    }
    Ok(out)
}

/// Observer that builds [`CyclePeriods`] on the fly without storing samples.
#[derive(Debug, Clone, Default)]
pub struct CycleRecorder {
    last: Option<f64>,
    peak: f64,
    pub cycles: CyclePeriods,
    pub crossings: Vec<Crossing>,
    keep_crossings: bool,
}

impl CycleRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn keeping_crossings() -> Self {
        CycleRecorder { keep_crossings: true, ..Self::default() }
    }

    /// Time of the latest crossing seen.
    pub fn last_crossing(&self) -> Option<f64> {
        self.last
    }
}

impl Observer for CycleRecorder {
    fn on_crossing(&mut self, c: &Crossing) {
        if let Some(a) = self.last {
            self.cycles.times.push(a);
            self.cycles.half_periods.push(c.time - a);
            self.cycles.amplitudes.push(self.peak);
        }
        if self.keep_crossings {
            self.crossings.push(*c);
        }
        self.last = Some(c.time);
        self.peak = 0.0;
    }

    fn on_extremum(&mut self, _t: f64, theta: f64) {
        self.peak = self.peak.max(theta.abs());
    }
}
