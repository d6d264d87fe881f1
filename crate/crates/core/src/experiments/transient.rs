//! Tone switched on at a settled operating point: envelopes and beating.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{dominant_frequency, error_stats, ErrorStats, SpectralLine};
use crate::control::{simulate_controlled, Control, PllRecord};
use crate::error::{Error, Result};
use crate::params::MirrorParams;
use crate::sim::{measure_cycles, CyclePeriods, IntegratorConfig, OperatingPoint, Trace, TraceRecorder};
use crate::vibration::{peak_from_g_rms, Axis, VibrationProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientSpec {
    pub axis: Axis,
    pub g_rms: f64,
    /// Tone frequency / f_ref.
    pub fnorm: f64,
    /// [rad]
    pub misalignment: f64,
    pub control: Control,
    /// Mirror periods before the tone starts.
    pub pre_cycles: usize,
    /// Mirror periods after onset.
    pub post_cycles: usize,
}

impl TransientSpec {
    pub fn new(axis: Axis, fnorm: f64) -> Self {
        TransientSpec {
            axis,
            g_rms: 2.0,
            fnorm,
            misalignment: 0.0,
            control: Control::OpenLoop,
            pre_cycles: 200,
            post_cycles: 3000,
        }
    }
}

/// Relative amplitude spread before onset above which the mirror is not
/// considered settled.
pub const SETTLED_SPREAD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientReport {
    pub spec: TransientSpec,
    #[serde(skip)]
    pub trace: Trace,
    pub cycles: CyclePeriods,
    /// [s]
    pub t_on: f64,
    /// Mean amplitude / theta_ref and frequency / f_ref before onset.
    pub before: (f64, f64),
    pub after: ErrorStats,
    /// Expected beat: |tone - nearest mirror harmonic| / f_ref.
    pub expected_beat: f64,
    /// Dominant line of the per-period amplitude envelope, normalized by f_ref.
    pub amplitude_beat: SpectralLine,
    /// Same for the per-period frequency.
    pub frequency_beat: SpectralLine,
    /// Peak-to-peak envelope after onset, percent of the mean.
    pub pp_amplitude_pct: f64,
    pub pp_frequency_pct: f64,
    #[serde(skip)]
    pub pll_history: Vec<PllRecord>,
}

/// One value per mirror period: mean of the two half-cycle amplitudes and
/// the inverse of the summed half periods.
pub fn per_period(cycles: &CyclePeriods) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = cycles.len() / 2;
    let mut t = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for k in 0..n {
        let (i, j) = (2 * k, 2 * k + 1);
        t.push(cycles.times[i]);
        a.push(0.5 * (cycles.amplitudes[i] + cycles.amplitudes[j]));
        f.push(1.0 / (cycles.half_periods[i] + cycles.half_periods[j]));
    }
    (t, a, f)
}

fn spread_pct(x: &[f64]) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    100.0 * (max - min) / mean
}

pub fn run_transient(
    params: &MirrorParams,
    op: &OperatingPoint,
    spec: &TransientSpec,
    integ: &IntegratorConfig,
) -> Result<TransientReport> {
    if !(op.amplitude > 0.0) {
        return Err(Error::Protocol("mirror is not on the oscillating branch".into()));
    }
    if spec.pre_cycles < 20 || spec.post_cycles < 50 {
        return Err(Error::InvalidParameter("need >= 20 cycles before and >= 50 after onset".into()));
    }
    let f_m = 0.5 * op.actuation_frequency();
    let t_on = spec.pre_cycles as f64 / f_m;
    let t_end = t_on + spec.post_cycles as f64 / f_m;
    let f_v = spec.fnorm * params.f_ref;
    let profile = VibrationProfile::tone(spec.axis, peak_from_g_rms(spec.g_rms), f_v)
        .with_misalignment(spec.misalignment)
        .with_onset(t_on);
    integ.validate(2.0 * params.f_ref)?;
    let mut rec = TraceRecorder::new(integ.output_rate);
    let (res, ctrl) = simulate_controlled(params, op, &profile, &spec.control, t_end, integ, &mut rec);
    res?;
    let trace = rec.trace;
    let cycles = measure_cycles(&trace)?;

    let pre = cycles.window(0.0, t_on);
    if pre.len() < 10 {
        return Err(Error::Protocol("too few cycles before onset".into()));
    }
    let pre_spread = spread_pct(&pre.amplitudes) / 100.0;
    if pre_spread > SETTLED_SPREAD {
        return Err(Error::Protocol(format!(
            "mirror not settled before onset (amplitude spread {pre_spread:.2e})"
        )));
    }
    let before = (
        pre.amplitudes.iter().sum::<f64>() / pre.len() as f64 / params.theta_ref,
        pre.frequencies().iter().sum::<f64>() / pre.len() as f64 / params.f_ref,
    );
    let after = error_stats(&cycles, (t_on, t_end), (params.theta_ref, params.f_ref))?;

    let post = cycles.window(t_on, t_end);
    let (pt, pa, pf) = per_period(&post);
    let dt = (pt[pt.len() - 1] - pt[0]) / (pt.len() - 1) as f64;
    let norm = |l: SpectralLine| SpectralLine {
        frequency: l.frequency / params.f_ref,
        bin_width: l.bin_width / params.f_ref,
    };
    let amplitude_beat = norm(dominant_frequency(&pa, dt)?);
    let frequency_beat = norm(dominant_frequency(&pf, dt)?);
    Ok(TransientReport {
        spec: *spec,
        t_on,
        before,
        after,
        expected_beat: crate::experiments::sweep::beat_frequency(f_v, f_m) / params.f_ref,
        amplitude_beat,
        frequency_beat,
        pp_amplitude_pct: spread_pct(&pa),
        pp_frequency_pct: spread_pct(&pf),
        pll_history: ctrl.map(|c| c.history).unwrap_or_default(),
        trace,
        cycles,
    })
}

/// Per-period envelope after and before onset.
pub fn write_envelope_csv<W: Write>(report: &TransientReport, params: &MirrorParams, mut w: W) -> Result<()> {
    writeln!(w, "# memsvib envelope v1")?;
    writeln!(w, "# time [s], amplitude / theta_ref, frequency / f_ref, one row per mirror period")?;
    writeln!(w, "time,amplitude,frequency")?;
    let (t, a, f) = per_period(&report.cycles);
    for i in 0..t.len() {
        writeln!(w, "{:.12e},{:.12},{:.12}", t[i], a[i] / params.theta_ref, f[i] / params.f_ref)?;
    }
    Ok(())
}

pub fn write_cycles_csv<W: Write>(cycles: &CyclePeriods, mut w: W) -> Result<()> {
    writeln!(w, "# memsvib cycles v1")?;
    writeln!(w, "# units: start [s], half_period [s], amplitude [rad]")?;
    writeln!(w, "start,half_period,amplitude")?;
    for i in 0..cycles.len() {
        writeln!(w, "{:.15e},{:.15e},{:.15e}", cycles.times[i], cycles.half_periods[i], cycles.amplitudes[i])?;
    }
    Ok(())
}
