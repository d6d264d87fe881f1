//! Vibration-frequency sweeps: STD errors per tone frequency, located
//! features, misalignment check.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{error_stats, ErrorStats, STATS_HEADER};
use crate::control::{simulate_controlled, Control};
use crate::error::{Error, Result};
use crate::params::MirrorParams;
use crate::sim::{CycleRecorder, IntegratorConfig, OperatingPoint};
use crate::vibration::{peak_from_g_rms, Axis, VibrationProfile};

/// Normalized tone frequencies (vibration / f_ref): a uniform base grid plus
/// finer steps around the given centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub fine_step: f64,
    pub fine_halfwidth: f64,
    pub fine_centres: Vec<f64>,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            start: 0.42,
            end: 2.09,
            step: 0.01,
            fine_step: 0.0005,
            fine_halfwidth: 0.05,
            fine_centres: vec![1.0, 2.0],
        }
    }
}

impl FrequencyGrid {
    /// Uniform grid without refinement.
    pub fn uniform(start: f64, end: f64, step: f64) -> Self {
        FrequencyGrid {
            start,
            end,
            step,
            fine_step: step,
            fine_halfwidth: 0.0,
            fine_centres: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0 && self.end >= self.start && self.step > 0.0) {
            return Err(Error::InvalidParameter("grid needs 0 < start <= end and step > 0".into()));
        }
        let round = |x: f64| (x * 1e9).round() / 1e9;
        let mut g = Vec::new();
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as i64;
        g.extend((0..=n).map(|i| round(self.start + i as f64 * self.step)));
        if self.fine_halfwidth > 0.0 {
            if !(self.fine_step > 0.0) {
                return Err(Error::InvalidParameter("fine_step must be > 0".into()));
            }
            let m = (self.fine_halfwidth / self.fine_step + 1e-9).floor() as i64;
            for &c in &self.fine_centres {
                for j in -m..=m {
                    let f = round(c + j as f64 * self.fine_step);
                    if f >= self.start - 1e-12 && f <= self.end + 1e-12 {
                        g.push(f);
                    }
                }
            }
        }
        g.sort_by(f64::total_cmp);
        g.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        Ok(g)
    }
}

/// How much of each run is discarded and measured, in mirror periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    pub skip_cycles: f64,
    pub skip_beats: f64,
    pub max_skip_cycles: f64,
    pub measure_beats: f64,
    pub min_measure_cycles: f64,
    pub max_measure_cycles: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            skip_cycles: 200.0,
            skip_beats: 5.0,
            max_skip_cycles: 2000.0,
            measure_beats: 20.0,
            min_measure_cycles: 400.0,
            max_measure_cycles: 4000.0,
        }
    }
}

impl WindowPolicy {
    /// `(skip, measure)` in seconds for a beat frequency `beat` [Hz] and a
    /// mirror frequency `f_m` [Hz].
    pub fn plan(&self, beat: f64, f_m: f64) -> (f64, f64) {
        let beats = |n: f64| if beat > 0.0 { n * f_m / beat } else { f64::INFINITY };
        let skip = self.skip_cycles.max(beats(self.skip_beats)).min(self.max_skip_cycles);
        let measure = beats(self.measure_beats).clamp(self.min_measure_cycles, self.max_measure_cycles);
        (skip / f_m, measure / f_m)
    }
}

/// `min(|f_v - f_m|, |f_v - 2 f_m|)`.
pub fn beat_frequency(f_v: f64, f_m: f64) -> f64 {
    (f_v - f_m).abs().min((f_v - 2.0 * f_m).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub control: Control,
    /// Normalized tone frequencies, strictly increasing.
    pub grid: Vec<f64>,
    pub g_rms: f64,
    /// [rad]
    pub misalignment: f64,
    pub window: WindowPolicy,
}

impl SweepSpec {
    pub fn new(axis: Axis, control: Control, grid: Vec<f64>) -> Self {
        SweepSpec {
            axis,
            control,
            grid,
            g_rms: 2.0,
            misalignment: 0.0,
            window: WindowPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(Error::InvalidParameter("grid needs positive finite frequencies".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
        if !(self.g_rms > 0.0 && self.g_rms.is_finite()) {
            return Err(Error::InvalidParameter("acceleration must be > 0".into()));
        }
        if !(-0.1..=0.1).contains(&self.misalignment) {
            return Err(Error::InvalidParameter("misalignment outside [-0.1, 0.1] rad".into()));
        }
        Ok(())
    }

    /// Peak acceleration [m/s^2].
    pub fn peak_acceleration(&self) -> f64 {
        peak_from_g_rms(self.g_rms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Tone frequency / f_ref.
    pub fnorm: f64,
    pub stats: Option<ErrorStats>,
    /// Set when the PLL is used: the mean mirror frequency follows the tone
    /// (or half the tone near 2) to better than 1e-5.
    pub locked: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    StdAmplitude,
    StdFrequency,
}

impl Metric {
    pub fn of(self, s: &ErrorStats) -> f64 {
        match self {
            Metric::StdAmplitude => s.std_amplitude_pct,
            Metric::StdFrequency => s.std_frequency_pct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Peak,
    Notch,
    LockEdgeLow,
    LockEdgeHigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub metric: Metric,
    /// Harmonic the feature belongs to (1 or 2).
    pub harmonic: u8,
    pub fnorm: f64,
    pub value: f64,
    /// Grid neighbours on either side.
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Mirror frequency of the settled operating point / f_ref.
    pub mirror_fnorm: f64,
    pub rows: Vec<SweepRow>,
    pub features: Vec<Feature>,
}

/// Half-width of the band around each harmonic searched for features.
pub const FEATURE_BAND: f64 = 0.1;
/// A local minimum counts as a notch below this fraction of the smaller
/// neighbouring peak.
pub const NOTCH_FRACTION: f64 = 0.1;
pub const LOCK_TOLERANCE: f64 = 1e-5;

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn value_at(&self, fnorm: f64, metric: Metric) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| (r.fnorm - fnorm).abs() < 1e-9)
            .and_then(|r| r.stats.as_ref())
            .map(|s| metric.of(s))
    }

    /// Largest metric value within `[lo, hi]`, with its frequency.
    pub fn max_in(&self, lo: f64, hi: f64, metric: Metric) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.fnorm >= lo && r.fnorm <= hi)
            .filter_map(|r| r.stats.as_ref().map(|s| (r.fnorm, metric.of(s))))
            .fold(None, |best: Option<(f64, f64)>, x| match best {
                Some(b) if b.1 >= x.1 => Some(b),
                _ => Some(x),
            })
    }

    pub fn features_of(&self, kind: FeatureKind) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(move |f| f.kind == kind)
    }

    pub fn lock_band(&self, harmonic: u8) -> Option<(f64, f64)> {
        let lo = self
            .features
            .iter()
            .find(|f| f.kind == FeatureKind::LockEdgeLow && f.harmonic == harmonic)?;
        let hi = self
            .features
            .iter()
            .find(|f| f.kind == FeatureKind::LockEdgeHigh && f.harmonic == harmonic)?;
        Some((lo.fnorm, hi.fnorm))
    }
}

fn run_point(
    params: &MirrorParams,
    op: &OperatingPoint,
    spec: &SweepSpec,
    fnorm: f64,
    integ: &IntegratorConfig,
) -> SweepRow {
    let f_v = fnorm * params.f_ref;
    let f_m = 0.5 * op.actuation_frequency();
    let (skip, measure) = spec.window.plan(beat_frequency(f_v, f_m), f_m);
    let profile = VibrationProfile::tone(spec.axis, spec.peak_acceleration(), f_v).with_misalignment(spec.misalignment);
    let mut rec = CycleRecorder::new();
    let (res, _) = simulate_controlled(params, op, &profile, &spec.control, skip + measure, integ, &mut rec);
    let stats = res.and_then(|_| error_stats(&rec.cycles, (skip, skip + measure), (params.theta_ref, params.f_ref)));
    match stats {
        Ok(s) => {
            let locked = spec.control.is_pll().then(|| {
                let target = if (f_v - f_m).abs() <= (f_v - 2.0 * f_m).abs() { f_v } else { 0.5 * f_v };
                (s.mean_frequency * params.f_ref - target).abs() / target < LOCK_TOLERANCE
            });
            SweepRow { fnorm, stats: Some(s), locked, error: None }
        }
        Err(e) => {
            log::warn!("sweep point {fnorm:.5} failed: {e}");
            SweepRow {
                fnorm,
                stats: None,
                locked: spec.control.is_pll().then_some(false),
                error: Some(e.to_string()),
            }
        }
    }
}

/// Every grid point starts from the same settled operating point with the
/// tone switched on at `t = 0`. Points run in parallel; failures are
/// recorded per row.
pub fn run_frequency_sweep(
    spec: &SweepSpec,
    params: &MirrorParams,
    op: &OperatingPoint,
    integ: &IntegratorConfig,
) -> Result<SweepResult> {
    spec.validate()?;
    if !(op.amplitude > 0.0) {
        return Err(Error::Protocol("operating point is not on the oscillating branch".into()));
    }
    let rows: Vec<SweepRow> = spec.grid.par_iter().map(|&f| run_point(params, op, spec, f, integ)).collect();
    let mirror_fnorm = 0.5 * op.actuation_frequency() / params.f_ref;
    let features = locate_features(&rows, mirror_fnorm);
    Ok(SweepResult {
        spec: spec.clone(),
        mirror_fnorm,
        rows,
        features,
    })
}

/// Peaks on either side of each harmonic, notches between them and, for
/// PLL sweeps, the edges of the locked run around each harmonic. Only
/// features with grid points on both sides are reported.
pub fn locate_features(rows: &[SweepRow], mirror_fnorm: f64) -> Vec<Feature> {
    let mut out = Vec::new();
    for harmonic in [1u8, 2] {
        let centre = harmonic as f64 * mirror_fnorm;
        let idx: Vec<usize> = (0..rows.len())
            .filter(|&i| (rows[i].fnorm - centre).abs() <= FEATURE_BAND)
            .collect();
        if idx.len() < 3 {
            continue;
        }
        let bracket = |k: usize| (rows[idx[k - 1]].fnorm, rows[idx[k + 1]].fnorm);
        for metric in [Metric::StdAmplitude, Metric::StdFrequency] {
            let val = |k: usize| rows[idx[k]].stats.as_ref().map(|s| metric.of(s));
            let mut peaks: Vec<usize> = Vec::new();
            for below in [true, false] {
                let best = (1..idx.len() - 1)
                    .filter(|&k| (rows[idx[k]].fnorm < centre) == below)
                    .filter_map(|k| val(k).map(|v| (k, v)))
                    .fold(None, |b: Option<(usize, f64)>, x| match b {
                        Some(b) if b.1 >= x.1 => Some(b),
                        _ => Some(x),
                    });
                if let Some((k, v)) = best {
                    let interior = val(k - 1).is_some_and(|a| a <= v) && val(k + 1).is_some_and(|b| b <= v);
                    if interior && v > 0.0 {
                        peaks.push(k);
                        out.push(Feature {
                            kind: FeatureKind::Peak,
                            metric,
                            harmonic,
                            fnorm: rows[idx[k]].fnorm,
                            value: v,
                            bracket: bracket(k),
                        });
                    }
                }
            }
            if let [a, b] = peaks[..] {
                let floor = NOTCH_FRACTION * val(a).unwrap().min(val(b).unwrap());
                for k in a + 1..b {
                    let (Some(l), Some(v), Some(r)) = (val(k - 1), val(k), val(k + 1)) else {
                        continue;
                    };
                    if v < l && v <= r && v < floor {
                        out.push(Feature {
                            kind: FeatureKind::Notch,
                            metric,
                            harmonic,
                            fnorm: rows[idx[k]].fnorm,
                            value: v,
                            bracket: bracket(k),
                        });
                    }
                }
            }
        }
        // Locked run containing the grid point nearest the harmonic.
        let locked = |k: usize| rows[idx[k]].locked == Some(true);
        let Some(c) = (0..idx.len()).min_by(|&a, &b| {
            (rows[idx[a]].fnorm - centre).abs().total_cmp(&(rows[idx[b]].fnorm - centre).abs())
        }) else {
            continue;
        };
        if !locked(c) {
            continue;
        }
        let mut lo = c;
        while lo > 0 && locked(lo - 1) {
            lo -= 1;
        }
        let mut hi = c;
        while hi + 1 < idx.len() && locked(hi + 1) {
            hi += 1;
        }
        if lo > 0 {
            out.push(Feature {
                kind: FeatureKind::LockEdgeLow,
                metric: Metric::StdFrequency,
                harmonic,
                fnorm: rows[idx[lo]].fnorm,
                value: rows[idx[lo]].stats.map_or(f64::NAN, |s| s.std_frequency_pct),
                bracket: (rows[idx[lo - 1]].fnorm, rows[idx[lo]].fnorm),
            });
        }
        if hi + 1 < idx.len() {
            out.push(Feature {
                kind: FeatureKind::LockEdgeHigh,
                metric: Metric::StdFrequency,
                harmonic,
                fnorm: rows[idx[hi]].fnorm,
                value: rows[idx[hi]].stats.map_or(f64::NAN, |s| s.std_frequency_pct),
                bracket: (rows[idx[hi]].fnorm, rows[idx[hi + 1]].fnorm),
            });
        }
    }
    out
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut w: W) -> Result<()> {
    writeln!(w, "# memsvib sweep v1")?;
    writeln!(
        w,
        "# axis {}, {} g_rms, control {}, fnorm = tone frequency / f_ref; amplitudes / theta_ref, frequencies / f_ref, std in percent",
        result.spec.axis,
        result.spec.g_rms,
        if result.spec.control.is_pll() { "pll" } else { "open" }
    )?;
    writeln!(w, "fnorm,status,locked,{STATS_HEADER}")?;
    for r in &result.rows {
        let locked = match r.locked {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        match (&r.stats, &r.error) {
            (Some(s), _) => writeln!(w, "{:.6},ok,{locked},{}", r.fnorm, s.csv_row())?,
            (None, e) => {
                let msg = e.as_deref().unwrap_or("failed").replace([',', '\n'], ";");
                writeln!(w, "{:.6},error: {msg},{locked}{}", r.fnorm, ",".repeat(STATS_HEADER.split(',').count()))?
            }
        }
    }
    Ok(())
}

/// JSON summary: spec, located features and failed rows.
pub fn sweep_summary_json(result: &SweepResult) -> serde_json::Value {
    serde_json::json!({
        "format": "memsvib sweep-summary v1",
        "axis": result.spec.axis.to_string(),
        "control": result.spec.control,
        "g_rms": result.spec.g_rms,
        "misalignment_rad": result.spec.misalignment,
        "points": result.rows.len(),
        "failed": result.failed_rows(),
        "mirror_fnorm": result.mirror_fnorm,
        "features": result.features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentReport {
    pub misaligned: SweepResult,
    /// Pure Ty sweep around the mirror frequency at the same acceleration.
    pub reference: SweepResult,
    pub secondary_peak: f64,
    pub reference_peak: f64,
    /// secondary / reference.
    pub ratio: f64,
    /// sin(misalignment).
    pub expected_ratio: f64,
}

impl MisalignmentReport {
    pub fn relative_deviation(&self) -> f64 {
        (self.ratio / self.expected_ratio - 1.0).abs()
    }
}

/// Sweeps a misaligned Tz tone and compares its response near the mirror
/// frequency with a pure Ty tone of the same level on the same grid.
pub fn run_misalignment_check(
    spec: &SweepSpec,
    params: &MirrorParams,
    op: &OperatingPoint,
    integ: &IntegratorConfig,
) -> Result<MisalignmentReport> {
    if spec.axis != Axis::Tz {
        return Err(Error::InvalidParameter("misalignment check needs a Tz sweep".into()));
    }
    if spec.misalignment == 0.0 {
        return Err(Error::InvalidParameter("misalignment check needs a nonzero angle".into()));
    }
    let centre = 0.5 * op.actuation_frequency() / params.f_ref;
    let misaligned = run_frequency_sweep(spec, params, op, integ)?;
    let near: Vec<f64> = spec.grid.iter().copied().filter(|f| (f - centre).abs() <= FEATURE_BAND).collect();
    if near.is_empty() {
        return Err(Error::InvalidParameter("grid has no points near the mirror frequency".into()));
    }
    let ref_spec = SweepSpec {
        axis: Axis::Ty,
        grid: near,
        misalignment: 0.0,
        ..spec.clone()
    };
    let reference = run_frequency_sweep(&ref_spec, params, op, integ)?;
    let (lo, hi) = (centre - FEATURE_BAND, centre + FEATURE_BAND);
    let secondary_peak = misaligned.max_in(lo, hi, Metric::StdAmplitude).map_or(0.0, |x| x.1);
    let reference_peak = reference
        .max_in(lo, hi, Metric::StdAmplitude)
        .ok_or_else(|| Error::Protocol("reference sweep produced no statistics".into()))?
        .1;
    let ratio = secondary_peak / reference_peak;
    Ok(MisalignmentReport {
        misaligned,
        reference,
        secondary_peak,
        reference_peak,
        ratio,
        expected_ratio: spec.misalignment.sin().abs(),
    })
}
