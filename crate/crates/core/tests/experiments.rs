use std::sync::OnceLock;

use memsvib::control::{Control, DriveConfig};
use memsvib::experiments::{
    operating_point, run_frequency_sweep, run_transient, write_sweep_csv, Metric, SweepResult, SweepSpec,
    TransientSpec,
};
use memsvib::params::{MirrorParams, SyntheticMirror};
use memsvib::sim::{IntegratorConfig, OperatingPoint};
use memsvib::vibration::Axis;

fn bench() -> &'static (MirrorParams, IntegratorConfig, OperatingPoint) {
    static B: OnceLock<(MirrorParams, IntegratorConfig, OperatingPoint)> = OnceLock::new();
    B.get_or_init(|| {
        let p = SyntheticMirror::default().build().unwrap();
        let integ = IntegratorConfig::for_mirror(&p);
        let op = operating_point(&p, DriveConfig::default(), &integ).unwrap();
        (p, integ, op)
    })
}

fn sweep(axis: Axis, grid: Vec<f64>, eps_deg: f64) -> SweepResult {
    let (p, integ, op) = bench();
    let mut spec = SweepSpec::new(axis, Control::OpenLoop, grid);
    spec.misalignment = eps_deg.to_radians();
    run_frequency_sweep(&spec, p, op, integ).unwrap()
}

#[test]
fn sweep_csv_is_reproducible() {
    let grid = vec![0.97, 1.02, 1.5];
    let csv = || {
        let mut buf = Vec::new();
        write_sweep_csv(&sweep(Axis::Ty, grid.clone(), 0.0), &mut buf).unwrap();
        buf
    };
    let a = csv();
    assert_eq!(a, csv());
    let text = String::from_utf8(a).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("fnorm")).count();
    assert_eq!(rows, grid.len());
}

#[test]
fn coupling_is_band_limited() {
    let away: Vec<f64> = [0.5, 0.6, 0.7, 0.8, 0.9, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8].to_vec();
    for (axis, peak_at) in [(Axis::Ty, 1.035), (Axis::Tz, 2.035)] {
        let mut grid = away.clone();
        grid.push(peak_at);
        grid.sort_by(f64::total_cmp);
        let r = sweep(axis, grid, 0.0);
        let peak = r.value_at(peak_at, Metric::StdAmplitude).unwrap();
        for &f in &away {
            let v = r.value_at(f, Metric::StdAmplitude).unwrap();
            assert!(v < 0.1 * peak, "{axis} at {f}: {v} vs peak {peak}");
        }
    }
}

#[test]
fn envelopes_are_symmetric_about_the_mean() {
    let r = sweep(Axis::Ty, vec![0.965, 0.98, 1.02, 1.035, 1.05], 0.0);
    for row in &r.rows {
        let s = row.stats.unwrap();
        let up = s.max_amplitude - s.mean_amplitude;
        let down = s.mean_amplitude - s.min_amplitude;
        assert!((up - down).abs() <= 0.1 * up.max(down), "{}: {up} {down}", row.fnorm);
    }
}

#[test]
fn hardening_favours_positive_detuning() {
    let r = sweep(Axis::Ty, vec![0.965, 1.035], 0.0);
    let neg = r.value_at(0.965, Metric::StdAmplitude).unwrap();
    let pos = r.value_at(1.035, Metric::StdAmplitude).unwrap();
    assert!(pos > neg, "{pos} {neg}");
}

#[test]
fn misaligned_tz_reaches_the_ty_band() {
    let grid = vec![1.03, 1.035];
    let aligned = sweep(Axis::Tz, grid.clone(), 0.0);
    let plus = sweep(Axis::Tz, grid.clone(), 2.0);
    let minus = sweep(Axis::Tz, grid.clone(), -2.0);
    let ty = sweep(Axis::Ty, grid.clone(), 0.0);
    for &f in &grid {
        let y = ty.value_at(f, Metric::StdAmplitude).unwrap();
        let z0 = aligned.value_at(f, Metric::StdAmplitude).unwrap();
        let zp = plus.value_at(f, Metric::StdAmplitude).unwrap();
        let zm = minus.value_at(f, Metric::StdAmplitude).unwrap();
        assert!(z0 < 0.01 * y, "aligned {z0} vs {y}");
        assert!((zp - zm).abs() < 0.02 * zp, "{zp} {zm}");
        assert!((zp / y / 2f64.to_radians().sin() - 1.0).abs() < 0.2);
    }
}

#[test]
fn transient_reports_the_beat() {
    let (p, integ, op) = bench();
    let r = run_transient(p, op, &TransientSpec::new(Axis::Ty, 1.02), integ).unwrap();
    assert!((r.expected_beat - 0.02).abs() < 1e-4);
    assert!((r.amplitude_beat.frequency - r.expected_beat).abs() <= r.amplitude_beat.bin_width);
    assert!((r.before.0 - 1.0).abs() < 1e-3);
    assert!(r.after.std_amplitude_pct > 0.1);
}
