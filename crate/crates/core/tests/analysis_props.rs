use std::f64::consts::PI;

use memsvib::analysis::{
    analytic_energy_series, coupling_coeffs, dominant_frequency, error_stats, fit_sinusoid, imposed_trajectory,
    numeric_energy_series,
};
use memsvib::params::{MirrorParams, SyntheticMirror};
use memsvib::sim::CyclePeriods;
use memsvib::vibration::{peak_from_g_rms, Axis, VibrationProfile};
use proptest::prelude::*;

fn mirror() -> MirrorParams {
    SyntheticMirror::default().build().unwrap()
}

fn cycles(amps: &[f64], halves: &[f64]) -> CyclePeriods {
    let mut t = 0.0;
    let mut times = Vec::new();
    for h in halves {
        times.push(t);
        t += h;
    }
    CyclePeriods { times, half_periods: halves.to_vec(), amplitudes: amps.to_vec() }
}

proptest! {
    #[test]
    fn stats_ignore_uniform_rescaling(
        data in prop::collection::vec((0.5f64..1.5, 0.9f64..1.1), 60..200),
        scale in 1e-3f64..1e3,
        norm in 1e-3f64..1e3,
    ) {
        let amps: Vec<f64> = data.iter().map(|x| x.0).collect();
        let halves: Vec<f64> = data.iter().map(|x| 2.5e-4 * x.1).collect();
        let a = error_stats(&cycles(&amps, &halves), (0.0, 1.0), (1.0, 1.0)).unwrap();
        let scaled: Vec<f64> = amps.iter().map(|x| x * scale).collect();
        let b = error_stats(&cycles(&scaled, &halves), (0.0, 1.0), (norm, 1.0)).unwrap();
        prop_assert!((a.std_amplitude_pct - b.std_amplitude_pct).abs() <= 1e-9 * a.std_amplitude_pct.max(1e-12));
        prop_assert!((a.mean_amplitude * scale / norm - b.mean_amplitude).abs() <= 1e-12 * b.mean_amplitude);
        prop_assert_eq!(a.std_frequency_pct, b.std_frequency_pct);
    }

    #[test]
    fn stats_are_ordered(data in prop::collection::vec((0.1f64..2.0, 0.5f64..2.0), 50..120)) {
        let amps: Vec<f64> = data.iter().map(|x| x.0).collect();
        let halves: Vec<f64> = data.iter().map(|x| 1e-4 * x.1).collect();
        let s = error_stats(&cycles(&amps, &halves), (0.0, 1.0), (0.26, 2000.0)).unwrap();
        prop_assert!(s.min_amplitude <= s.mean_amplitude && s.mean_amplitude <= s.max_amplitude);
        prop_assert!(s.min_frequency <= s.mean_frequency && s.mean_frequency <= s.max_frequency);
        prop_assert!(s.std_amplitude_pct >= 0.0 && s.std_frequency_pct >= 0.0);
    }

    #[test]
    fn sinusoid_fit_recovers_parameters(
        amp in 0.1f64..10.0,
        psi in -3.1f64..3.1,
        c in -5.0f64..5.0,
        f in 0.5f64..20.0,
    ) {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&x| c + amp * (2.0 * PI * f * x - psi).cos()).collect();
        let (a, p, c2) = fit_sinusoid(&t, &y, f).unwrap();
        prop_assert!((a - amp).abs() < 1e-9 * amp);
        prop_assert!((p - psi).abs() < 1e-9);
        prop_assert!((c2 - c).abs() < 1e-9 * amp.max(1.0));
    }

    #[test]
    fn dominant_line_within_a_bin(f in 2.0f64..40.0, phase in 0.0f64..6.3, n in 200usize..2000) {
        let dt = 0.005;
        let x: Vec<f64> = (0..n).map(|i| 3.0 + (2.0 * PI * f * i as f64 * dt + phase).sin()).collect();
        let line = dominant_frequency(&x, dt).unwrap();
        prop_assert!((line.frequency - f).abs() <= line.bin_width, "{:?} vs {}", line, f);
    }
}

#[test]
fn hand_computed_coefficients() {
    let c = coupling_coeffs(1.0, 1.0, 0.35).unwrap();
    assert!((c.v0 - 2.0 * PI * 0.35).abs() < 1e-12);
    assert!((c.v0 - 2.1991).abs() < 1e-4);
    assert!((c.vy1 - 1.0828).abs() < 1e-4);
    assert!((c.vy1 / c.vy3 - 64.306).abs() < 1e-2);
    let tiny = coupling_coeffs(1.0, 1.0, 1e-9).unwrap();
    for v in [tiny.v0, tiny.vy1, tiny.vy3, tiny.vz2, tiny.vz4] {
        assert!(v.abs() < 1e-8);
    }
}

#[test]
fn analytic_series_at_origin() {
    let c = coupling_coeffs(2.3e-6, 1e-4, 0.26).unwrap();
    let a = peak_from_g_rms(2.0);
    let prof = VibrationProfile::tone(Axis::Ty, a, 2050.0);
    let e = analytic_energy_series(&c, 2000.0, &prof, &[0.0]).unwrap();
    assert!((e[0] - a * c.vy1).abs() < 1e-15 * a * c.vy1);
    let quiet = VibrationProfile::tone(Axis::Ty, 0.0, 2050.0);
    let z = analytic_energy_series(&c, 2000.0, &quiet, &[0.0, 0.01, 0.02]).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
}

fn peak_energy(p: &MirrorParams, axis: Axis, fv: f64, theta: f64) -> f64 {
    let f_m = p.f_ref;
    let tr = imposed_trajectory(theta, f_m, 300, 64).unwrap();
    let prof = VibrationProfile::tone(axis, peak_from_g_rms(2.0), fv);
    numeric_energy_series(&tr, p, &prof).unwrap().iter().fold(0.0f64, |m, x| m.max(x.1.abs()))
}

#[test]
fn imposed_trajectory_matches_closed_form() {
    let p = mirror();
    let theta = 0.2;
    let c = coupling_coeffs(p.mass, p.com_offset, theta).unwrap();
    let a = peak_from_g_rms(2.0);
    let num = peak_energy(&p, Axis::Ty, 1.03 * p.f_ref, theta);
    assert!((num - a * c.vy1).abs() / (a * c.vy1) < 0.02);
}

// largest 10-period running mean of the per-period energy
fn smoothed_peak(p: &MirrorParams, fv: f64) -> f64 {
    let tr = imposed_trajectory(0.2, p.f_ref, 300, 64).unwrap();
    let prof = VibrationProfile::tone(Axis::Ty, peak_from_g_rms(2.0), fv);
    let e: Vec<f64> = numeric_energy_series(&tr, p, &prof).unwrap().iter().map(|x| x.1).collect();
    e.windows(640).step_by(16).map(|w| (w.iter().sum::<f64>() / 640.0).abs()).fold(0.0, f64::max)
}

#[test]
fn off_resonant_terms_average_out() {
    let p = mirror();
    let near = smoothed_peak(&p, 1.03 * p.f_ref);
    let far = smoothed_peak(&p, 1.5 * p.f_ref);
    assert!(far < 0.1 * near, "{far:e} vs {near:e}");
}

#[test]
fn axes_couple_to_their_own_harmonic() {
    let p = mirror();
    let ty_own = peak_energy(&p, Axis::Ty, 1.02 * p.f_ref, 0.26);
    let ty_other = peak_energy(&p, Axis::Ty, 2.02 * p.f_ref, 0.26);
    let tz_own = peak_energy(&p, Axis::Tz, 2.02 * p.f_ref, 0.26);
    let tz_other = peak_energy(&p, Axis::Tz, 1.02 * p.f_ref, 0.26);
    assert!(ty_other < 0.05 * ty_own, "{ty_other:e} {ty_own:e}");
    assert!(tz_other < 0.05 * tz_own, "{tz_other:e} {tz_own:e}");
}

#[test]
fn misalignment_sign_does_not_change_the_energy_envelope() {
    let p = mirror();
    let tr = imposed_trajectory(0.26, p.f_ref, 300, 64).unwrap();
    let env = |eps: f64| {
        let prof = VibrationProfile::tone(Axis::Tz, peak_from_g_rms(2.0), 1.02 * p.f_ref).with_misalignment(eps);
        numeric_energy_series(&tr, &p, &prof).unwrap().iter().fold(0.0f64, |m, x| m.max(x.1.abs()))
    };
    let (a, b) = (env(2f64.to_radians()), env(-2f64.to_radians()));
    assert!((a - b).abs() < 0.02 * a, "{a:e} {b:e}");
}
