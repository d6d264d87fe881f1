use std::f64::consts::PI;

use memsvib::analysis::energy::CumulativeSimpson;
use memsvib::control::DriveConfig;
use memsvib::curve::{NonlinearCurve, Parity};
use memsvib::model::{mechanical_energy, powers, SimState};
use memsvib::params::{MirrorParams, SyntheticMirror};
use memsvib::sim::{
    integrate, measure_cycles, simulate, ConstantDrive, Crossing, CycleRecorder, Direction, IntegratorConfig,
    Observer, Step, Trace, TraceRecorder,
};
use memsvib::vibration::{peak_from_g_rms, Axis, VibrationProfile};
use memsvib::Result;
use proptest::prelude::*;

fn mirror() -> MirrorParams {
    SyntheticMirror::default().build().unwrap()
}

/// Constant stiffness k0, constant damping `c`, no comb.
fn linear(c: f64) -> MirrorParams {
    let mut p = mirror();
    let dom = p.domain();
    let k0 = p.stiffness.eval(0.0).unwrap();
    p.stiffness = NonlinearCurve::polynomial(vec![k0], Parity::Even, dom).unwrap();
    p.damping_base = NonlinearCurve::constant(c, dom).unwrap();
    p.cap_deriv = NonlinearCurve::constant(0.0, dom).unwrap();
    p
}

fn silent() -> VibrationProfile {
    VibrationProfile::none()
}

#[test]
fn undamped_linear_period() {
    let p = linear(0.0);
    let want = 2.0 * PI * (p.inertia / p.stiffness.eval(0.0).unwrap()).sqrt();
    let integ = IntegratorConfig::for_mirror(&p);
    let tr = integrate(&p, SimState::new(0.0, 0.2, 0.0), &mut ConstantDrive(0.0), &silent(), 40.0 * want, &integ).unwrap();
    let c = &tr.crossings;
    let rising: Vec<f64> = c.iter().filter(|x| x.direction == Direction::Rising).map(|x| x.time).collect();
    let period = (rising[rising.len() - 1] - rising[0]) / (rising.len() - 1) as f64;
    assert!((period - want).abs() / want < 1e-6, "{period} vs {want}");
}

#[test]
fn damped_linear_decrement() {
    let c = 2e-11;
    let p = linear(c);
    let integ = IntegratorConfig::for_mirror(&p);
    let f0 = p.linear_frequency();
    let tr = integrate(&p, SimState::new(0.0, 0.2, 0.0), &mut ConstantDrive(0.0), &silent(), 30.0 / f0, &integ).unwrap();
    let pos: Vec<(f64, f64)> = tr.extrema.iter().filter(|e| e.theta > 0.0).map(|e| (e.time, e.theta)).collect();
    let (a, b) = (pos[2], pos[pos.len() - 2]);
    // ln(theta_a / theta_b) / (t_b - t_a) = c / (2 I)
    let rate = (a.1 / b.1).ln() / (b.0 - a.0);
    let want = c / (2.0 * p.inertia);
    assert!((rate - want).abs() / want < 1e-4, "{rate} vs {want}");
}

#[test]
fn rk4_converges_at_fourth_order_against_fine_reference() {
    let p = mirror();
    let prof = VibrationProfile::tone(Axis::Ty, peak_from_g_rms(2.0), 2030.0);
    let run = |dt: f64| -> SimState {
        let integ = IntegratorConfig::rk4(&p, dt);
        let s = SimState::new(0.0, 0.5 * p.theta_ref, 0.0);
        simulate(&p, s, &mut ConstantDrive(60.0), &prof, 8.0 / p.f_ref, &integ, &mut ()).unwrap()
    };
    let h = 1.0 / (80.0 * p.f_ref);
    let reference = run(h / 64.0);
    let e1 = (run(h).theta - reference.theta).abs();
    let e2 = (run(h / 2.0).theta - reference.theta).abs();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
}

/// Checks the engine's own interpolant at every reported crossing.
#[derive(Default)]
struct CrossingAudit {
    pending: Vec<Crossing>,
    worst: f64,
    count: usize,
}

impl Observer for CrossingAudit {
    fn on_crossing(&mut self, c: &Crossing) {
        self.pending.push(*c);
    }

    fn on_step(&mut self, step: &Step<'_>) -> Result<()> {
        for c in self.pending.drain(..) {
            assert!(c.time >= step.t0 && c.time <= step.t1);
            let s = step.state(c.time);
            self.worst = self.worst.max(s.theta.abs());
            let rising = s.omega > 0.0;
            assert_eq!(rising, c.direction == Direction::Rising);
            self.count += 1;
        }
        Ok(())
    }
}

#[test]
fn crossings_lie_on_the_trajectory() {
    let p = mirror();
    let integ = IntegratorConfig::for_mirror(&p);
    let drive = DriveConfig::default();
    let op = memsvib::experiments::operating_point(&p, drive, &integ).unwrap();
    let prof = VibrationProfile::tone(Axis::Ty, peak_from_g_rms(2.0), 2070.0);
    let mut src = op.open_loop_drive().unwrap();
    let mut audit = CrossingAudit::default();
    simulate(&p, op.state, &mut src, &prof, 0.05, &integ, &mut audit).unwrap();
    assert!(audit.count > 150);
    assert!(audit.worst < 1e-9 * p.theta_ref, "{}", audit.worst);
}

#[test]
fn repeat_runs_are_bit_identical() {
    let p = mirror();
    let integ = IntegratorConfig::for_mirror(&p);
    let prof = VibrationProfile::tone(Axis::Tz, peak_from_g_rms(2.0), 4040.0).with_misalignment(0.03);
    let run = || {
        let mut d = memsvib::control::DriveSource::open_loop(DriveConfig::default(), 0.0, 1.0 / (2.0 * p.f_ref)).unwrap();
        integrate(&p, SimState::new(0.0, 0.2, 0.0), &mut d, &prof, 0.02, &integ).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
}

#[test]
fn energy_audit() {
    let p = mirror();
    let integ = IntegratorConfig::for_mirror(&p).with_output_rate(2048.0 * p.f_ref);
    let prof = VibrationProfile::tone(Axis::Ty, peak_from_g_rms(2.0), 2050.0).with_misalignment(0.05);
    let v = 80.0;
    let s0 = SimState::new(0.0, 0.8 * p.theta_ref, 0.0);
    let t_end = 20.0 / p.f_ref;
    let mut rec = TraceRecorder::new(integ.output_rate);
    let end = simulate(&p, s0, &mut ConstantDrive(v), &prof, t_end, &integ, &mut rec).unwrap();
    let tr = rec.trace;
    let (t0, t1) = tr.span();
    let n = tr.len();
    let h = (t1 - t0) / (n - 1) as f64;
    let mut net = Vec::with_capacity(n);
    let mut gross = Vec::with_capacity(n);
    for i in 0..n {
        let s = SimState::new(tr.sample_times[i], tr.theta[i], tr.omega[i]);
        let (comb, vib, damp) = powers(&p, &s, v, &prof).unwrap();
        net.push(comb + vib - damp);
        gross.push(comb.abs() + vib.abs() + damp.abs());
    }
    let work = CumulativeSimpson::new(t0, h, net).unwrap().between(t0, t1);
    let scale = CumulativeSimpson::new(t0, h, gross).unwrap().between(t0, t1);
    let de = mechanical_energy(&p, end.theta, end.omega).unwrap() - mechanical_energy(&p, s0.theta, s0.omega).unwrap();
    let rel_tol = 1e-9;
    assert!((de - work).abs() <= 10.0 * rel_tol * scale, "dE {de:e} work {work:e} scale {scale:e}");
}

#[test]
fn free_decay_never_gains_energy() {
    let p = mirror();
    let integ = IntegratorConfig::for_mirror(&p);
    let tr = integrate(&p, SimState::new(0.0, p.theta_ref, 0.0), &mut ConstantDrive(0.0), &silent(), 0.01, &integ).unwrap();
    let e: Vec<f64> = (0..tr.len()).map(|i| mechanical_energy(&p, tr.theta[i], tr.omega[i]).unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(e[e.len() - 1] < 0.9 * e[0]);
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_sine_crossings_match_bisection(
        a1 in 0.1f64..1.0,
        a2 in 0.0f64..1.0,
        f1 in 1.0f64..5.0,
        ratio in 1.5f64..4.0,
        p1 in 0.0f64..6.3,
        p2 in 0.0f64..6.3,
    ) {
        let f2 = f1 * ratio;
        let rate = 40.0 * f2;
        let n = (3.0 * rate) as usize;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
        let th: Vec<f64> = t.iter().map(|&x| a1 * (2.0 * PI * f1 * x + p1).sin() + a2 * (2.0 * PI * f2 * x + p2).sin()).collect();
        let om: Vec<f64> = t.iter().map(|&x| {
            2.0 * PI * (a1 * f1 * (2.0 * PI * f1 * x + p1).cos() + a2 * f2 * (2.0 * PI * f2 * x + p2).cos())
        }).collect();
        let tr = Trace::from_samples(t.clone(), th.clone(), om.clone()).unwrap();
        let mut k = 0;
        for i in 1..n {
            let (y0, y1) = (th[i - 1], th[i]);
            if !((y0 < 0.0 && y1 >= 0.0) || (y0 > 0.0 && y1 <= 0.0)) {
                continue;
            }
            let h = t[i] - t[i - 1];
            let g = |s: f64| hermite(y0, y1, om[i - 1] * h, om[i] * h, s);
            let want = t[i - 1] + bisect(g, 0.0, 1.0) * h;
            prop_assert!(k < tr.crossings.len());
            prop_assert!((tr.crossings[k].time - want).abs() < 1e-9, "crossing {} off by {}", k, tr.crossings[k].time - want);
            k += 1;
        }
        prop_assert_eq!(k, tr.crossings.len());
    }
}

#[test]
fn amplitude_modulated_sine() {
    let (fm, fb) = (2000.0, 20.0);
    let rate = 64.0 * fm;
    let n = (0.5 * rate) as usize;
    let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
    let env = |x: f64| 1.0 + 0.1 * (2.0 * PI * fb * x).sin();
    let denv = |x: f64| 0.1 * 2.0 * PI * fb * (2.0 * PI * fb * x).cos();
    let th = t.iter().map(|&x| env(x) * (2.0 * PI * fm * x).sin()).collect();
    let om = t
        .iter()
        .map(|&x| denv(x) * (2.0 * PI * fm * x).sin() + env(x) * 2.0 * PI * fm * (2.0 * PI * fm * x).cos())
        .collect();
    let c = measure_cycles(&Trace::from_samples(t, th, om).unwrap()).unwrap();
    let max = c.amplitudes.iter().copied().fold(f64::MIN, f64::max);
    let min = c.amplitudes.iter().copied().fold(f64::MAX, f64::min);
    let depth = 0.5 * (max - min) / (0.5 * (max + min));
    assert!((depth - 0.10).abs() < 0.005, "depth {depth}");
    let series: Vec<f64> = c.amplitudes.iter().map(|a| a - 1.0).collect();
    let dt = 0.5 / fm;
    let line = memsvib::analysis::dominant_frequency(&series, dt).unwrap();
    assert!((line.frequency - fb).abs() <= line.bin_width, "{line:?}");
}

#[test]
fn chirp_frequency_is_tracked() {
    // f(t) = f0 + k t
    let (f0, k) = (1800.0, 2000.0);
    let rate = 100.0 * f0;
    let n = (0.2 * rate) as usize;
    let t: Vec<f64> = (0..n).map(|i| i as f64 / rate).collect();
    let phase = |x: f64| 2.0 * PI * (f0 * x + 0.5 * k * x * x);
    let th = t.iter().map(|&x| phase(x).sin()).collect();
    let om = t.iter().map(|&x| 2.0 * PI * (f0 + k * x) * phase(x).cos()).collect();
    let c = measure_cycles(&Trace::from_samples(t, th, om).unwrap()).unwrap();
    for (i, f) in c.frequencies().iter().enumerate() {
        let mid = c.times[i] + 0.5 * c.half_periods[i];
        let want = f0 + k * mid;
        assert!((f - want).abs() / want < 0.01);
    }
}

#[test]
fn cycle_recorder_matches_trace_measurement() {
    let p = mirror();
    let integ = IntegratorConfig::for_mirror(&p);
    let s = SimState::new(0.0, 0.3, 0.0);
    let mut both = (TraceRecorder::new(integ.output_rate), CycleRecorder::new());
    simulate(&p, s, &mut ConstantDrive(50.0), &silent(), 0.01, &integ, &mut both).unwrap();
    let from_trace = measure_cycles(&both.0.trace).unwrap();
    let live = both.1.cycles;
    assert_eq!(from_trace.len(), live.len());
    for i in 0..live.len() {
        assert!((from_trace.half_periods[i] - live.half_periods[i]).abs() < 1e-10);
        assert!((from_trace.amplitudes[i] - live.amplitudes[i]).abs() < 1e-8 * p.theta_ref);
    }
}
