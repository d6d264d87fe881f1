//! PLL pull-in from a 1 % period error, then an in-band tone.
//!
//!     cargo run --release --example pll_lock

use memsvib::control::{run_pll_loop, DriveConfig, PllOptions};
use memsvib::experiments::operating_point;
use memsvib::params::SyntheticMirror;
use memsvib::sim::IntegratorConfig;
use memsvib::vibration::{peak_from_g_rms, Axis, VibrationProfile};

fn main() -> memsvib::Result<()> {
    let p = SyntheticMirror::default().build()?;
    let integ = IntegratorConfig::for_mirror(&p);
    let op = operating_point(&p, DriveConfig::default(), &integ)?;
    let f_m = 0.5 * op.actuation_frequency();

    let options = PllOptions { initial_period_scale: 1.01, ..Default::default() };
    let run = run_pll_loop(&p, &op, &VibrationProfile::none(), options, 400.0 / f_m, &integ)?;
    println!("pull-in, t_beta_ref {:.3} us", op.t_beta() * 1e6);
    for r in run.history.iter().step_by(40) {
        println!("  {:4}  T_pll {:.4} us  error {:+.4} us", r.index, r.t_pll * 1e6, r.error * 1e6);
    }

    let tone = VibrationProfile::tone(Axis::Ty, peak_from_g_rms(2.0), 1.0005 * p.f_ref);
    let run = run_pll_loop(&p, &op, &tone, PllOptions::default(), 3000.0 / f_m, &integ)?;
    let tail = &run.history[run.history.len() - 200..];
    let t_m = tail.iter().map(|r| r.t_m).sum::<f64>() / tail.len() as f64;
    println!("with a tone at 1.0005 f_ref the mirror runs at {:.6} f_ref", 0.5 / t_m / p.f_ref);
    println!("resyncs: {}", run.resyncs);
    Ok(())
}
