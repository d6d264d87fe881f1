//! Up and down actuation sweeps of the quiet mirror, with the jumps and the
//! backbone.
//!
//!     cargo run --release --example response_curve

use memsvib::control::DriveConfig;
use memsvib::experiments::{backbone, run_response_curve, ResponseSpec, SweepDirection};
use memsvib::params::SyntheticMirror;
use memsvib::sim::IntegratorConfig;

fn main() -> memsvib::Result<()> {
    let p = SyntheticMirror::default().build()?;
    let integ = IntegratorConfig::for_mirror(&p);
    let drive = DriveConfig::default();
    let spec = ResponseSpec { start: 0.97, end: 1.12, step: 0.01, ..Default::default() };

    for dir in [SweepDirection::Up, SweepDirection::Down] {
        let curve = run_response_curve(&p, drive, dir, &spec, &integ)?;
        println!("{dir:?}");
        for pt in &curve.points {
            println!("  {:.3}  {:8.4}  {:?}", pt.fnorm, pt.amplitude / p.theta_ref, pt.branch);
        }
        for j in &curve.jumps {
            let kind = if j.is_upward() { "up" } else { "down" };
            println!("  jump {kind} between {:.3} and {:.3}", j.from.fnorm, j.to.fnorm);
        }
    }

    // mean V^2 of the rectangular drive is duty * V^2
    let v2 = drive.duty * drive.hv_voltage * drive.hv_voltage;
    let amps: Vec<f64> = (1..=6).map(|i| 0.25 * i as f64 * p.theta_ref).collect();
    println!("backbone");
    for (a, f) in backbone(&p, v2, &amps)? {
        println!("  {:.2} theta_ref  ->  {:.5} f_ref", a / p.theta_ref, f / p.f_ref);
    }
    Ok(())
}
