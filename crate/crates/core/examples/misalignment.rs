//! A Tz tone tilted by a few degrees leaks into the Ty band around f_ref.
//!
//!     cargo run --release --example misalignment -- 2

use memsvib::control::{Control, DriveConfig};
use memsvib::experiments::{operating_point, run_misalignment_check, SweepSpec};
use memsvib::params::SyntheticMirror;
use memsvib::sim::IntegratorConfig;
use memsvib::vibration::Axis;

fn main() -> memsvib::Result<()> {
    let deg: f64 = std::env::args().nth(1).map_or(2.0, |s| s.parse().expect("misalignment in degrees"));
    let p = SyntheticMirror::default().build()?;
    let integ = IntegratorConfig::for_mirror(&p);
    let op = operating_point(&p, DriveConfig::default(), &integ)?;

    let grid: Vec<f64> = (0..=8).map(|i| 1.01 + 0.005 * i as f64).collect();
    let mut spec = SweepSpec::new(Axis::Tz, Control::OpenLoop, grid);
    spec.misalignment = deg.to_radians();
    let r = run_misalignment_check(&spec, &p, &op, &integ)?;
    println!("secondary peak {:.4} %, Ty peak {:.4} %", r.secondary_peak, r.reference_peak);
    println!("ratio {:.4}, sin(eps) {:.4}, deviation {:.1} %", r.ratio, r.expected_ratio, 100.0 * r.relative_deviation());
    Ok(())
}
