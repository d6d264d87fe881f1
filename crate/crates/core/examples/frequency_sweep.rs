//! Coarse open-loop vibration sweep over both mirror harmonics, written as CSV
//! to stdout.
//!
//!     cargo run --release --example frequency_sweep -- tz > tz.csv

use memsvib::control::{Control, DriveConfig};
use memsvib::experiments::{operating_point, run_frequency_sweep, write_sweep_csv, FrequencyGrid, Metric, SweepSpec};
use memsvib::params::SyntheticMirror;
use memsvib::sim::IntegratorConfig;
use memsvib::vibration::Axis;

fn main() -> memsvib::Result<()> {
    let axis: Axis = std::env::args().nth(1).map_or(Ok(Axis::Ty), |s| s.parse())?;
    let p = SyntheticMirror::default().build()?;
    let integ = IntegratorConfig::for_mirror(&p);
    let op = operating_point(&p, DriveConfig::default(), &integ)?;

    let grid = FrequencyGrid::uniform(0.5, 2.1, 0.02).build()?;
    let res = run_frequency_sweep(&SweepSpec::new(axis, Control::OpenLoop, grid), &p, &op, &integ)?;
    write_sweep_csv(&res, std::io::stdout().lock())?;

    if let Some((f, v)) = res.max_in(0.5, 2.1, Metric::StdAmplitude) {
        eprintln!("largest amplitude STD {v:.4} % at {f:.3}");
    }
    Ok(())
}
