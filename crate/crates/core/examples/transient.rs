//! Switch a Ty tone on at the settled operating point and watch the beat.
//!
//!     cargo run --release --example transient -- 1.02

use memsvib::control::DriveConfig;
use memsvib::experiments::{operating_point, run_transient, TransientSpec};
use memsvib::params::SyntheticMirror;
use memsvib::sim::IntegratorConfig;
use memsvib::vibration::Axis;

fn main() -> memsvib::Result<()> {
    let fnorm: f64 = std::env::args().nth(1).map_or(1.02, |s| s.parse().expect("tone frequency / f_ref"));
    let p = SyntheticMirror::default().build()?;
    let integ = IntegratorConfig::for_mirror(&p);
    let op = operating_point(&p, DriveConfig::default(), &integ)?;
    println!("settled at {:.5} theta_ref after {} periods", op.amplitude / p.theta_ref, op.cycles_used);

    let r = run_transient(&p, &op, &TransientSpec::new(Axis::Ty, fnorm), &integ)?;
    println!("tone on at {:.4} s", r.t_on);
    println!("expected beat   {:.5} f_ref", r.expected_beat);
    println!("amplitude beat  {:.5} f_ref (bin {:.5})", r.amplitude_beat.frequency, r.amplitude_beat.bin_width);
    println!("frequency beat  {:.5} f_ref", r.frequency_beat.frequency);
    println!("STD amplitude   {:.4} %", r.after.std_amplitude_pct);
    println!("STD frequency   {:.5} %", r.after.std_frequency_pct);
    println!("peak-to-peak    {:.3} % / {:.4} %", r.pp_amplitude_pct, r.pp_frequency_pct);
    Ok(())
}
