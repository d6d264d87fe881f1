//! Load a mirror description with tabulated curves, then compare its free
//! decay with the built-in mirror.
//!
//!     cargo run --release --example custom_curves

use memsvib::config::MirrorFile;
use memsvib::model::SimState;
use memsvib::params::MirrorParams;
use memsvib::sim::{integrate, measure_cycles, ConstantDrive, IntegratorConfig};
use memsvib::vibration::VibrationProfile;

fn decay(p: &MirrorParams) -> memsvib::Result<()> {
    let integ = IntegratorConfig::for_mirror(p);
    let tr = integrate(p, SimState::new(0.0, p.theta_ref, 0.0), &mut ConstantDrive(0.0), &VibrationProfile::none(), 0.05, &integ)?;
    let c = measure_cycles(&tr)?;
    for i in (0..c.len()).step_by(40) {
        let f = 0.5 / c.half_periods[i];
        println!("  {:.4} s  {:.4} theta_ref  {:.2} Hz", c.times[i], c.amplitudes[i] / p.theta_ref, f);
    }
    Ok(())
}

fn main() -> memsvib::Result<()> {
    let mut text = MirrorFile::builtin().to_toml()?;
    // tabulated spring with weaker hardening than the built-in one
    let table = "[mirror.stiffness]\nkind = \"table\"\n\
                 angles = [-0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8]\n\
                 values = [1.0e-4, 9.4e-5, 9.0e-5, 8.8e-5, 8.7e-5, 8.8e-5, 9.0e-5, 9.4e-5, 1.0e-4]\n\
                 parity = \"even\"\ndomain = [-0.8, 0.8]\n";
    let start = text.find("[mirror.stiffness]").expect("stiffness section");
    let end = start + text[start + 1..].find("\n[").expect("next section") + 1;
    text.replace_range(start..end, table);

    let custom = MirrorFile::parse(&text)?;
    println!("built-in mirror");
    decay(&MirrorFile::builtin().mirror)?;
    println!("tabulated stiffness");
    decay(&custom.mirror)?;
    Ok(())
}
