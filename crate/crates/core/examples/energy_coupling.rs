//! Per-period vibration energy along an imposed trajectory: quadrature
//! against the closed-form series.
//!
//!     cargo run --release --example energy_coupling

use memsvib::analysis::{analytic_energy_series, coupling_coeffs, imposed_trajectory, numeric_energy_series};
use memsvib::params::SyntheticMirror;
use memsvib::vibration::{peak_from_g_rms, Axis, VibrationProfile};

fn main() -> memsvib::Result<()> {
    let p = SyntheticMirror::default().build()?;
    let f_m = p.f_ref;
    let a = peak_from_g_rms(2.0);

    for amp in [0.1, 0.2, 0.35] {
        let c = coupling_coeffs(p.mass, p.com_offset, amp)?;
        println!("Theta {amp:.2}: vy1 {:.4e}  vy3 {:.4e}  vz2 {:.4e}  vz4 {:.4e}", c.vy1, c.vy3, c.vz2, c.vz4);
    }

    let theta = 0.2;
    let c = coupling_coeffs(p.mass, p.com_offset, theta)?;
    let tr = imposed_trajectory(theta, f_m, 200, 64)?;
    for (axis, fnorm) in [(Axis::Ty, 1.03), (Axis::Tz, 2.03)] {
        let prof = VibrationProfile::tone(axis, a, fnorm * f_m);
        let num = numeric_energy_series(&tr, &p, &prof)?;
        let times: Vec<f64> = num.iter().map(|x| x.0).collect();
        let ana = analytic_energy_series(&c, f_m, &prof, &times)?;
        let scale = ana.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let worst = num.iter().zip(&ana).map(|(n, a)| (n.1 - a).abs()).fold(0.0, f64::max);
        println!("{axis} at {fnorm}: peak {scale:.4e} J, worst deviation {:.2} %", 100.0 * worst / scale);
    }
    Ok(())
}
