//! Dominant spectral line and single-frequency fits of slowly varying series.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// [1/unit of the sample spacing]
    pub frequency: f64,
    /// Raw resolution 1 / (N dt).
    pub bin_width: f64,
}

/// Strongest non-DC line of a uniformly sampled series: mean removed, Hann
/// window, eightfold zero padding, parabolic peak refinement.
pub fn dominant_frequency(series: &[f64], dt: f64) -> Result<SpectralLine> {
    let n = series.len();
    if n < 8 || !(dt > 0.0) {
        return Err(Error::InvalidParameter("need >= 8 samples and dt > 0".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let m = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    for (i, v) in series.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        buf[i] = Complex::new((v - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf[..m / 2].iter().map(|c| c.norm()).collect();
    // Skip the main lobe of DC (Hann: 2 raw bins).
    let start = (2 * m / n).max(1);
    let (k, _) = mag
        .iter()
        .enumerate()
        .skip(start)
        .fold((start, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let mut kf = k as f64;
    if k > 0 && k + 1 < mag.len() {
        let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
        let d = a - 2.0 * b + c;
        if d != 0.0 {
            kf += 0.5 * (a - c) / d;
        }
    }
    Ok(SpectralLine {
        frequency: kf / (m as f64 * dt),
        bin_width: 1.0 / (n as f64 * dt),
    })
}

/// Least-squares `c + A cos(2 pi f t - psi)`; returns `(A, psi, c)`.
pub fn fit_sinusoid(times: &[f64], values: &[f64], f: f64) -> Result<(f64, f64, f64)> {
    let n = times.len().min(values.len());
    if n < 3 {
        return Err(Error::InvalidParameter("need >= 3 points".into()));
    }
    // Normal equations for [c, p, q] with basis [1, cos, sin].
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for i in 0..n {
        let (s, c) = (2.0 * PI * f * times[i]).sin_cos();
        let b = [1.0, c, s];
        for j in 0..3 {
            r[j] += b[j] * values[i];
            for k in 0..3 {
                m[j][k] += b[j] * b[k];
            }
        }
    }
    let x = solve3(m, r).ok_or_else(|| Error::InvalidParameter("degenerate sinusoid fit".into()))?;
    let amp = x[1].hypot(x[2]);
    let psi = x[2].atan2(x[1]);
    Ok((amp, psi, x[0]))
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_line() {
        let dt = 0.25e-3;
        let x: Vec<f64> = (0..4000).map(|i| 1.0 + 0.1 * (2.0 * PI * 65.4 * i as f64 * dt).sin()).collect();
        let l = dominant_frequency(&x, dt).unwrap();
        assert!((l.frequency - 65.4).abs() < 0.1 * l.bin_width, "{l:?}");
    }

    #[test]
    fn fit_recovers_amplitude_and_phase() {
        let t: Vec<f64> = (0..500).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|&x| 0.5 + 2.0 * (2.0 * PI * 1.3 * x - 0.7).cos()).collect();
        let (a, psi, c) = fit_sinusoid(&t, &y, 1.3).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (psi - 0.7).abs() < 1e-12 && (c - 0.5).abs() < 1e-12);
    }
}
