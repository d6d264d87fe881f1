//! STD amplitude and frequency errors over a steady window.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::CyclePeriods;

/// Fewest half-cycle records accepted in a window.
pub const MIN_WINDOW_RECORDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    /// Amplitude / theta_ref.
    pub mean_amplitude: f64,
    pub max_amplitude: f64,
    pub min_amplitude: f64,
    /// Frequency / f_ref.
    pub mean_frequency: f64,
    pub max_frequency: f64,
    pub min_frequency: f64,
    /// 100 std / mean.
    pub std_amplitude_pct: f64,
    pub std_frequency_pct: f64,
    pub window: (f64, f64),
    pub records: usize,
}

fn moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    (mean, var.sqrt(), max, min)
}

pub fn error_stats(cycles: &CyclePeriods, window: (f64, f64), normalization: (f64, f64)) -> Result<ErrorStats> {
    let (theta_ref, f_ref) = normalization;
    if !(theta_ref > 0.0 && f_ref > 0.0) {
        return Err(Error::InvalidParameter("normalization must be positive".into()));
    }
    let w = cycles.window(window.0, window.1);
    if w.len() < MIN_WINDOW_RECORDS {
        return Err(Error::WindowTooShort { cycles: w.len(), needed: MIN_WINDOW_RECORDS });
    }
    let (ma, sa, xa, na) = moments(&w.amplitudes);
    let (mf, sf, xf, nf) = moments(&w.frequencies());
    Ok(ErrorStats {
        mean_amplitude: ma / theta_ref,
        max_amplitude: xa / theta_ref,
        min_amplitude: na / theta_ref,
        mean_frequency: mf / f_ref,
        max_frequency: xf / f_ref,
        min_frequency: nf / f_ref,
        std_amplitude_pct: 100.0 * sa / ma,
        std_frequency_pct: 100.0 * sf / mf,
        window,
        records: w.len(),
    })
}

pub const STATS_HEADER: &str = "mean_amplitude,max_amplitude,min_amplitude,mean_frequency,max_frequency,min_frequency,std_amplitude_pct,std_frequency_pct,window_start,window_end,records";

impl ErrorStats {
    pub fn csv_row(&self) -> String {
        format!(
            "{:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.6e},{:.6e},{:.9e},{:.9e},{}",
            self.mean_amplitude,
            self.max_amplitude,
            self.min_amplitude,
            self.mean_frequency,
            self.max_frequency,
            self.min_frequency,
            self.std_amplitude_pct,
            self.std_frequency_pct,
            self.window.0,
            self.window.1,
            self.records
        )
    }

    /// Single-row summary file.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# memsvib stats v1")?;
        writeln!(w, "# amplitudes / theta_ref, frequencies / f_ref, std in percent of the mean, window [s]")?;
        writeln!(w, "{STATS_HEADER}")?;
        writeln!(w, "{}", self.csv_row())?;
        Ok(())
    }
}
