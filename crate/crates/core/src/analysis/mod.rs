//! Energy-coupling analysis and error statistics.

pub mod energy;
pub mod spectrum;
pub mod stats;

pub use energy::{
    analytic_energy_series, coupling_coeffs, imposed_trajectory, numeric_energy_series, write_energy_csv, CumulativeSimpson,
    EnergyCoeffs, MAX_EXPANSION_AMPLITUDE,
};
pub use spectrum::{dominant_frequency, fit_sinusoid, SpectralLine};
pub use stats::{error_stats, ErrorStats, MIN_WINDOW_RECORDS, STATS_HEADER};
