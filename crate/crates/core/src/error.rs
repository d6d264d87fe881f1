use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angle {theta} rad outside curve domain [{lo}, {hi}]")]
    OutOfDomain { theta: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t} s (h = {h} s); system too stiff for the tolerances")]
    StepUnderflow { t: f64, h: f64 },

    #[error("state diverged; last finite state at t = {t} s")]
    Divergence { t: f64 },

    #[error("drive queried at t = {t} s beyond the scheduled range ending at {end} s")]
    ScheduleExhausted { t: f64, end: f64 },

    #[error("need at least {needed} zero crossings, found {found}")]
    TooFewCrossings { needed: usize, found: usize },

    #[error("analysis window too short: {cycles} cycles, need {needed}")]
    WindowTooShort { cycles: usize, needed: usize },

    #[error("outside the validity range of the expansion: {0}")]
    Validity(String),

    #[error("oscillation lost at t = {t} s (amplitude {amplitude:.3e} rad)")]
    LockLost {
        t: f64,
        amplitude: f64,
        /// Controller updates up to the failure.
        history: Vec<crate::control::PllRecord>,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
