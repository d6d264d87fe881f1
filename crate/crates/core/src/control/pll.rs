//! Period-domain PI phase-locked loop.
//!
//! At every mirror zero crossing the loop knows the measured half period
//! `T_m`, the length `T_pll` of the drive period that ends at the next
//! scheduled rising edge, and the phase `t_beta` (next rising edge minus the
//! crossing). The phase propagates as
//! `t_beta[i+1] = t_beta[i] - T_m[i+1] + T_pll[i+1]` and the next drive period is
//! `T_pll[i+2] = T_pll[i+1] + kP (T_m[i+1] - T_pll[i+1]) + kI e[i+1]`, with
//! `e = t_beta_ref - t_beta`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllGains {
    pub kp: f64,
    pub ki: f64,
}

impl Default for PllGains {
    fn default() -> Self {
        PllGains { kp: 0.3, ki: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllState {
    /// Length of the drive period ending at the next scheduled rising edge [s].
    pub t_pll: f64,
    /// Phase at the latest crossing [s].
    pub t_beta: f64,
    pub t_beta_ref: f64,
    pub gains: PllGains,
    /// Sum of phase errors [s].
    pub integral: f64,
    /// Offset that makes `t_pll = base + kP e + kI integral` hold.
    pub base: f64,
    pub index: u64,
    /// Centre of the anti-windup clamp [s].
    pub t_nominal: f64,
}

pub const CLAMP_LOW: f64 = 0.5;
pub const CLAMP_HIGH: f64 = 2.0;

impl PllState {
    pub fn new(t_pll: f64, t_beta: f64, t_beta_ref: f64, gains: PllGains) -> Result<Self> {
        if !(t_pll > 0.0 && t_pll.is_finite() && t_beta.is_finite() && t_beta_ref.is_finite()) {
            return Err(Error::InvalidParameter("PLL state needs finite times and T_pll > 0".into()));
        }
        if !(gains.kp.is_finite() && gains.ki.is_finite()) {
            return Err(Error::InvalidParameter("PLL gains must be finite".into()));
        }
        let e = t_beta_ref - t_beta;
        Ok(PllState {
            t_pll,
            t_beta,
            t_beta_ref,
            gains,
            integral: 0.0,
            base: t_pll - gains.kp * e,
            index: 0,
            t_nominal: t_pll,
        })
    }

    /// Phase propagation only.
    pub fn advance_phase(&mut self, t_m: f64) {
        self.t_beta = self.t_beta - t_m + self.t_pll;
    }

    /// PI period update with clamp and conditional integration; expects the
    /// phase already advanced for this crossing.
    pub fn update_period(&mut self, t_m: f64) {
        let e = phase_error(self);
        let (lo, hi) = (CLAMP_LOW * self.t_nominal, CLAMP_HIGH * self.t_nominal);
        let candidate = pi_period_step(self.t_pll, t_m, e, self.gains);
        if candidate < lo || candidate > hi {
            self.t_pll = candidate.clamp(lo, hi);
            self.base = self.t_pll - self.gains.kp * e - self.gains.ki * self.integral;
        } else {
            self.t_pll = candidate;
            self.integral += e;
        }
        self.index += 1;
    }

    /// Value of the absolute (non-incremental) PI form for the current state.
    pub fn absolute_form(&self) -> f64 {
        self.base + self.gains.kp * phase_error(self) + self.gains.ki * self.integral
    }
}

/// `t_beta_ref - t_beta`: positive when the mirror crosses early.
pub fn phase_error(state: &PllState) -> f64 {
    state.t_beta_ref - state.t_beta
}

/// `T_pll + kP (T_m - T_pll) + kI e`.
pub fn pi_period_step(t_pll: f64, t_m: f64, e: f64, gains: PllGains) -> f64 {
    t_pll + gains.kp * (t_m - t_pll) + gains.ki * e
}

/// Phase propagation followed by the PI period update.
pub fn pll_update(state: &PllState, t_m_latest: f64) -> Result<PllState> {
    if !(t_m_latest > 0.0 && t_m_latest.is_finite()) {
        return Err(Error::InvalidParameter(format!("half period {t_m_latest} must be finite and > 0")));
    }
    let mut s = *state;
    s.advance_phase(t_m_latest);
    s.update_period(t_m_latest);
    if !(s.t_pll.is_finite() && s.t_beta.is_finite()) {
        return Err(Error::InvalidParameter("PLL state became non-finite".into()));
    }
    Ok(s)
}

/// One controller update as logged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PllRecord {
    pub index: u64,
    /// Crossing time [s].
    pub time: f64,
    pub t_m: f64,
    /// Drive period that ended the phase interval.
    pub t_pll: f64,
    /// Newly scheduled drive period.
    pub t_pll_next: f64,
    pub t_beta: f64,
    pub error: f64,
}

pub fn write_history_csv<W: Write>(history: &[PllRecord], mut w: W) -> Result<()> {
    writeln!(w, "# memsvib pll-history v1")?;
    writeln!(w, "# units: time, t_m, t_pll, t_pll_next, t_beta, error [s]")?;
    writeln!(w, "index,time,t_m,t_pll,t_pll_next,t_beta,error")?;
    for r in history {
        writeln!(
            w,
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            r.index, r.time, r.t_m, r.t_pll, r.t_pll_next, r.t_beta, r.error
        )?;
    }
    Ok(())
}

/// Loop state plus the crossing bookkeeping needed inside a simulation.
#[derive(Debug, Clone)]
pub struct PllController {
    pub state: PllState,
    last_crossing: f64,
    pub history: Vec<PllRecord>,
    /// Times the phase had to be re-measured because a drive period passed
    /// without a crossing (or saw two).
    pub resyncs: usize,
}

impl PllController {
    pub fn new(state: PllState, last_crossing: f64) -> Self {
        PllController {
            state,
            last_crossing,
            history: Vec::new(),
            resyncs: 0,
        }
    }

    pub fn last_crossing(&self) -> f64 {
        self.last_crossing
    }

    /// Handles the crossing at `time` given the currently scheduled next
    /// rising edge; returns the length of the period to append.
    pub fn on_crossing(&mut self, time: f64, next_edge: f64) -> Result<f64> {
        let t_m = time - self.last_crossing;
        if !(t_m > 0.0) {
            return Err(Error::Protocol(format!("crossing at {time} not after {}", self.last_crossing)));
        }
        let t_pll_used = self.state.t_pll;
        self.state.advance_phase(t_m);
        let measured = next_edge - time;
        if (measured - self.state.t_beta).abs() > 1e-6 * self.state.t_nominal {
            self.state.t_beta = measured;
            self.resyncs += 1;
        }
        self.state.update_period(t_m);
        self.last_crossing = time;
        self.history.push(PllRecord {
            index: self.state.index,
            time,
            t_m,
            t_pll: t_pll_used,
            t_pll_next: self.state.t_pll,
            t_beta: self.state.t_beta,
            error: phase_error(&self.state),
        });
        Ok(self.state.t_pll)
    }
}
