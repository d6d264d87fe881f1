//! Rectangular comb-drive voltage with an open-loop or PLL edge schedule.

use serde::{Deserialize, Serialize};

use super::pll::PllController;
use crate::error::{Error, Result};
use crate::sim::{Crossing, Drive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// [V]
    pub hv_voltage: f64,
    /// On fraction of each actuation period.
    pub duty: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            hv_voltage: 100.0,
            duty: 0.6,
        }
    }
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::InvalidParameter(format!("duty {} outside (0, 1)", self.duty)));
        }
        if !(self.hv_voltage > 0.0 && self.hv_voltage.is_finite()) {
            return Err(Error::InvalidParameter("hv_voltage must be > 0".into()));
        }
        Ok(())
    }
}

/// How open-loop period lengths are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PeriodPlan {
    Constant(f64),
    /// Actuation frequency moves linearly from `f_start` to `f_end` [Hz] over
    /// `periods` periods, then stays at `f_end`.
    Ramp { f_start: f64, f_end: f64, periods: usize },
}

impl PeriodPlan {
    fn length(&self, k: usize) -> f64 {
        match *self {
            PeriodPlan::Constant(t) => t,
            PeriodPlan::Ramp { f_start, f_end, periods } => {
                if k >= periods {
                    1.0 / f_end
                } else {
                    1.0 / (f_start + (f_end - f_start) * k as f64 / periods as f64)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuationPeriod {
    pub start: f64,
    pub length: f64,
    pub on_time: f64,
}

impl ActuationPeriod {
    pub fn end(&self) -> f64 {
        self.start + self.length
    }
}

#[derive(Debug, Clone)]
pub enum DriveMode {
    OpenLoop(PeriodPlan),
    Pll(Box<PllController>),
}

#[derive(Debug, Clone)]
pub struct DriveSource {
    pub config: DriveConfig,
    mode: DriveMode,
    periods: Vec<ActuationPeriod>,
    cursor: usize,
}

impl DriveSource {
    /// Strictly periodic drive with its first rising edge at `t0`.
    pub fn open_loop(config: DriveConfig, t0: f64, period: f64) -> Result<Self> {
        Self::open_loop_plan(config, t0, PeriodPlan::Constant(period))
    }

    pub fn open_loop_plan(config: DriveConfig, t0: f64, plan: PeriodPlan) -> Result<Self> {
        config.validate()?;
        let first = plan.length(0);
        if !(first > 0.0 && first.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidParameter("actuation period must be finite and > 0".into()));
        }
        if let PeriodPlan::Ramp { f_start, f_end, .. } = plan {
            if !(f_start > 0.0 && f_end > 0.0) {
                return Err(Error::InvalidParameter("ramp frequencies must be > 0".into()));
            }
        }
        let mut d = DriveSource {
            config,
            mode: DriveMode::OpenLoop(plan),
            periods: Vec::new(),
            cursor: 0,
        };
        d.push(t0, first);
        Ok(d)
    }

    /// PLL-scheduled drive. `first` is the period in progress; later periods
    /// are appended by the controller at each crossing.
    pub fn pll(config: DriveConfig, first_start: f64, controller: PllController) -> Result<Self> {
        config.validate()?;
        let len = controller.state.t_pll;
        let mut d = DriveSource {
            config,
            mode: DriveMode::Pll(Box::new(controller)),
            periods: Vec::new(),
            cursor: 0,
        };
        d.push(first_start, len);
        Ok(d)
    }

    fn push(&mut self, start: f64, length: f64) {
        self.periods.push(ActuationPeriod {
            start,
            length,
            on_time: self.config.duty * length,
        });
    }

    pub fn mode(&self) -> &DriveMode {
        &self.mode
    }

    pub fn schedule(&self) -> &[ActuationPeriod] {
        &self.periods
    }

    /// Rising edge after the last scheduled period.
    pub fn schedule_end(&self) -> f64 {
        self.periods.last().map_or(0.0, |p| p.end())
    }

    pub fn controller(&self) -> Option<&PllController> {
        match &self.mode {
            DriveMode::Pll(c) => Some(c),
            DriveMode::OpenLoop(_) => None,
        }
    }

    pub fn into_controller(self) -> Option<PllController> {
        match self.mode {
            DriveMode::Pll(c) => Some(*c),
            DriveMode::OpenLoop(_) => None,
        }
    }

    /// Generates open-loop periods until the schedule covers `t`.
    pub fn extend_to(&mut self, t: f64) {
        if let DriveMode::OpenLoop(plan) = self.mode {
            while self.schedule_end() <= t {
                let k = self.periods.len();
                let start = self.schedule_end();
                self.push(start, plan.length(k));
            }
        }
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let p = &self.periods;
        if p.is_empty() || t < p[0].start || t >= self.schedule_end() {
            return None;
        }
        let mut i = self.cursor.min(p.len() - 1);
        if t < p[i].start {
            i = p.partition_point(|q| q.start <= t) - 1;
        }
        while i + 1 < p.len() && p[i + 1].start <= t {
            i += 1;
        }
        Some(i)
    }

    /// Voltage at `t`; errors outside the generated schedule.
    pub fn voltage_at(&self, t: f64) -> Result<f64> {
        let i = self.locate(t).ok_or(Error::ScheduleExhausted { t, end: self.schedule_end() })?;
        let p = &self.periods[i];
        Ok(if t < p.start + p.on_time { self.config.hv_voltage } else { 0.0 })
    }
}

pub fn drive_voltage(source: &DriveSource, t: f64) -> Result<f64> {
    source.voltage_at(t)
}

impl Drive for DriveSource {
    fn segment(&mut self, t: f64) -> Result<(f64, f64)> {
        if t >= self.schedule_end() {
            match &self.mode {
                DriveMode::OpenLoop(_) => self.extend_to(t),
                DriveMode::Pll(c) => {
                    // No crossing arrived in time: keep the last period length.
                    let len = c.state.t_pll;
                    while self.schedule_end() <= t {
                        let s = self.schedule_end();
                        self.push(s, len);
                    }
                }
            }
        }
        let i = self.locate(t).ok_or(Error::ScheduleExhausted { t, end: self.schedule_end() })?;
        self.cursor = i;
        let p = self.periods[i];
        let edge = p.start + p.on_time;
        Ok(if t < edge {
            (self.config.hv_voltage, edge)
        } else {
            (0.0, p.end())
        })
    }

    fn on_crossing(&mut self, c: &Crossing) -> Result<()> {
        let next_edge = self.schedule_end();
        if let DriveMode::Pll(ctrl) = &mut self.mode {
            let len = ctrl.on_crossing(c.time, next_edge)?;
            self.push(next_edge, len);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const US: f64 = 1e-6;

    #[test]
    fn duty_edges() {
        let mut d = DriveSource::open_loop(DriveConfig::default(), 0.0, 250.0 * US).unwrap();
        d.extend_to(2e-3);
        assert_eq!(drive_voltage(&d, 100.0 * US).unwrap(), 100.0);
        assert_eq!(drive_voltage(&d, 200.0 * US).unwrap(), 0.0);
        assert_eq!(drive_voltage(&d, 1100.0 * US).unwrap(), 100.0);
        assert!(matches!(drive_voltage(&d, 1.0), Err(Error::ScheduleExhausted { .. })));
        assert!(drive_voltage(&d, -1.0).is_err());
    }

    #[test]
    fn mean_square_voltage_is_duty() {
        let mut d = DriveSource::open_loop(DriveConfig::default(), 0.0, 250.0 * US).unwrap();
        let n = 100_000;
        d.extend_to(250.0 * US);
        let mut acc = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * 250.0 * US / n as f64;
            acc += drive_voltage(&d, t).unwrap().powi(2);
        }
        assert!((acc / n as f64 - 0.6 * 1e4).abs() < 1e-6);
    }

    #[test]
    fn segments_tile_the_schedule() {
        let mut d = DriveSource::open_loop(DriveConfig::default(), 1.0, 250.0 * US).unwrap();
        let mut t = 1.0;
        let mut ends = Vec::new();
        for _ in 0..6 {
            let (v, e) = d.segment(t).unwrap();
            assert!(e > t);
            ends.push((v, e));
            t = e;
        }
        assert_eq!(ends[0].0, 100.0);
        assert_eq!(ends[1].0, 0.0);
        assert!((ends[1].1 - ends[0].1 - 100.0 * US).abs() < 1e-15);
        for w in d.schedule().windows(2) {
            assert_eq!(w[1].start, w[0].end());
            assert_eq!(w[1].length, 250.0 * US);
        }
    }

    #[test]
    fn ramp_plan() {
        let plan = PeriodPlan::Ramp { f_start: 4400.0, f_end: 4000.0, periods: 4 };
        assert_eq!(plan.length(0), 1.0 / 4400.0);
        assert_eq!(plan.length(2), 1.0 / 4200.0);
        assert_eq!(plan.length(9), 1.0 / 4000.0);
    }

    #[test]
    fn bad_duty_rejected() {
        let c = DriveConfig { duty: 1.0, ..Default::default() };
        assert!(DriveSource::open_loop(c, 0.0, 1e-3).is_err());
    }
}
