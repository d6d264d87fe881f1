//! Reporting helpers for the acceptance run: one PASS/FAIL line per
//! criterion, indented detail lines below it.

use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    pub details: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Outcome { pass: true, details: Vec::new() }
    }

    /// Records a sub-check; the outcome fails if any sub-check fails.
    pub fn check(&mut self, ok: bool, what: impl Into<String>) -> &mut Self {
        let mark = if ok { "ok  " } else { "FAIL" };
        self.details.push(format!("{mark} {}", what.into()));
        self.pass &= ok;
        self
    }

    pub fn note(&mut self, what: impl Into<String>) -> &mut Self {
        self.details.push(format!("     {}", what.into()));
        self
    }
}

#[derive(Debug, Default)]
pub struct Suite {
    results: Vec<(String, bool, Duration)>,
}

impl Suite {
    pub fn new() -> Self {
        Suite::default()
    }

    /// Runs one criterion. Errors count as failures. `budget` is the allowed
    /// wall time; exceeding it fails the criterion too.
    pub fn run<F>(&mut self, id: &str, title: &str, budget: Duration, f: F)
    where
        F: FnOnce() -> memsvib::Result<Outcome>,
    {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let mut out = match res {
            Ok(o) => o,
            Err(e) => {
                let mut o = Outcome::new();
                o.check(false, format!("error: {e}"));
                o
            }
        };
        out.check(took <= budget, format!("runtime {:.1} s (limit {:.0} s)", took.as_secs_f64(), budget.as_secs_f64()));
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {id}: {tag}  {title}");
        for d in &out.details {
            println!("    {d}");
        }
        self.results.push((id.to_string(), out.pass, took));
    }

    pub fn failed(&self) -> Vec<&str> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect()
    }

    pub fn finish(self) -> ExitCode {
        let failed = self.failed();
        let total: f64 = self.results.iter().map(|r| r.2.as_secs_f64()).sum();
        println!(
            "acceptance: {} of {} criteria passed in {total:.0} s",
            self.results.len() - failed.len(),
            self.results.len()
        );
        if failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            println!("failed: {}", failed.join(", "));
            ExitCode::FAILURE
        }
    }
}

/// `x` wrapped to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y - tau
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap() {
        assert!((wrap_angle(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.1) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn outcome_fails_on_any_check() {
        let mut o = Outcome::new();
        o.check(true, "a").check(false, "b");
        assert!(!o.pass);
        assert_eq!(o.details.len(), 2);
    }
}
