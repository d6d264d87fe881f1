//! Angle-dependent characteristic curves: stiffness, damping and capacitance
//! gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
    None,
}

/// Functional form of a curve before parity is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveShape {
    /// `sum(c[n] * theta^n)`
    Polynomial { coefficients: Vec<f64> },
    /// Sampled `(angle, value)` pairs joined by a C1 monotone cubic.
    Table { angles: Vec<f64>, values: Vec<f64> },
    /// `gain * theta * exp(-(theta / width)^2)`
    Gaussian { gain: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveSpec", into = "CurveSpec")]
pub struct NonlinearCurve {
    shape: CurveShape,
    parity: Parity,
    domain: (f64, f64),
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CurveSpec {
    #[serde(flatten)]
    shape: CurveShape,
    parity: Parity,
    domain: [f64; 2],
}

impl TryFrom<CurveSpec> for NonlinearCurve {
    type Error = Error;
    fn try_from(s: CurveSpec) -> Result<Self> {
        NonlinearCurve::new(s.shape, s.parity, (s.domain[0], s.domain[1]))
    }
}

impl From<NonlinearCurve> for CurveSpec {
    fn from(c: NonlinearCurve) -> Self {
        CurveSpec {
            shape: c.shape,
            parity: c.parity,
            domain: [c.domain.0, c.domain.1],
        }
    }
}

impl NonlinearCurve {
    pub fn new(shape: CurveShape, parity: Parity, domain: (f64, f64)) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("bad curve domain [{lo}, {hi}]")));
        }
        if parity != Parity::None && lo != -hi {
            return Err(Error::InvalidParameter(
                "a curve with declared parity needs a symmetric domain".into(),
            ));
        }
        let mut slopes = Vec::new();
        match &shape {
            CurveShape::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("polynomial needs finite coefficients".into()));
                }
                let skip = match parity {
                    Parity::Odd => Some(0),
                    Parity::Even => Some(1),
                    Parity::None => None,
                };
                if let Some(r) = skip {
                    if coefficients.iter().skip(r).step_by(2).any(|&c| c != 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "polynomial coefficients contradict {parity:?} parity"
                        )));
                    }
                }
            }
            CurveShape::Table { angles, values } => {
                if angles.len() != values.len() || angles.len() < 2 {
                    return Err(Error::InvalidParameter("table needs >= 2 (angle, value) pairs".into()));
                }
                if angles.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("table angles must increase strictly".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("table values must be finite".into()));
                }
                let (a0, a1) = (angles[0], angles[angles.len() - 1]);
                if !(a0 <= lo && a1 >= hi) {
                    return Err(Error::InvalidParameter(format!(
                        "table [{a0}, {a1}] does not cover domain [{lo}, {hi}]"
                    )));
                }
                slopes = pchip_slopes(angles, values);
            }
            CurveShape::Gaussian { gain, width } => {
                if !(gain.is_finite() && *width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidParameter("gaussian needs finite gain and width > 0".into()));
                }
                if parity == Parity::Even {
                    return Err(Error::InvalidParameter("gaussian-weighted curve is odd".into()));
                }
            }
        }
        Ok(NonlinearCurve { shape, parity, domain, slopes })
    }

    pub fn polynomial(coefficients: Vec<f64>, parity: Parity, domain: (f64, f64)) -> Result<Self> {
        Self::new(CurveShape::Polynomial { coefficients }, parity, domain)
    }

    pub fn table(angles: Vec<f64>, values: Vec<f64>, parity: Parity, domain: (f64, f64)) -> Result<Self> {
        Self::new(CurveShape::Table { angles, values }, parity, domain)
    }

    pub fn gaussian(gain: f64, width: f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(CurveShape::Gaussian { gain, width }, Parity::Odd, domain)
    }

    pub fn constant(value: f64, domain: (f64, f64)) -> Result<Self> {
        Self::polynomial(vec![value], Parity::Even, domain)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    /// True for an all-zero polynomial.
    pub fn is_zero(&self) -> bool {
        matches!(&self.shape, CurveShape::Polynomial { coefficients } if coefficients.iter().all(|&c| c == 0.0))
    }

    pub fn eval(&self, theta: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        if !(theta >= lo && theta <= hi) {
            return Err(Error::OutOfDomain { theta, lo, hi });
        }
        Ok(self.eval_unchecked(theta))
    }

    pub(crate) fn eval_unchecked(&self, theta: f64) -> f64 {
        match (&self.shape, self.parity) {
            (CurveShape::Table { .. }, Parity::Odd) => {
                0.5 * (self.raw(theta) - self.raw(-theta))
            }
            (CurveShape::Table { .. }, Parity::Even) => {
                0.5 * (self.raw(theta) + self.raw(-theta))
            }
            (_, Parity::Odd) => {
                let v = self.raw(theta.abs());
                if theta < 0.0 { -v } else { v }
            }
            (_, Parity::Even) => self.raw(theta.abs()),
            (_, Parity::None) => self.raw(theta),
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match &self.shape {
            CurveShape::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
            }
            CurveShape::Gaussian { gain, width } => {
                let u = x / width;
                gain * x * (-u * u).exp()
            }
            CurveShape::Table { angles, values } => hermite_eval(angles, values, &self.slopes, x),
        }
    }

    /// `integral_0^theta f(s) s ds`, the potential of a stiffness curve.
    pub fn moment_integral(&self, theta: f64) -> Result<f64> {
        self.eval(theta)?;
        if let (CurveShape::Polynomial { coefficients }, Parity::Even | Parity::None) =
            (&self.shape, self.parity)
        {
            let mut acc = 0.0;
            for (n, c) in coefficients.iter().enumerate() {
                acc += c * theta.powi(n as i32 + 2) / (n as f64 + 2.0);
            }
            return Ok(acc);
        }
        const PANELS: usize = 16;
        let h = theta / PANELS as f64;
        let mut acc = 0.0;
        for p in 0..PANELS {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in GL5 {
                let s = mid + 0.5 * h * x;
                acc += w * self.eval_unchecked(s) * s;
            }
        }
        Ok(acc * 0.5 * h)
    }
}

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

// Fritsch-Butland slopes: C1, no overshoot on monotone data.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    if n == 2 {
        return vec![del[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (del[i - 1], del[i]);
        if a * b > 0.0 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = end_slope(x[1] - x[0], x[2] - x[1], del[0], del[1]);
    d[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], del[n - 2], del[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

fn hermite_eval(x: &[f64], y: &[f64], d: &[f64], t: f64) -> f64 {
    let n = x.len();
    let i = match x.partition_point(|&v| v <= t) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: (f64, f64) = (-1.0, 1.0);

    #[test]
    fn polynomial_matches_direct_sum() {
        let c = NonlinearCurve::polynomial(vec![2.0, 0.0, 3.0], Parity::Even, D).unwrap();
        assert_eq!(c.eval(0.5).unwrap(), 2.0 + 3.0 * 0.25);
        assert_eq!(c.eval(-0.5).unwrap(), c.eval(0.5).unwrap());
    }

    #[test]
    fn outside_domain_is_error() {
        let c = NonlinearCurve::constant(1.0, D).unwrap();
        assert!(matches!(c.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(c.eval(f64::NAN).is_err());
    }

    #[test]
    fn parity_contradiction_rejected() {
        assert!(NonlinearCurve::polynomial(vec![1.0, 1.0], Parity::Odd, D).is_err());
        assert!(NonlinearCurve::polynomial(vec![1.0, 1.0], Parity::Even, D).is_err());
        assert!(NonlinearCurve::polynomial(vec![0.0, 1.0], Parity::Odd, (-1.0, 2.0)).is_err());
        assert!(NonlinearCurve::gaussian(1.0, 0.0, D).is_err());
    }

    #[test]
    fn table_reproduces_nodes_and_linear_data() {
        let xs: Vec<f64> = (0..=10).map(|i| -1.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        let c = NonlinearCurve::table(xs.clone(), ys.clone(), Parity::None, D).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x).unwrap() - y).abs() < 1e-14);
        }
        assert!((c.eval(0.33).unwrap() - 1.99).abs() < 1e-12);
    }

    #[test]
    fn table_is_c1_across_nodes() {
        let xs: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin() + 0.3 * x * x).collect();
        let c = NonlinearCurve::table(xs.clone(), ys, Parity::None, D).unwrap();
        let e = 1e-7;
        for &x in &xs[1..xs.len() - 1] {
            let left = (c.eval(x).unwrap() - c.eval(x - e).unwrap()) / e;
            let right = (c.eval(x + e).unwrap() - c.eval(x).unwrap()) / e;
            assert!((left - right).abs() < 1e-5, "slope jump at {x}: {left} vs {right}");
        }
    }

    #[test]
    fn gaussian_shape() {
        let c = NonlinearCurve::gaussian(-2.0, 0.5, D).unwrap();
        let v = c.eval(0.25).unwrap();
        assert!((v - (-2.0 * 0.25 * (-0.25f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn moment_integral_polynomial_and_quadrature_agree() {
        let p = NonlinearCurve::polynomial(vec![1.5, 0.0, 4.0], Parity::Even, D).unwrap();
        let xs: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 + 4.0 * x * x).collect();
        let t = NonlinearCurve::table(xs, ys, Parity::Even, D).unwrap();
        let exact = 1.5 * 0.7f64.powi(2) / 2.0 + 4.0 * 0.7f64.powi(4) / 4.0;
        assert!((p.moment_integral(0.7).unwrap() - exact).abs() < 1e-15);
        assert!((t.moment_integral(-0.7).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn serde_roundtrip() {
        let c = NonlinearCurve::gaussian(-1.0e-9, 0.4, (-0.8, 0.8)).unwrap();
        let s = toml::to_string(&c).unwrap();
        let back: NonlinearCurve = toml::from_str(&s).unwrap();
        assert_eq!(c, back);
        let bad = "kind = \"polynomial\"\ncoefficients = [1.0, 2.0]\nparity = \"odd\"\ndomain = [-1.0, 1.0]\n";
        assert!(toml::from_str::<NonlinearCurve>(bad).is_err());
    }
}
