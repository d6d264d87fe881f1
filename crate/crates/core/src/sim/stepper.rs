//! Explicit Runge-Kutta steps with continuous extensions.

/// Dormand-Prince 5(4) tableau.
mod dp {
    pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const A21: f64 = 1.0 / 5.0;
    pub const A31: f64 = 3.0 / 40.0;
    pub const A32: f64 = 9.0 / 40.0;
    pub const A41: f64 = 44.0 / 45.0;
    pub const A42: f64 = -56.0 / 15.0;
    pub const A43: f64 = 32.0 / 9.0;
    pub const A51: f64 = 19372.0 / 6561.0;
    pub const A52: f64 = -25360.0 / 2187.0;
    pub const A53: f64 = 64448.0 / 6561.0;
    pub const A54: f64 = -212.0 / 729.0;
    pub const A61: f64 = 9017.0 / 3168.0;
    pub const A62: f64 = -355.0 / 33.0;
    pub const A63: f64 = 46732.0 / 5247.0;
    pub const A64: f64 = 49.0 / 176.0;
    pub const A65: f64 = -5103.0 / 18656.0;
    pub const B1: f64 = 35.0 / 384.0;
    pub const B3: f64 = 500.0 / 1113.0;
    pub const B4: f64 = 125.0 / 192.0;
    pub const B5: f64 = -2187.0 / 6784.0;
    pub const B6: f64 = 11.0 / 84.0;
    pub const E1: f64 = 71.0 / 57600.0;
    pub const E3: f64 = -71.0 / 16695.0;
    pub const E4: f64 = 71.0 / 1920.0;
    pub const E5: f64 = -17253.0 / 339200.0;
    pub const E6: f64 = 22.0 / 525.0;
    pub const E7: f64 = -1.0 / 40.0;
    pub const D1: f64 = -12715105075.0 / 11282082432.0;
    pub const D3: f64 = 87487479700.0 / 32700410799.0;
    pub const D4: f64 = -10690763975.0 / 1880347072.0;
    pub const D5: f64 = 701980252875.0 / 199316789632.0;
    pub const D6: f64 = -1453857185.0 / 822651844.0;
    pub const D7: f64 = 69997945.0 / 29380423.0;
}

pub type State<const N: usize> = [f64; N];

#[inline]
fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

pub struct DopriStep<const N: usize> {
    pub y1: State<N>,
    /// Derivative at the end point (first stage of the next step).
    pub f1: State<N>,
    /// Embedded error estimate, un-scaled.
    pub err: State<N>,
    pub dense: Dense<N>,
}

/// One Dormand-Prince step from `(t, y)` with known derivative `f0`.
pub fn dopri_step<const N: usize, F>(f: &F, t: f64, y: &State<N>, f0: &State<N>, h: f64) -> DopriStep<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    use dp::*;
    let k1 = f0;
    let k2 = f(t + C[1] * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + C[2] * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C[3] * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C[4] * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(
        t + C[5] * h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y1 = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y1);
    let mut err = [0.0; N];
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let dy = y1[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    DopriStep {
        y1,
        f1: k7,
        err,
        dense: Dense::Dopri { t0: t, h, r },
    }
}

/// Classical RK4 step; returns the new state.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &State<N>, f0: &State<N>, h: f64) -> State<N>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let k2 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, f0)]));
    let k3 = f(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h, &[(1.0 / 6.0, f0), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)])
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
pub enum Dense<const N: usize> {
    /// Fourth-order Dormand-Prince interpolant.
    Dopri { t0: f64, h: f64, r: [State<N>; 5] },
    /// Cubic Hermite on end values and derivatives.
    Hermite {
        t0: f64,
        h: f64,
        y0: State<N>,
        y1: State<N>,
        f0: State<N>,
        f1: State<N>,
    },
}

impl<const N: usize> Dense<N> {
    pub fn t0(&self) -> f64 {
        match self {
            Dense::Dopri { t0, .. } | Dense::Hermite { t0, .. } => *t0,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Dense::Dopri { h, .. } | Dense::Hermite { h, .. } => *h,
        }
    }

    /// Component `i` at normalized position `s` in [0, 1].
    #[inline]
    pub fn component(&self, i: usize, s: f64) -> f64 {
        match self {
            Dense::Dopri { r, .. } => {
                let s1 = 1.0 - s;
                r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])))
            }
            Dense::Hermite { h, y0, y1, f0, f1, .. } => {
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y0[i]
                    + (s3 - 2.0 * s2 + s) * h * f0[i]
                    + (3.0 * s2 - 2.0 * s3) * y1[i]
                    + (s3 - s2) * h * f1[i]
            }
        }
    }

    pub fn eval(&self, t: f64) -> State<N> {
        let s = (t - self.t0()) / self.h();
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.component(i, s);
        }
        out
    }

    /// Root of component `i` bracketed by `[0, 1]` (values `g0`, `g1` of opposite
    /// sign), returned as an absolute time.
    pub fn root(&self, i: usize, g0: f64, g1: f64) -> f64 {
        let (t0, h) = (self.t0(), self.h());
        t0 + h * bracketed_root(|s| self.component(i, s), 0.0, 1.0, g0, g1)
    }
}

/// Illinois false position with a bisection fallback; `fa` and `fb` must
/// differ in sign (or one of them be zero).
pub fn bracketed_root<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0i8;
    for it in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if it % 8 == 7 || !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = g(c);
        if fc == 0.0 {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
        if (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(a.abs()).max(1e-300) {
            break;
        }
    }
    if fa.abs() < fb.abs() { a } else { b }
}
