//! Small numerical utilities used throughout the crate: tridiagonal and
//! banded solves, cubic splines, monotone interpolation and adaptive
//! quadrature. Everything here is deterministic.

use crate::error::{Error, Result};

/// Solve a tridiagonal system in place. `lower`, `diag`, `upper` are the
/// three bands; `rhs` is overwritten with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::LinearSolve("zero pivot in tridiagonal solve".into()));
    }
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        if m == 0.0 {
            return Err(Error::LinearSolve("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i < n - 1 { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    rhs[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Natural cubic spline through `(x[i], y[i])` with strictly increasing `x`.
/// Evaluation clamps to the data range (linear extension outside).
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// second derivatives at the knots
    m: Vec<f64>,
    periodic: bool,
    period: f64,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Precondition("spline needs at least two knots".into()));
        }
        if n == 2 {
            return Ok(Self { x: x.to_vec(), y: y.to_vec(), m: vec![0.0; 2], periodic: false, period: 0.0 });
        }
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m: rhs, periodic: false, period: 0.0 })
    }

    /// Periodic spline: data on one period, `period` is the full period length
    /// (`x` covers `[x0, x0 + period)` without repeating the first point).
    pub fn periodic(x: &[f64], y: &[f64], period: f64) -> Result<Self> {
        let n = x.len();
        if n < 3 {
            return Err(Error::Precondition("periodic spline needs at least three knots".into()));
        }
        // Solve the cyclic tridiagonal system with the Sherman-Morrison trick.
        let h = |i: usize| -> f64 {
            if i + 1 < n { x[i + 1] - x[i] } else { x[0] + period - x[n - 1] }
        };
        let yv = |i: usize| y[i % n];
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hm = if i == 0 { h(n - 1) } else { h(i - 1) };
            let hp = h(i);
            lower[i] = hm / 6.0;
            diag[i] = (hm + hp) / 3.0;
            upper[i] = hp / 6.0;
            let ym = if i == 0 { y[n - 1] } else { y[i - 1] };
            rhs[i] = (yv(i + 1) - y[i]) / hp - (y[i] - ym) / hm;
        }
        // cyclic corrections: entry (0, n-1) = lower[0], entry (n-1, 0) = upper[n-1]
        let alpha = lower[0];
        let beta = upper[n - 1];
        let gamma = -diag[0];
        let mut d2 = diag.clone();
        d2[0] -= gamma;
        d2[n - 1] -= alpha * beta / gamma;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let mut z = rhs.clone();
        solve_tridiagonal(&lower, &d2, &upper, &mut z)?;
        solve_tridiagonal(&lower, &d2, &upper, &mut u)?;
        let fact = (z[0] + beta * z[n - 1] / gamma) / (1.0 + u[0] + beta * u[n - 1] / gamma);
        let m: Vec<f64> = (0..n).map(|i| z[i] - fact * u[i]).collect();
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m, periodic: true, period })
    }

    fn locate(&self, t: f64) -> (usize, usize, f64, f64) {
        let n = self.x.len();
        if self.periodic {
            let x0 = self.x[0];
            let mut s = (t - x0).rem_euclid(self.period) + x0;
            // guard against rounding at the period edge
            if s >= x0 + self.period {
                s = x0;
            }
            let i = match self.x.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
                Ok(i) => i,
                Err(i) => i.saturating_sub(1),
            };
            let i = i.min(n - 1);
            let j = (i + 1) % n;
            let h = if i + 1 < n { self.x[i + 1] - self.x[i] } else { self.x[0] + self.period - self.x[n - 1] };
            (i, j, s - self.x[i], h)
        } else {
            let s = t.clamp(self.x[0], self.x[n - 1]);
            let i = match self.x.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
                Ok(i) => i.min(n - 2),
                Err(i) => i.saturating_sub(1).min(n - 2),
            };
            (i, i + 1, s - self.x[i], self.x[i + 1] - self.x[i])
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, j, dx, h) = self.locate(t);
        let a = (h - dx) / h;
        let b = dx / h;
        a * self.y[i]
            + b * self.y[j]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[j]) * h * h / 6.0
    }

    pub fn eval_deriv(&self, t: f64) -> f64 {
        let (i, j, dx, h) = self.locate(t);
        let a = (h - dx) / h;
        let b = dx / h;
        (self.y[j] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[j]) * h / 6.0
    }

    pub fn eval_deriv2(&self, t: f64) -> f64 {
        let (i, j, dx, h) = self.locate(t);
        let a = (h - dx) / h;
        let b = dx / h;
        a * self.m[i] + b * self.m[j]
    }
}

/// Monotone piecewise-cubic interpolation (Fritsch-Carlson slopes). Used for
/// tabulated flux profiles where overshoot must not break positivity or
/// monotonicity of the data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Precondition("monotone interpolant needs at least two points".into()));
        }
        for i in 1..n {
            if x[i] <= x[i - 1] {
                return Err(Error::Precondition("abscissae must be strictly increasing".into()));
            }
        }
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
                let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // Fritsch-Carlson limiter
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
            } else {
                let a = d[i] / delta[i];
                let b = d[i + 1] / delta[i];
                let s = (a * a + b * b).sqrt();
                if s > 3.0 {
                    let tau = 3.0 / s;
                    d[i] = tau * a * delta[i];
                    d[i + 1] = tau * b * delta[i];
                }
            }
        }
        Ok(Self { x: x.to_vec(), y: y.to_vec(), d })
    }

    fn seg(&self, t: f64) -> (usize, f64, f64) {
        let n = self.x.len();
        let s = t.clamp(self.x[0], self.x[n - 1]);
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        (i, s - self.x[i], self.x[i + 1] - self.x[i])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, dx, h) = self.seg(t);
        let u = dx / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn eval_deriv(&self, t: f64) -> f64 {
        let (i, dx, h) = self.seg(t);
        let u = dx / h;
        let dh00 = 6.0 * u * u - 6.0 * u;
        let dh10 = 3.0 * u * u - 4.0 * u + 1.0;
        let dh01 = -6.0 * u * u + 6.0 * u;
        let dh11 = 3.0 * u * u - 2.0 * u;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.d[i] + dh11 * self.d[i + 1]
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Centered finite-difference derivative with a relative step.
pub fn central_derivative<F: Fn(f64) -> f64>(f: &F, x: f64, scale: f64) -> f64 {
    let h = scale.abs().max(1e-8) * 6.0e-6;
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solves_small_system() {
        // [2 1 0; 1 2 1; 0 1 2] x = [4; 8; 8] -> x = [1; 2; 3]
        let lower = [0.0, 1.0, 1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [1.0, 1.0, 0.0];
        let mut rhs = [4.0, 8.0, 8.0];
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        assert!((rhs[0] - 1.0).abs() < 1e-12);
        assert!((rhs[1] - 2.0).abs() < 1e-12);
        assert!((rhs[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spline_reproduces_smooth_function() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64 * 3.0).collect();
        let y: Vec<f64> = x.iter().map(|&t| (t * 1.3).sin()).collect();
        let sp = CubicSpline::natural(&x, &y).unwrap();
        for k in 0..100 {
            let t = 0.2 + 2.6 * k as f64 / 99.0;
            assert!((sp.eval(t) - (t * 1.3).sin()).abs() < 2e-6);
            assert!((sp.eval_deriv(t) - 1.3 * (t * 1.3).cos()).abs() < 2e-4);
        }
    }

    #[test]
    fn periodic_spline_matches_cosine() {
        let n = 64;
        let period = std::f64::consts::TAU;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / n as f64 * period).collect();
        let y: Vec<f64> = x.iter().map(|&t| t.cos()).collect();
        let sp = CubicSpline::periodic(&x, &y, period).unwrap();
        for k in 0..200 {
            let t = -3.0 + 12.0 * k as f64 / 199.0;
            assert!((sp.eval(t) - t.cos()).abs() < 1e-5, "t={t}");
            assert!((sp.eval_deriv2(t) + t.cos()).abs() < 5e-3, "t={t}");
        }
    }

    #[test]
    fn monotone_cubic_preserves_monotone_data() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|&t| t.powf(1.7) + 0.1).collect();
        let mc = MonotoneCubic::new(&x, &y).unwrap();
        let mut prev = mc.eval(0.0);
        for k in 1..400 {
            let t = 19.0 * 0.3 * k as f64 / 399.0;
            let v = mc.eval(t);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn simpson_integrates_exp() {
        let v = adaptive_simpson(&|t: f64| t.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
    }
}
