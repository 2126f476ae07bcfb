//! Explicit barrier for the asymptotic problem on the hyperbolic quotient:
//! a profile `g(s)` of the distance `s` to a totally geodesic wall, solving
//! the conservation law `(cosh s)^(n-2) a(-g'(s)) = c` for the minimal
//! surface profile `a(v) = v/sqrt(1+v²)`. Solving for `g'` gives
//! `g'(s) = -c (cosh s)^(2-n) / sqrt(1 - c² (cosh s)^(4-2n))` and `g` is its
//! integral from `s` to infinity, finite for `n ≥ 3`, with `g(0) → ∞` as
//! `c → 1`.

use crate::error::{Error, Result};
use crate::math::{adaptive_simpson, CubicSpline};

pub struct HyperbolicBarrier {
    pub n: usize,
    pub c: f64,
    pub s_grid: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    spline: CubicSpline,
}

fn integrand(n: usize, c: f64, t: f64) -> f64 {
    let w = t.cosh().powi(2 - n as i32);
    let rad = 1.0 - c * c * w * w;
    c * w / rad.max(1e-300).sqrt()
}

pub fn hyperbolic_barrier(n: usize, c: f64) -> Result<HyperbolicBarrier> {
    if n < 3 {
        return Err(Error::Precondition(format!("need n >= 3, got {n}")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Precondition(format!("need 0 < c < 1, got {c}")));
    }
    let decay = (n - 2) as f64;
    // the profile is exponentially small beyond this; the remainder enters
    // through the analytic tail term
    let s_max = (16.0 / decay).min(18.0);
    let m = 4800usize;
    // quadratic clustering toward s = 0, where the radicand opens a layer of
    // width sqrt(1-c²) as c -> 1
    let s_grid: Vec<f64> =
        (0..=m).map(|i| s_max * (i as f64 / m as f64).powi(2)).collect();
    // near t = 0 the radicand behaves like a² + b²t²; integrating in τ with
    // t = (a/b) sinh τ removes the layer exactly
    let a_lay = (1.0 - c * c).sqrt();
    let b_lay = c * (2.0 * decay).sqrt();
    let t_layer: f64 = 1.0;
    let tau_of = |t: f64| (b_lay * t / a_lay).asinh();
    let t_of = |tau: f64| a_lay / b_lay * tau.sinh();
    let f = |t: f64| integrand(n, c, t);
    let f_tau = |tau: f64| f(t_of(tau)) * a_lay / b_lay * tau.cosh();
    let segment = |lo: f64, hi: f64| -> f64 {
        if hi <= t_layer {
            adaptive_simpson(&f_tau, tau_of(lo), tau_of(hi), 1e-13)
        } else if lo >= t_layer {
            adaptive_simpson(&f, lo, hi, 1e-13)
        } else {
            adaptive_simpson(&f_tau, tau_of(lo), tau_of(t_layer), 1e-13)
                + adaptive_simpson(&f, t_layer, hi, 1e-13)
        }
    };
    // analytic tail: integrand ~ c 2^(n-2) e^{-(n-2)t} for large t
    let tail = c * 2f64.powi(n as i32 - 2) * (-decay * s_max).exp() / decay;
    let mut g = vec![0.0; m + 1];
    g[m] = tail;
    for i in (0..m).rev() {
        let seg = segment(s_grid[i], s_grid[i + 1]);
        if !seg.is_finite() {
            return Err(Error::Precondition(format!(
                "quadrature failed on [{}, {}] for c = {c}",
                s_grid[i],
                s_grid[i + 1]
            )));
        }
        g[i] = g[i + 1] + seg;
    }
    let g_prime: Vec<f64> = s_grid.iter().map(|&s| -integrand(n, c, s)).collect();
    let spline = CubicSpline::natural(&s_grid, &g)?;
    Ok(HyperbolicBarrier { n, c, s_grid, g, g_prime, spline })
}

impl HyperbolicBarrier {
    pub fn g_at(&self, s: f64) -> f64 {
        if s >= *self.s_grid.last().unwrap() {
            return 0.0;
        }
        self.spline.eval(s)
    }

    /// closed form from the conservation law
    pub fn g_prime_at(&self, s: f64) -> f64 {
        -integrand(self.n, self.c, s)
    }

    /// derivative of the integrated profile itself (spline route), used to
    /// cross-check the quadrature against the closed form
    pub fn g_prime_from_profile(&self, s: f64) -> f64 {
        self.spline.eval_deriv(s)
    }

    /// `(cosh s)^(n-2) a(-g'(s)) - c` with the minimal surface profile
    pub fn conservation_residual(&self, s: f64) -> f64 {
        let gp = self.g_prime_at(s);
        let v = -gp;
        let a = v / (1.0 + v * v).sqrt();
        s.cosh().powi(self.n as i32 - 2) * a - self.c
    }

    pub fn g_zero(&self) -> f64 {
        self.g[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conservation_law_holds_on_grid() {
        for n in [3usize, 4] {
            for &c in &[0.5, 0.9, 0.99] {
                let b = hyperbolic_barrier(n, c).unwrap();
                for k in 0..50 {
                    let s = 0.05 + 3.0 * k as f64 / 49.0;
                    assert!(
                        b.conservation_residual(s).abs() <= 1e-8,
                        "n={n} c={c} s={s}: {}",
                        b.conservation_residual(s)
                    );
                }
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_form_derivative() {
        // differentiate the integrated g numerically and compare with the
        // conservation-law derivative
        let b = hyperbolic_barrier(3, 0.9).unwrap();
        let h = 1e-5;
        for &s in &[0.3, 0.8, 1.5, 2.5] {
            let fd = (b.g_at(s + h) - b.g_at(s - h)) / (2.0 * h);
            let cf = b.g_prime_at(s);
            assert!((fd - cf).abs() < 1e-6 * (1.0 + cf.abs()), "s={s}: {fd} vs {cf}");
        }
    }

    #[test]
    fn wall_value_blows_up_as_c_tends_to_one() {
        let mut prev = 0.0;
        for j in 1..=6 {
            let c = 1.0 - 10f64.powi(-j);
            let b = hyperbolic_barrier(3, c).unwrap();
            assert!(b.g_zero() > prev, "j={j}: {} vs {prev}", b.g_zero());
            prev = b.g_zero();
        }
        assert!(prev > 5.0, "g(0) should grow without bound, got {prev}");
    }

    #[test]
    fn profile_decreases_to_zero() {
        let b = hyperbolic_barrier(4, 0.9).unwrap();
        for k in 1..b.s_grid.len() {
            assert!(b.g[k] <= b.g[k - 1] + 1e-15);
            assert!(b.g_prime[k] < 0.0 || b.g_prime[k].abs() < 1e-12);
        }
        assert!(b.g.last().unwrap().abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(hyperbolic_barrier(2, 0.5).is_err());
        assert!(hyperbolic_barrier(3, 1.0).is_err());
        assert!(hyperbolic_barrier(3, 0.0).is_err());
    }
}
