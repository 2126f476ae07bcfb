//! Chart for the quotient of hyperbolic n-space (half-space model,
//! `g_ij = δ_ij / x_n²`) by the dilations `x ↦ e^t x`. The unit hemisphere
//! `S = {|x| = 1}` meets every orbit once and carries the metric of hyperbolic
//! (n-1)-space; geodesic polar coordinates `(ρ, θ)` around `o = (0,…,0,1)`
//! give `dρ² + sinh²ρ dθ²` when `n = 3`. For `n > 3` the angular coefficient
//! is `sinh^{2(n-2)}ρ`, which reproduces the correct radial Laplacian
//! `Δρ = (n-2) coth ρ` of the full quotient on a two-dimensional grid.
//!
//! The orbit through `x ∈ S` has speed `1/x_n`, so the weight is
//! `V = 1/x_n = cosh ρ`; the drift is radial, points to `o`, and has
//! magnitude `tanh ρ`.

use super::{AmbientMetric, ChartBox, EdgeKind, LiftMap, QuotientChart, SymMat};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Mean-curvature vector of the dilation orbit through `x` (|x| = 1 assumed),
/// in half-space coordinates: `H_k = -x_n² x_k` for `k < n` and
/// `H_n = x_n Σ_{k<n} x_k²`.
pub fn hyperbolic_orbit_curvature(n: usize, x: &[f64]) -> Vec<f64> {
    let xn = x[n - 1];
    let mut h = vec![0.0; n];
    let mut sum = 0.0;
    for k in 0..n - 1 {
        h[k] = -xn * xn * x[k];
        sum += x[k] * x[k];
    }
    h[n - 1] = xn * sum;
    h
}

/// Point of the hemisphere at geodesic polar coordinates `(ρ, θ)` from `o`.
/// Only the first two horizontal coordinates are swept; for `n > 3` the chart
/// covers the totally geodesic 2-plane through `o`.
pub fn hemisphere_point(n: usize, rho: f64, theta: f64) -> Vec<f64> {
    let sin_sigma = rho.tanh();
    let cos_sigma = 1.0 / rho.cosh();
    let mut x = vec![0.0; n];
    x[0] = sin_sigma * theta.cos();
    x[1] = sin_sigma * theta.sin();
    x[n - 1] = cos_sigma;
    x
}

/// Geodesic polar chart on the ball of radius `geodesic_radius` in the
/// quotient hemisphere.
pub fn hyperbolic_chart(n: usize, geodesic_radius: f64) -> Result<QuotientChart> {
    if n < 3 {
        return Err(Error::ChartInvalid(format!(
            "dilation quotient needs ambient dimension at least 3, got {n} (use the 1d radial chart instead)"
        )));
    }
    if !(geodesic_radius > 0.0) {
        return Err(Error::ChartInvalid("geodesic radius must be positive".into()));
    }
    let k = geodesic_radius;
    let pow = 2 * (n as i32 - 2);
    let metric = move |p: &[f64]| -> SymMat {
        let rho = p[0];
        SymMat::diag(2, 1.0, rho.sinh().powi(pow).max(1e-300))
    };
    // drift from the orbit-curvature formula projected onto the chart frame
    let nn = n;
    let drift = move |p: &[f64]| -> [f64; 2] {
        let (rho, theta) = (p[0], p[1]);
        let x = hemisphere_point(nn, rho, theta);
        let h = hyperbolic_orbit_curvature(nn, &x);
        let xn = x[nn - 1];
        // ∂ρ x = sech ρ (cos σ cos θ, cos σ sin θ, 0, …, -sin σ)
        let sin_sigma = rho.tanh();
        let cos_sigma = 1.0 / rho.cosh();
        let sech = 1.0 / rho.cosh();
        let mut dpx = vec![0.0; nn];
        dpx[0] = sech * cos_sigma * theta.cos();
        dpx[1] = sech * cos_sigma * theta.sin();
        dpx[nn - 1] = -sech * sin_sigma;
        // ∂θ x = (-sin σ sin θ, sin σ cos θ, 0, …, 0)
        let mut dtx = vec![0.0; nn];
        dtx[0] = -sin_sigma * theta.sin();
        dtx[1] = sin_sigma * theta.cos();
        let inner = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() / (xn * xn)
        };
        let j_rho = inner(&h, &dpx); // g_ρρ = 1
        let g_tt = rho.sinh().powi(pow).max(1e-300);
        let j_theta = inner(&h, &dtx) / g_tt;
        [j_rho, j_theta]
    };
    let weight = move |p: &[f64]| -> f64 { p[0].cosh() };
    let lift_n = n;
    let to_ambient = move |p: &[f64], t: f64| -> Vec<f64> {
        let x = hemisphere_point(lift_n, p[0], p[1]);
        x.iter().map(|c| c * t.exp()).collect()
    };
    let proj_n = n;
    let project = move |q: &[f64]| -> Option<([f64; 2], f64)> {
        let norm: f64 = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || q[proj_n - 1] <= 0.0 {
            return None;
        }
        let t = norm.ln();
        let xn = q[proj_n - 1] / norm;
        let rho = (1.0 / xn).acosh();
        let theta = (q[1] / norm).atan2(q[0] / norm).rem_euclid(TAU);
        Some(([rho, theta], t))
    };
    let bd = move |p: &[f64]| -> f64 { k - p[0] };
    Ok(QuotientChart {
        dim: 2,
        chart_box: ChartBox {
            lo: [0.0, 0.0],
            hi: [k, TAU],
            edges: [
                [EdgeKind::Axis, EdgeKind::Boundary],
                [EdgeKind::Periodic, EdgeKind::Periodic],
            ],
        },
        metric: Box::new(metric),
        drift: Box::new(drift),
        weight: Some(Box::new(weight)),
        lift: Some(LiftMap {
            ambient: AmbientMetric::HalfSpace { n },
            to_ambient: Box::new(to_ambient),
            project: Box::new(project),
        }),
        boundary_distance: Some(Box::new(bd)),
        label: format!("hyperbolic(n={n})"),
    })
}
