//! Fermi strip chart inside the hyperbolic quotient: coordinates `(s, y)`
//! where `s` is the distance to a totally geodesic hypersurface `T` at
//! distance `rho_t` from the pole `o`, on the side away from `o`. The angular
//! coefficient `cosh^{2(n-2)} s` reproduces `Δs = (n-2) tanh s` of the full
//! quotient for functions of `s`, which is all the barrier checks evaluate.
//!
//! The drift is computed exactly in the hyperboloid model of the totally
//! geodesic 2-plane spanned by `o` and the normal of `T`:
//! `cosh ρ(s, y) = cosh s cosh y cosh rho_t + sinh s sinh rho_t`, and
//! `J = -tanh ρ ∇ρ`.

use super::{ChartBox, EdgeKind, QuotientChart, SymMat};
use crate::error::{Error, Result};

pub fn fermi_strip_chart(
    n: usize,
    rho_t: f64,
    s_range: (f64, f64),
    half_width: f64,
) -> Result<QuotientChart> {
    if n < 3 {
        return Err(Error::ChartInvalid("strip chart needs n >= 3".into()));
    }
    if !(rho_t > 0.0) {
        return Err(Error::ChartInvalid("the focus offset rho_t must be positive".into()));
    }
    if !(s_range.0 >= 0.0 && s_range.1 > s_range.0 && half_width > 0.0) {
        return Err(Error::ChartInvalid("bad strip extents".into()));
    }
    let pow = 2 * (n as i32 - 2);
    let metric = move |p: &[f64]| -> SymMat { SymMat::diag(2, 1.0, p[0].cosh().powi(pow)) };
    let drift = move |p: &[f64]| -> [f64; 2] {
        let (s, y) = (p[0], p[1]);
        let cosh_rho = s.cosh() * y.cosh() * rho_t.cosh() + s.sinh() * rho_t.sinh();
        let rho = cosh_rho.acosh();
        let sinh_rho = (cosh_rho * cosh_rho - 1.0).sqrt().max(1e-300);
        let d_s = (s.sinh() * y.cosh() * rho_t.cosh() + s.cosh() * rho_t.sinh()) / sinh_rho;
        let d_y = (s.cosh() * y.sinh() * rho_t.cosh()) / sinh_rho;
        let g_yy = s.cosh().powi(pow);
        [-rho.tanh() * d_s, -rho.tanh() * d_y / g_yy]
    };
    Ok(QuotientChart {
        dim: 2,
        chart_box: ChartBox {
            lo: [s_range.0, -half_width],
            hi: [s_range.1, half_width],
            edges: [[EdgeKind::Boundary; 2]; 2],
        },
        metric: Box::new(metric),
        drift: Box::new(drift),
        weight: None,
        lift: None,
        boundary_distance: None,
        label: format!("fermi_strip(n={n}, rho_t={rho_t})"),
    })
}
