//! Independent numerical checks of the structural guarantees: maximum and
//! comparison principles, the lift identity between the reduced and ambient
//! problems, the boundary mean-curvature decomposition, and an empirical
//! gradient monitor.

use crate::error::{Error, Result};
use crate::flux::FluxProfile;
use crate::geometry::{
    ambient_metric_diag, hypersurface_mean_curvature, lift_field, AmbientMetric, QuotientChart,
};
use crate::solver::grid::FieldInterp;
use crate::solver::operator::{gradient_norm_at, ChartData};
use crate::solver::SolutionField;
use serde::Serialize;

/// One named pass/fail entry.
#[derive(Debug, Clone, Serialize)]
pub struct Flag {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Aggregated verification results, serialized into the solve report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerificationReport {
    pub max_principle_margin: Option<f64>,
    pub comparison_margins: Vec<f64>,
    pub lift_residual: Option<f64>,
    pub lift_gradient_mismatch: Option<f64>,
    pub hahb_mismatch: Option<f64>,
    pub gradient_monitor: Option<f64>,
    pub gradient_at_boundary: Option<bool>,
    pub flags: Vec<Flag>,
}

/// `sup_∂|ψ| - sup_Λ|v|`; nonnegative (up to solver slack) by the maximum
/// principle, since constants solve the reduced equation.
pub fn check_max_principle(field: &SolutionField, tolerance: f64) -> (f64, bool) {
    let mut sup_all: f64 = 0.0;
    let mut sup_bd: f64 = 0.0;
    for idx in 0..field.grid.total() {
        let a = field.values[idx].abs();
        sup_all = sup_all.max(a);
        if field.grid.is_boundary(idx) {
            sup_bd = sup_bd.max(a);
        }
    }
    let margin = sup_bd - sup_all;
    (margin, margin >= -10.0 * tolerance)
}

/// Node-wise minimum of `v2 - v1` for boundary data `ψ1 ≤ ψ2` on the same
/// chart and profile.
pub fn check_comparison(v1: &SolutionField, v2: &SolutionField, tolerance: f64) -> Result<(f64, bool)> {
    if v1.values.len() != v2.values.len() {
        return Err(Error::Precondition("fields live on different grids".into()));
    }
    for idx in 0..v1.grid.total() {
        if v1.grid.is_boundary(idx) && v1.values[idx] > v2.values[idx] + 1e-12 {
            return Err(Error::Precondition(format!(
                "boundary data not ordered at node {idx}: {} > {}",
                v1.values[idx], v2.values[idx]
            )));
        }
    }
    let margin = v1
        .values
        .iter()
        .zip(&v2.values)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    Ok((margin, margin >= -10.0 * tolerance))
}

/// Ambient conservative operator `div(w F(σ) ∇u)` (flat or half-space
/// coordinates) at `q` by staggered differences with step `h` on the lifted
/// field; `None` if the stencil leaves the tube.
fn ambient_divergence(
    u: &dyn Fn(&[f64]) -> Option<f64>,
    metric: &AmbientMetric,
    profile: &FluxProfile,
    q: &[f64],
    h: f64,
) -> Option<f64> {
    let m = metric.dim();
    // gradient magnitudes at half nodes need u on a small cloud
    let grad_at = |x: &[f64]| -> Option<Vec<f64>> {
        let mut g = vec![0.0; m];
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        for k in 0..m {
            xp.copy_from_slice(x);
            xm.copy_from_slice(x);
            xp[k] += 0.5 * h;
            xm[k] -= 0.5 * h;
            g[k] = (u(&xp)? - u(&xm)?) / h;
        }
        Some(g)
    };
    let flux = |x: &[f64], dir: usize| -> Option<f64> {
        let g = grad_at(x)?;
        let gd = ambient_metric_diag(metric, x);
        // |∇u|² = g^{ii} (∂u)² with g^{ii} = 1/gd
        let sig2: f64 = g.iter().map(|c| c * c).sum::<f64>() / gd;
        let sig = profile.regularize(sig2.sqrt());
        let f = profile.a(sig) / sig;
        // conservative weight: sqrt(det g) g^{ii} = gd^{m/2} / gd
        let w = gd.powf(m as f64 / 2.0 - 1.0);
        Some(w * f * g[dir])
    };
    let mut div = 0.0;
    let mut xp = q.to_vec();
    let mut xm = q.to_vec();
    for k in 0..m {
        xp.copy_from_slice(q);
        xm.copy_from_slice(q);
        xp[k] += 0.5 * h;
        xm[k] -= 0.5 * h;
        div += (flux(&xp, k)? - flux(&xm, k)?) / h;
    }
    let gd = ambient_metric_diag(metric, q);
    Some(div / gd.powf(m as f64 / 2.0))
}

pub struct ReductionCheck {
    pub lift_residual: f64,
    pub lift_gradient_mismatch: f64,
    pub samples: usize,
}

/// Sample the ambient tube over the chart, evaluate the ambient operator on
/// `u = v ∘ π`, and compare `|∇u|` with `|∇v| ∘ π`. Both quantities go to
/// zero under refinement when `v` solves the reduced problem.
pub fn check_reduction(
    chart: &QuotientChart,
    profile: &FluxProfile,
    field: &SolutionField,
) -> Result<ReductionCheck> {
    let lift = chart
        .lift
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("chart `{}` has no lift", chart.label)))?;
    let interp = field.interpolant()?;
    let grid = &field.grid;
    // the ambient step follows the first-axis spacing; periodic directions
    // wrap and need no margin
    let h = grid.axes[0].h;
    let margin = 3.0 * h;
    let sampler = lift_field(chart, Box::new(move |p: &[f64]| interp.eval(p)))?.with_margin(margin);
    let metric = &lift.ambient;

    // chart-side gradient norm field, interpolated for the mismatch check
    let cd = ChartData::compile(chart, grid.clone())?;
    let mut signorm = vec![0.0; grid.total()];
    for &idx in &grid.interior_nodes() {
        signorm[idx] = gradient_norm_at(&cd, &field.values, idx);
    }
    // boundary nodes: copy inward neighbor so the interpolant stays sane
    for idx in grid.boundary_nodes() {
        let (i0, i1) = grid.multi(idx);
        let inner = if i0 + 1 == grid.axes[0].n { i0 - 1 } else { i0 + 1 };
        let i1c = i1.min(if chart.dim == 2 { grid.axes[1].n - 1 } else { 0 });
        signorm[idx] = signorm[grid.idx(inner, i1c)];
    }
    let sig_interp = FieldInterp::new(grid, &signorm)?;

    let mut max_res: f64 = 0.0;
    let mut max_mismatch: f64 = 0.0;
    let mut used = 0usize;
    let n_samples = 6usize;
    let lo0 = chart.chart_box.lo[0];
    let hi0 = chart.chart_box.hi[0];
    // sample a band that does not move under refinement, so end effects of
    // the interpolant stay away from it at every level
    let band_lo = (lo0 + 1.2 * margin).max(lo0 + 0.30 * (hi0 - lo0));
    let band_hi = (hi0 - 1.2 * margin).min(hi0 - 0.15 * (hi0 - lo0));
    if band_hi <= band_lo {
        return Err(Error::Precondition("grid too coarse for an interior sample band".into()));
    }
    for i in 0..n_samples {
        for j in 0..n_samples {
            for k in 0..3 {
                let c0 = band_lo + (band_hi - band_lo) * i as f64 / (n_samples - 1) as f64;
                let mut p = [c0, 0.0];
                if chart.dim == 2 {
                    let lo1 = chart.chart_box.lo[1];
                    let hi1 = chart.chart_box.hi[1];
                    p[1] = lo1 + (hi1 - lo1) * (j as f64 + 0.31) / n_samples as f64;
                } else if j > 0 {
                    continue;
                }
                let t = 0.05 + 0.09 * k as f64;
                let q = (lift.to_ambient)(&p[..chart.dim], t);
                let ufun = |x: &[f64]| sampler.eval(x);
                if let Some(res) = ambient_divergence(&ufun, metric, profile, &q, h) {
                    max_res = max_res.max(res.abs());
                    // ambient gradient norm vs chart gradient norm at π(q)
                    if let Some(g) = sampler.gradient_fd(&q, h) {
                        let gd = ambient_metric_diag(metric, &q);
                        let amb: f64 =
                            (g.iter().map(|c| c * c).sum::<f64>() / gd).sqrt();
                        let chart_side = sig_interp.eval(&p[..chart.dim]);
                        max_mismatch = max_mismatch.max((amb - chart_side).abs());
                        used += 1;
                    }
                }
            }
        }
    }
    if used == 0 {
        return Err(Error::Precondition("no ambient samples stayed inside the tube".into()));
    }
    Ok(ReductionCheck { lift_residual: max_res, lift_gradient_mismatch: max_mismatch, samples: used })
}

/// Compare the ambient mean curvature of the lifted boundary cylinder with
/// the chart-side decomposition `H_∂Λ + <J, η>`, returning the worst relative
/// mismatch over `samples` boundary points.
pub fn check_hahb(chart: &QuotientChart, samples: usize) -> Result<f64> {
    let lift = chart
        .lift
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("chart `{}` has no lift", chart.label)))?;
    if chart.dim != 2 {
        return Err(Error::Precondition("boundary decomposition check needs a 2d chart".into()));
    }
    let r_bd = chart.chart_box.hi[0];
    let metric = &lift.ambient;
    if metric.dim() != 3 {
        return Err(Error::Precondition("ambient second fundamental form path needs dim 3".into()));
    }
    let gamma = move |theta: f64| [r_bd, theta];
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let theta = std::f64::consts::TAU * s as f64 / samples as f64;
        // chart side
        let h_chart = chart.geodesic_curvature(&gamma, theta, &[-1.0, 0.0]);
        let p = [r_bd, theta];
        let g = chart.metric_at(&p);
        let j = chart.drift_at(&p);
        let j_eta = -(g.a[0][0] * j[0] + g.a[0][1] * j[1]) / g.a[0][0].sqrt();
        let chart_side = h_chart + j_eta;
        // ambient side: second fundamental form of the lifted cylinder
        let surf = |u: f64, t: f64| (lift.to_ambient)(&[r_bd, u], t);
        let interior_chart = [r_bd * 0.98, theta];
        let interior = (lift.to_ambient)(&interior_chart, 0.0);
        let h_amb = hypersurface_mean_curvature(metric, &surf, theta, 0.0, 2e-4, &interior);
        let rel = (h_amb - chart_side).abs() / chart_side.abs().max(1e-12);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Empirical gradient monitor: sup of `|∇v|` over interior nodes, where it
/// sits, and whether it is attained against the boundary.
pub fn gradient_monitor(cd: &ChartData, field: &SolutionField) -> (f64, [f64; 2], bool) {
    crate::solver::gradient_monitor(cd, field)
}

/// The cheap checks every solve gets: maximum principle and the gradient
/// monitor.
pub fn basic_report(
    chart: &QuotientChart,
    field: &SolutionField,
    tolerance: f64,
) -> Result<VerificationReport> {
    let cd = ChartData::compile(chart, field.grid.clone())?;
    let (margin, pass) = check_max_principle(field, tolerance);
    let (gsup, at, near_bd) = gradient_monitor(&cd, field);
    let mut report = VerificationReport {
        max_principle_margin: Some(margin),
        gradient_monitor: Some(gsup),
        gradient_at_boundary: Some(near_bd),
        ..Default::default()
    };
    report.flags.push(Flag {
        name: "max_principle".into(),
        pass,
        detail: format!("margin {margin:.3e}"),
    });
    report.flags.push(Flag {
        name: "gradient_monitor".into(),
        pass: true,
        detail: format!("sup |∇v| = {gsup:.6e} at ({:.4}, {:.4})", at[0], at[1]),
    });
    Ok(report)
}
