//! Quotient-space charts: bounded coordinate patches carrying the submersion
//! metric, the drift field `J` (projected orbit mean curvature), the orbit
//! volume weight `V`, and an optional lift back to the ambient manifold.
//!
//! All built-in charts are logically rectangular: polar `(r, θ)` for disks and
//! balls, an interval for one-dimensional quotients, Fermi `(s, y)` for strips
//! around a hypersurface. Curved physical boundaries are never cut-celled.

mod ambient;
mod fermi;
mod helicoidal;
mod hyperbolic;
mod rotational;

pub use ambient::{
    ambient_inner, ambient_metric_diag, christoffel, hypersurface_mean_curvature, AmbientMetric,
};
pub use fermi::fermi_strip_chart;
pub use helicoidal::{
    helicoidal_chart, helicoidal_drift_cartesian, helicoidal_mean_convexity,
    helicoidal_metric_cartesian, ConvexityReport, ConvexitySample, CurveSample, PlanarDomain,
};
pub use hyperbolic::{hyperbolic_chart, hyperbolic_orbit_curvature};
pub use rotational::rotational_chart;

use crate::error::{Error, Result};

/// Edge semantics of a chart box side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Dirichlet boundary of the reduced domain
    Boundary,
    /// periodic identification (angular coordinates)
    Periodic,
    /// removable coordinate singularity (polar axis); the grid is offset half
    /// a cell and ghost values come from even reflection
    Axis,
}

/// Product-of-intervals chart domain with per-edge tags.
#[derive(Debug, Clone)]
pub struct ChartBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// `edges[axis][0]` tags the low side, `[1]` the high side
    pub edges: [[EdgeKind; 2]; 2],
}

/// Symmetric matrix of dimension 1 or 2.
#[derive(Debug, Clone, Copy)]
pub struct SymMat {
    pub dim: usize,
    pub a: [[f64; 2]; 2],
}

impl SymMat {
    pub fn diag(dim: usize, d0: f64, d1: f64) -> Self {
        let mut a = [[0.0; 2]; 2];
        a[0][0] = d0;
        if dim > 1 {
            a[1][1] = d1;
        }
        Self { dim, a }
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.a[0][0],
            _ => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
        }
    }

    pub fn inverse(&self) -> SymMat {
        match self.dim {
            1 => SymMat::diag(1, 1.0 / self.a[0][0], 0.0),
            _ => {
                let d = self.det();
                SymMat {
                    dim: 2,
                    a: [
                        [self.a[1][1] / d, -self.a[0][1] / d],
                        [-self.a[1][0] / d, self.a[0][0] / d],
                    ],
                }
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self.dim {
            1 => self.a[0][0],
            _ => {
                let tr = self.a[0][0] + self.a[1][1];
                let det = self.det();
                let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                tr / 2.0 - disc
            }
        }
    }

    /// quadratic form on a (contravariant) vector
    pub fn quad(&self, v: &[f64; 2]) -> f64 {
        match self.dim {
            1 => self.a[0][0] * v[0] * v[0],
            _ => {
                self.a[0][0] * v[0] * v[0]
                    + 2.0 * self.a[0][1] * v[0] * v[1]
                    + self.a[1][1] * v[1] * v[1]
            }
        }
    }
}

pub type MetricFn = dyn Fn(&[f64]) -> SymMat + Send + Sync;
pub type VectorFn = dyn Fn(&[f64]) -> [f64; 2] + Send + Sync;
pub type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Lift of the chart into the ambient manifold along the group direction.
pub struct LiftMap {
    pub ambient: AmbientMetric,
    /// chart point + group parameter -> ambient coordinates
    pub to_ambient: Box<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>,
    /// ambient point -> (chart point, group parameter); `None` off the chart
    pub project: Box<dyn Fn(&[f64]) -> Option<([f64; 2], f64)> + Send + Sync>,
}

/// A bounded chart of the orbit space.
pub struct QuotientChart {
    pub dim: usize,
    pub chart_box: ChartBox,
    pub metric: Box<MetricFn>,
    pub drift: Box<VectorFn>,
    pub weight: Option<Box<ScalarFn>>,
    pub lift: Option<LiftMap>,
    /// analytic distance to the Dirichlet boundary when the chart is radial
    pub boundary_distance: Option<Box<ScalarFn>>,
    pub label: String,
}

impl QuotientChart {
    pub fn metric_at(&self, x: &[f64]) -> SymMat {
        (self.metric)(x)
    }

    pub fn drift_at(&self, x: &[f64]) -> [f64; 2] {
        (self.drift)(x)
    }

    pub fn weight_at(&self, x: &[f64]) -> Option<f64> {
        self.weight.as_ref().map(|w| w(x))
    }

    /// Christoffel symbols of the chart metric, by central differencing of the
    /// metric components. `gamma[k][i][j]` is `Γ^k_ij`.
    pub fn christoffels(&self, x: &[f64]) -> [[[f64; 2]; 2]; 2] {
        let dim = self.dim;
        let ginv = self.metric_at(x).inverse();
        // ∂_c g_ab
        let mut dg = [[[0.0f64; 2]; 2]; 2];
        let mut xp = [0.0f64; 2];
        let mut xm = [0.0f64; 2];
        for c in 0..dim {
            let step = 1e-6 * (1.0 + x[c].abs());
            xp[..dim].copy_from_slice(&x[..dim]);
            xm[..dim].copy_from_slice(&x[..dim]);
            xp[c] += step;
            xm[c] -= step;
            let gp = self.metric_at(&xp[..dim]);
            let gm = self.metric_at(&xm[..dim]);
            for i in 0..dim {
                for j in 0..dim {
                    dg[c][i][j] = (gp.a[i][j] - gm.a[i][j]) / (2.0 * step);
                }
            }
        }
        let mut gamma = [[[0.0f64; 2]; 2]; 2];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = 0.0;
                    for l in 0..dim {
                        s += ginv.a[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * s;
                }
            }
        }
        gamma
    }

    /// Geodesic curvature of a chart curve with respect to the unit normal
    /// whose inner product with `interior_hint` is positive. `gamma` need not
    /// be unit speed.
    pub fn geodesic_curvature<F>(&self, gamma: &F, t: f64, interior_hint: &[f64; 2]) -> f64
    where
        F: Fn(f64) -> [f64; 2],
    {
        let h = 1e-5;
        let p = gamma(t);
        let pp = gamma(t + h);
        let pm = gamma(t - h);
        let vel = [(pp[0] - pm[0]) / (2.0 * h), (pp[1] - pm[1]) / (2.0 * h)];
        let acc = [
            (pp[0] - 2.0 * p[0] + pm[0]) / (h * h),
            (pp[1] - 2.0 * p[1] + pm[1]) / (h * h),
        ];
        let ga = self.christoffels(&p);
        let mut cov = [0.0f64; 2];
        for k in 0..2 {
            cov[k] = acc[k];
            for i in 0..2 {
                for j in 0..2 {
                    cov[k] += ga[k][i][j] * vel[i] * vel[j];
                }
            }
        }
        let g = self.metric_at(&p);
        // unit normal: solve <n, vel>_g = 0 with |n|_g = 1, oriented by the hint
        let gv = [
            g.a[0][0] * vel[0] + g.a[0][1] * vel[1],
            g.a[1][0] * vel[0] + g.a[1][1] * vel[1],
        ];
        let mut n = [-gv[1], gv[0]];
        // n is g-orthogonal to vel up to the inverse metric; fix properly:
        // want n with sum_j g_ij n^j orthogonal... simplest: candidate in the
        // inverse-metric image of the euclidean normal covector
        let ginv = g.inverse();
        let cov_n = [-gv[1], gv[0]]; // euclidean rotation of the covector g·vel
        n[0] = ginv.a[0][0] * cov_n[0] + ginv.a[0][1] * cov_n[1];
        n[1] = ginv.a[1][0] * cov_n[0] + ginv.a[1][1] * cov_n[1];
        let norm = g.quad(&n).sqrt();
        n[0] /= norm;
        n[1] /= norm;
        let hint_inner = g.a[0][0] * n[0] * interior_hint[0]
            + g.a[0][1] * (n[0] * interior_hint[1] + n[1] * interior_hint[0])
            + g.a[1][1] * n[1] * interior_hint[1];
        let sign = if hint_inner >= 0.0 { 1.0 } else { -1.0 };
        let speed2 = g.quad(&vel);
        sign * (g.a[0][0] * cov[0] * n[0]
            + g.a[0][1] * (cov[0] * n[1] + cov[1] * n[0])
            + g.a[1][1] * cov[1] * n[1])
            / speed2
    }
}

/// Reduced Dirichlet problem: chart, boundary data, optional analytic mean
/// curvature of the inner parallels.
pub struct DomainSpec {
    pub chart: QuotientChart,
    /// boundary data, defined on the whole chart box so barrier strips can
    /// extend it inward
    pub psi: Box<ScalarFn>,
    /// `H(d, tangential parameter)` of the parallel at depth `d`, with respect
    /// to the interior normal; available analytically for the built-ins
    pub boundary_curvature: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl DomainSpec {
    pub fn new(chart: QuotientChart, psi: Box<ScalarFn>) -> Self {
        Self { chart, psi, boundary_curvature: None }
    }
}

/// Ambient field `u = v ∘ π` sampled through a chart interpolant.
pub struct AmbientField<'a> {
    chart: &'a QuotientChart,
    v: Box<dyn Fn(&[f64]) -> f64 + 'a>,
    margin: f64,
}

/// Build the ambient sampler for `u(q) = v(π(q))` over the tube above the
/// chart box. `v` is any chart-side evaluator (typically a solution
/// interpolant). Queries projecting outside the box return `None`.
pub fn lift_field<'a>(
    chart: &'a QuotientChart,
    v: Box<dyn Fn(&[f64]) -> f64 + 'a>,
) -> Result<AmbientField<'a>> {
    if chart.lift.is_none() {
        return Err(Error::Precondition(format!("chart `{}` has no lift", chart.label)));
    }
    Ok(AmbientField { chart, v, margin: 0.0 })
}

impl<'a> AmbientField<'a> {
    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn eval(&self, q: &[f64]) -> Option<f64> {
        let lift = self.chart.lift.as_ref().unwrap();
        let (p, _t) = (lift.project)(q)?;
        let bx = &self.chart.chart_box;
        for k in 0..self.chart.dim {
            // periodic axes wrap; others must stay inside (with margin)
            if self.chart.chart_box.edges[k][0] == EdgeKind::Periodic {
                continue;
            }
            let lo = bx.lo[k]
                + if bx.edges[k][0] == EdgeKind::Boundary { self.margin } else { 0.0 };
            let hi = bx.hi[k]
                - if bx.edges[k][1] == EdgeKind::Boundary { self.margin } else { 0.0 };
            if p[k] < lo - 1e-12 || p[k] > hi + 1e-12 {
                return None;
            }
        }
        Some((self.v)(&p[..self.chart.dim]))
    }

    /// Euclidean-coordinate finite-difference gradient with step `h`.
    pub fn gradient_fd(&self, q: &[f64], h: f64) -> Option<Vec<f64>> {
        let m = q.len();
        let mut g = vec![0.0; m];
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        for k in 0..m {
            qp.copy_from_slice(q);
            qm.copy_from_slice(q);
            qp[k] += h;
            qm[k] -= h;
            g[k] = (self.eval(&qp)? - self.eval(&qm)?) / (2.0 * h);
        }
        Some(g)
    }

    pub fn ambient(&self) -> &AmbientMetric {
        &self.chart.lift.as_ref().unwrap().ambient
    }
}
