//! Ambient-manifold numerics shared by the lift checks: metric components,
//! Christoffel symbols, and a finite-difference second fundamental form for
//! parametrized hypersurfaces in three-dimensional ambients.

/// Ambient geometry a chart lifts into.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmbientMetric {
    Euclidean { dim: usize },
    /// upper half space `{x_n > 0}` with metric `δ_ij / x_n²`
    HalfSpace { n: usize },
}

impl AmbientMetric {
    pub fn dim(&self) -> usize {
        match self {
            AmbientMetric::Euclidean { dim } => *dim,
            AmbientMetric::HalfSpace { n } => *n,
        }
    }
}

/// Diagonal metric coefficient `g_ii` at `x` (both ambients are conformal to
/// the flat metric, so a single scalar suffices).
pub fn ambient_metric_diag(metric: &AmbientMetric, x: &[f64]) -> f64 {
    match metric {
        AmbientMetric::Euclidean { .. } => 1.0,
        AmbientMetric::HalfSpace { n } => {
            let xn = x[*n - 1];
            1.0 / (xn * xn)
        }
    }
}

pub fn ambient_inner(metric: &AmbientMetric, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let c = ambient_metric_diag(metric, x);
    c * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

/// `Γ^k_ij` of the ambient metric at `x`.
pub fn christoffel(metric: &AmbientMetric, x: &[f64], k: usize, i: usize, j: usize) -> f64 {
    match metric {
        AmbientMetric::Euclidean { .. } => 0.0,
        AmbientMetric::HalfSpace { n } => {
            let n = *n;
            let xn = x[n - 1];
            let last = n - 1;
            if k != last {
                // Γ^k_in = Γ^k_ni = -δ_ik / x_n for k < n
                if i == k && j == last {
                    -1.0 / xn
                } else if j == k && i == last {
                    -1.0 / xn
                } else {
                    0.0
                }
            } else if i == last && j == last {
                -1.0 / xn
            } else if i == j {
                1.0 / xn
            } else {
                0.0
            }
        }
    }
}

/// Non-normalized mean curvature (trace of the shape operator) of a surface
/// `phi(u, v)` in a three-dimensional ambient, with respect to the unit normal
/// oriented toward `interior_point`. Derivatives of `phi` are taken by central
/// differences with step `h`.
pub fn hypersurface_mean_curvature<F>(
    metric: &AmbientMetric,
    phi: &F,
    u: f64,
    v: f64,
    h: f64,
    interior_point: &[f64],
) -> f64
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    assert_eq!(metric.dim(), 3, "second fundamental form path expects a 3d ambient");
    let p = phi(u, v);
    let pu = phi(u + h, v);
    let mu = phi(u - h, v);
    let pv = phi(u, v + h);
    let mv = phi(u, v - h);
    let puv = phi(u + h, v + h);
    let puv2 = phi(u + h, v - h);
    let puv3 = phi(u - h, v + h);
    let puv4 = phi(u - h, v - h);

    let d = 3usize;
    let mut tu = vec![0.0; d];
    let mut tv = vec![0.0; d];
    let mut duu = vec![0.0; d];
    let mut dvv = vec![0.0; d];
    let mut duv = vec![0.0; d];
    for k in 0..d {
        tu[k] = (pu[k] - mu[k]) / (2.0 * h);
        tv[k] = (pv[k] - mv[k]) / (2.0 * h);
        duu[k] = (pu[k] - 2.0 * p[k] + mu[k]) / (h * h);
        dvv[k] = (pv[k] - 2.0 * p[k] + mv[k]) / (h * h);
        duv[k] = (puv[k] - puv2[k] - puv3[k] + puv4[k]) / (4.0 * h * h);
    }

    // metric-orthogonal normal: G^{-1} applied to the euclidean cross product
    // of the coordinate tangents annihilates both tangents under G
    let cross = [
        tu[1] * tv[2] - tu[2] * tv[1],
        tu[2] * tv[0] - tu[0] * tv[2],
        tu[0] * tv[1] - tu[1] * tv[0],
    ];
    let c = ambient_metric_diag(metric, &p);
    let mut nu: Vec<f64> = cross.iter().map(|w| w / c).collect();
    let nn = ambient_inner(metric, &p, &nu, &nu).sqrt();
    for w in nu.iter_mut() {
        *w /= nn;
    }
    let toward: Vec<f64> = interior_point.iter().zip(&p).map(|(a, b)| a - b).collect();
    if ambient_inner(metric, &p, &nu, &toward) < 0.0 {
        for w in nu.iter_mut() {
            *w = -*w;
        }
    }

    // covariant second derivatives: ∂²φ + Γ(∂φ, ∂φ)
    let gam = |a: &[f64], b: &[f64], k: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                let g = christoffel(metric, &p, k, i, j);
                if g != 0.0 {
                    s += g * a[i] * b[j];
                }
            }
        }
        s
    };
    let mut ii = [[0.0f64; 2]; 2];
    for k in 0..d {
        let cuu = duu[k] + gam(&tu, &tu, k);
        let cvv = dvv[k] + gam(&tv, &tv, k);
        let cuv = duv[k] + gam(&tu, &tv, k);
        ii[0][0] += c * cuu * nu[k];
        ii[1][1] += c * cvv * nu[k];
        ii[0][1] += c * cuv * nu[k];
    }
    ii[1][0] = ii[0][1];

    let e = ambient_inner(metric, &p, &tu, &tu);
    let f = ambient_inner(metric, &p, &tu, &tv);
    let g2 = ambient_inner(metric, &p, &tv, &tv);
    let det = e * g2 - f * f;
    // trace of I^{-1} II
    (g2 * ii[0][0] - 2.0 * f * ii[0][1] + e * ii[1][1]) / det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_cylinder_mean_curvature() {
        let metric = AmbientMetric::Euclidean { dim: 3 };
        let r = 2.0;
        let phi = |u: f64, v: f64| vec![r * u.cos(), r * u.sin(), v];
        let h = hypersurface_mean_curvature(&metric, &phi, 0.3, 0.0, 1e-4, &[0.0, 0.0, 0.0]);
        assert!((h - 1.0 / r).abs() < 1e-6, "H = {h}");
    }

    #[test]
    fn euclidean_sphere_mean_curvature() {
        let metric = AmbientMetric::Euclidean { dim: 3 };
        let r = 1.5;
        let phi =
            |u: f64, v: f64| vec![r * v.sin() * u.cos(), r * v.sin() * u.sin(), r * v.cos()];
        let h = hypersurface_mean_curvature(&metric, &phi, 0.4, 1.1, 1e-4, &[0.0, 0.0, 0.0]);
        assert!((h - 2.0 / r).abs() < 1e-5, "H = {h}");
    }

    #[test]
    fn half_space_horosphere_mean_curvature() {
        // horizontal planes {x3 = const} are horospheres with |H| = n-1 = 2
        let metric = AmbientMetric::HalfSpace { n: 3 };
        let phi = |u: f64, v: f64| vec![u, v, 1.0];
        let h = hypersurface_mean_curvature(&metric, &phi, 0.0, 0.0, 1e-4, &[0.0, 0.0, 2.0]);
        assert!((h - 2.0).abs() < 1e-6, "H = {h}");
    }

    #[test]
    fn half_space_geodesic_plane_is_minimal() {
        // vertical planes are totally geodesic
        let metric = AmbientMetric::HalfSpace { n: 3 };
        let phi = |u: f64, v: f64| vec![u, 0.3, 1.0 + v];
        let h = hypersurface_mean_curvature(&metric, &phi, 0.1, 0.2, 1e-4, &[0.0, 5.0, 1.0]);
        assert!(h.abs() < 1e-6, "H = {h}");
    }
}
