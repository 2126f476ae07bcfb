//! Chart for the quotient of euclidean 3-space by the screw motions
//! `h_t(x, y, z) = (R_{λt}(x, y), z + t)`. The slice `{z = 0}` meets every
//! orbit once; in polar coordinates the quotient metric is
//! `diag(1, r² / (1 + λ²r²))`, the orbit speed is `V = sqrt(1 + λ²r²)` and the
//! drift points radially inward with magnitude `λ²r / (1 + λ²r²)`.

use super::{AmbientMetric, ChartBox, EdgeKind, LiftMap, QuotientChart, SymMat};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Planar reduced domain under the screw action.
#[derive(Debug, Clone, Copy)]
pub enum PlanarDomain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

/// Quotient metric at a slice point, in cartesian chart axes:
/// identity minus the rank-one correction along the in-slice part of the
/// Killing field.
pub fn helicoidal_metric_cartesian(lambda: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
    let w = 1.0 + lambda * lambda * (x * x + y * y);
    let xi = [lambda * y, -lambda * x];
    [
        [1.0 - xi[0] * xi[0] / w, -xi[0] * xi[1] / w],
        [-xi[0] * xi[1] / w, 1.0 - xi[1] * xi[1] / w],
    ]
}

/// Drift in cartesian chart axes: `-λ² (x, y) / (1 + λ²r²)`.
pub fn helicoidal_drift_cartesian(lambda: f64, x: f64, y: f64) -> [f64; 2] {
    let w = 1.0 + lambda * lambda * (x * x + y * y);
    [-lambda * lambda * x / w, -lambda * lambda * y / w]
}

/// Build the polar chart for a disk or annulus slice.
pub fn helicoidal_chart(lambda: f64, domain: PlanarDomain) -> Result<QuotientChart> {
    if lambda < 0.0 {
        return Err(Error::ChartInvalid(format!("lambda must be nonnegative, got {lambda}")));
    }
    let (r_lo, r_hi, lo_edge) = match domain {
        PlanarDomain::Disk { radius } => {
            if !(radius > 0.0) {
                return Err(Error::ChartInvalid("disk radius must be positive".into()));
            }
            (0.0, radius, EdgeKind::Axis)
        }
        PlanarDomain::Annulus { inner, outer } => {
            if !(inner > 0.0 && outer > inner) {
                return Err(Error::ChartInvalid("annulus needs 0 < inner < outer".into()));
            }
            (inner, outer, EdgeKind::Boundary)
        }
    };
    let lam2 = lambda * lambda;
    let metric = move |p: &[f64]| -> SymMat {
        let r = p[0];
        SymMat::diag(2, 1.0, r * r / (1.0 + lam2 * r * r))
    };
    let drift = move |p: &[f64]| -> [f64; 2] {
        let r = p[0];
        [-lam2 * r / (1.0 + lam2 * r * r), 0.0]
    };
    let weight = move |p: &[f64]| -> f64 {
        let r = p[0];
        (1.0 + lam2 * r * r).sqrt()
    };
    let lam = lambda;
    let to_ambient = move |p: &[f64], t: f64| -> Vec<f64> {
        let (x, y) = (p[0] * p[1].cos(), p[0] * p[1].sin());
        let (c, s) = ((lam * t).cos(), (lam * t).sin());
        vec![c * x + s * y, -s * x + c * y, t]
    };
    let project = move |q: &[f64]| -> Option<([f64; 2], f64)> {
        let t = q[2];
        let (c, s) = ((lam * t).cos(), (lam * t).sin());
        // inverse rotation of the slice representative
        let x = c * q[0] - s * q[1];
        let y = s * q[0] + c * q[1];
        let r = x.hypot(y);
        let theta = y.atan2(x).rem_euclid(TAU);
        Some(([r, theta], t))
    };
    let bd = move |p: &[f64]| -> f64 {
        match domain {
            PlanarDomain::Disk { radius } => radius - p[0],
            PlanarDomain::Annulus { inner, outer } => (p[0] - inner).min(outer - p[0]),
        }
    };
    Ok(QuotientChart {
        dim: 2,
        chart_box: ChartBox {
            lo: [r_lo, 0.0],
            hi: [r_hi, TAU],
            edges: [[lo_edge, EdgeKind::Boundary], [EdgeKind::Periodic, EdgeKind::Periodic]],
        },
        metric: Box::new(metric),
        drift: Box::new(drift),
        weight: Some(Box::new(weight)),
        lift: Some(LiftMap {
            ambient: AmbientMetric::Euclidean { dim: 3 },
            to_ambient: Box::new(to_ambient),
            project: Box::new(project),
        }),
        boundary_distance: Some(Box::new(bd)),
        label: format!("helicoidal(lambda={lambda})"),
    })
}

/// One sample of an arc-length parametrized planar curve.
#[derive(Debug, Clone, Copy)]
pub struct CurveSample {
    pub x: f64,
    pub y: f64,
    /// unit tangent components
    pub dx: f64,
    pub dy: f64,
    /// signed curvature for the chosen orientation
    pub kappa: f64,
}

/// Mean-convexity verdict at one curve sample.
#[derive(Debug, Clone, Copy)]
pub struct ConvexitySample {
    /// left-hand side `κ(λ²r² + 1) + λ²(y x' - x y')`
    pub value: f64,
    pub holds: bool,
    /// the stronger pointwise bound `κ ≥ λ²r / (λ²r² + 1)`
    pub sufficient: bool,
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub samples: Vec<ConvexitySample>,
    pub all_hold: bool,
    pub all_sufficient: bool,
}

/// Evaluate the mean-convexity inequality of the screw-invariant cylinder over
/// a planar curve, sample by sample, together with the sufficient condition.
/// The curve must be arc-length parametrized (unit tangents to 1e-6).
pub fn helicoidal_mean_convexity(lambda: f64, curve: &[CurveSample]) -> Result<ConvexityReport> {
    if lambda < 0.0 {
        return Err(Error::Precondition("lambda must be nonnegative".into()));
    }
    let lam2 = lambda * lambda;
    let mut samples = Vec::with_capacity(curve.len());
    let mut all_hold = true;
    let mut all_sufficient = true;
    for (i, s) in curve.iter().enumerate() {
        let speed = s.dx.hypot(s.dy);
        if (speed - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "sample {i} is not unit speed (|gamma'| = {speed})"
            )));
        }
        let r2 = s.x * s.x + s.y * s.y;
        let value = s.kappa * (lam2 * r2 + 1.0) + lam2 * (s.y * s.dx - s.x * s.dy);
        let holds = value >= 0.0;
        let sufficient = s.kappa >= lam2 * r2.sqrt() / (lam2 * r2 + 1.0);
        all_hold &= holds;
        all_sufficient &= sufficient;
        samples.push(ConvexitySample { value, holds, sufficient });
    }
    Ok(ConvexityReport { samples, all_hold, all_sufficient })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_is_identity_at_origin() {
        let g = helicoidal_metric_cartesian(1.0, 0.0, 0.0);
        assert!((g[0][0] - 1.0).abs() < 1e-15);
        assert!((g[1][1] - 1.0).abs() < 1e-15);
        assert!(g[0][1].abs() < 1e-15);
        let j = helicoidal_drift_cartesian(1.0, 0.0, 0.0);
        assert_eq!(j, [0.0, 0.0]);
    }

    #[test]
    fn metric_at_unit_point() {
        let g = helicoidal_metric_cartesian(1.0, 1.0, 0.0);
        assert!((g[0][0] - 1.0).abs() < 1e-15);
        assert!((g[1][1] - 0.5).abs() < 1e-15);
        assert!(g[0][1].abs() < 1e-15);
    }

    #[test]
    fn drift_magnitude_at_unit_point() {
        let j = helicoidal_drift_cartesian(1.0, 1.0, 0.0);
        assert!((j[0] + 0.5).abs() < 1e-15);
        assert!(j[1].abs() < 1e-15);
        // polar chart agrees
        let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 2.0 }).unwrap();
        let jp = chart.drift_at(&[1.0, 0.0]);
        assert!((jp[0] + 0.5).abs() < 1e-15);
        assert!(jp[1].abs() < 1e-15);
    }

    #[test]
    fn drift_matches_helix_acceleration() {
        // the orbit through (r, 0, 0) is a helix; the horizontal part of its
        // unit-speed acceleration is an independent route to the drift
        let lambda = 1.3;
        let r = 0.8;
        let helix = |t: f64| {
            let (c, s) = ((lambda * t).cos(), (lambda * t).sin());
            [c * r, -s * r, t]
        };
        let dt = 1e-5;
        let p = helix(0.0);
        let pp = helix(dt);
        let pm = helix(-dt);
        let speed2 = {
            let v = [(pp[0] - pm[0]) / (2.0 * dt), (pp[1] - pm[1]) / (2.0 * dt), 1.0];
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        };
        let acc = [
            (pp[0] - 2.0 * p[0] + pm[0]) / (dt * dt),
            (pp[1] - 2.0 * p[1] + pm[1]) / (dt * dt),
            0.0,
        ];
        let mag = (acc[0] * acc[0] + acc[1] * acc[1]).sqrt() / speed2;
        let chart = helicoidal_chart(lambda, PlanarDomain::Disk { radius: 2.0 }).unwrap();
        let j = chart.drift_at(&[r, 0.0]);
        let jmag = (chart.metric_at(&[r, 0.0]).quad(&j)).sqrt();
        assert!((mag - jmag).abs() / mag < 1e-4, "helix {mag} vs chart {jmag}");
    }

    #[test]
    fn weight_drift_consistency() {
        // J + ∇ ln V = 0 with the gradient in the quotient metric
        let chart = helicoidal_chart(2.0, PlanarDomain::Disk { radius: 1.5 }).unwrap();
        for &r in &[0.3, 0.7, 1.2] {
            let p = [r, 1.0];
            let h = 1e-6;
            let dlnv = (chart.weight_at(&[r + h, 1.0]).unwrap().ln()
                - chart.weight_at(&[r - h, 1.0]).unwrap().ln())
                / (2.0 * h);
            let ginv = chart.metric_at(&p).inverse();
            let grad_r = ginv.a[0][0] * dlnv;
            let j = chart.drift_at(&p);
            assert!((j[0] + grad_r).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn lift_projects_back() {
        let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
        let lift = chart.lift.as_ref().unwrap();
        let p = [0.6, 1.2];
        for &t in &[-0.7, 0.0, 0.4, 2.0] {
            let q = (lift.to_ambient)(&p, t);
            let (p2, t2) = (lift.project)(&q).unwrap();
            assert!((p2[0] - p[0]).abs() < 1e-12);
            assert!((p2[1] - p[1]).abs() < 1e-12);
            assert!((t2 - t).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_injective_on_tube_sample() {
        let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
        let lift = chart.lift.as_ref().unwrap();
        let mut pts = Vec::new();
        for i in 0..6 {
            for j in 0..8 {
                for k in 0..5 {
                    let p = [0.1 + 0.15 * i as f64, TAU * j as f64 / 8.0];
                    let t = 0.05 * k as f64;
                    pts.push((lift.to_ambient)(&p, t));
                }
            }
        }
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d2: f64 = pts[a].iter().zip(&pts[b]).map(|(u, v)| (u - v) * (u - v)).sum();
                assert!(d2 > 1e-6, "lift collision between samples {a} and {b}");
            }
        }
    }

    #[test]
    fn circle_passes_sufficient_condition_any_radius() {
        for &(lambda, radius) in &[(0.0, 1.0), (1.0, 0.5), (5.0, 2.0), (2.0, 1.0)] {
            let n = 64;
            let samples: Vec<CurveSample> = (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    CurveSample {
                        x: radius * t.cos(),
                        y: radius * t.sin(),
                        dx: -t.sin(),
                        dy: t.cos(),
                        kappa: 1.0 / radius,
                    }
                })
                .collect();
            let rep = helicoidal_mean_convexity(lambda, &samples).unwrap();
            assert!(rep.all_sufficient, "lambda={lambda} R={radius}");
            assert!(rep.all_hold);
        }
    }

    #[test]
    fn lambda_zero_reduces_to_plain_convexity() {
        // any κ ≥ 0 curve passes with λ = 0
        let samples = vec![CurveSample { x: 3.0, y: -1.0, dx: 1.0, dy: 0.0, kappa: 0.2 }];
        let rep = helicoidal_mean_convexity(0.0, &samples).unwrap();
        assert!(rep.all_hold);
        assert!((rep.samples[0].value - 0.2).abs() < 1e-15);
    }

    #[test]
    fn non_unit_speed_is_rejected() {
        let samples = vec![CurveSample { x: 1.0, y: 0.0, dx: 0.0, dy: 2.0, kappa: 1.0 }];
        assert!(helicoidal_mean_convexity(1.0, &samples).is_err());
    }

    #[test]
    fn negative_lambda_rejected() {
        assert!(helicoidal_chart(-0.5, PlanarDomain::Disk { radius: 1.0 }).is_err());
    }
}
