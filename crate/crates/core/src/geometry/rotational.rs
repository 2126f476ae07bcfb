//! One-dimensional test chart: rotations acting on the plane, quotient a
//! radial interval with weight proportional to `r` and drift `-1/r`. The
//! radially symmetric minimal graph (catenoid) gives a closed-form solution
//! on this chart, which many convergence tests lean on.

use super::{AmbientMetric, ChartBox, EdgeKind, LiftMap, QuotientChart, SymMat};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

pub fn rotational_chart(inner_radius: f64, outer_radius: f64) -> Result<QuotientChart> {
    if !(inner_radius >= 0.0 && outer_radius > inner_radius) {
        return Err(Error::ChartInvalid(format!(
            "need 0 <= inner < outer, got [{inner_radius}, {outer_radius}]"
        )));
    }
    let lo_edge = if inner_radius == 0.0 { EdgeKind::Axis } else { EdgeKind::Boundary };
    let metric = |_p: &[f64]| SymMat::diag(1, 1.0, 0.0);
    let drift = |p: &[f64]| [-1.0 / p[0], 0.0];
    let weight = |p: &[f64]| p[0];
    let to_ambient = |p: &[f64], t: f64| -> Vec<f64> { vec![p[0] * t.cos(), p[0] * t.sin()] };
    let project = |q: &[f64]| -> Option<([f64; 2], f64)> {
        let r = q[0].hypot(q[1]);
        if r == 0.0 {
            return None;
        }
        Some(([r, 0.0], q[1].atan2(q[0]).rem_euclid(TAU)))
    };
    let (ri, ro) = (inner_radius, outer_radius);
    let bd = move |p: &[f64]| -> f64 {
        if ri > 0.0 {
            (p[0] - ri).min(ro - p[0])
        } else {
            ro - p[0]
        }
    };
    Ok(QuotientChart {
        dim: 1,
        chart_box: ChartBox {
            lo: [inner_radius, 0.0],
            hi: [outer_radius, 0.0],
            edges: [[lo_edge, EdgeKind::Boundary], [EdgeKind::Boundary, EdgeKind::Boundary]],
        },
        metric: Box::new(metric),
        drift: Box::new(drift),
        weight: Some(Box::new(weight)),
        lift: Some(LiftMap {
            ambient: AmbientMetric::Euclidean { dim: 2 },
            to_ambient: Box::new(to_ambient),
            project: Box::new(project),
        }),
        boundary_distance: Some(Box::new(bd)),
        label: "rotational".into(),
    })
}
