//! Logically rectangular grids over chart boxes.
//!
//! Node layout per axis depends on the edge tags:
//! - boundary/boundary: nodes include both ends, `h = L/(n-1)`;
//! - axis/boundary: nodes offset half a cell from the axis and the last node
//!   sits exactly on the boundary, `h = L/(n-1/2)`;
//! - periodic: `n` nodes over the period, the high end excluded.
//!
//! Ghost values across an axis edge come from even reflection: in a polar
//! chart `v(-r, θ) = v(r, θ+π)`, which lands exactly on another node because
//! of the half-cell offset (the angular count must be even).

use crate::error::{Error, Result};
use crate::geometry::{EdgeKind, QuotientChart};
use crate::math::CubicSpline;

#[derive(Debug, Clone)]
pub struct GridAxis {
    pub n: usize,
    pub h: f64,
    pub lo: f64,
    pub hi: f64,
    pub edge_lo: EdgeKind,
    pub edge_hi: EdgeKind,
    /// nodes offset half a cell from the low end (axis edges)
    pub offset: bool,
}

impl GridAxis {
    pub fn node(&self, i: usize) -> f64 {
        if self.offset {
            self.lo + (i as f64 + 0.5) * self.h
        } else {
            self.lo + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ChartGrid {
    pub dim: usize,
    pub axes: Vec<GridAxis>,
}

/// Where an offset `(i0 + d0, i1 + d1)` lands after wrap/reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Node(usize),
    Outside,
}

impl ChartGrid {
    pub fn new(chart: &QuotientChart, dims: &[usize]) -> Result<Self> {
        if dims.len() != chart.dim {
            return Err(Error::Precondition(format!(
                "grid dims {:?} do not match chart dimension {}",
                dims, chart.dim
            )));
        }
        let mut axes = Vec::new();
        for k in 0..chart.dim {
            let n = dims[k];
            if n < 4 {
                return Err(Error::Precondition("need at least 4 nodes per axis".into()));
            }
            let lo = chart.chart_box.lo[k];
            let hi = chart.chart_box.hi[k];
            let edge_lo = chart.chart_box.edges[k][0];
            let edge_hi = chart.chart_box.edges[k][1];
            let (h, offset) = match (edge_lo, edge_hi) {
                (EdgeKind::Periodic, EdgeKind::Periodic) => ((hi - lo) / n as f64, false),
                (EdgeKind::Axis, EdgeKind::Boundary) => ((hi - lo) / (n as f64 - 0.5), true),
                (EdgeKind::Boundary, EdgeKind::Boundary) => ((hi - lo) / (n as f64 - 1.0), false),
                other => {
                    return Err(Error::ChartInvalid(format!(
                        "unsupported edge combination {other:?} on axis {k}"
                    )))
                }
            };
            axes.push(GridAxis { n, h, lo, hi, edge_lo, edge_hi, offset });
        }
        if chart.dim == 2 {
            let has_axis = axes[0].edge_lo == EdgeKind::Axis;
            if has_axis {
                if axes[1].edge_lo != EdgeKind::Periodic {
                    return Err(Error::ChartInvalid(
                        "axis edge requires a periodic partner axis".into(),
                    ));
                }
                if axes[1].n % 2 != 0 {
                    return Err(Error::Precondition(
                        "axis reflection needs an even angular node count".into(),
                    ));
                }
            }
            if axes[1].edge_lo == EdgeKind::Axis {
                return Err(Error::ChartInvalid("axis edge only supported on axis 0".into()));
            }
        }
        Ok(Self { dim: chart.dim, axes })
    }

    pub fn total(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn idx(&self, i0: usize, i1: usize) -> usize {
        if self.dim == 1 {
            i0
        } else {
            i1 + self.axes[1].n * i0
        }
    }

    pub fn multi(&self, idx: usize) -> (usize, usize) {
        if self.dim == 1 {
            (idx, 0)
        } else {
            (idx / self.axes[1].n, idx % self.axes[1].n)
        }
    }

    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let (i0, i1) = self.multi(idx);
        let mut p = [0.0; 2];
        p[0] = self.axes[0].node(i0);
        if self.dim == 2 {
            p[1] = self.axes[1].node(i1);
        }
        p
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i0, i1) = self.multi(idx);
        let a0 = &self.axes[0];
        if (a0.edge_lo == EdgeKind::Boundary && i0 == 0)
            || (a0.edge_hi == EdgeKind::Boundary && i0 == a0.n - 1)
        {
            return true;
        }
        if self.dim == 2 {
            let a1 = &self.axes[1];
            if (a1.edge_lo == EdgeKind::Boundary && i1 == 0)
                || (a1.edge_hi == EdgeKind::Boundary && i1 == a1.n - 1)
            {
                return true;
            }
        }
        false
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.total()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.total()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Resolve a stencil offset from node `(i0, i1)`; offsets may step at most
    /// one cell beyond the grid through periodic or axis edges.
    pub fn resolve(&self, i0: isize, i1: isize) -> Resolved {
        let a0 = &self.axes[0];
        let n0 = a0.n as isize;
        let (mut r0, mut r1) = (i0, i1);
        let mut flip = false;
        if r0 < 0 {
            match a0.edge_lo {
                EdgeKind::Axis => {
                    r0 = -1 - r0; // even reflection across the axis
                    flip = true;
                }
                EdgeKind::Periodic => r0 = r0.rem_euclid(n0),
                EdgeKind::Boundary => return Resolved::Outside,
            }
        } else if r0 >= n0 {
            match a0.edge_hi {
                EdgeKind::Periodic => r0 = r0.rem_euclid(n0),
                _ => return Resolved::Outside,
            }
        }
        if self.dim == 1 {
            return Resolved::Node(r0 as usize);
        }
        let a1 = &self.axes[1];
        let n1 = a1.n as isize;
        if flip {
            r1 += n1 / 2;
        }
        if r1 < 0 || r1 >= n1 {
            match (a1.edge_lo, a1.edge_hi) {
                (EdgeKind::Periodic, EdgeKind::Periodic) => r1 = r1.rem_euclid(n1),
                _ => {
                    if r1 < 0 || r1 >= n1 {
                        if flip {
                            // reflected angular index always wraps
                            r1 = r1.rem_euclid(n1);
                        } else {
                            return Resolved::Outside;
                        }
                    }
                }
            }
        }
        Resolved::Node(self.idx(r0 as usize, r1 as usize))
    }

    /// Value at a stencil offset, resolving wraps and reflections.
    pub fn value_at(&self, v: &[f64], i0: isize, i1: isize) -> f64 {
        match self.resolve(i0, i1) {
            Resolved::Node(k) => v[k],
            Resolved::Outside => f64::NAN,
        }
    }
}

/// Smooth interpolant of a grid field: cubic splines along each axis
/// (periodic in angular directions). Used by the lift checks, which need
/// continuous second derivatives.
pub struct FieldInterp {
    grid: ChartGrid,
    /// one spline per index along axis 0, parametrized by axis-1 coordinate
    rows: Vec<CubicSpline>,
    nodes0: Vec<f64>,
    values_1d: Option<CubicSpline>,
}

impl FieldInterp {
    pub fn new(grid: &ChartGrid, values: &[f64]) -> Result<Self> {
        let nodes0 = grid.axes[0].nodes();
        if grid.dim == 1 {
            let sp = CubicSpline::natural(&nodes0, values)?;
            return Ok(Self { grid: grid.clone(), rows: Vec::new(), nodes0, values_1d: Some(sp) });
        }
        let a1 = &grid.axes[1];
        let nodes1 = a1.nodes();
        let periodic = a1.edge_lo == EdgeKind::Periodic;
        let mut rows = Vec::with_capacity(grid.axes[0].n);
        for i0 in 0..grid.axes[0].n {
            let row: Vec<f64> = (0..a1.n).map(|i1| values[grid.idx(i0, i1)]).collect();
            let sp = if periodic {
                CubicSpline::periodic(&nodes1, &row, a1.hi - a1.lo)?
            } else {
                CubicSpline::natural(&nodes1, &row)?
            };
            rows.push(sp);
        }
        Ok(Self { grid: grid.clone(), rows, nodes0, values_1d: None })
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        if let Some(sp) = &self.values_1d {
            return sp.eval(p[0]);
        }
        let col: Vec<f64> = self.rows.iter().map(|r| r.eval(p[1])).collect();
        let sp = CubicSpline::natural(&self.nodes0, &col).expect("column spline");
        sp.eval(p[0])
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{helicoidal_chart, rotational_chart, PlanarDomain};

    #[test]
    fn disk_grid_layout() {
        let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
        let grid = ChartGrid::new(&chart, &[8, 16]).unwrap();
        let a0 = &grid.axes[0];
        assert!(a0.offset);
        assert!((a0.node(0) - a0.h / 2.0).abs() < 1e-15);
        assert!((a0.node(7) - 1.0).abs() < 1e-14, "outermost node on the rim");
        // only the outer ring is boundary
        let nb = grid.boundary_nodes().len();
        assert_eq!(nb, 16);
    }

    #[test]
    fn axis_reflection_lands_on_opposite_angle() {
        let chart = helicoidal_chart(0.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
        let grid = ChartGrid::new(&chart, &[6, 8]).unwrap();
        match grid.resolve(-1, 2) {
            Resolved::Node(k) => {
                let (i0, i1) = grid.multi(k);
                assert_eq!(i0, 0);
                assert_eq!(i1, 6); // 2 + 8/2
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annulus_grid_has_two_boundary_rings() {
        let chart = rotational_chart(1.5, 3.0).unwrap();
        let grid = ChartGrid::new(&chart, &[32]).unwrap();
        assert_eq!(grid.boundary_nodes(), vec![0, 31]);
        assert!((grid.axes[0].node(0) - 1.5).abs() < 1e-15);
        assert!((grid.axes[0].node(31) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn interp_reproduces_smooth_field() {
        let chart = helicoidal_chart(1.0, PlanarDomain::Annulus { inner: 1.0, outer: 2.0 }).unwrap();
        let grid = ChartGrid::new(&chart, &[40, 64]).unwrap();
        let f = |r: f64, t: f64| (r * 1.7).sin() * (2.0 * t).cos();
        let values: Vec<f64> = (0..grid.total())
            .map(|i| {
                let p = grid.coords(i);
                f(p[0], p[1])
            })
            .collect();
        let interp = FieldInterp::new(&grid, &values).unwrap();
        for k in 0..50 {
            let r = 1.05 + 0.9 * k as f64 / 49.0;
            let t = 0.1 + 6.0 * k as f64 / 49.0;
            assert!((interp.eval(&[r, t]) - f(r, t)).abs() < 5e-5, "k={k}");
        }
    }
}
