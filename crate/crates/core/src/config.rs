//! Problem configuration: one structured text file with nested blocks for
//! flux, geometry, boundary data, solver and outputs.

use crate::error::{Error, Result};
use crate::expr;
use crate::flux::FluxProfile;
use crate::geometry::{
    helicoidal_chart, hyperbolic_chart, rotational_chart, ChartBox, CurveSample, DomainSpec,
    EdgeKind, PlanarDomain, QuotientChart, SymMat,
};
use crate::solver::{Scheme, SolveSettings};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub flux: FluxBlock,
    pub geometry: GeometryBlock,
    #[serde(default)]
    pub boundary: BoundaryBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub barrier: BarrierBlock,
    pub convexity: Option<ConvexityBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxBlock {
    pub builtin: Option<String>,
    pub p: Option<f64>,
    pub table: Option<Vec<[f64; 2]>>,
    pub eps_reg: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub kind: String,
    // helicoidal
    pub lambda: Option<f64>,
    pub domain: Option<DomainBlock>,
    // hyperbolic
    pub n: Option<usize>,
    pub radius: Option<f64>,
    // rotational
    pub r_in: Option<f64>,
    pub r_out: Option<f64>,
    // custom: tabulated metric/drift on a cartesian grid
    pub x_range: Option<[f64; 2]>,
    pub y_range: Option<[f64; 2]>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub g11: Option<Vec<f64>>,
    pub g12: Option<Vec<f64>>,
    pub g22: Option<Vec<f64>>,
    pub j1: Option<Vec<f64>>,
    pub j2: Option<Vec<f64>>,
    pub weight: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub shape: String,
    pub radius: Option<f64>,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryBlock {
    /// expression over the chart coordinate names
    pub psi: String,
}

impl Default for BoundaryBlock {
    fn default() -> Self {
        Self { psi: "0".into() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub scheme: Option<String>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub damping: Option<f64>,
    pub grid: Option<Vec<usize>>,
    pub override_gate: Option<bool>,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            scheme: None,
            tolerance: None,
            max_iterations: None,
            damping: None,
            grid: None,
            override_gate: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<String>,
    pub prefix: Option<String>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: None, prefix: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierBlock {
    /// conservation constants for the hyperbolic profile emission
    pub hyperbolic_c: Option<Vec<f64>>,
}

impl Default for BarrierBlock {
    fn default() -> Self {
        Self { hyperbolic_c: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityBlock {
    pub lambda: Option<f64>,
    pub shape: String,
    pub radius: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub samples: Option<usize>,
}

impl ProblemConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: ProblemConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    fn validate(&self) -> Result<()> {
        if let Some(grid) = &self.solver.grid {
            for &n in grid {
                if !(8..=4096).contains(&n) {
                    return Err(Error::Config(format!(
                        "grid size {n} outside the supported range [8, 4096]"
                    )));
                }
            }
        }
        if let Some(p) = self.flux.p {
            if !(p > 1.0) {
                return Err(Error::Config(format!("flux exponent p must exceed 1, got {p}")));
            }
        }
        Ok(())
    }

    pub fn build_profile(&self) -> Result<FluxProfile> {
        let f = &self.flux;
        let mut profile = match (&f.builtin, &f.table) {
            (Some(name), None) => match name.as_str() {
                "p_laplace" => {
                    let p = f.p.ok_or_else(|| {
                        Error::Config("p_laplace needs the exponent `p`".into())
                    })?;
                    FluxProfile::p_laplace(p).map_err(|e| Error::Config(e.to_string()))?
                }
                "minimal_surface" => FluxProfile::minimal_surface(),
                other => return Err(Error::Config(format!("unknown builtin flux `{other}`"))),
            },
            (None, Some(table)) => {
                let s: Vec<f64> = table.iter().map(|r| r[0]).collect();
                let a: Vec<f64> = table.iter().map(|r| r[1]).collect();
                FluxProfile::tabulated(&s, &a, f.p.unwrap_or(2.0))
                    .map_err(|e| Error::Config(e.to_string()))?
            }
            _ => {
                return Err(Error::Config(
                    "flux block needs exactly one of `builtin` or `table`".into(),
                ))
            }
        };
        if let Some(eps) = f.eps_reg {
            profile = profile.with_eps_reg(eps);
        }
        Ok(profile)
    }

    pub fn build_chart(&self) -> Result<QuotientChart> {
        let g = &self.geometry;
        match g.kind.as_str() {
            "helicoidal" => {
                let lambda = g.lambda.unwrap_or(0.0);
                let dom = g
                    .domain
                    .as_ref()
                    .ok_or_else(|| Error::Config("helicoidal geometry needs a domain".into()))?;
                let domain = match dom.shape.as_str() {
                    "disk" => PlanarDomain::Disk {
                        radius: dom
                            .radius
                            .ok_or_else(|| Error::Config("disk needs a radius".into()))?,
                    },
                    "annulus" => PlanarDomain::Annulus {
                        inner: dom
                            .inner
                            .ok_or_else(|| Error::Config("annulus needs `inner`".into()))?,
                        outer: dom
                            .outer
                            .ok_or_else(|| Error::Config("annulus needs `outer`".into()))?,
                    },
                    other => return Err(Error::Config(format!("unknown domain shape `{other}`"))),
                };
                helicoidal_chart(lambda, domain).map_err(|e| Error::Config(e.to_string()))
            }
            "hyperbolic" => {
                let n = g.n.ok_or_else(|| Error::Config("hyperbolic geometry needs `n`".into()))?;
                let radius = g
                    .radius
                    .ok_or_else(|| Error::Config("hyperbolic geometry needs `radius`".into()))?;
                hyperbolic_chart(n, radius).map_err(|e| Error::Config(e.to_string()))
            }
            "rotational" => {
                let r_in = g.r_in.unwrap_or(0.0);
                let r_out = g
                    .r_out
                    .ok_or_else(|| Error::Config("rotational geometry needs `r_out`".into()))?;
                rotational_chart(r_in, r_out).map_err(|e| Error::Config(e.to_string()))
            }
            "custom" => build_custom_chart(g),
            other => Err(Error::Config(format!("unknown geometry kind `{other}`"))),
        }
    }

    /// Chart coordinate names exposed to the boundary expression.
    pub fn psi_vars(&self) -> Vec<String> {
        match self.geometry.kind.as_str() {
            "helicoidal" => vec!["r".into(), "theta".into(), "x".into(), "y".into()],
            "hyperbolic" => vec!["rho".into(), "theta".into()],
            "rotational" => vec!["r".into()],
            _ => vec!["x".into(), "y".into()],
        }
    }

    pub fn build_domain(&self) -> Result<DomainSpec> {
        let chart = self.build_chart()?;
        let vars = self.psi_vars();
        let bound = expr::parse(&self.boundary.psi, &vars)?;
        let kind = self.geometry.kind.clone();
        let psi = move |p: &[f64]| -> f64 {
            let mut vals = [0.0f64; 4];
            let n = match kind.as_str() {
                "helicoidal" => {
                    vals[0] = p[0];
                    vals[1] = p[1];
                    vals[2] = p[0] * p[1].cos();
                    vals[3] = p[0] * p[1].sin();
                    4
                }
                "hyperbolic" => {
                    vals[0] = p[0];
                    vals[1] = p[1];
                    2
                }
                "rotational" => {
                    vals[0] = p[0];
                    1
                }
                _ => {
                    vals[0] = p[0];
                    vals[1] = p[1];
                    2
                }
            };
            bound.eval(&vals[..n])
        };
        let mut spec = DomainSpec::new(chart, Box::new(psi));
        // analytic mean curvature of the inner parallels for the single
        // boundary component charts
        match self.geometry.kind.as_str() {
            "helicoidal" => {
                if let Some(DomainBlock { shape, radius: Some(rr), .. }) = &self.geometry.domain {
                    if shape == "disk" {
                        let lam2 = self.geometry.lambda.unwrap_or(0.0).powi(2);
                        let r0 = *rr;
                        spec.boundary_curvature = Some(Box::new(move |d: f64, _t: f64| {
                            let r = r0 - d;
                            let w = 1.0 + lam2 * r * r;
                            1.0 / r - lam2 * r / w
                        }));
                    }
                }
            }
            "hyperbolic" => {
                let n = self.geometry.n.unwrap_or(3) as f64;
                let k = self.geometry.radius.unwrap_or(1.0);
                spec.boundary_curvature = Some(Box::new(move |d: f64, _t: f64| {
                    let rho = k - d;
                    (n - 2.0) / rho.tanh()
                }));
            }
            _ => {}
        }
        Ok(spec)
    }

    pub fn build_settings(&self, chart_dim: usize) -> Result<SolveSettings> {
        let s = &self.solver;
        let scheme = match &s.scheme {
            Some(text) => text.parse::<Scheme>()?,
            None => Scheme::Newton,
        };
        let grid = match &s.grid {
            Some(g) => {
                if g.len() != chart_dim {
                    return Err(Error::Config(format!(
                        "grid has {} sizes but the chart is {chart_dim}-dimensional",
                        g.len()
                    )));
                }
                g.clone()
            }
            None => match chart_dim {
                1 => vec![256],
                _ => vec![48, 96],
            },
        };
        Ok(SolveSettings {
            tolerance: s.tolerance.unwrap_or(1e-10),
            max_iterations: s.max_iterations.unwrap_or(80),
            scheme,
            damping: s.damping.unwrap_or(1.0),
            grid,
            override_gate: s.override_gate.unwrap_or(false),
            ..Default::default()
        })
    }

    pub fn output_dir(&self) -> String {
        self.output.dir.clone().unwrap_or_else(|| "out".into())
    }

    pub fn output_prefix(&self) -> String {
        self.output.prefix.clone().unwrap_or_else(|| "run".into())
    }
}

fn build_custom_chart(g: &GeometryBlock) -> Result<QuotientChart> {
    let xr = g.x_range.ok_or_else(|| Error::Config("custom geometry needs x_range".into()))?;
    let yr = g.y_range.ok_or_else(|| Error::Config("custom geometry needs y_range".into()))?;
    let nx = g.nx.ok_or_else(|| Error::Config("custom geometry needs nx".into()))?;
    let ny = g.ny.ok_or_else(|| Error::Config("custom geometry needs ny".into()))?;
    if nx < 2 || ny < 2 {
        return Err(Error::Config("custom geometry grid must be at least 2x2".into()));
    }
    let need = nx * ny;
    let take = |name: &str, v: &Option<Vec<f64>>, default: f64| -> Result<Vec<f64>> {
        match v {
            Some(v) if v.len() == need => Ok(v.clone()),
            Some(v) => Err(Error::Config(format!(
                "`{name}` has {} entries, expected {need}",
                v.len()
            ))),
            None => Ok(vec![default; need]),
        }
    };
    let g11 = take("g11", &g.g11, 1.0)?;
    let g12 = take("g12", &g.g12, 0.0)?;
    let g22 = take("g22", &g.g22, 1.0)?;
    let j1 = take("j1", &g.j1, 0.0)?;
    let j2 = take("j2", &g.j2, 0.0)?;
    let weight = match &g.weight {
        Some(w) if w.len() == need => Some(w.clone()),
        Some(w) => {
            return Err(Error::Config(format!(
                "`weight` has {} entries, expected {need}",
                w.len()
            )))
        }
        None => None,
    };
    let interp = move |table: &[f64], p: &[f64]| -> f64 {
        let fx = ((p[0] - xr[0]) / (xr[1] - xr[0]) * (nx - 1) as f64).clamp(0.0, (nx - 1) as f64);
        let fy = ((p[1] - yr[0]) / (yr[1] - yr[0]) * (ny - 1) as f64).clamp(0.0, (ny - 1) as f64);
        let ix = (fx as usize).min(nx - 2);
        let iy = (fy as usize).min(ny - 2);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let at = |i: usize, j: usize| table[j * nx + i];
        at(ix, iy) * (1.0 - tx) * (1.0 - ty)
            + at(ix + 1, iy) * tx * (1.0 - ty)
            + at(ix, iy + 1) * (1.0 - tx) * ty
            + at(ix + 1, iy + 1) * tx * ty
    };
    let (m11, m12, m22) = (g11, g12, g22);
    let metric = {
        let interp = interp;
        move |p: &[f64]| -> SymMat {
            let a = interp(&m11, p);
            let b = interp(&m12, p);
            let c = interp(&m22, p);
            SymMat { dim: 2, a: [[a, b], [b, c]] }
        }
    };
    let drift = {
        move |p: &[f64]| -> [f64; 2] { [interp(&j1, p), interp(&j2, p)] }
    };
    let weight_fn: Option<Box<crate::geometry::ScalarFn>> = weight.map(|w| {
        let f: Box<crate::geometry::ScalarFn> = Box::new(move |p: &[f64]| interp(&w, p));
        f
    });
    Ok(QuotientChart {
        dim: 2,
        chart_box: ChartBox {
            lo: [xr[0], yr[0]],
            hi: [xr[1], yr[1]],
            edges: [[EdgeKind::Boundary; 2]; 2],
        },
        metric: Box::new(metric),
        drift: Box::new(drift),
        weight: weight_fn,
        lift: None,
        boundary_distance: None,
        label: "custom".into(),
    })
}

/// Sample a built-in planar curve in arc-length form for the mean-convexity
/// evaluator. Samples are equally spaced in the defining parameter; each
/// carries its own unit tangent and curvature.
pub fn sample_curve(block: &ConvexityBlock) -> Result<Vec<CurveSample>> {
    let m = block.samples.unwrap_or(256);
    if m < 8 {
        return Err(Error::Config("need at least 8 curve samples".into()));
    }
    match block.shape.as_str() {
        "circle" => {
            let r = block.radius.ok_or_else(|| Error::Config("circle needs a radius".into()))?;
            if !(r > 0.0) {
                return Err(Error::Config("circle radius must be positive".into()));
            }
            Ok((0..m)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / m as f64;
                    CurveSample {
                        x: r * t.cos(),
                        y: r * t.sin(),
                        dx: -t.sin(),
                        dy: t.cos(),
                        kappa: 1.0 / r,
                    }
                })
                .collect())
        }
        "ellipse" => {
            let a = block.a.ok_or_else(|| Error::Config("ellipse needs `a`".into()))?;
            let b = block.b.ok_or_else(|| Error::Config("ellipse needs `b`".into()))?;
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Config("ellipse axes must be positive".into()));
            }
            Ok((0..m)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / m as f64;
                    let speed = (a * a * t.sin() * t.sin() + b * b * t.cos() * t.cos()).sqrt();
                    CurveSample {
                        x: a * t.cos(),
                        y: b * t.sin(),
                        dx: -a * t.sin() / speed,
                        dy: b * t.cos() / speed,
                        kappa: a * b / speed.powi(3),
                    }
                })
                .collect())
        }
        other => Err(Error::Config(format!("unknown curve shape `{other}`"))),
    }
}
