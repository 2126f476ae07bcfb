//! Nonlinear solve of the reduced Dirichlet problem on a chart grid.
//!
//! All schemes drive the same discrete system to a sup-norm residual below
//! the tolerance: the conservative form on charts with an orbit weight, the
//! central-difference form otherwise. `picard` relinearizes with frozen
//! coefficients, `newton` uses the analytic linearization, `energy_descent`
//! takes the frozen-coefficient direction with a backtracking line search on
//! the discrete energy (whose exact gradient in 1d is the conservative
//! residual, so all three limits coincide).

pub mod grid;
pub mod operator;

use crate::barrier;
use crate::error::{Error, Result};
use crate::flux::{classify, FluxProfile, Taxonomy};
use crate::geometry::DomainSpec;
use crate::linalg::{solve_sparse, DIRECT_CAP};
use crate::solver::grid::{ChartGrid, FieldInterp};
use crate::solver::operator::{
    assemble, energy, gradient_norm_at, residual_vector, Assembly, ChartData, PrimaryForm,
};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Picard,
    Newton,
    EnergyDescent,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "picard" => Ok(Scheme::Picard),
            "newton" => Ok(Scheme::Newton),
            "energy_descent" => Ok(Scheme::EnergyDescent),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub scheme: Scheme,
    pub damping: f64,
    pub grid: Vec<usize>,
    pub override_gate: bool,
    pub direct_cap: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 80,
            scheme: Scheme::Newton,
            damping: 1.0,
            grid: vec![64, 64],
            override_gate: false,
            direct_cap: DIRECT_CAP,
        }
    }
}

/// Grid-sampled scalar field with the converged residual diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub grid: ChartGrid,
    pub values: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolutionField {
    pub fn interpolant(&self) -> Result<FieldInterp> {
        FieldInterp::new(&self.grid, &self.values)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// How the classification gate was decided.
#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub path: String,
    pub passed: bool,
    pub overridden: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    pub damping_events: usize,
    pub residual_history: Vec<f64>,
    /// discrete energy after each accepted step (energy descent only)
    pub energy_history: Vec<f64>,
    pub primary_form: String,
    pub unknowns: usize,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub field: SolutionField,
    pub gate: GateReport,
    pub convergence: ConvergenceReport,
    pub taxonomy: Taxonomy,
}

/// Evaluate the solvability gate: the mild-decay route needs kind I and III
/// witnesses; the strong-decay route needs kind II and IV witnesses plus
/// nonnegative drift-corrected mean curvature of the inner parallels. The
/// conditions are sufficient, not necessary, so callers may override.
pub fn evaluate_gate(problem: &DomainSpec, taxonomy: &Taxonomy) -> GateReport {
    let mder_ok = taxonomy.mder.is_some() && taxonomy.cond3.is_some();
    if mder_ok {
        return GateReport {
            path: "mder".into(),
            passed: true,
            overridden: false,
            detail: "kind I and III witnesses found".into(),
        };
    }
    let sder_witnesses = taxonomy.sder.is_some() && taxonomy.cond4.is_some();
    if sder_witnesses {
        let delta = barrier::default_strip_width(&problem.chart);
        match barrier::check_parallel_convexity(&problem.chart, delta) {
            Ok(pc) if pc.holds => {
                return GateReport {
                    path: "sder".into(),
                    passed: true,
                    overridden: false,
                    detail: format!(
                        "kind II and IV witnesses found; parallel mean convexity margin {:.3e}",
                        pc.min_margin
                    ),
                }
            }
            Ok(pc) => {
                return GateReport {
                    path: "sder".into(),
                    passed: false,
                    overridden: false,
                    detail: format!(
                        "kind II and IV witnesses found but a parallel fails mean convexity (worst margin {:.3e} at depth {:.3e})",
                        pc.min_margin, pc.worst_depth
                    ),
                }
            }
            Err(e) => {
                return GateReport {
                    path: "sder".into(),
                    passed: false,
                    overridden: false,
                    detail: format!("parallel convexity check unavailable: {e}"),
                }
            }
        }
    }
    GateReport {
        path: "none".into(),
        passed: false,
        overridden: false,
        detail: "no complete witness pair (I+III or II+IV) found".into(),
    }
}

fn apply_direction(v: &mut [f64], base: &[f64], delta: &[f64], interior: &[usize], alpha: f64) {
    v.copy_from_slice(base);
    for (k, &idx) in interior.iter().enumerate() {
        v[idx] = base[idx] + alpha * delta[k];
    }
}

/// Solve the reduced problem. Non-convergence is reported in the outcome, not
/// as an error; gate failure without override is an error.
pub fn solve(
    problem: &DomainSpec,
    profile: &FluxProfile,
    settings: &SolveSettings,
) -> Result<SolveOutcome> {
    if !(settings.tolerance > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(Error::Precondition("damping must lie in (0, 1]".into()));
    }
    let taxonomy = classify(profile)?;
    let mut gate = evaluate_gate(problem, &taxonomy);
    if !gate.passed {
        if settings.override_gate {
            gate.overridden = true;
        } else {
            return Err(Error::GateFailure(gate.detail.clone()));
        }
    }

    let grid = ChartGrid::new(&problem.chart, &settings.grid)?;
    let cd = ChartData::compile(&problem.chart, grid)?;
    let form = operator::primary_form(&cd);
    if settings.scheme == Scheme::EnergyDescent && form != PrimaryForm::Divergence {
        return Err(Error::Precondition(
            "energy descent needs a chart with an orbit weight".into(),
        ));
    }
    let interior = cd.grid.interior_nodes();
    if interior.len() > settings.direct_cap * 4 {
        return Err(Error::Precondition(format!(
            "grid too large ({} unknowns)",
            interior.len()
        )));
    }
    let total = cd.grid.total();
    let mut eq_of = vec![usize::MAX; total];
    for (e, &idx) in interior.iter().enumerate() {
        eq_of[idx] = e;
    }

    // Dirichlet data, imposed exactly on boundary nodes
    let mut v = vec![0.0; total];
    for idx in 0..total {
        if cd.grid.is_boundary(idx) {
            let p = cd.grid.coords(idx);
            let val = (problem.psi)(&p[..cd.dim]);
            if !val.is_finite() {
                return Err(Error::Precondition(format!(
                    "boundary data is not finite at {:?}",
                    &p[..cd.dim]
                )));
            }
            v[idx] = val;
        }
    }
    // harmonic initial guess
    {
        let (a, rhs) = assemble(&cd, profile, form, &Assembly::LaplaceInit, &v, &interior, &eq_of)?;
        let w = solve_sparse(&a, &rhs, settings.direct_cap)?;
        for (k, &idx) in interior.iter().enumerate() {
            v[idx] = w[k];
        }
    }

    let (_, mut rn) = residual_vector(&cd, profile, form, &v, &interior)?;
    let mut history = vec![rn];
    let mut energy_history: Vec<f64> = Vec::new();
    if settings.scheme == Scheme::EnergyDescent {
        energy_history.push(energy(&cd, profile, &v)?);
    }
    let mut damping_events = 0usize;
    let mut iterations = 0usize;
    let mut stagnant = 0usize;
    let mut trial = v.clone();
    while iterations < settings.max_iterations && rn > settings.tolerance {
        iterations += 1;
        let delta: Vec<f64> = match settings.scheme {
            Scheme::Newton => {
                let (a, rhs) =
                    assemble(&cd, profile, form, &Assembly::Newton, &v, &interior, &eq_of)?;
                solve_sparse(&a, &rhs, settings.direct_cap)?
            }
            Scheme::Picard | Scheme::EnergyDescent => {
                let (a, rhs) =
                    assemble(&cd, profile, form, &Assembly::Picard, &v, &interior, &eq_of)?;
                let w = solve_sparse(&a, &rhs, settings.direct_cap)?;
                interior.iter().enumerate().map(|(k, &idx)| w[k] - v[idx]).collect()
            }
        };
        let e_cur = if settings.scheme == Scheme::EnergyDescent {
            energy(&cd, profile, &v)?
        } else {
            0.0
        };
        let mut alpha = settings.damping;
        let mut accepted = false;
        for _ in 0..45 {
            apply_direction(&mut trial, &v, &delta, &interior, alpha);
            let (_, rn_t) = residual_vector(&cd, profile, form, &trial, &interior)?;
            let ok = match settings.scheme {
                Scheme::EnergyDescent => {
                    let e_t = energy(&cd, profile, &trial)?;
                    let noise = 1e-12 * (1.0 + e_cur.abs());
                    e_t < e_cur - noise || ((e_t - e_cur).abs() <= noise && rn_t <= rn)
                }
                _ => rn_t <= rn * (1.0 + 1e-12) || rn_t <= settings.tolerance,
            };
            if ok {
                stagnant = if rn_t > 0.95 * rn { stagnant + 1 } else { 0 };
                v.copy_from_slice(&trial);
                rn = rn_t;
                accepted = true;
                break;
            }
            alpha *= 0.5;
            damping_events += 1;
            if alpha < 1e-10 {
                break;
            }
        }
        if !accepted {
            break;
        }
        history.push(rn);
        if settings.scheme == Scheme::EnergyDescent {
            energy_history.push(energy(&cd, profile, &v)?);
        }
        // no meaningful contraction for several steps: the residual sits at
        // the rounding floor of its evaluation
        if stagnant >= 8 {
            break;
        }
    }
    let converged = rn <= settings.tolerance;
    let field = SolutionField {
        grid: cd.grid.clone(),
        values: v,
        residual_norm: rn,
        iterations,
        converged,
    };
    let convergence = ConvergenceReport {
        scheme: settings.scheme,
        iterations,
        residual_norm: rn,
        converged,
        damping_events,
        residual_history: history,
        energy_history,
        primary_form: match form {
            PrimaryForm::Divergence => "divergence".into(),
            PrimaryForm::NonDivergence => "non_divergence".into(),
        },
        unknowns: interior.len(),
    };
    Ok(SolveOutcome { field, gate, convergence, taxonomy })
}

/// Max interior gradient norm, its location, and whether the sup over all
/// nodes is attained at the boundary (one-sided differences there would be
/// less accurate, so boundary attainment is decided by comparing against the
/// largest near-boundary interior value).
pub fn gradient_monitor(cd: &ChartData, field: &SolutionField) -> (f64, [f64; 2], bool) {
    let mut best = -1.0;
    let mut at = [0.0; 2];
    let mut best_idx = 0;
    for &idx in &cd.grid.interior_nodes() {
        let g = gradient_norm_at(cd, &field.values, idx);
        if g > best {
            best = g;
            at = cd.grid.coords(idx);
            best_idx = idx;
        }
    }
    // attained next to the boundary?
    let (i0, i1) = cd.grid.multi(best_idx);
    let a0 = &cd.grid.axes[0];
    let near0 = (a0.edge_hi == crate::geometry::EdgeKind::Boundary && i0 + 2 >= a0.n)
        || (a0.edge_lo == crate::geometry::EdgeKind::Boundary && i0 <= 1);
    let near1 = if cd.dim == 2 {
        let a1 = &cd.grid.axes[1];
        (a1.edge_hi == crate::geometry::EdgeKind::Boundary && i1 + 2 >= a1.n)
            || (a1.edge_lo == crate::geometry::EdgeKind::Boundary && i1 <= 1)
    } else {
        false
    };
    (best.max(0.0), at, near0 || near1)
}
