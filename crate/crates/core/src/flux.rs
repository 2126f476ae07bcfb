//! Flux profiles `a(s)` for the quasilinear operator `div(a(|∇u|)/|∇u| ∇u)`
//! and their structural classification.
//!
//! A profile carries the growth exponent `p` of the decomposition
//! `a(s) = s^(p-1) A(s)` and exposes `b(s) = s a'(s)/a(s) - 1`, the quantity
//! controlling the eigenvalue ratio `λ/Λ = 1 + min(b, 0)` of the operator's
//! quadratic form. Decay conditions on that ratio (kinds I-IV below) decide
//! which solvability regime applies and gate the solver.

use crate::error::{Error, Result};
use crate::math::{adaptive_simpson, central_derivative, CubicSpline, MonotoneCubic};
use serde::Serialize;

/// How the scalar nonlinearity is defined.
#[derive(Debug, Clone)]
pub enum ProfileKind {
    /// `a(s) = s^(p-1)`, p > 1
    PLaplace { p: f64 },
    /// `a(s) = s / sqrt(1 + s^2)`
    MinimalSurface,
    /// user-supplied samples of `a(s)`, monotone-cubic interpolated
    Tabulated { interp: MonotoneCubic, p: f64 },
}

/// The operator profile together with the gradient-regularization floor used
/// by the solver (`|∇u|` is replaced by `sqrt(|∇u|^2 + eps^2)` everywhere).
#[derive(Debug, Clone)]
pub struct FluxProfile {
    kind: ProfileKind,
    eps_reg: f64,
    /// cached antiderivative of `a` for the energy functional (tabulated only)
    phi_table: Option<CubicSpline>,
    label: String,
}

impl FluxProfile {
    pub fn p_laplace(p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::ProfileInvalid(format!("p must exceed 1, got {p}")));
        }
        let eps = if p == 2.0 { 1e-8 } else { 1e-4 };
        Ok(Self {
            kind: ProfileKind::PLaplace { p },
            eps_reg: eps,
            phi_table: None,
            label: format!("p_laplace(p={p})"),
        })
    }

    pub fn minimal_surface() -> Self {
        Self {
            kind: ProfileKind::MinimalSurface,
            eps_reg: 1e-8,
            phi_table: None,
            label: "minimal_surface".into(),
        }
    }

    /// Tabulated profile. The data must be strictly positive and strictly
    /// increasing; `p` defaults to 2 when the caller has no better value.
    pub fn tabulated(s: &[f64], a: &[f64], p: f64) -> Result<Self> {
        if s.len() < 4 {
            return Err(Error::ProfileInvalid("need at least 4 table rows".into()));
        }
        if !(p > 1.0) {
            return Err(Error::ProfileInvalid(format!("p must exceed 1, got {p}")));
        }
        for i in 0..s.len() {
            if !(a[i] > 0.0) && s[i] > 0.0 {
                return Err(Error::ProfileInvalid(format!("a({}) = {} is not positive", s[i], a[i])));
            }
            if i > 0 && a[i] <= a[i - 1] {
                return Err(Error::ProfileInvalid(format!("a is not strictly increasing at s = {}", s[i])));
            }
        }
        let interp = MonotoneCubic::new(s, a).map_err(|e| Error::ProfileInvalid(e.to_string()))?;
        // antiderivative of a on a fine grid for the energy functional
        let m = 2048;
        let x0 = interp.x_min().max(0.0);
        let x1 = interp.x_max();
        let xs: Vec<f64> = (0..m).map(|i| x0 + (x1 - x0) * i as f64 / (m - 1) as f64).collect();
        let mut cum = vec![0.0; m];
        for i in 1..m {
            let f = |t: f64| interp.eval(t);
            cum[i] = cum[i - 1] + adaptive_simpson(&f, xs[i - 1], xs[i], 1e-12);
        }
        let phi = CubicSpline::natural(&xs, &cum).map_err(|e| Error::ProfileInvalid(e.to_string()))?;
        let eps = if p == 2.0 { 1e-8 } else { 1e-4 };
        Ok(Self {
            kind: ProfileKind::Tabulated { interp, p },
            eps_reg: eps,
            phi_table: Some(phi),
            label: "tabulated".into(),
        })
    }

    pub fn with_eps_reg(mut self, eps: f64) -> Self {
        self.eps_reg = eps.max(0.0);
        self
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { p } => *p,
            ProfileKind::MinimalSurface => 2.0,
            ProfileKind::Tabulated { p, .. } => *p,
        }
    }

    /// `p == 2`, the case classical elliptic theory covers directly.
    pub fn is_regular(&self) -> bool {
        self.p() == 2.0
    }

    pub fn a(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { p } => s.powf(p - 1.0),
            ProfileKind::MinimalSurface => s / (1.0 + s * s).sqrt(),
            ProfileKind::Tabulated { interp, .. } => interp.eval(s),
        }
    }

    pub fn a_deriv(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { p } => (p - 1.0) * s.powf(p - 2.0),
            ProfileKind::MinimalSurface => (1.0 + s * s).powf(-1.5),
            ProfileKind::Tabulated { interp, .. } => interp.eval_deriv(s),
        }
    }

    /// Regular factor `A(s) = a(s) / s^(p-1)`.
    pub fn big_a(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { .. } => 1.0,
            ProfileKind::MinimalSurface => 1.0 / (1.0 + s * s).sqrt(),
            ProfileKind::Tabulated { interp, p } => {
                let t = s.max(self.eps_reg.max(1e-12));
                interp.eval(t) / t.powf(p - 1.0)
            }
        }
    }

    fn b_raw(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { p } => p - 2.0,
            ProfileKind::MinimalSurface => -s * s / (1.0 + s * s),
            ProfileKind::Tabulated { interp, .. } => {
                let a = interp.eval(s);
                s * interp.eval_deriv(s) / a - 1.0
            }
        }
    }

    /// `b(s) = s a'(s)/a(s) - 1`. Below the regularization floor the value is
    /// taken at the regularized magnitude `sqrt(s^2 + eps^2)`.
    pub fn b(&self, s: f64) -> f64 {
        if s <= 0.0 && self.eps_reg == 0.0 {
            return self.b_raw(1e-300);
        }
        if s < self.eps_reg {
            self.b_raw(s.hypot(self.eps_reg))
        } else {
            self.b_raw(s)
        }
    }

    pub fn b_deriv(&self, s: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { .. } => 0.0,
            ProfileKind::MinimalSurface => {
                let w = 1.0 + s * s;
                -2.0 * s / (w * w)
            }
            ProfileKind::Tabulated { .. } => central_derivative(&|t| self.b(t), s, s.abs().max(1e-3)),
        }
    }

    /// Eigenvalue ratio `λ/Λ = 1 + min(b(s), 0)`, always in (0, 1].
    pub fn eigenvalue_ratio(&self, s: f64) -> f64 {
        1.0 + self.b(s).min(0.0)
    }

    /// Regularized magnitude used by the solver.
    pub fn regularize(&self, sigma: f64) -> f64 {
        sigma.hypot(self.eps_reg)
    }

    /// Diffusion coefficient `a(σ)/σ` at the regularized magnitude.
    pub fn flux_coeff(&self, sigma: f64) -> f64 {
        let s = self.regularize(sigma).max(1e-300);
        self.a(s) / s
    }

    /// Antiderivative `Φ(σ) = ∫_0^σ a`, the energy density.
    pub fn phi(&self, sigma: f64) -> f64 {
        match &self.kind {
            ProfileKind::PLaplace { p } => sigma.powf(*p) / p,
            ProfileKind::MinimalSurface => (1.0 + sigma * sigma).sqrt() - 1.0,
            ProfileKind::Tabulated { .. } => self.phi_table.as_ref().unwrap().eval(sigma),
        }
    }

    /// Check the structural requirements on sampled magnitudes: positivity and
    /// strict growth of `a`, positivity of the regular factor, and the lower
    /// bound `min(1, p-1) + s A'(s)/A(s) > 0` (expressed through `b`).
    pub fn validate(&self, samples: &[f64]) -> Result<()> {
        let p = self.p();
        for &s in samples {
            if s <= 0.0 {
                continue;
            }
            let a = self.a(s);
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::ProfileInvalid(format!("a({s}) = {a} is not positive")));
            }
            if !(self.a_deriv(s) > 0.0) {
                return Err(Error::ProfileInvalid(format!("a'({s}) is not positive")));
            }
            if !(self.big_a(s) > 0.0) {
                return Err(Error::ProfileInvalid(format!("A({s}) is not positive")));
            }
            // s A'(s)/A(s) = b(s) + 2 - p
            let t = 1f64.min(p - 1.0) + self.b_raw(s) + 2.0 - p;
            if !(t > 0.0) {
                return Err(Error::ProfileInvalid(format!(
                    "growth bound min(1, p-1) + sA'/A fails at s = {s} (value {t})"
                )));
            }
            if !(self.b_raw(s) + 1.0 > 0.0) {
                return Err(Error::ProfileInvalid(format!("b({s}) + 1 is not positive")));
            }
        }
        Ok(())
    }
}

/// `b(s) = s a'(s)/a(s) - 1` (regularized below the floor).
pub fn eval_b(profile: &FluxProfile, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("eval_b needs s > 0, got {s}")));
    }
    let a = profile.a(s.max(profile.eps_reg()));
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::ProfileInvalid(format!("a({s}) = {a} is not positive")));
    }
    Ok(profile.b(s))
}

/// `λ/Λ = 1 + min(b, 0)`.
pub fn eigenvalue_ratio(profile: &FluxProfile, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("eigenvalue_ratio needs s > 0, got {s}")));
    }
    Ok(profile.eigenvalue_ratio(s))
}

/// Which decay condition a witness certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionKind {
    I,
    II,
    III,
    IV,
}

/// Witness function `g` (kinds I/II) or `h` (kind III).
#[derive(Debug, Clone)]
pub enum WitnessFn {
    /// `c * s^m`; the integral side conditions are certified symbolically
    PowerLaw { c: f64, m: i32 },
    /// sampled witness; side conditions are reported inconclusive
    Tabulated(MonotoneCubic),
    /// kind IV carries no function
    None,
}

impl WitnessFn {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            WitnessFn::PowerLaw { c, m } => c * s.powi(*m),
            WitnessFn::Tabulated(t) => t.eval(s),
            WitnessFn::None => 0.0,
        }
    }
}

/// A candidate certificate for one of the decay conditions.
#[derive(Debug, Clone)]
pub struct ConditionWitness {
    pub kind: ConditionKind,
    pub g_or_h: WitnessFn,
    pub s0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub verified_range: (f64, f64),
}

impl ConditionWitness {
    pub fn power_law(kind: ConditionKind, c: f64, m: i32, s0: f64, s_max: f64) -> Self {
        Self { kind, g_or_h: WitnessFn::PowerLaw { c, m }, s0, alpha: 0.0, beta: 1.0, verified_range: (s0, s_max) }
    }

    pub fn kind_iv(s0: f64, alpha: f64, s_max: f64) -> Self {
        Self { kind: ConditionKind::IV, g_or_h: WitnessFn::None, s0, alpha, beta: 1.0, verified_range: (s0, s_max) }
    }

    pub fn describe(&self) -> String {
        match (&self.kind, &self.g_or_h) {
            (ConditionKind::IV, _) => format!("IV: s0 = {:.6}, alpha = {:.6}", self.s0, self.alpha),
            (k, WitnessFn::PowerLaw { c, m }) => format!("{k:?}: {c:.6} * s^{m}, s0 = {:.6}", self.s0),
            (k, _) => format!("{k:?}: tabulated witness, s0 = {:.6}", self.s0),
        }
    }
}

/// Outcome of a condition check on a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Verdict {
    Holds,
    FailsAt { s: f64 },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

fn lhs_i_ii(profile: &FluxProfile, s: f64) -> f64 {
    profile.eigenvalue_ratio(s) * s * s
}

fn lhs_iii(profile: &FluxProfile, beta: f64, s: f64) -> f64 {
    let b = profile.b(s);
    let bp = profile.b_deriv(s).max(0.0);
    (b + 1.0 - beta * bp * s) * s * s
}

fn lhs_iv(profile: &FluxProfile, s: f64) -> f64 {
    let b = profile.b(s);
    let bp = profile.b_deriv(s);
    (-bp * s - (b + 1.0)) * s * s
}

/// Verify the pointwise inequality of `witness.kind` on `grid`, then the
/// integral/limit side condition. The side condition is certified only for
/// power-law witnesses; tabulated ones come back inconclusive.
pub fn check_condition(profile: &FluxProfile, witness: &ConditionWitness, grid: &[f64]) -> Result<Verdict> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty sample grid".into()));
    }
    let needs_s0 = matches!(witness.kind, ConditionKind::I | ConditionKind::II | ConditionKind::IV);
    for &s in grid {
        if needs_s0 && s < witness.s0 - 1e-12 {
            return Err(Error::Precondition(format!(
                "grid point {s} below witness threshold s0 = {}",
                witness.s0
            )));
        }
        if s < 0.0 {
            return Err(Error::Precondition(format!("negative magnitude {s}")));
        }
    }
    // monotonicity of the witness itself, on the sampled range
    match (witness.kind, &witness.g_or_h) {
        (ConditionKind::I, f) => {
            let mut prev = f64::NEG_INFINITY;
            for &s in grid {
                let v = f.eval(s);
                if v < prev - 1e-12 * prev.abs().max(1.0) {
                    return Err(Error::Precondition(format!("kind I witness is decreasing at s = {s}")));
                }
                prev = v;
            }
        }
        (ConditionKind::II, f) => {
            let mut prev = f64::INFINITY;
            for &s in grid {
                let v = f.eval(s);
                if v > prev + 1e-12 * prev.abs().max(1.0) {
                    return Err(Error::Precondition(format!("kind II witness is increasing at s = {s}")));
                }
                prev = v;
            }
        }
        _ => {}
    }
    for &s in grid {
        let ok = match witness.kind {
            ConditionKind::I | ConditionKind::II => lhs_i_ii(profile, s) >= witness.g_or_h.eval(s) - 1e-14,
            ConditionKind::III => lhs_iii(profile, witness.beta, s) >= witness.g_or_h.eval(s) - 1e-14,
            ConditionKind::IV => lhs_iv(profile, s) >= witness.alpha - 1e-14,
        };
        if !ok {
            return Ok(Verdict::FailsAt { s });
        }
    }
    // side conditions
    match (witness.kind, &witness.g_or_h) {
        (ConditionKind::I, WitnessFn::PowerLaw { c, m }) => {
            // ∫ c s^(m-2) ds diverges iff m >= 1
            if *c > 0.0 && *m >= 1 {
                Ok(Verdict::Holds)
            } else {
                Ok(Verdict::Inconclusive { reason: "integral of g/s^2 does not diverge for this witness".into() })
            }
        }
        (ConditionKind::II, WitnessFn::PowerLaw { c, m }) => {
            // ∫ c s^(m-1) ds diverges iff m >= 0 (c > 0)
            if *c > 0.0 && *m >= 0 {
                Ok(Verdict::Holds)
            } else {
                Ok(Verdict::Inconclusive { reason: "integral of g/s does not diverge for this witness".into() })
            }
        }
        (ConditionKind::III, WitnessFn::PowerLaw { c, m }) => {
            if *c > 0.0 && *m >= 1 {
                Ok(Verdict::Holds)
            } else {
                Ok(Verdict::Inconclusive { reason: "h does not tend to infinity for this witness".into() })
            }
        }
        (ConditionKind::IV, _) => {
            if witness.alpha > 0.0 {
                Ok(Verdict::Holds)
            } else {
                Ok(Verdict::Inconclusive { reason: "alpha must be positive".into() })
            }
        }
        _ => Ok(Verdict::Inconclusive { reason: "side condition not certifiable for tabulated witness".into() }),
    }
}

/// Classification outcome. Absent witnesses mean the built-in search found
/// nothing, never that the condition is disproved.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    pub regular: bool,
    pub mder: Option<ConditionWitness>,
    pub sder: Option<ConditionWitness>,
    pub cond3: Option<ConditionWitness>,
    pub cond4: Option<ConditionWitness>,
}

fn default_search_grid() -> Vec<f64> {
    log_grid(1e-2, 1e3, 400)
}

/// Log-spaced grid, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Infimum of `ratio` over the grid, rejecting candidates whose infimum sits
/// at the right end of a decaying tail: a pointwise bound on a finite grid
/// says nothing about s -> ∞ in that case.
fn stable_infimum(grid: &[f64], ratio: &[f64]) -> Option<f64> {
    let n = grid.len();
    let mut idx = 0;
    for i in 1..n {
        if ratio[i] < ratio[idx] {
            idx = i;
        }
    }
    let inf = ratio[idx];
    if !(inf > 0.0) || !inf.is_finite() {
        return None;
    }
    if idx == n - 1 {
        // compare against the value one decade earlier
        let s_ref = grid[n - 1] / 10.0;
        let j = grid.iter().position(|&s| s >= s_ref).unwrap_or(0);
        if ratio[n - 1] < 0.99 * ratio[j] {
            return None;
        }
    }
    Some(inf * (1.0 - 1e-12))
}

fn search_kind_i(profile: &FluxProfile, grid: &[f64]) -> Option<ConditionWitness> {
    let s0 = grid[0];
    let s_max = *grid.last().unwrap();
    for m in [2i32, 1] {
        let ratio: Vec<f64> = grid.iter().map(|&s| lhs_i_ii(profile, s) / s.powi(m)).collect();
        if let Some(c) = stable_infimum(grid, &ratio) {
            let w = ConditionWitness::power_law(ConditionKind::I, c, m, s0, s_max);
            if matches!(check_condition(profile, &w, grid), Ok(Verdict::Holds)) {
                return Some(w);
            }
        }
    }
    None
}

fn search_kind_ii(profile: &FluxProfile, grid: &[f64]) -> Option<ConditionWitness> {
    // threshold at 1: downstream barrier machinery evaluates the witness at
    // arguments >= 4/3, and a larger s0 gives a larger constant
    let sub: Vec<f64> = grid.iter().cloned().filter(|&s| s >= 1.0).collect();
    if sub.is_empty() {
        return None;
    }
    let s0 = sub[0];
    let s_max = *sub.last().unwrap();
    let inf = sub
        .iter()
        .map(|&s| lhs_i_ii(profile, s))
        .fold(f64::INFINITY, f64::min);
    if inf > 0.0 && inf.is_finite() {
        let w = ConditionWitness::power_law(ConditionKind::II, inf * (1.0 - 1e-12), 0, s0, s_max);
        if matches!(check_condition(profile, &w, &sub), Ok(Verdict::Holds)) {
            return Some(w);
        }
    }
    None
}

fn search_kind_iii(profile: &FluxProfile, grid: &[f64]) -> Option<ConditionWitness> {
    // kind III is required down to s = 0; extend the sample grid accordingly
    let mut full = vec![0.0];
    full.extend_from_slice(grid);
    let s_max = *grid.last().unwrap();
    for beta in [0.5, 1.0, 2.0] {
        for m in [2i32, 1] {
            let ratio: Vec<f64> = grid.iter().map(|&s| lhs_iii(profile, beta, s) / s.powi(m)).collect();
            if let Some(c) = stable_infimum(grid, &ratio) {
                let mut w = ConditionWitness::power_law(ConditionKind::III, c, m, 0.0, s_max);
                w.beta = beta;
                if matches!(check_condition(profile, &w, &full), Ok(Verdict::Holds)) {
                    return Some(w);
                }
            }
        }
    }
    None
}

fn search_kind_iv(profile: &FluxProfile, grid: &[f64]) -> Option<ConditionWitness> {
    let s_max = *grid.last().unwrap();
    for (k, &s0) in grid.iter().enumerate() {
        let inf = grid[k..]
            .iter()
            .map(|&s| lhs_iv(profile, s))
            .fold(f64::INFINITY, f64::min);
        if inf > 2e-6 && inf.is_finite() {
            let w = ConditionWitness::kind_iv(s0, inf / 2.0, s_max);
            if matches!(check_condition(profile, &w, &grid[k..].to_vec()), Ok(Verdict::Holds)) {
                return Some(w);
            }
        }
    }
    None
}

/// Classify a profile: regularity plus witness search for the four decay
/// conditions on a fixed log grid. Deterministic by construction.
pub fn classify(profile: &FluxProfile) -> Result<Taxonomy> {
    let grid = default_search_grid();
    profile.validate(&grid)?;
    Ok(Taxonomy {
        regular: profile.is_regular(),
        mder: search_kind_i(profile, &grid),
        sder: search_kind_ii(profile, &grid),
        cond3: search_kind_iii(profile, &grid),
        cond4: search_kind_iv(profile, &grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_is_p_minus_2_for_p_laplace() {
        for p in [1.5, 2.0, 3.0, 4.7] {
            let prof = FluxProfile::p_laplace(p).unwrap();
            for s in [1e-3, 0.5, 1.0, 7.0, 1e3] {
                assert!((eval_b(&prof, s).unwrap() - (p - 2.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn b_minimal_surface_at_one() {
        let prof = FluxProfile::minimal_surface();
        assert!((eval_b(&prof, 1.0).unwrap() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn b_matches_log_derivative_oracle() {
        // b(s) + 1 = s * d(ln a)/ds, cross-checked by finite differences
        let profiles = [
            FluxProfile::p_laplace(1.5).unwrap(),
            FluxProfile::p_laplace(3.0).unwrap(),
            FluxProfile::minimal_surface(),
        ];
        for prof in &profiles {
            let v = eval_b(prof, 1.0).unwrap();
            let fd = central_derivative(&|t: f64| prof.a(t).ln(), 1.0, 1.0);
            assert!((v + 1.0 - fd).abs() < 1e-8, "{} b+1={} fd={}", prof.label(), v + 1.0, fd);
        }
    }

    #[test]
    fn eigenvalue_ratio_examples() {
        let lap = FluxProfile::p_laplace(2.0).unwrap();
        assert_eq!(eigenvalue_ratio(&lap, 3.0).unwrap(), 1.0);
        let ms = FluxProfile::minimal_surface();
        assert!((eigenvalue_ratio(&ms, 1.0).unwrap() - 0.5).abs() < 1e-14);
        let p3 = FluxProfile::p_laplace(3.0).unwrap();
        assert_eq!(eigenvalue_ratio(&p3, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn eigenvalue_ratio_in_unit_interval() {
        for prof in [
            FluxProfile::p_laplace(1.5).unwrap(),
            FluxProfile::p_laplace(3.0).unwrap(),
            FluxProfile::minimal_surface(),
        ] {
            for &s in &log_grid(1e-4, 1e4, 1000) {
                let r = prof.eigenvalue_ratio(s);
                assert!(r > 0.0 && r <= 1.0, "{} ratio {} at {}", prof.label(), r, s);
            }
        }
    }

    #[test]
    fn condition_i_holds_for_p_laplace() {
        let prof = FluxProfile::p_laplace(1.5).unwrap();
        let grid = log_grid(1.0, 1e3, 200);
        let w = ConditionWitness::power_law(ConditionKind::I, 0.5, 2, 1.0, 1e3);
        assert_eq!(check_condition(&prof, &w, &grid).unwrap(), Verdict::Holds);
    }

    #[test]
    fn condition_ii_holds_for_minimal_surface() {
        let prof = FluxProfile::minimal_surface();
        let grid = log_grid(1.0, 1e3, 200);
        // (1+b)s^2 = s^2/(1+s^2) is increasing; its value at s0 = 1 works
        let w = ConditionWitness::power_law(ConditionKind::II, 0.5, 0, 1.0, 1e3);
        assert_eq!(check_condition(&prof, &w, &grid).unwrap(), Verdict::Holds);
    }

    #[test]
    fn condition_iv_minimal_surface_s0_2() {
        let prof = FluxProfile::minimal_surface();
        let grid = log_grid(2.0, 1e3, 200);
        let w = ConditionWitness::kind_iv(2.0, 0.125, 1e3);
        assert_eq!(check_condition(&prof, &w, &grid).unwrap(), Verdict::Holds);
        // the left-hand side is s^2(s^2-1)/(1+s^2)^2; spot check the formula
        let s: f64 = 3.0;
        let expect = s * s * (s * s - 1.0) / (1.0 + s * s).powi(2);
        assert!((lhs_iv(&prof, s) - expect).abs() < 1e-12);
    }

    #[test]
    fn condition_check_fails_where_expected() {
        let prof = FluxProfile::minimal_surface();
        let grid = log_grid(1.0, 1e2, 50);
        // demand more than the eigenvalue ratio can give
        let w = ConditionWitness::power_law(ConditionKind::II, 2.0, 0, 1.0, 1e2);
        match check_condition(&prof, &w, &grid).unwrap() {
            Verdict::FailsAt { .. } => {}
            v => panic!("expected failure, got {v:?}"),
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        let prof = FluxProfile::minimal_surface();
        let w = ConditionWitness::power_law(ConditionKind::II, 0.5, 0, 1.0, 1e3);
        assert!(check_condition(&prof, &w, &[]).is_err());
    }

    #[test]
    fn grid_below_s0_is_an_error() {
        let prof = FluxProfile::minimal_surface();
        let w = ConditionWitness::power_law(ConditionKind::II, 0.5, 0, 1.0, 1e3);
        assert!(check_condition(&prof, &w, &[0.5, 2.0]).is_err());
    }

    #[test]
    fn classify_minimal_surface() {
        let tax = classify(&FluxProfile::minimal_surface()).unwrap();
        assert!(tax.regular);
        assert!(tax.sder.is_some(), "expected a kind II witness");
        assert!(tax.cond4.is_some(), "expected a kind IV witness");
        // the eigenvalue ratio decays like 1/s^2: no mild-decay witness should appear
        assert!(tax.mder.is_none(), "minimal surface must not get a kind I witness");
    }

    #[test]
    fn classify_p_laplace_3() {
        let tax = classify(&FluxProfile::p_laplace(3.0).unwrap()).unwrap();
        assert!(!tax.regular);
        assert!(tax.mder.is_some());
        assert!(tax.cond3.is_some());
        assert!(tax.cond4.is_none(), "p-Laplace has negative kind IV left side");
    }

    #[test]
    fn classify_laplace_is_regular_with_quadratic_witness() {
        let tax = classify(&FluxProfile::p_laplace(2.0).unwrap()).unwrap();
        assert!(tax.regular);
        match tax.mder.as_ref().map(|w| &w.g_or_h) {
            Some(WitnessFn::PowerLaw { c, m }) => {
                assert_eq!(*m, 2);
                assert!((c - 1.0).abs() < 1e-9);
            }
            other => panic!("expected power-law witness, got {other:?}"),
        }
    }

    #[test]
    fn classify_is_deterministic() {
        let a = classify(&FluxProfile::minimal_surface()).unwrap();
        let b = classify(&FluxProfile::minimal_surface()).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn tabulated_profile_round_trip() {
        // sample the minimal surface profile and compare b on the interior
        let s: Vec<f64> = (1..200).map(|i| i as f64 * 0.05).collect();
        let a: Vec<f64> = s.iter().map(|&t| t / (1.0 + t * t).sqrt()).collect();
        let prof = FluxProfile::tabulated(&s, &a, 2.0).unwrap();
        let exact = FluxProfile::minimal_surface();
        for &t in &[0.5, 1.0, 3.0, 6.0] {
            assert!((prof.b(t) - exact.b(t)).abs() < 5e-3, "t={t}");
        }
    }

    #[test]
    fn tabulated_rejects_decreasing_data() {
        let s = [0.1, 0.2, 0.3, 0.4];
        let a = [0.1, 0.3, 0.2, 0.4];
        assert!(FluxProfile::tabulated(&s, &a, 2.0).is_err());
    }

    #[test]
    fn verdict_monotone_under_grid_subsets() {
        let prof = FluxProfile::minimal_surface();
        let grid = log_grid(1.0, 1e3, 64);
        let w = ConditionWitness::power_law(ConditionKind::II, 0.4, 0, 1.0, 1e3);
        assert_eq!(check_condition(&prof, &w, &grid).unwrap(), Verdict::Holds);
        // every subset keeps the verdict
        let sub: Vec<f64> = grid.iter().cloned().step_by(7).collect();
        assert_eq!(check_condition(&prof, &w, &sub).unwrap(), Verdict::Holds);
    }
}
