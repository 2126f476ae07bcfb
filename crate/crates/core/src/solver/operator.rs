//! Discrete operators on chart grids.
//!
//! Two equivalent forms of the reduced equation are discretized:
//!
//! - the non-divergence form
//!   `Q_J[v] = Δv + b(|∇v|) ∇²v(ŵ, ŵ) - <∇v, J>`
//!   with metric-aware central differences (`apply_operator`), available on
//!   every chart;
//! - the weighted conservative form
//!   `(1/Ṽ) ∂_i ( Ṽ F(|∇v|) g^{ij} ∂_j v )` with `Ṽ = V sqrt(det g)` and
//!   `F = a(s)/s`, via staggered half-node fluxes (`apply_divergence_form`),
//!   available when the orbit weight `V` exists. The drift is implicit in the
//!   weight there, since `J = -∇ ln V`.
//!
//! On periodic axes the second-difference and first-difference stencils carry
//! the factors `h²/(2-2cos h)` and `h/sin h`; both tend to 1 quadratically and
//! make the stencils exact on first angular harmonics, so that fields linear
//! in the ambient coordinates solve the flat problem to rounding.

use crate::error::{Error, Result};
use crate::flux::FluxProfile;
use crate::geometry::{EdgeKind, QuotientChart, SymMat};
use crate::linalg::SparseRows;
use crate::solver::grid::{ChartGrid, Resolved};

/// Geometric data compiled once per (chart, grid) pair.
pub struct ChartData<'c> {
    pub chart: &'c QuotientChart,
    pub grid: ChartGrid,
    pub dim: usize,
    pub ginv: Vec<SymMat>,
    pub gamma: Vec<[[[f64; 2]; 2]; 2]>,
    pub drift: Vec<[f64; 2]>,
    pub vtil: Vec<f64>,
    pub has_weight: bool,
    /// axis-0 faces, index `i * n1 + j` with `i` in `0..=n0`
    face0: Vec<FaceData>,
    /// axis-1 faces (2d only), index `i * stride1 + j`
    face1: Vec<FaceData>,
    stride1: usize,
    periodic1: bool,
    pub c1: [f64; 2],
    pub c2: [f64; 2],
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FaceData {
    /// `Ṽ_f g^{aa}_f` times the trig correction: multiplies `F(σ) D`
    pub w_coef: f64,
    /// raw `g^{aa}` at the face (inline direction), for the gradient norm
    pub s_inline: f64,
    /// raw transverse `g^{bb}` at the face
    pub s_trans: f64,
    pub vtil: f64,
}

fn vtil_at(chart: &QuotientChart, p: &[f64]) -> f64 {
    let g = chart.metric_at(p);
    let det = g.det().max(0.0);
    let w = chart.weight_at(p).unwrap_or(1.0);
    w * det.sqrt()
}

impl<'c> ChartData<'c> {
    pub fn compile(chart: &'c QuotientChart, grid: ChartGrid) -> Result<Self> {
        let dim = chart.dim;
        let total = grid.total();
        let mut ginv = Vec::with_capacity(total);
        let mut gamma = Vec::with_capacity(total);
        let mut drift = Vec::with_capacity(total);
        let mut vtil = Vec::with_capacity(total);
        for idx in 0..total {
            let p = grid.coords(idx);
            let g = chart.metric_at(&p[..dim]);
            if !(g.det() > 0.0) || !(g.min_eigenvalue() > 0.0) {
                return Err(Error::ChartInvalid(format!(
                    "metric not positive definite at node {idx} ({:?})",
                    &p[..dim]
                )));
            }
            ginv.push(g.inverse());
            gamma.push(chart.christoffels(&p[..dim]));
            drift.push(chart.drift_at(&p[..dim]));
            vtil.push(vtil_at(chart, &p[..dim]));
        }
        let mut c1 = [1.0, 1.0];
        let mut c2 = [1.0, 1.0];
        for a in 0..dim {
            if grid.axes[a].edge_lo == EdgeKind::Periodic {
                let h = grid.axes[a].h;
                c1[a] = h / h.sin();
                c2[a] = h * h / (2.0 - 2.0 * h.cos());
            }
        }
        let n0 = grid.axes[0].n;
        let n1 = if dim == 2 { grid.axes[1].n } else { 1 };
        let periodic1 = dim == 2 && grid.axes[1].edge_lo == EdgeKind::Periodic;
        let stride1 = if periodic1 { n1 } else { n1 + 1 };
        // faces along axis 0: face i sits between nodes i-1 and i
        let mut face0 = vec![FaceData::default(); (n0 + 1) * n1];
        for i in 0..=n0 {
            let r = face0_coord(&grid, i);
            for j in 0..n1 {
                let mut p = [r, 0.0];
                if dim == 2 {
                    p[1] = grid.axes[1].node(j);
                }
                let g = chart.metric_at(&p[..dim]);
                let det = g.det().max(0.0);
                let vt = chart.weight_at(&p[..dim]).unwrap_or(1.0) * det.sqrt();
                let gi = if det > 0.0 { g.inverse() } else { SymMat::diag(dim, 0.0, 0.0) };
                face0[i * n1 + j] = FaceData {
                    w_coef: vt * gi.a[0][0] * c2[0],
                    s_inline: gi.a[0][0],
                    s_trans: if dim == 2 { gi.a[1][1] } else { 0.0 },
                    vtil: vt,
                };
            }
        }
        let mut face1 = Vec::new();
        if dim == 2 {
            face1 = vec![FaceData::default(); n0 * stride1];
            let nfaces1 = if periodic1 { n1 } else { n1 + 1 };
            for i in 0..n0 {
                let r = grid.axes[0].node(i);
                for j in 0..nfaces1 {
                    let t = face1_coord(&grid, j);
                    let p = [r, t];
                    let g = chart.metric_at(&p);
                    let det = g.det().max(0.0);
                    let vt = chart.weight_at(&p).unwrap_or(1.0) * det.sqrt();
                    let gi = if det > 0.0 { g.inverse() } else { SymMat::diag(2, 0.0, 0.0) };
                    face1[i * stride1 + j] = FaceData {
                        w_coef: vt * gi.a[1][1] * c2[1],
                        s_inline: gi.a[1][1],
                        s_trans: gi.a[0][0],
                        vtil: vt,
                    };
                }
            }
        }
        Ok(Self {
            chart,
            grid,
            dim,
            ginv,
            gamma,
            drift,
            vtil,
            has_weight: chart.weight.is_some(),
            face0,
            face1,
            stride1,
            periodic1,
            c1,
            c2,
        })
    }

    fn face0_data(&self, i: usize, j: usize) -> &FaceData {
        let n1 = if self.dim == 2 { self.grid.axes[1].n } else { 1 };
        &self.face0[i * n1 + j]
    }

    fn face1_data(&self, i: usize, j: usize) -> &FaceData {
        &self.face1[i * self.stride1 + j]
    }
}

fn face0_coord(grid: &ChartGrid, i: usize) -> f64 {
    let a = &grid.axes[0];
    if a.offset {
        a.lo + i as f64 * a.h
    } else {
        a.lo + (i as f64 - 0.5) * a.h
    }
}

fn face1_coord(grid: &ChartGrid, j: usize) -> f64 {
    let a = &grid.axes[1];
    a.lo + (j as f64 - 0.5) * a.h
}

/// Stencil entry: node index and coefficient.
pub type Entry = (usize, f64);

fn push(entries: &mut Vec<Entry>, grid: &ChartGrid, i0: isize, i1: isize, c: f64) {
    if c == 0.0 {
        return;
    }
    match grid.resolve(i0, i1) {
        Resolved::Node(k) => entries.push((k, c)),
        Resolved::Outside => panic!("stencil stepped outside the grid"),
    }
}

/// First derivative stencil along `axis` at node `(i0, i1)` (central, with the
/// periodic trig factor).
fn deriv_stencil(cd: &ChartData, axis: usize, i0: isize, i1: isize, out: &mut Vec<Entry>) {
    let h = cd.grid.axes[axis].h;
    let c = cd.c1[axis] / (2.0 * h);
    if axis == 0 {
        push(out, &cd.grid, i0 + 1, i1, c);
        push(out, &cd.grid, i0 - 1, i1, -c);
    } else {
        push(out, &cd.grid, i0, i1 + 1, c);
        push(out, &cd.grid, i0, i1 - 1, -c);
    }
}

fn eval_entries(v: &[f64], entries: &[Entry]) -> f64 {
    entries.iter().map(|&(k, c)| c * v[k]).sum()
}

/// All stencils needed by the non-divergence form at one node.
struct QjStencils {
    d: [Vec<Entry>; 2],
    h: [[Vec<Entry>; 2]; 2],
}

fn qj_stencils(cd: &ChartData, idx: usize) -> QjStencils {
    let (i0u, i1u) = cd.grid.multi(idx);
    let (i0, i1) = (i0u as isize, i1u as isize);
    let dim = cd.dim;
    let g = &cd.grid;
    let mut d0 = Vec::new();
    let mut d1 = Vec::new();
    deriv_stencil(cd, 0, i0, i1, &mut d0);
    if dim == 2 {
        deriv_stencil(cd, 1, i0, i1, &mut d1);
    }
    let h0 = g.axes[0].h;
    let mut h00 = Vec::new();
    let c00 = cd.c2[0] / (h0 * h0);
    push(&mut h00, g, i0 + 1, i1, c00);
    push(&mut h00, g, i0, i1, -2.0 * c00);
    push(&mut h00, g, i0 - 1, i1, c00);
    let mut h11 = Vec::new();
    let mut h01 = Vec::new();
    if dim == 2 {
        let h1 = g.axes[1].h;
        let c11 = cd.c2[1] / (h1 * h1);
        push(&mut h11, g, i0, i1 + 1, c11);
        push(&mut h11, g, i0, i1, -2.0 * c11);
        push(&mut h11, g, i0, i1 - 1, c11);
        let cx = cd.c1[0] * cd.c1[1] / (4.0 * h0 * h1);
        push(&mut h01, g, i0 + 1, i1 + 1, cx);
        push(&mut h01, g, i0 + 1, i1 - 1, -cx);
        push(&mut h01, g, i0 - 1, i1 + 1, -cx);
        push(&mut h01, g, i0 - 1, i1 - 1, cx);
    }
    QjStencils { d: [d0, d1], h: [[h00, h01.clone()], [h01, h11]] }
}

/// Non-divergence form `Q_J[v]` at an interior node.
pub fn apply_operator(cd: &ChartData, profile: &FluxProfile, v: &[f64], idx: usize) -> Result<f64> {
    if cd.grid.is_boundary(idx) {
        return Err(Error::Precondition("operator evaluated at a boundary node".into()));
    }
    let st = qj_stencils(cd, idx);
    let dim = cd.dim;
    let mut p = [0.0; 2];
    for a in 0..dim {
        p[a] = eval_entries(v, &st.d[a]);
    }
    let mut hess = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            hess[a][b] = eval_entries(v, &st.h[a][b]);
        }
    }
    let gamma = &cd.gamma[idx];
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                hess[a][b] -= gamma[c][a][b] * p[c];
            }
        }
    }
    let ginv = &cd.ginv[idx];
    let mut grad = [0.0; 2];
    for a in 0..dim {
        for b in 0..dim {
            grad[a] += ginv.a[a][b] * p[b];
        }
    }
    let sig2: f64 = (0..dim).map(|a| grad[a] * p[a]).sum::<f64>().max(0.0);
    let sig = profile.regularize(sig2.sqrt());
    let w = [grad[0] / sig, grad[1] / sig];
    let bval = profile.b(sig);
    let mut q = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            q += (ginv.a[a][b] + bval * w[a] * w[b]) * hess[a][b];
        }
    }
    let j = &cd.drift[idx];
    for a in 0..dim {
        q -= p[a] * j[a];
    }
    Ok(q)
}

/// One staggered flux along a family; returns the flux value and, when
/// `want_jac`, the derivative stencil.
fn face_flux(
    cd: &ChartData,
    profile: &FluxProfile,
    v: &[f64],
    family: usize,
    fi: usize,
    fj: usize,
    want_jac: bool,
) -> (f64, Vec<Entry>) {
    let g = &cd.grid;
    let fd = if family == 0 { cd.face0_data(fi, fj) } else { cd.face1_data(fi, fj) };
    if fd.vtil <= 0.0 {
        return (0.0, Vec::new());
    }
    let dim = cd.dim;
    let h_in = g.axes[family].h;
    // inline difference between the two nodes the face separates
    let (lo0, lo1, hi0, hi1): (isize, isize, isize, isize) = if family == 0 {
        (fi as isize - 1, fj as isize, fi as isize, fj as isize)
    } else {
        (fi as isize, fj as isize - 1, fi as isize, fj as isize)
    };
    let mut dstencil: Vec<Entry> = Vec::new();
    push(&mut dstencil, g, hi0, hi1, 1.0 / h_in);
    push(&mut dstencil, g, lo0, lo1, -1.0 / h_in);
    let dv = eval_entries(v, &dstencil);
    // transverse derivative: average of the central differences at both nodes
    let mut tstencil: Vec<Entry> = Vec::new();
    let mut tv = 0.0;
    if dim == 2 {
        let trans = 1 - family;
        let mut tmp = Vec::new();
        deriv_stencil(cd, trans, lo0, lo1, &mut tmp);
        deriv_stencil(cd, trans, hi0, hi1, &mut tmp);
        for (k, c) in tmp {
            tstencil.push((k, 0.5 * c));
        }
        tv = eval_entries(v, &tstencil);
    }
    let q = (fd.s_inline * dv * dv + fd.s_trans * tv * tv).max(0.0);
    let sig = profile.regularize(q.sqrt());
    let f = profile.a(sig) / sig;
    let flux = fd.w_coef * f * dv;
    if !want_jac {
        return (flux, Vec::new());
    }
    // d flux = w [ F dD + D F'(σ) dσ ],  F'(σ) = F b(σ)/σ,  dσ = dq/(2σ)
    let fp = f * profile.b(sig) / sig;
    let mut jac: Vec<Entry> = Vec::new();
    let push_j = |jac: &mut Vec<Entry>, k: usize, c: f64| {
        if c != 0.0 {
            match jac.iter_mut().find(|e| e.0 == k) {
                Some(e) => e.1 += c,
                None => jac.push((k, c)),
            }
        }
    };
    for &(k, c) in &dstencil {
        // through D directly and through σ
        let dq_dk = 2.0 * fd.s_inline * dv * c;
        push_j(&mut jac, k, fd.w_coef * (f * c + dv * fp * dq_dk / (2.0 * sig)));
    }
    for &(k, c) in &tstencil {
        let dq_dk = 2.0 * fd.s_trans * tv * c;
        push_j(&mut jac, k, fd.w_coef * (dv * fp * dq_dk / (2.0 * sig)));
    }
    (flux, jac)
}

/// Weighted conservative form at an interior node.
pub fn apply_divergence_form(
    cd: &ChartData,
    profile: &FluxProfile,
    v: &[f64],
    idx: usize,
) -> Result<f64> {
    if !cd.has_weight {
        return Err(Error::Precondition(format!(
            "chart `{}` carries no orbit weight; the conservative form needs one",
            cd.chart.label
        )));
    }
    if cd.grid.is_boundary(idx) {
        return Err(Error::Precondition("operator evaluated at a boundary node".into()));
    }
    let (i0, i1) = cd.grid.multi(idx);
    let mut r = 0.0;
    let h0 = cd.grid.axes[0].h;
    let (f_hi, _) = face_flux(cd, profile, v, 0, i0 + 1, i1, false);
    let (f_lo, _) = face_flux(cd, profile, v, 0, i0, i1, false);
    r += (f_hi - f_lo) / h0;
    if cd.dim == 2 {
        let h1 = cd.grid.axes[1].h;
        let jhi = if cd.periodic1 { (i1 + 1) % cd.grid.axes[1].n } else { i1 + 1 };
        let (f1_hi, _) = face_flux(cd, profile, v, 1, i0, jhi, false);
        let (f1_lo, _) = face_flux(cd, profile, v, 1, i0, i1, false);
        r += (f1_hi - f1_lo) / h1;
    }
    Ok(r / cd.vtil[idx])
}

/// Which discrete system a solve drives to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimaryForm {
    /// staggered conservative fluxes (charts with a weight)
    Divergence,
    /// central-difference `Q_J` (weightless charts)
    NonDivergence,
}

pub fn primary_form(cd: &ChartData) -> PrimaryForm {
    if cd.has_weight {
        PrimaryForm::Divergence
    } else {
        PrimaryForm::NonDivergence
    }
}

pub fn residual_at(
    cd: &ChartData,
    profile: &FluxProfile,
    form: PrimaryForm,
    v: &[f64],
    idx: usize,
) -> Result<f64> {
    match form {
        PrimaryForm::Divergence => apply_divergence_form(cd, profile, v, idx),
        PrimaryForm::NonDivergence => apply_operator(cd, profile, v, idx),
    }
}

/// Residual over the interior in grid order, plus its sup norm.
pub fn residual_vector(
    cd: &ChartData,
    profile: &FluxProfile,
    form: PrimaryForm,
    v: &[f64],
    interior: &[usize],
) -> Result<(Vec<f64>, f64)> {
    let mut res = Vec::with_capacity(interior.len());
    let mut norm: f64 = 0.0;
    for &idx in interior {
        let r = residual_at(cd, profile, form, v, idx)?;
        norm = norm.max(r.abs());
        res.push(r);
    }
    Ok((res, norm))
}

/// Discrete energy `Σ Ṽ Φ(σ) vol` by face quadrature (each face family
/// integrates the whole cell volume; in 2d the two families are averaged).
/// Its exact gradient in 1d is the conservative residual, which is what makes
/// descent on it land on the same solution as the other schemes.
pub fn energy(cd: &ChartData, profile: &FluxProfile, v: &[f64]) -> Result<f64> {
    if !cd.has_weight {
        return Err(Error::Precondition("energy needs an orbit weight".into()));
    }
    let g = &cd.grid;
    let n0 = g.axes[0].n;
    let n1 = if cd.dim == 2 { g.axes[1].n } else { 1 };
    let h0 = g.axes[0].h;
    let vol = if cd.dim == 2 { h0 * g.axes[1].h } else { h0 };
    let fam_weight = if cd.dim == 2 { 0.5 } else { 1.0 };
    let mut e = 0.0;
    for i in 1..n0 {
        for j in 0..n1 {
            let fd = cd.face0_data(i, j);
            if fd.vtil <= 0.0 {
                continue;
            }
            let sig = face_sigma(cd, profile, v, 0, i, j);
            e += fam_weight * vol * fd.vtil * profile.phi(sig);
        }
    }
    if cd.dim == 2 {
        let nf1 = if cd.periodic1 { n1 } else { n1 + 1 };
        let j_range = if cd.periodic1 { 0..nf1 } else { 1..n1 };
        for i in 0..n0 {
            for j in j_range.clone() {
                let fd = cd.face1_data(i, j);
                if fd.vtil <= 0.0 {
                    continue;
                }
                let sig = face_sigma(cd, profile, v, 1, i, j);
                e += fam_weight * vol * fd.vtil * profile.phi(sig);
            }
        }
    }
    Ok(e)
}

fn face_sigma(cd: &ChartData, profile: &FluxProfile, v: &[f64], family: usize, fi: usize, fj: usize) -> f64 {
    let g = &cd.grid;
    let fd = if family == 0 { cd.face0_data(fi, fj) } else { cd.face1_data(fi, fj) };
    let h_in = g.axes[family].h;
    let (lo0, lo1, hi0, hi1): (isize, isize, isize, isize) = if family == 0 {
        (fi as isize - 1, fj as isize, fi as isize, fj as isize)
    } else {
        (fi as isize, fj as isize - 1, fi as isize, fj as isize)
    };
    let dv = (g.value_at(v, hi0, hi1) - g.value_at(v, lo0, lo1)) / h_in;
    let mut tv = 0.0;
    if cd.dim == 2 {
        let trans = 1 - family;
        let mut tmp = Vec::new();
        deriv_stencil(cd, trans, lo0, lo1, &mut tmp);
        deriv_stencil(cd, trans, hi0, hi1, &mut tmp);
        tv = 0.5 * eval_entries(v, &tmp);
    }
    let q = (fd.s_inline * dv * dv + fd.s_trans * tv * tv).max(0.0);
    profile.regularize(q.sqrt())
}

/// Chart-metric gradient norm at a node by central differences.
pub fn gradient_norm_at(cd: &ChartData, v: &[f64], idx: usize) -> f64 {
    let st = qj_stencils(cd, idx);
    let dim = cd.dim;
    let mut p = [0.0; 2];
    for a in 0..dim {
        p[a] = eval_entries(v, &st.d[a]);
    }
    let ginv = &cd.ginv[idx];
    let mut q = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            q += ginv.a[a][b] * p[a] * p[b];
        }
    }
    q.max(0.0).sqrt()
}

/// How matrix assembly linearizes the problem.
pub enum Assembly {
    /// frozen-coefficient (lagged diffusivity) linear operator
    Picard,
    /// full analytic Jacobian
    Newton,
    /// plain metric Laplacian, for the harmonic initial guess
    LaplaceInit,
}

/// Assemble the linear system over interior unknowns. For `Picard` and
/// `LaplaceInit` the system is `A w = rhs` for the full new iterate `w`
/// (boundary data folded into `rhs`); for `Newton` it is `A δ = -R`.
pub fn assemble(
    cd: &ChartData,
    profile: &FluxProfile,
    form: PrimaryForm,
    mode: &Assembly,
    v: &[f64],
    interior: &[usize],
    eq_of: &[usize],
) -> Result<(SparseRows, Vec<f64>)> {
    let n = interior.len();
    let mut a = SparseRows::new(n);
    let mut rhs = vec![0.0; n];
    match form {
        PrimaryForm::Divergence => {
            for (row, &idx) in interior.iter().enumerate() {
                let (i0, i1) = cd.grid.multi(idx);
                let scale = 1.0 / cd.vtil[idx];
                let mut entries: Vec<Entry> = Vec::new();
                let mut residual = 0.0;
                let mut add_face = |fam: usize, fi: usize, fj: usize, sign: f64, h: f64| {
                    let (flux, jac) = match mode {
                        Assembly::Newton => {
                            let (f, j) = face_flux(cd, profile, v, fam, fi, fj, true);
                            (f, j)
                        }
                        Assembly::Picard => {
                            // frozen F: linear part only, with σ from current v
                            let (f, _) = face_flux(cd, profile, v, fam, fi, fj, false);
                            let fd = if fam == 0 { cd.face0_data(fi, fj) } else { cd.face1_data(fi, fj) };
                            if fd.vtil <= 0.0 {
                                (0.0, Vec::new())
                            } else {
                                let sig = face_sigma(cd, profile, v, fam, fi, fj);
                                let coef = fd.w_coef * profile.a(sig) / sig;
                                let g = &cd.grid;
                                let h_in = g.axes[fam].h;
                                let (lo0, lo1, hi0, hi1): (isize, isize, isize, isize) = if fam == 0 {
                                    (fi as isize - 1, fj as isize, fi as isize, fj as isize)
                                } else {
                                    (fi as isize, fj as isize - 1, fi as isize, fj as isize)
                                };
                                let mut jac = Vec::new();
                                push(&mut jac, g, hi0, hi1, coef / h_in);
                                push(&mut jac, g, lo0, lo1, -coef / h_in);
                                (f, jac)
                            }
                        }
                        Assembly::LaplaceInit => {
                            let fd = if fam == 0 { cd.face0_data(fi, fj) } else { cd.face1_data(fi, fj) };
                            let coef = fd.w_coef;
                            if fd.vtil <= 0.0 {
                                (0.0, Vec::new())
                            } else {
                                let g = &cd.grid;
                                let h_in = g.axes[fam].h;
                                let (lo0, lo1, hi0, hi1): (isize, isize, isize, isize) = if fam == 0 {
                                    (fi as isize - 1, fj as isize, fi as isize, fj as isize)
                                } else {
                                    (fi as isize, fj as isize - 1, fi as isize, fj as isize)
                                };
                                let mut jac = Vec::new();
                                push(&mut jac, g, hi0, hi1, coef / h_in);
                                push(&mut jac, g, lo0, lo1, -coef / h_in);
                                (0.0, jac)
                            }
                        }
                    };
                    residual += sign * flux / h * scale;
                    for (k, c) in jac {
                        entries.push((k, sign * c / h * scale));
                    }
                };
                let h0 = cd.grid.axes[0].h;
                add_face(0, i0 + 1, i1, 1.0, h0);
                add_face(0, i0, i1, -1.0, h0);
                if cd.dim == 2 {
                    let h1 = cd.grid.axes[1].h;
                    let n1 = cd.grid.axes[1].n;
                    let jhi = if cd.periodic1 { (i1 + 1) % n1 } else { i1 + 1 };
                    add_face(1, i0, jhi, 1.0, h1);
                    add_face(1, i0, i1, -1.0, h1);
                }
                distribute(cd, mode, row, &entries, residual, v, eq_of, &mut a, &mut rhs);
            }
        }
        PrimaryForm::NonDivergence => {
            for (row, &idx) in interior.iter().enumerate() {
                let (entries, residual) = qj_row(cd, profile, mode, v, idx)?;
                distribute(cd, mode, row, &entries, residual, v, eq_of, &mut a, &mut rhs);
            }
        }
    }
    Ok((a, rhs))
}

/// Scatter a row's stencil into the interior system; boundary columns go to
/// the right-hand side (Picard/init) or vanish (Newton, where δ = 0 there).
#[allow(clippy::too_many_arguments)]
fn distribute(
    cd: &ChartData,
    mode: &Assembly,
    row: usize,
    entries: &[Entry],
    residual: f64,
    v: &[f64],
    eq_of: &[usize],
    a: &mut SparseRows,
    rhs: &mut [f64],
) {
    match mode {
        Assembly::Newton => {
            rhs[row] = -residual;
            for &(k, c) in entries {
                if !cd.grid.is_boundary(k) {
                    a.add(row, eq_of[k], c);
                }
            }
        }
        Assembly::Picard | Assembly::LaplaceInit => {
            for &(k, c) in entries {
                if cd.grid.is_boundary(k) {
                    rhs[row] -= c * v[k];
                } else {
                    a.add(row, eq_of[k], c);
                }
            }
        }
    }
}

/// Row of the non-divergence form: stencil entries of the linearization and
/// the residual value.
fn qj_row(
    cd: &ChartData,
    profile: &FluxProfile,
    mode: &Assembly,
    v: &[f64],
    idx: usize,
) -> Result<(Vec<Entry>, f64)> {
    let st = qj_stencils(cd, idx);
    let dim = cd.dim;
    let mut p = [0.0; 2];
    for a in 0..dim {
        p[a] = eval_entries(v, &st.d[a]);
    }
    let mut hess_raw = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            hess_raw[a][b] = eval_entries(v, &st.h[a][b]);
        }
    }
    let gamma = &cd.gamma[idx];
    let mut hess = hess_raw;
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                hess[a][b] -= gamma[c][a][b] * p[c];
            }
        }
    }
    let ginv = &cd.ginv[idx];
    let mut grad = [0.0; 2];
    for a in 0..dim {
        for b in 0..dim {
            grad[a] += ginv.a[a][b] * p[b];
        }
    }
    let sig2: f64 = (0..dim).map(|a| grad[a] * p[a]).sum::<f64>().max(0.0);
    let sig = profile.regularize(sig2.sqrt());
    let w = [grad[0] / sig, grad[1] / sig];
    let bval = match mode {
        Assembly::LaplaceInit => 0.0,
        _ => profile.b(sig),
    };
    let mut amat = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            amat[a][b] = ginv.a[a][b]
                + match mode {
                    Assembly::LaplaceInit => 0.0,
                    _ => bval * w[a] * w[b],
                };
        }
    }
    let jf = &cd.drift[idx];
    let drift = match mode {
        Assembly::LaplaceInit => [0.0; 2],
        _ => *jf,
    };
    let mut residual = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            residual += amat[a][b] * hess[a][b];
        }
        residual -= p[a] * drift[a];
    }
    // linear part: A^{ab} ∂²_ab - (A^{ab} Γ^c_ab + J^c) ∂_c
    let mut entries: Vec<Entry> = Vec::new();
    let add = |list: &[Entry], c: f64, entries: &mut Vec<Entry>| {
        if c == 0.0 {
            return;
        }
        for &(k, cc) in list {
            entries.push((k, c * cc));
        }
    };
    for a in 0..dim {
        for b in 0..dim {
            add(&st.h[a][b], amat[a][b], &mut entries);
        }
    }
    for c in 0..dim {
        let mut coef = -drift[c];
        for a in 0..dim {
            for b in 0..dim {
                coef -= amat[a][b] * gamma[c][a][b];
            }
        }
        add(&st.d[c], coef, &mut entries);
    }
    if let Assembly::Newton = mode {
        // coefficient derivatives: ∂A^{ab}/∂p_c Hess_ab contributes through
        // the first-derivative stencils
        let bp = profile.b_deriv(sig);
        for c in 0..dim {
            let dsig = grad[c] / sig;
            let mut coef = 0.0;
            for a in 0..dim {
                for b in 0..dim {
                    let dw_a = ginv.a[a][c] / sig - w[a] * grad[c] / (sig * sig);
                    let dw_b = ginv.a[b][c] / sig - w[b] * grad[c] / (sig * sig);
                    let da = bp * dsig * w[a] * w[b] + bval * (dw_a * w[b] + w[a] * dw_b);
                    coef += da * hess[a][b];
                }
            }
            add(&st.d[c], coef, &mut entries);
        }
    }
    // merge duplicate columns
    entries.sort_by_key(|e| e.0);
    let mut merged: Vec<Entry> = Vec::with_capacity(entries.len());
    for (k, c) in entries {
        match merged.last_mut() {
            Some(e) if e.0 == k => e.1 += c,
            _ => merged.push((k, c)),
        }
    }
    Ok((merged, residual))
}
