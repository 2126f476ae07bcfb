//! Cross-module invariants that do not fit a single unit-test module:
//! profile derivative identities on wide sample ranges, chart positivity
//! sweeps, barrier domination of converged solves, and the energy-descent
//! monotonicity contract.

use orbitpde::barrier;
use orbitpde::flux::{classify, FluxProfile};
use orbitpde::geometry::{
    helicoidal_chart, hyperbolic_chart, lift_field, rotational_chart, DomainSpec, PlanarDomain,
    QuotientChart,
};
use orbitpde::math::central_derivative;
use orbitpde::solver::grid::ChartGrid;
use orbitpde::solver::{solve, Scheme, SolveSettings};
use orbitpde::verify;

fn builtin_charts() -> Vec<QuotientChart> {
    vec![
        helicoidal_chart(0.0, PlanarDomain::Disk { radius: 1.0 }).unwrap(),
        helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap(),
        helicoidal_chart(2.0, PlanarDomain::Annulus { inner: 0.5, outer: 2.0 }).unwrap(),
        hyperbolic_chart(3, 2.0).unwrap(),
        hyperbolic_chart(4, 1.5).unwrap(),
        rotational_chart(1.5, 3.0).unwrap(),
    ]
}

#[test]
fn log_derivative_identity_on_wide_range() {
    // b(s) + 1 = s d(ln a)/ds to relative 1e-6 on 1000 log-spaced magnitudes
    let grid = orbitpde::flux::log_grid(1e-4, 1e4, 1000);
    for profile in [
        FluxProfile::p_laplace(1.5).unwrap(),
        FluxProfile::p_laplace(2.0).unwrap(),
        FluxProfile::p_laplace(3.0).unwrap(),
        FluxProfile::minimal_surface(),
    ] {
        profile.validate(&grid).unwrap();
        for &s in &grid {
            if s < 10.0 * profile.eps_reg() {
                continue; // below the floor the value is intentionally regularized
            }
            let lhs = profile.b(s) + 1.0;
            let fd = s * central_derivative(&|t: f64| profile.a(t).ln(), s, s);
            assert!(
                (lhs - fd).abs() <= 1e-6 * lhs.abs().max(1e-3),
                "{} at s={s}: {lhs} vs {fd}",
                profile.label()
            );
        }
    }
}

#[test]
fn metric_positive_definite_on_all_builtin_grids() {
    for chart in builtin_charts() {
        let dims: Vec<usize> = if chart.dim == 1 { vec![64] } else { vec![32, 48] };
        let grid = ChartGrid::new(&chart, &dims).unwrap();
        for idx in 0..grid.total() {
            let p = grid.coords(idx);
            let g = chart.metric_at(&p[..chart.dim]);
            assert!(
                g.min_eigenvalue() > 1e-12,
                "{}: metric not positive at {:?}",
                chart.label,
                &p[..chart.dim]
            );
        }
    }
}

#[test]
fn weight_drift_consistency_under_refinement() {
    // |J + ∇ln V| at interior nodes, by central differences of the weight;
    // the bound C·h must not grow under refinement
    for chart in builtin_charts() {
        if chart.weight.is_none() {
            continue;
        }
        let mut cs = Vec::new();
        for &n in &[24usize, 48] {
            let dims: Vec<usize> = if chart.dim == 1 { vec![n * 4] } else { vec![n, n] };
            let grid = ChartGrid::new(&chart, &dims).unwrap();
            let h = grid.axes[0].h;
            let mut worst: f64 = 0.0;
            for &idx in &grid.interior_nodes() {
                let p = grid.coords(idx);
                let dim = chart.dim;
                let gi = chart.metric_at(&p[..dim]).inverse();
                let mut grad_lnv = [0.0f64; 2];
                for a in 0..dim {
                    let mut pp = [p[0], p[1]];
                    let mut pm = [p[0], p[1]];
                    pp[a] += 0.5 * h;
                    pm[a] -= 0.5 * h;
                    let dlnv = (chart.weight_at(&pp[..dim]).unwrap().ln()
                        - chart.weight_at(&pm[..dim]).unwrap().ln())
                        / h;
                    grad_lnv[a] = dlnv;
                }
                // raise the index and add J
                let j = chart.drift_at(&p[..dim]);
                let mut dev = [0.0f64; 2];
                for a in 0..dim {
                    for b in 0..dim {
                        dev[a] += gi.a[a][b] * grad_lnv[b];
                    }
                }
                dev[0] += j[0];
                dev[1] += j[1];
                let g = chart.metric_at(&p[..dim]);
                worst = worst.max(g.quad(&dev).max(0.0).sqrt());
            }
            cs.push(worst / h);
        }
        assert!(
            cs[1] <= cs[0] * 2.0 + 1e-6,
            "{}: consistency constant grows under refinement: {cs:?}",
            chart.label
        );
    }
}

#[test]
fn screw_cylinder_curvature_split_tight() {
    let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
    let mismatch = verify::check_hahb(&chart, 64).unwrap();
    assert!(mismatch <= 1e-3, "relative mismatch {mismatch}");
}

#[test]
fn lifted_field_is_orbit_invariant() {
    let chart = helicoidal_chart(1.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
    let v = |p: &[f64]| (p[0] * 1.3).sin() * (p[1]).cos();
    let field = lift_field(&chart, Box::new(v)).unwrap();
    let lift = chart.lift.as_ref().unwrap();
    for &t in &[0.0, 0.4, -1.1] {
        let q0 = (lift.to_ambient)(&[0.5, 1.0], 0.0);
        // move q0 along the orbit: same group element applied ambiently
        let qt = (lift.to_ambient)(&[0.5, 1.0], t);
        let u0 = field.eval(&q0).unwrap();
        let ut = field.eval(&qt).unwrap();
        assert!((u0 - ut).abs() < 1e-13, "orbit invariance broken: {u0} vs {ut}");
    }
}

#[test]
fn energy_descent_monotone_energy() {
    let chart = rotational_chart(1.5, 3.0).unwrap();
    let domain = DomainSpec::new(chart, Box::new(|p: &[f64]| p[0].acosh()));
    let profile = FluxProfile::minimal_surface();
    let settings = SolveSettings {
        scheme: Scheme::EnergyDescent,
        grid: vec![128],
        override_gate: true,
        max_iterations: 300,
        ..Default::default()
    };
    let out = solve(&domain, &profile, &settings).unwrap();
    assert!(out.convergence.converged);
    let e = &out.convergence.energy_history;
    assert!(e.len() >= 2, "expected recorded energies, got {}", e.len());
    for k in 1..e.len() {
        assert!(
            e[k] <= e[k - 1] + 1e-12 * (1.0 + e[k - 1].abs()),
            "energy increased at step {k}: {} -> {}",
            e[k - 1],
            e[k]
        );
    }
}

#[test]
fn catenoid_ambient_residual_second_order() {
    // the exact radial solution, lifted to the plane, drives the ambient
    // conservative operator to zero at second order
    let profile = FluxProfile::minimal_surface();
    let mut sups = Vec::new();
    for &n in &[64usize, 128, 256] {
        let chart = rotational_chart(1.5, 3.0).unwrap();
        let grid = ChartGrid::new(&chart, &[n]).unwrap();
        let values: Vec<f64> = (0..grid.total()).map(|i| grid.coords(i)[0].acosh()).collect();
        let field = orbitpde::solver::SolutionField {
            grid,
            values,
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
        };
        let chk = verify::check_reduction(&chart, &profile, &field).unwrap();
        sups.push(chk.lift_residual);
    }
    for k in 1..sups.len() {
        let order = (sups[k - 1] / sups[k]).log2();
        assert!(order > 1.5, "ambient residual order {order} ({sups:?})");
    }
}

#[test]
fn barrier_dominates_solution_and_bounds_normal_derivative() {
    // flat disk, harmonic data: the constructed barrier must pinch the
    // solution on the strip and its slope must bound the discrete normal
    // derivative at the boundary
    let profile = FluxProfile::p_laplace(2.0).unwrap();
    let tax = classify(&profile).unwrap();
    let witness = tax.mder.as_ref().unwrap();
    let psi = |p: &[f64]| 0.2 * p[0] * p[1].cos();
    let chart = helicoidal_chart(0.0, PlanarDomain::Disk { radius: 1.0 }).unwrap();
    let domain = DomainSpec::new(chart, Box::new(psi));
    let bar = barrier::build_supersolution(&domain, &profile, witness).unwrap();

    let settings =
        SolveSettings { scheme: Scheme::Newton, grid: vec![48, 64], ..Default::default() };
    let out = solve(&domain, &profile, &settings).unwrap();
    assert!(out.convergence.converged);
    let grid = &out.field.grid;
    let tau = 10.0 * settings.tolerance;
    for idx in 0..grid.total() {
        let p = grid.coords(idx);
        let d = 1.0 - p[0];
        if d <= bar.delta {
            let upper = psi(&p[..2]) + bar.f(d);
            let lower = psi(&p[..2]) - bar.f(d);
            let v = out.field.values[idx];
            assert!(v <= upper + tau, "upper barrier fails at {:?}: {v} vs {upper}", &p[..2]);
            assert!(v >= lower - tau, "lower barrier fails at {:?}: {v} vs {lower}", &p[..2]);
        }
    }
    // one-sided normal derivative at the rim
    let n0 = grid.axes[0].n;
    let h0 = grid.axes[0].h;
    let mut worst: f64 = 0.0;
    for i1 in 0..grid.axes[1].n {
        let vb = out.field.values[grid.idx(n0 - 1, i1)];
        let vi = out.field.values[grid.idx(n0 - 2, i1)];
        worst = worst.max(((vb - vi) / h0).abs());
    }
    assert!(
        worst <= 1.1 * bar.gradient_bound,
        "normal derivative {worst} exceeds the bound {}",
        bar.gradient_bound
    );
}

#[test]
fn conservation_law_in_derivative_form() {
    // d/ds [ (cosh s)^(n-2) a(-g'(s)) ] = 0 with g' recovered from the
    // integrated profile by finite differences
    for &(n, c) in &[(3usize, 0.5f64), (4, 0.9)] {
        let hb = barrier::hyperbolic_barrier(n, c).unwrap();
        let composite = |s: f64| -> f64 {
            let v = -hb.g_prime_from_profile(s);
            s.cosh().powi(n as i32 - 2) * v / (1.0 + v * v).sqrt()
        };
        for &s in &[0.5f64, 1.0, 1.8, 2.6] {
            let h = 1e-4;
            let deriv = (composite(s + h) - composite(s - h)) / (2.0 * h);
            assert!(deriv.abs() <= 1e-6, "n={n} c={c} s={s}: d/ds = {deriv}");
        }
    }
}
