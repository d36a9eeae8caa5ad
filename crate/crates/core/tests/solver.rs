use std::sync::Arc;

use kirchpore::linalg::{SparseLu, Triplets};
use kirchpore::mesh::{FaceKind, FlowBc};
use kirchpore::scenarios;
use kirchpore::solver::{average_source, read_checkpoint, write_checkpoint, Solver, State};

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_data_stays_zero() {
    let solver = Solver::new(scenarios::zero_data(4, 5).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    assert_eq!(traj.states.len(), 6);
    for s in &traj.states {
        assert!(s.u.iter().chain(&s.chi).all(|&v| v == 0.0));
    }
    for info in &traj.steps {
        assert_eq!(info.iterations, 1);
        assert_eq!(info.min_saturation, 1.0);
    }
    assert!(traj.warnings.is_empty());
}

#[test]
fn no_steps_returns_initial_state() {
    let solver = Solver::new(scenarios::steady_load(3, 0).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    assert_eq!(traj.states.len(), 1);
    assert!(traj.steps.is_empty());
    assert_eq!(traj.last().unwrap(), &solver.init_state().unwrap());
}

#[test]
fn saturated_consolidation_needs_at_most_two_iterations() {
    let (spec, _) = scenarios::terzaghi(16, 20).unwrap();
    let traj = Solver::new(spec).unwrap().run().unwrap();
    for info in &traj.steps {
        assert!(info.iterations <= 2, "step {} took {}", info.n, info.iterations);
    }
}

#[test]
fn steady_load_keeps_the_initial_state() {
    let solver = Solver::new(scenarios::steady_load(4, 4).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    let first = &traj.states[0];
    assert!(first.u.iter().any(|&v| v != 0.0));
    for s in &traj.states[1..] {
        assert!(max_abs_diff(&s.u, &first.u) <= 1e-12);
        assert!(s.chi.iter().all(|v| v.abs() <= 1e-12));
    }
}

#[test]
fn zero_coupling_decouples_the_blocks() {
    let mut spec = scenarios::steady_load(4, 6).unwrap();
    spec.material.alpha_biot = 0.0;
    spec.chi0 = Arc::new(|x, y| 0.5 * x * (1.0 - x) * y - 0.1);
    let solver = Solver::new(spec.clone()).unwrap();
    let traj = solver.run().unwrap();
    let static_u = solver.elastic_factor().solve(&solver.mech_load_at(0.0));
    // flow without any mechanical load at all
    spec.sources = Default::default();
    let unloaded = Solver::new(spec).unwrap().run().unwrap();
    for (s, t) in traj.states.iter().zip(&unloaded.states) {
        assert!(max_abs_diff(&s.u, &static_u) <= 1e-12);
        assert!(max_abs_diff(&s.chi, &t.chi) <= 1e-12);
    }
}

#[test]
fn converged_steps_meet_the_tolerance_and_are_stable() {
    let solver = Solver::new(scenarios::drainage(6, 8).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    let opts = solver.problem().options;
    for (w, info) in traj.states.windows(2).zip(&traj.steps) {
        let (prev, next) = (&w[0], &w[1]);
        let r0 = solver.step_residual(prev, prev, info.n).unwrap();
        let r = solver.step_residual(prev, next, info.n).unwrap();
        assert!(r.mech_norm() <= opts.tol_abs.max(opts.tol_rel * r0.mech_norm()));
        assert!(r.flow_norm() <= opts.tol_abs.max(opts.tol_rel * r0.flow_norm()));
        // re-solve from a perturbed guess
        let mut guess = next.clone();
        for (i, v) in guess.chi.iter_mut().enumerate() {
            *v += 1e-3 * ((i % 3) as f64 - 1.0);
        }
        let (again, _) = solver.nonlinear_step_from(prev, &guess, info.n).unwrap();
        assert!(max_abs_diff(&again.chi, &next.chi) <= 10.0 * opts.tol_abs.max(1e-8));
        assert!(max_abs_diff(&again.u, &next.u) <= 10.0 * opts.tol_abs.max(1e-8));
    }
}

#[test]
fn water_balance_closes_each_step() {
    let solver = Solver::new(scenarios::drainage(6, 8).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    let mesh = solver.mesh();
    let tg = solver.problem().time;
    let alpha = solver.problem().material.alpha_biot;
    let m = solver.law().storage().b_chi_m();
    for (w, info) in traj.states.windows(2).zip(&traj.steps) {
        let (prev, next) = (&w[0], &w[1]);
        let (p0, p1) = (solver.points(&prev.chi).unwrap(), solver.points(&next.chi).unwrap());
        let du: Vec<f64> = next.u.iter().zip(&prev.u).map(|(a, b)| a - b).collect();
        let div_du = solver.coupling().mul_vec(&du);
        let mut stored = 0.0;
        for (k, c) in mesh.cells().iter().enumerate() {
            let db = p1[k].b - p0[k].b;
            let dchi = next.chi[k] - prev.chi[k];
            // monotone storage update
            assert!(db * dchi >= m * dchi * dchi - 1e-14);
            stored += c.measure * db + alpha * p1[k].s * div_du[k];
        }
        let (t0, t1) = (tg.time(info.n - 1), tg.time(info.n));
        let h = average_source(|t| solver.flow_load_at(t), t0, t1, 1);
        let outflow: f64 = mesh
            .faces()
            .iter()
            .filter(|f| matches!(f.kind, FaceKind::Boundary { .. }))
            .map(|f| mesh.tpfa_flux(&next.chi, solver.kappa(), f))
            .sum();
        let budget = tg.tau() * (h.iter().sum::<f64>() - outflow);
        assert!((stored - budget).abs() <= 1e-9, "{stored} vs {budget}");
    }
}

#[test]
fn checkpoint_round_trip_and_restart() {
    let solver = Solver::new(scenarios::drainage(5, 8).unwrap()).unwrap();
    let traj = solver.run().unwrap();
    let mid = &traj.states[4];
    let (mut cells, mut nodes) = (Vec::new(), Vec::new());
    write_checkpoint(&solver, mid, &mut cells, &mut nodes).unwrap();
    let back = read_checkpoint(&solver, cells.as_slice(), nodes.as_slice()).unwrap();
    assert_eq!(&back, mid);
    let rest = solver.run_from(back).unwrap();
    assert_eq!(rest.states.len(), 5);
    for (a, b) in rest.states.iter().zip(&traj.states[4..]) {
        assert_eq!(a, b);
    }
}

#[test]
fn checkpoint_rejects_a_foreign_mesh() {
    let small = Solver::new(scenarios::drainage(4, 8).unwrap()).unwrap();
    let big = Solver::new(scenarios::drainage(5, 8).unwrap()).unwrap();
    let s = small.init_state().unwrap();
    let (mut cells, mut nodes) = (Vec::new(), Vec::new());
    write_checkpoint(&small, &s, &mut cells, &mut nodes).unwrap();
    assert!(read_checkpoint(&big, cells.as_slice(), nodes.as_slice()).is_err());
}

#[test]
fn initial_displacement_is_compatible() {
    for spec in [
        scenarios::steady_load(4, 2).unwrap(),
        scenarios::mms(scenarios::MmsBranch::Unsaturated, 4, None).unwrap().0,
        scenarios::terzaghi(8, 2).unwrap().0,
    ] {
        let solver = Solver::new(spec).unwrap();
        let s = solver.init_state().unwrap();
        let r = solver.compatibility_residual(&s).unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-10));
    }
}

#[test]
fn uniform_prestress_leaves_clamped_body_at_rest() {
    // a constant pore pressure has no net divergence work on a clamped body
    let mut spec = scenarios::zero_data(4, 1).unwrap();
    spec.chi0 = Arc::new(|_, _| 0.7);
    let solver = Solver::new(spec).unwrap();
    let s = solver.init_state().unwrap();
    assert!(s.u.iter().all(|v| v.abs() <= 1e-12));
    assert!(s.chi.iter().all(|&c| (c - 0.7).abs() <= 1e-15));
}

#[test]
fn trapezoid_source_averages() {
    let c = average_source(|_| vec![2.5, -1.0], 0.0, 0.3, 4);
    assert_eq!(c, vec![2.5, -1.0]);
    let lin = average_source(|t| vec![t], 0.0, 0.2, 1);
    assert!((lin[0] - 0.1).abs() < 1e-15);
    // error of the composite rule falls like panels⁻²
    let exact = (1.0 - 1.0f64.cos()) / 1.0;
    let err = |p| (average_source(|t| vec![t.sin()], 0.0, 1.0, p)[0] - exact).abs();
    let ratio = err(8) / err(16);
    assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    let richardson = (4.0 * average_source(|t| vec![t.sin()], 0.0, 1.0, 16)[0]
        - average_source(|t| vec![t.sin()], 0.0, 1.0, 8)[0])
        / 3.0;
    assert!((richardson - exact).abs() < 1e-7);
}

/// In the saturated range the scheme is the linear Biot scheme; assemble
/// that by hand and compare.
#[test]
fn saturated_limit_is_linear_biot() {
    let mut spec = scenarios::steady_load(4, 5).unwrap();
    spec.chi0 = Arc::new(|x, y| 1.0 + x * y);
    spec.sources.fluid_source = Some(Arc::new(|_, _, t| 2.0 + t));
    spec.regularization = kirchpore::RegularizationParams::new(0.05, 0.0).unwrap();
    let solver = Solver::new(spec).unwrap();
    let traj = solver.run().unwrap();
    let p = solver.problem();
    let (alpha, zeta, tau) = (p.material.alpha_biot, p.regularization.zeta, p.time.tau());
    let storage = p.material.phi0 * p.material.c_w + p.material.inv_n;
    let a = &solver.elastic().matrix;
    let b = solver.coupling();
    let t_flow = solver.tpfa();
    let (nu, nc) = (a.nrows, solver.mesh().num_cells());
    let mut jac = Triplets::new(nu + nc, nu + nc);
    for r in 0..nu {
        for (c, v) in a.row(r) {
            jac.push(r, c, (1.0 + zeta / tau) * v);
        }
    }
    for k in 0..nc {
        for (j, v) in b.row(k) {
            jac.push(j, nu + k, -alpha * v);
            jac.push(nu + k, j, alpha * v);
        }
        for (l, v) in t_flow.row(k) {
            jac.push(nu + k, nu + l, tau * v);
        }
        jac.push(nu + k, nu + k, storage * solver.mesh().cells()[k].measure);
    }
    let lu = SparseLu::new(&jac.to_csr()).unwrap();
    let mut state: State = traj.states[0].clone();
    for n in 1..=p.time.steps {
        let (t0, t1) = (p.time.time(n - 1), p.time.time(n));
        let f = average_source(|t| solver.mech_load_at(t), t0, t1, 1);
        let h = average_source(|t| solver.flow_load_at(t), t0, t1, 1);
        let au = a.mul_vec(&state.u);
        let bu = b.mul_vec(&state.u);
        let mut rhs: Vec<f64> = (0..nu).map(|i| f[i] + zeta / tau * au[i]).collect();
        for k in 0..nc {
            let m = solver.mesh().cells()[k].measure;
            rhs.push(tau * h[k] + storage * m * state.chi[k] + alpha * bu[k]);
        }
        let x = lu.solve(&rhs).unwrap();
        state.u = x[..nu].to_vec();
        state.chi = x[nu..].to_vec();
        assert!(state.chi.iter().all(|&c| c > 0.0));
        let s = &traj.states[n];
        assert!(max_abs_diff(&s.u, &state.u) <= 1e-8);
        assert!(max_abs_diff(&s.chi, &state.chi) <= 1e-8);
    }
}

#[test]
fn vanishing_viscosity_is_continuous() {
    let a = Solver::new(scenarios::drainage_incompressible(5, 8, 0.0, 1e-3).unwrap())
        .unwrap()
        .run()
        .unwrap();
    let b = Solver::new(scenarios::drainage_incompressible(5, 8, 1e-12, 1e-3).unwrap())
        .unwrap()
        .run()
        .unwrap();
    let (sa, sb) = (a.last().unwrap(), b.last().unwrap());
    assert!(max_abs_diff(&sa.chi, &sb.chi) <= 1e-8);
    assert!(max_abs_diff(&sa.u, &sb.u) <= 1e-8);
}

#[test]
fn validation_reports_every_violation() {
    let mut spec = scenarios::drainage(4, 2).unwrap();
    spec.options.max_iters = 0;
    spec.options.damping = 0.0;
    spec.time.t_end = -1.0;
    spec.mesh = spec.mesh.with_flow_boundary(kirchpore::mesh::FlowBoundary::all(FlowBc::Neumann));
    assert!(spec.violations().len() >= 4);
    assert!(Solver::new(spec).is_err());
}
