use rayon::prelude::*;

use super::problem::{ProblemSpec, SolverOptions};
use crate::conditions::{nd3_search, Nd3Outcome, Nd3Params};
use crate::constitutive::{Constitutive, HatPoint};
use crate::elasticity::{assemble_div_coupling, assemble_elastic, neumann_load, DisplacementSpace, ElasticOperator};
use crate::error::{Error, Result};
use crate::linalg::{norm2, CsrMatrix, SparseCholesky, SparseLu, Triplets};
use crate::mesh::{FlowBc, Mesh, DIM};
use crate::quadrature::gauss_legendre;

/// One time level: displacement on the free dofs and cell Kirchhoff
/// pressures.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub n: usize,
    pub time: f64,
    pub u: Vec<f64>,
    pub chi: Vec<f64>,
}

/// Per-step record of the nonlinear solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub n: usize,
    pub iterations: usize,
    pub mech_residual: f64,
    pub flow_residual: f64,
    /// the L-scheme fallback was needed
    pub stabilized: bool,
    /// number of half-step retries used
    pub halvings: usize,
    pub min_saturation: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub steps: Vec<StepInfo>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

/// Mechanics and flow residual vectors of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub mech: Vec<f64>,
    pub flow: Vec<f64>,
}

impl Residual {
    pub fn mech_norm(&self) -> f64 {
        norm2(&self.mech)
    }

    pub fn flow_norm(&self) -> f64 {
        norm2(&self.flow)
    }
}

/// Trapezoid average of `f` over `[t0, t1]` with `panels` sub-intervals.
pub fn average_source<F: Fn(f64) -> Vec<f64>>(f: F, t0: f64, t1: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    let h = (t1 - t0) / panels as f64;
    let mut acc = f(t0);
    for v in &mut acc {
        *v *= 0.5;
    }
    for i in 1..=panels {
        let w = if i == panels { 0.5 } else { 1.0 };
        for (a, v) in acc.iter_mut().zip(f(t0 + i as f64 * h)) {
            *a += w * v;
        }
    }
    for v in &mut acc {
        *v /= panels as f64;
    }
    acc
}

/// Data of one time slab.
struct Slab {
    t1: f64,
    tau: f64,
    load: Vec<f64>,
    source: Vec<f64>,
    /// `A uⁿ⁻¹`
    a_prev: Vec<f64>,
    b_prev: Vec<f64>,
}

struct Eval {
    points: Vec<HatPoint>,
    div_du: Vec<f64>,
    res: Residual,
    scale: [f64; 2],
}

enum Attempt {
    Done(State, StepInfo),
    Failed(Error),
}

/// Discretized problem ready for time stepping.
pub struct Solver {
    problem: ProblemSpec,
    space: DisplacementSpace,
    elastic: ElasticOperator,
    chol: SparseCholesky,
    coupling: CsrMatrix,
    tpfa: CsrMatrix,
    kappa: Vec<f64>,
    law: Constitutive,
}

impl Solver {
    pub fn new(problem: ProblemSpec) -> Result<Self> {
        let storage = problem.material.storage(problem.regularization.eta);
        let law = Constitutive::van_genuchten(problem.van_genuchten, storage);
        Self::with_law(problem, law)
    }

    /// Reuses an existing Kirchhoff table; the storage scalars are taken
    /// from the problem.
    pub fn with_law(problem: ProblemSpec, law: Constitutive) -> Result<Self> {
        problem.validate()?;
        let law = law.with_storage(problem.material.storage(problem.regularization.eta));
        let mesh = &problem.mesh;
        let space = DisplacementSpace::new(mesh, problem.mech_boundary);
        space.check_constrained()?;
        let elastic = assemble_elastic(&space, problem.material.mu, problem.material.lambda)?;
        let chol = elastic.factor()?;
        let coupling = assemble_div_coupling(mesh, &space);
        let kappa: Vec<f64> = (0..mesh.num_cells())
            .map(|k| problem.material.kappa_abs.at(k))
            .collect();
        let tpfa = mesh.tpfa_matrix(&kappa).to_csr();
        Ok(Self {
            problem,
            space,
            elastic,
            chol,
            coupling,
            tpfa,
            kappa,
            law,
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn mesh(&self) -> &Mesh {
        &self.problem.mesh
    }

    pub fn space(&self) -> &DisplacementSpace {
        &self.space
    }

    pub fn elastic(&self) -> &ElasticOperator {
        &self.elastic
    }

    pub fn elastic_factor(&self) -> &SparseCholesky {
        &self.chol
    }

    /// `B_{K,j} = ∫_K ∇·φ_j`
    pub fn coupling(&self) -> &CsrMatrix {
        &self.coupling
    }

    /// Permeability-weighted TPFA matrix.
    pub fn tpfa(&self) -> &CsrMatrix {
        &self.tpfa
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn law(&self) -> &Constitutive {
        &self.law
    }

    fn options(&self) -> &SolverOptions {
        &self.problem.options
    }

    pub fn points(&self, chi: &[f64]) -> Result<Vec<HatPoint>> {
        chi.par_iter().map(|&c| self.law.at_chi(c)).collect()
    }

    /// `⟨f_ext(t), v⟩` on the free dofs.
    pub fn mech_load_at(&self, t: f64) -> Vec<f64> {
        let src = &self.problem.sources;
        if src.body_force.is_none() && src.traction.is_none() {
            return vec![0.0; self.space.num_free()];
        }
        neumann_load(
            &self.space,
            |x, y| src.body_force.as_ref().map_or([0.0; 2], |f| f(x, y, t)),
            |side, x, y| src.traction.as_ref().map_or([0.0; 2], |f| f(side, x, y, t)),
        )
    }

    /// `∫_K h(t) − ∫_{∂K ∩ Γ_N} w_N(t)` per cell.
    pub fn flow_load_at(&self, t: f64) -> Vec<f64> {
        let mesh = self.mesh();
        let src = &self.problem.sources;
        let mut out = match &src.fluid_source {
            Some(h) => {
                let avg = mesh.cell_average(|x, y| h(x, y, t));
                avg.iter()
                    .zip(mesh.cells())
                    .map(|(a, c)| a * c.measure)
                    .collect()
            }
            None => vec![0.0; mesh.num_cells()],
        };
        if let Some(w) = &src.boundary_outflux {
            let (gx, gw) = gauss_legendre(3);
            for f in mesh.faces() {
                let Some(side) = f.boundary_side() else { continue };
                if mesh.flow_boundary().get(side) != FlowBc::Neumann {
                    continue;
                }
                let tang = [-f.normal[1], f.normal[0]];
                let mut flux = 0.0;
                for (s, wt) in gx.iter().zip(gw) {
                    let r = 0.5 * f.measure * s;
                    flux += 0.5 * wt * w(side, f.center[0] + r * tang[0], f.center[1] + r * tang[1], t);
                }
                out[f.owner()] -= f.measure * flux;
            }
        }
        out
    }

    /// Discrete initial data: cell averages of `χ₀` and the compatible
    /// displacement `a(u⁰, v) − α⟨p̂_pore(χ⁰), ∇·v⟩ = ⟨f_ext(0), v⟩`.
    pub fn init_state(&self) -> Result<State> {
        let chi0 = &self.problem.chi0;
        let chi = self.mesh().cell_average(|x, y| chi0(x, y));
        let pts = self.points(&chi)?;
        let u = self.compatible_displacement(&pts, 0.0);
        Ok(State {
            n: 0,
            time: 0.0,
            u,
            chi,
        })
    }

    fn compatible_displacement(&self, pts: &[HatPoint], t: f64) -> Vec<f64> {
        let alpha = self.problem.material.alpha_biot;
        let pore: Vec<f64> = pts.iter().map(|p| p.pore).collect();
        let mut rhs = self.coupling.transpose_mul_vec(&pore);
        for v in &mut rhs {
            *v *= alpha;
        }
        if !self.options().unloaded_initial_state {
            for (r, f) in rhs.iter_mut().zip(self.mech_load_at(t)) {
                *r += f;
            }
        }
        self.chol.solve(&rhs)
    }

    /// Residual of the compatibility equation at a state.
    pub fn compatibility_residual(&self, state: &State) -> Result<Vec<f64>> {
        let pts = self.points(&state.chi)?;
        let alpha = self.problem.material.alpha_biot;
        let pore: Vec<f64> = pts.iter().map(|p| p.pore).collect();
        let bt = self.coupling.transpose_mul_vec(&pore);
        let au = self.elastic.matrix.mul_vec(&state.u);
        let load = if self.options().unloaded_initial_state {
            vec![0.0; au.len()]
        } else {
            self.mech_load_at(state.time)
        };
        Ok(au
            .iter()
            .zip(&bt)
            .zip(&load)
            .map(|((a, b), f)| a - alpha * b - f)
            .collect())
    }

    fn slab(&self, prev: &State, t0: f64, t1: f64) -> Result<Slab> {
        let panels = self.options().source_panels;
        let load = average_source(|t| self.mech_load_at(t), t0, t1, panels);
        let source = average_source(|t| self.flow_load_at(t), t0, t1, panels);
        let prev_pts = self.points(&prev.chi)?;
        Ok(Slab {
            t1,
            tau: t1 - t0,
            load,
            source,
            a_prev: self.elastic.matrix.mul_vec(&prev.u),
            b_prev: prev_pts.iter().map(|p| p.b).collect(),
        })
    }

    /// Residual of step `n` (slab `[t_{n−1}, t_n]`) at a candidate state.
    pub fn step_residual(&self, prev: &State, candidate: &State, n: usize) -> Result<Residual> {
        let tg = self.problem.time;
        let slab = self.slab(prev, tg.time(n - 1), tg.time(n))?;
        Ok(self.evaluate(prev, &candidate.u, &candidate.chi, &slab)?.res)
    }

    fn evaluate(&self, prev: &State, u: &[f64], chi: &[f64], slab: &Slab) -> Result<Eval> {
        let mat = &self.problem.material;
        let alpha = mat.alpha_biot;
        let zeta = self.problem.regularization.zeta;
        let tau = slab.tau;
        let c1 = 1.0 + zeta / tau;
        let c2 = zeta / tau;
        let points = self.points(chi)?;
        let au = self.elastic.matrix.mul_vec(u);
        let pore: Vec<f64> = points.iter().map(|p| p.pore).collect();
        let btp = self.coupling.transpose_mul_vec(&pore);
        let mech: Vec<f64> = (0..u.len())
            .map(|i| c1 * au[i] - c2 * slab.a_prev[i] - alpha * btp[i] - slab.load[i])
            .collect();
        let du: Vec<f64> = u.iter().zip(&prev.u).map(|(a, b)| a - b).collect();
        let div_du = self.coupling.mul_vec(&du);
        let tchi = self.tpfa.mul_vec(chi);
        let cells = self.mesh().cells();
        let mut terms = [0.0f64; 4];
        let flow: Vec<f64> = (0..chi.len())
            .map(|k| {
                let t = [
                    cells[k].measure * (points[k].b - slab.b_prev[k]),
                    alpha * points[k].s * div_du[k],
                    tau * tchi[k],
                    tau * slab.source[k],
                ];
                for (acc, v) in terms.iter_mut().zip(t) {
                    *acc += v * v;
                }
                t[0] + t[1] + t[2] - t[3]
            })
            .collect();
        let mech_scale = [c1 * norm2(&au), c2 * norm2(&slab.a_prev), alpha * norm2(&btp), norm2(&slab.load)]
            .into_iter()
            .fold(0.0, f64::max);
        let flow_scale = terms.iter().map(|v| v.sqrt()).fold(0.0, f64::max);
        Ok(Eval {
            points,
            div_du,
            res: Residual { mech, flow },
            scale: [mech_scale, flow_scale],
        })
    }

    fn jacobian(&self, ev: &Eval, tau: f64, theta: f64) -> CsrMatrix {
        let mat = &self.problem.material;
        let alpha = mat.alpha_biot;
        let c1 = 1.0 + self.problem.regularization.zeta / tau;
        let nu = self.space.num_free();
        let nc = self.mesh().num_cells();
        let l_stab = theta * ev.points.iter().map(|p| p.b_prime).fold(0.0, f64::max);
        let mut t = Triplets::with_capacity(
            nu + nc,
            nu + nc,
            self.elastic.matrix.nnz() + 2 * self.coupling.nnz() + self.tpfa.nnz() + nc,
        );
        for r in 0..nu {
            for (c, v) in self.elastic.matrix.row(r) {
                t.push(r, c, c1 * v);
            }
        }
        for (k, p) in ev.points.iter().enumerate() {
            for (j, v) in self.coupling.row(k) {
                t.push(j, nu + k, -alpha * p.pore_prime * v);
                t.push(nu + k, j, alpha * p.s * v);
            }
            for (l, v) in self.tpfa.row(k) {
                t.push(nu + k, nu + l, tau * v);
            }
            let m = self.mesh().cells()[k].measure;
            t.push(
                nu + k,
                nu + k,
                m * (p.b_prime + l_stab) + alpha * p.s_prime * ev.div_du[k],
            );
        }
        t.to_csr()
    }

    /// Newton iteration for one slab from `guess`; `theta` weights the
    /// L-scheme stabilization.
    fn newton(&self, prev: &State, guess: &State, slab: &Slab, theta: f64) -> Result<(State, StepInfo)> {
        let opts = *self.options();
        let nu = self.space.num_free();
        let mut u = guess.u.clone();
        let mut chi = guess.chi.clone();
        let mut ev = self.evaluate(prev, &u, &chi, slab)?;
        let r0 = [ev.res.mech_norm(), ev.res.flow_norm()];
        let floor = 64.0 * f64::EPSILON;
        let tol = |scale: [f64; 2]| {
            [
                opts.tol_abs.max(opts.tol_rel * r0[0]).max(floor * scale[0]),
                opts.tol_abs.max(opts.tol_rel * r0[1]).max(floor * scale[1]),
            ]
        };
        let measure = |ev: &Eval| {
            let t = tol(ev.scale);
            (ev.res.mech_norm() / t[0]).max(ev.res.flow_norm() / t[1])
        };
        let mut last = measure(&ev);
        let mut increases = 0;
        let mut damping = 1.0;
        for it in 1..=opts.max_iters {
            let jac = self.jacobian(&ev, slab.tau, theta);
            let rhs: Vec<f64> = ev.res.mech.iter().chain(&ev.res.flow).map(|v| -v).collect();
            let delta = SparseLu::new(&jac)?.solve(&rhs)?;
            let mut step = damping;
            let mut next = None;
            for _ in 0..40 {
                let un: Vec<f64> = u.iter().zip(&delta[..nu]).map(|(a, d)| a + step * d).collect();
                let cn: Vec<f64> = chi.iter().zip(&delta[nu..]).map(|(a, d)| a + step * d).collect();
                match self.evaluate(prev, &un, &cn, slab) {
                    Ok(e) => {
                        next = Some((un, cn, e));
                        break;
                    }
                    // iterate left the range of the Kirchhoff transform
                    Err(Error::KirchhoffInverse { .. }) => step *= 0.5,
                    Err(e) => return Err(e),
                }
            }
            let Some((un, cn, e)) = next else {
                return Err(self.non_convergence(slab, it, &ev));
            };
            u = un;
            chi = cn;
            ev = e;
            let now = measure(&ev);
            if !now.is_finite() {
                return Err(self.non_convergence(slab, it, &ev));
            }
            if now <= 1.0 {
                let info = StepInfo {
                    n: 0,
                    iterations: it,
                    mech_residual: ev.res.mech_norm(),
                    flow_residual: ev.res.flow_norm(),
                    stabilized: theta > 0.0,
                    halvings: 0,
                    min_saturation: ev.points.iter().map(|p| p.s).fold(1.0, f64::min),
                };
                let state = State {
                    n: prev.n + 1,
                    time: slab.t1,
                    u,
                    chi,
                };
                return Ok((state, info));
            }
            if now > last {
                increases += 1;
                if increases >= 2 {
                    damping = opts.damping;
                }
            } else {
                increases = 0;
            }
            last = now;
        }
        Err(self.non_convergence(slab, opts.max_iters, &ev))
    }

    fn non_convergence(&self, slab: &Slab, iterations: usize, ev: &Eval) -> Error {
        let tg = self.problem.time;
        Error::NonConvergence {
            step: (slab.t1 / tg.tau()).round() as usize,
            iterations,
            mech_residual: ev.res.mech_norm(),
            flow_residual: ev.res.flow_norm(),
        }
    }

    fn attempt(&self, prev: &State, guess: &State, t0: f64, t1: f64) -> Result<Attempt> {
        let slab = self.slab(prev, t0, t1)?;
        let opts = self.options();
        let first = match self.newton(prev, guess, &slab, opts.theta) {
            Ok((s, i)) => return Ok(Attempt::Done(s, i)),
            Err(e @ Error::NonConvergence { .. }) | Err(e @ Error::LinearSolve(_)) => e,
            Err(e) => return Err(e),
        };
        if opts.l_scheme_fallback && opts.theta < 1.0 {
            match self.newton(prev, guess, &slab, 1.0) {
                Ok((s, i)) => return Ok(Attempt::Done(s, i)),
                Err(Error::NonConvergence { .. }) | Err(Error::LinearSolve(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Attempt::Failed(first))
    }

    fn advance(&self, prev: &State, guess: &State, t0: f64, t1: f64, depth: usize) -> Result<(State, StepInfo)> {
        match self.attempt(prev, guess, t0, t1)? {
            Attempt::Done(s, i) => Ok((s, i)),
            Attempt::Failed(e) if depth >= self.options().tau_halving => Err(e),
            Attempt::Failed(_) => {
                let tm = 0.5 * (t0 + t1);
                let (mid, a) = self.advance(prev, prev, t0, tm, depth + 1)?;
                let (end, b) = self.advance(&mid, &mid, tm, t1, depth + 1)?;
                let info = StepInfo {
                    n: 0,
                    iterations: a.iterations + b.iterations,
                    mech_residual: b.mech_residual,
                    flow_residual: b.flow_residual,
                    stabilized: a.stabilized || b.stabilized,
                    halvings: 1 + a.halvings + b.halvings,
                    min_saturation: a.min_saturation.min(b.min_saturation),
                };
                Ok((end, info))
            }
        }
    }

    /// Solves step `n` starting from the previous state.
    pub fn nonlinear_step(&self, prev: &State, n: usize) -> Result<(State, StepInfo)> {
        self.nonlinear_step_from(prev, prev, n)
    }

    /// Solves step `n` with an explicit initial guess.
    pub fn nonlinear_step_from(&self, prev: &State, guess: &State, n: usize) -> Result<(State, StepInfo)> {
        let tg = self.problem.time;
        let (mut s, mut info) = self
            .advance(prev, guess, tg.time(n - 1), tg.time(n), 0)
            .map_err(|e| match e {
                Error::NonConvergence {
                    iterations,
                    mech_residual,
                    flow_residual,
                    ..
                } => Error::NonConvergence {
                    step: n,
                    iterations,
                    mech_residual,
                    flow_residual,
                },
                e => e,
            })?;
        s.n = n;
        s.time = tg.time(n);
        info.n = n;
        Ok((s, info))
    }

    pub fn run(&self) -> Result<Trajectory> {
        self.run_from(self.init_state()?)
    }

    /// Continues from `start` (e.g. a checkpoint) to the final time.
    pub fn run_from(&self, start: State) -> Result<Trajectory> {
        let steps = self.problem.time.steps;
        let mut traj = Trajectory {
            states: Vec::with_capacity(steps + 1 - start.n.min(steps)),
            steps: Vec::new(),
            warnings: Vec::new(),
        };
        let first = start.n;
        traj.states.push(start);
        for n in first + 1..=steps {
            let prev = traj.states.last().expect("non-empty");
            let (s, info) = self.nonlinear_step(prev, n)?;
            traj.states.push(s);
            traj.steps.push(info);
        }
        if let Some(w) = self.nd3_warning(&traj) {
            traj.warnings.push(w);
        }
        Ok(traj)
    }

    /// Warning when the computed saturations fall below the minimum allowed
    /// by the stiffness criterion. The scheme still runs; only the analysis
    /// loses its guarantee.
    pub fn nd3_warning(&self, traj: &Trajectory) -> Option<String> {
        let observed = traj.steps.iter().map(|s| s.min_saturation).fold(1.0, f64::min);
        if observed >= 1.0 {
            return None;
        }
        let params = Nd3Params::from_material(&self.problem.material, DIM, self.options().nd3_scaling);
        match nd3_search(&params, &self.problem.van_genuchten) {
            Ok(Nd3Outcome::Root { s_min, .. }) if observed < s_min => Some(format!(
                "saturation reached {observed:.4} below the minimum {s_min:.4} allowed by the stiffness criterion"
            )),
            Ok(_) => None,
            Err(e) => Some(format!("stiffness criterion could not be evaluated: {e}")),
        }
    }
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("cells", &self.mesh().num_cells())
            .field("free_dofs", &self.space.num_free())
            .finish()
    }
}
