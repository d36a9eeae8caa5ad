use rayon::prelude::*;

use crate::error::Result;
use crate::solver::{Solver, Trajectory};

/// Monitored quantities at one accepted step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyStep {
    pub n: usize,
    /// `‖uⁿ‖_V²`
    pub u_energy: f64,
    /// `‖uⁿ − uⁿ⁻¹‖_V²`
    pub du_energy: f64,
    /// `‖χⁿ‖²_{1,T,κ}`
    pub chi_flux: f64,
    /// `‖χⁿ − χⁿ⁻¹‖²_{1,T}`
    pub dchi_h1: f64,
    /// `‖χⁿ − χⁿ⁻¹‖²`
    pub dchi_l2: f64,
    /// `‖p̂_pore(χⁿ)‖²`
    pub pore_l2: f64,
    /// `‖B̂_η(χⁿ)‖_{L¹}`
    pub legendre_hat: f64,
    /// `‖B̄_η(p̂_pore/ŝ (χⁿ))‖_{L¹}`
    pub legendre_bar: f64,
    /// smallest per-cell Legendre value of either kind
    pub legendre_min_cell: f64,
}

/// Left-hand sides of the discrete stability estimates, accumulated over a
/// trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub steps: Vec<EnergyStep>,
    /// `ζ Σ τ⁻¹ ‖uⁿ − uⁿ⁻¹‖_V²`
    pub zeta_dissipation: f64,
    /// `sup_n ‖uⁿ‖_V²`
    pub sup_u_energy: f64,
    /// `Σ ‖uⁿ − uⁿ⁻¹‖_V²`
    pub sum_du_energy: f64,
    /// `Σ τ ‖χⁿ‖²_{1,T,κ}`
    pub sum_chi_flux: f64,
    /// `sup_n ‖B̄_η(p̂_pore/ŝ)‖_{L¹}`
    pub sup_legendre_bar: f64,
    /// `Σ τ⁻¹ ‖χⁿ − χⁿ⁻¹‖²`
    pub sum_dchi_rate: f64,
    /// `‖χᴺ‖²_{1,T}`
    pub final_chi_h1: f64,
    /// `Σ ‖χⁿ − χⁿ⁻¹‖²_{1,T}`
    pub sum_dchi_h1: f64,
    /// `sup_n ‖B̂_η(χⁿ)‖_{L¹}`
    pub sup_legendre_hat: f64,
    /// `Σ τ ‖p̂_pore(χⁿ)‖²`
    pub sum_pore_l2: f64,
    /// Size of the data: initial energies plus source norms.
    pub data_norm: f64,
    /// largest quantity divided by `data_norm`
    pub constant: f64,
    /// a quantity is negative or not finite, or `constant` exceeds the limit
    pub flagged: bool,
}

/// Default limit on `constant` before a report is flagged.
pub const ENERGY_CONSTANT_LIMIT: f64 = 1e4;

impl EnergyReport {
    /// `(name, value)` of every monitored total.
    pub fn quantities(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("zeta_dissipation", self.zeta_dissipation),
            ("sup_u_energy", self.sup_u_energy),
            ("sum_du_energy", self.sum_du_energy),
            ("sum_chi_flux", self.sum_chi_flux),
            ("sup_legendre_bar", self.sup_legendre_bar),
            ("sum_dchi_rate", self.sum_dchi_rate),
            ("final_chi_h1", self.final_chi_h1),
            ("sum_dchi_h1", self.sum_dchi_h1),
            ("sup_legendre_hat", self.sup_legendre_hat),
            ("sum_pore_l2", self.sum_pore_l2),
        ]
    }
}

fn cell_terms(solver: &Solver, chi: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let law = solver.law();
    let cells = solver.mesh().cells();
    let vals: Vec<(f64, f64, f64)> = chi
        .par_iter()
        .map(|&c| -> Result<_> {
            let pt = law.at_chi(c)?;
            Ok((pt.pore, law.legendre_b_hat(c)?, law.legendre_b_bar(c)?))
        })
        .collect::<Result<_>>()?;
    let mut pore = 0.0;
    let mut hat = 0.0;
    let mut bar = 0.0;
    let mut min_cell = f64::INFINITY;
    for (c, (p, h, b)) in cells.iter().zip(vals) {
        pore += c.measure * p * p;
        hat += c.measure * h;
        bar += c.measure * b;
        min_cell = min_cell.min(h).min(b);
    }
    Ok((pore, hat, bar, min_cell))
}

/// Computes every monitored quantity of a trajectory.
pub fn energy_monitor(traj: &Trajectory, solver: &Solver) -> Result<EnergyReport> {
    let problem = solver.problem();
    let tau = problem.time.tau();
    let zeta = problem.regularization.zeta;
    let mesh = solver.mesh();
    let a = solver.elastic();
    let tpfa = solver.tpfa();
    let mut steps = Vec::with_capacity(traj.states.len());
    for (i, s) in traj.states.iter().enumerate() {
        let (pore_l2, legendre_hat, legendre_bar, legendre_min_cell) = cell_terms(solver, &s.chi)?;
        let mut e = EnergyStep {
            n: s.n,
            u_energy: a.energy_sq(&s.u),
            chi_flux: tpfa.bilinear(&s.chi, &s.chi),
            pore_l2,
            legendre_hat,
            legendre_bar,
            legendre_min_cell,
            ..EnergyStep::default()
        };
        if i > 0 {
            let prev = &traj.states[i - 1];
            let du: Vec<f64> = s.u.iter().zip(&prev.u).map(|(x, y)| x - y).collect();
            let dchi: Vec<f64> = s.chi.iter().zip(&prev.chi).map(|(x, y)| x - y).collect();
            e.du_energy = a.energy_sq(&du);
            e.dchi_h1 = mesh.discrete_h1_norm_sq(&dchi);
            e.dchi_l2 = mesh.l2_norm(&dchi).powi(2);
        }
        steps.push(e);
    }
    let later = || steps.iter().skip(1);
    let sup = |f: fn(&EnergyStep) -> f64| steps.iter().map(f).fold(0.0, f64::max);
    let mut report = EnergyReport {
        zeta_dissipation: zeta / tau * later().map(|e| e.du_energy).sum::<f64>(),
        sup_u_energy: sup(|e| e.u_energy),
        sum_du_energy: later().map(|e| e.du_energy).sum(),
        sum_chi_flux: tau * later().map(|e| e.chi_flux).sum::<f64>(),
        sup_legendre_bar: sup(|e| e.legendre_bar),
        sum_dchi_rate: later().map(|e| e.dchi_l2).sum::<f64>() / tau,
        final_chi_h1: traj.last().map_or(0.0, |s| mesh.discrete_h1_norm_sq(&s.chi)),
        sum_dchi_h1: later().map(|e| e.dchi_h1).sum(),
        sup_legendre_hat: sup(|e| e.legendre_hat),
        sum_pore_l2: tau * later().map(|e| e.pore_l2).sum::<f64>(),
        data_norm: data_norm(traj, solver, &steps),
        constant: 0.0,
        flagged: false,
        steps,
    };
    let worst = report.quantities().iter().map(|q| q.1).fold(0.0, f64::max);
    report.constant = if report.data_norm > 0.0 {
        worst / report.data_norm
    } else if worst == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let bad_value = report.quantities().iter().any(|q| !(q.1.is_finite() && q.1 >= 0.0))
        || report.steps.iter().any(|e| e.legendre_min_cell < 0.0);
    report.flagged = bad_value || report.constant > ENERGY_CONSTANT_LIMIT;
    Ok(report)
}

/// Initial energies plus `L²(0,T;V*)`, `H¹(0,T;V*)` and `L²` norms of the
/// sampled volume and boundary flow sources.
fn data_norm(traj: &Trajectory, solver: &Solver, steps: &[EnergyStep]) -> f64 {
    let tau = solver.problem().time.tau();
    let chol = solver.elastic_factor();
    let a = solver.elastic();
    let mesh = solver.mesh();
    let sources = &solver.problem().sources;
    let mut total = steps.first().map_or(0.0, |e| e.u_energy + e.legendre_hat + e.chi_flux);
    let mut prev_f: Option<Vec<f64>> = None;
    for s in &traj.states {
        let t = s.time;
        let f = solver.mech_load_at(t);
        let fnorm = a.dual_norm(&f, chol);
        total += tau * fnorm * fnorm;
        if let Some(pf) = &prev_f {
            let df: Vec<f64> = f.iter().zip(pf).map(|(x, y)| x - y).collect();
            let d = a.dual_norm(&df, chol);
            total += d * d / tau;
        }
        prev_f = Some(f);
        if let Some(h) = &sources.fluid_source {
            let avg = mesh.cell_average(|x, y| h(x, y, t));
            total += tau * mesh.l2_norm(&avg).powi(2);
        }
        if let Some(w) = &sources.boundary_outflux {
            for face in mesh.faces() {
                if let Some(side) = face.boundary_side() {
                    if !mesh.face_is_active(face) {
                        let v = w(side, face.center[0], face.center[1], t);
                        total += tau * face.measure * v * v;
                    }
                }
            }
        }
    }
    total
}
