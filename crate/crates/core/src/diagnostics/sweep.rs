use rayon::prelude::*;

use super::table::{ConvergenceRow, ConvergenceTable};
use crate::constitutive::{Constitutive, RegularizationParams};
use crate::error::Result;
use crate::solver::{ProblemSpec, Solver, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegParam {
    Zeta,
    Eta,
}

impl RegParam {
    pub fn name(self) -> &'static str {
        match self {
            RegParam::Zeta => "zeta",
            RegParam::Eta => "eta",
        }
    }
}

impl std::str::FromStr for RegParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zeta" => Ok(RegParam::Zeta),
            "eta" => Ok(RegParam::Eta),
            _ => Err(format!("unknown regularization parameter {s:?} (expected zeta or eta)")),
        }
    }
}

/// Successive differences along a regularization ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub param: RegParam,
    pub ladder: Vec<f64>,
    /// `‖χ_k − χ_{k+1}‖_{L²(Q_T)}` between consecutive converged rungs
    pub chi_differences: Vec<f64>,
    /// `‖u_k − u_{k+1}‖_{L²(0,T;V)}`
    pub u_differences: Vec<f64>,
    /// `‖χ_k‖_{L²(Q_T)}` per converged rung
    pub chi_norms: Vec<f64>,
    /// rungs whose solve failed, with the reason
    pub failures: Vec<(f64, String)>,
}

impl SweepResult {
    /// Differences strictly decrease along the ladder and no rung failed.
    pub fn is_cauchy(&self) -> bool {
        self.failures.is_empty()
            && self.chi_differences.len() + 1 == self.ladder.len()
            && self.chi_differences.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_table(&self, h: f64, tau: f64) -> ConvergenceTable {
        let mut t = ConvergenceTable::new(
            format!("sweep_{}", self.param.name()),
            &["chi_difference", "u_difference"],
        );
        for (i, (dc, du)) in self.chi_differences.iter().zip(&self.u_differences).enumerate() {
            let p = self.ladder[i + 1];
            let (zeta, eta) = match self.param {
                RegParam::Zeta => (p, 0.0),
                RegParam::Eta => (0.0, p),
            };
            t.rows.push(ConvergenceRow {
                h,
                tau,
                zeta,
                eta,
                values: vec![*dc, *du],
            });
        }
        t
    }
}

fn with_param(base: &ProblemSpec, param: RegParam, value: f64) -> Result<ProblemSpec> {
    let mut p = base.clone();
    let r = base.regularization;
    p.regularization = match param {
        RegParam::Zeta => RegularizationParams::new(value, r.eta)?,
        RegParam::Eta => RegularizationParams::new(r.zeta, value)?,
    };
    Ok(p)
}

/// Solves `base` at every rung of `ladder` (rungs in parallel, fixed `h`
/// and `τ`) and measures the differences between consecutive rungs.
pub fn regularization_sweep(base: &ProblemSpec, param: RegParam, ladder: &[f64]) -> Result<SweepResult> {
    let law = Constitutive::van_genuchten(base.van_genuchten, base.material.storage(0.0));
    let runs: Vec<std::result::Result<(Solver, Trajectory), String>> = ladder
        .par_iter()
        .map(|&v| {
            let spec = with_param(base, param, v).map_err(|e| e.to_string())?;
            let solver = Solver::with_law(spec, law.clone()).map_err(|e| e.to_string())?;
            let traj = solver.run().map_err(|e| e.to_string())?;
            Ok((solver, traj))
        })
        .collect();
    let mut failures = Vec::new();
    let mut ok: Vec<(Solver, Trajectory)> = Vec::new();
    for (v, r) in ladder.iter().zip(runs) {
        match r {
            Ok(run) => ok.push(run),
            Err(e) => failures.push((*v, e)),
        }
    }
    let tau = base.time.tau();
    let mut chi_differences = Vec::new();
    let mut u_differences = Vec::new();
    let chi_norms = ok
        .iter()
        .map(|(s, t)| {
            let sq: f64 = t.states.iter().skip(1).map(|st| s.mesh().l2_norm(&st.chi).powi(2)).sum();
            (tau * sq).sqrt()
        })
        .collect();
    for w in ok.windows(2) {
        let (sa, ta) = &w[0];
        let (_, tb) = &w[1];
        let mut dc = 0.0;
        let mut du = 0.0;
        for (a, b) in ta.states.iter().zip(&tb.states).skip(1) {
            let dchi: Vec<f64> = a.chi.iter().zip(&b.chi).map(|(x, y)| x - y).collect();
            let dvec: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
            dc += tau * sa.mesh().l2_norm(&dchi).powi(2);
            du += tau * sa.elastic().energy_sq(&dvec);
        }
        chi_differences.push(dc.sqrt());
        u_differences.push(du.sqrt());
    }
    Ok(SweepResult {
        param,
        ladder: ladder.to_vec(),
        chi_differences,
        u_differences,
        chi_norms,
        failures,
    })
}
