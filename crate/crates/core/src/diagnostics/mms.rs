use rayon::prelude::*;

use super::table::{ConvergenceRow, ConvergenceTable};
use crate::constitutive::Constitutive;
use crate::error::Result;
use crate::scenarios::{self, MmsBranch};
use crate::solver::Solver;

pub const MMS_METRICS: [&str; 2] = ["chi_l2", "u_energy"];

/// Errors of one manufactured-solution run: `‖χ − χ*‖_{L²(Q_T)}` at cell
/// centers and `‖u − I u*‖_{L²(0,T;V)}` against the nodal interpolant.
pub fn mms_errors(branch: MmsBranch, n: usize, law: Option<&Constitutive>) -> Result<ConvergenceRow> {
    let (spec, ms) = scenarios::mms(branch, n, law)?;
    let solver = Solver::with_law(spec, ms.law.clone())?;
    let traj = solver.run()?;
    let tau = solver.problem().time.tau();
    let mut chi_err = 0.0;
    let mut u_err = 0.0;
    for s in traj.states.iter().skip(1) {
        for (c, &chi) in solver.mesh().cells().iter().zip(&s.chi) {
            let e = chi - ms.chi(c.center[0], c.center[1], s.time);
            chi_err += tau * c.measure * e * e;
        }
        let exact = solver.space().interpolate(|x, y| ms.displacement(x, y, s.time));
        let diff: Vec<f64> = s.u.iter().zip(&exact).map(|(a, b)| a - b).collect();
        u_err += tau * solver.elastic().energy_sq(&diff);
    }
    Ok(ConvergenceRow {
        h: solver.mesh().h_max(),
        tau,
        zeta: 0.0,
        eta: 0.0,
        values: vec![chi_err.sqrt(), u_err.sqrt()],
    })
}

/// Convergence study over grids `levels` (cells per side), `τ ∝ h`.
/// Levels run in parallel and share one Kirchhoff table.
pub fn mms_study(branch: MmsBranch, levels: &[usize]) -> Result<ConvergenceTable> {
    let (_, ms) = scenarios::mms(branch, levels.first().copied().unwrap_or(1), None)?;
    let rows: Vec<ConvergenceRow> = levels
        .par_iter()
        .map(|&n| mms_errors(branch, n, Some(&ms.law)))
        .collect::<Result<_>>()?;
    let mut table = ConvergenceTable::new(format!("mms_{}", branch.name()), &MMS_METRICS);
    table.rows = rows;
    Ok(table)
}
