//! One function per subcommand. Each writes its CSV files and returns the
//! lines to print.

use std::io::Write;
use std::path::PathBuf;

use kirchpore::conditions::{check_report, display_round, smin_table, Nd3Outcome, SMIN_TABLE_STIFFNESS};
use kirchpore::diagnostics::{energy_monitor, mms_study, regularization_sweep, terzaghi_error, RegParam};
use kirchpore::mesh::DIM;
use kirchpore::scenarios::MmsBranch;
use kirchpore::solver::{checkpoint_paths, load_checkpoint, write_checkpoint};
use kirchpore::{Solver, State, Trajectory};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, OutDir};

/// Printed summary plus files written.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

pub fn check_conditions(cfg: &RunConfig, out: &OutDir, table: bool) -> Result<Outcome, CliError> {
    let c = &cfg.conditions;
    let mut o = Outcome::default();
    if table {
        let rows = smin_table(c.table_phi0, c.table_alpha_biot, c.scaling.into())?;
        let mut csv_rows = Vec::new();
        o.lines.push(format!(
            "minimal saturation (phi0 = {}, alpha = {}, {} scaling)",
            c.table_phi0,
            c.table_alpha_biot,
            kirchpore::conditions::Nd3Scaling::from(c.scaling).name()
        ));
        o.lines.push(format!(
            "{:>8} {:>6} {:>10} {:>10} {:>10}",
            "alpha_vg", "n_vg", "K=1e5", "K=1e8", "K=1e11"
        ));
        for r in &rows {
            o.lines.push(format!(
                "{:>8} {:>6} {:>10} {:>10} {:>10}",
                r.alpha_vg,
                r.n_vg,
                display_round(r.s_min[0]),
                display_round(r.s_min[1]),
                display_round(r.s_min[2])
            ));
            for (k, s) in SMIN_TABLE_STIFFNESS.iter().zip(r.s_min) {
                csv_rows.push(vec![num(r.alpha_vg), num(r.n_vg), num(*k), num(s), num(display_round(s))]);
            }
        }
        o.files.push(out.table(
            "smin_table.csv",
            &["alpha_vg", "n_vg", "k_dr", "s_min", "s_min_display"],
            &csv_rows,
        )?);
        return Ok(o);
    }
    let (mat, vg, eta) = cfg.material()?;
    let rep = check_report(&mat, &vg, eta, c.s_floor, DIM, c.scaling.into())?;
    let (smin, p_star) = match rep.nd3 {
        Nd3Outcome::Root { s_min, p_star } => (Some(s_min), Some(p_star)),
        Nd3Outcome::HoldsEverywhere { .. } => (None, None),
    };
    let opt = |v: Option<f64>| v.map_or(String::new(), num);
    let rows = vec![
        vec!["nd1_supremum".into(), num(rep.nd1_bound.supremum)],
        vec!["nd1_bound".into(), num(rep.nd1_bound.bound)],
        vec!["nd1_converged".into(), rep.nd1_bound.converged.to_string()],
        vec!["nd2_lower".into(), num(rep.nd2_bounds.lower)],
        vec!["nd2_upper".into(), num(rep.nd2_bounds.upper)],
        vec!["nd2_converged".into(), rep.nd2_bounds.converged.to_string()],
        vec!["nd3_s_min".into(), opt(smin)],
        vec!["nd3_p_star".into(), opt(p_star)],
        vec!["nd3_scaling".into(), rep.nd3_scaling.name().to_string()],
        vec!["a1star_constant".into(), num(rep.a1star_constant)],
        vec!["s_floor".into(), num(rep.range.0)],
        vec!["nd3_holds_on_range".into(), rep.nd3_holds_on_range().to_string()],
    ];
    for r in &rows {
        o.lines.push(format!("{:<20} {}", r[0], r[1]));
    }
    if let Some(s) = smin {
        o.lines.push(format!("s_min = {}", display_round(s)));
    }
    o.files.push(out.table("conditions.csv", &["quantity", "value"], &rows)?);
    if !rep.nd3_holds_on_range() {
        return Err(CliError::Acceptance(format!(
            "stiffness criterion fails on the declared range: s_min = {:.4} above s_floor = {}",
            smin.unwrap_or(f64::NAN),
            c.s_floor
        )));
    }
    Ok(o)
}

fn state_checkpoint(solver: &Solver, state: &State, out: &OutDir) -> Result<Vec<PathBuf>, CliError> {
    let (pc, pn) = checkpoint_paths(&out.path, state.n);
    let mut fc = std::fs::File::create(&pc).map_err(|e| CliError::io(&pc, e))?;
    let mut fn_ = std::fs::File::create(&pn).map_err(|e| CliError::io(&pn, e))?;
    out.meta.write_block(&mut fc).map_err(|e| CliError::io(&pc, e))?;
    out.meta.write_block(&mut fn_).map_err(|e| CliError::io(&pn, e))?;
    write_checkpoint(solver, state, &mut fc, &mut fn_)?;
    fc.flush().map_err(|e| CliError::io(&pc, e))?;
    Ok(vec![pc, pn])
}

const STEP_HEADER: [&str; 8] = [
    "step",
    "time",
    "iterations",
    "mech_residual",
    "flow_residual",
    "min_saturation",
    "stabilized",
    "halvings",
];

pub fn run(cfg: &RunConfig, out: &OutDir, restart: Option<usize>) -> Result<Outcome, CliError> {
    let solver = Solver::new(cfg.problem()?)?;
    let start = match restart {
        Some(n) => {
            let (pc, pn) = checkpoint_paths(&out.path, n);
            load_checkpoint(&solver, &pc, &pn)?
        }
        None => solver.init_state()?,
    };
    let mut o = Outcome::default();
    let every = cfg.output.checkpoint_every;
    let steps = solver.problem().time.steps;
    let mut traj = Trajectory {
        states: vec![start],
        steps: Vec::new(),
        warnings: Vec::new(),
    };
    if restart.is_none() {
        o.files.extend(state_checkpoint(&solver, &traj.states[0], out)?);
    }
    let mut failure = None;
    while traj.states.last().expect("non-empty").n < steps {
        let prev = traj.states.last().expect("non-empty");
        match solver.nonlinear_step(prev, prev.n + 1) {
            Ok((s, info)) => {
                if every > 0 && s.n % every == 0 && s.n < steps {
                    o.files.extend(state_checkpoint(&solver, &s, out)?);
                }
                traj.states.push(s);
                traj.steps.push(info);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let rows: Vec<Vec<String>> = traj
        .steps
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                num(solver.problem().time.time(s.n)),
                s.iterations.to_string(),
                num(s.mech_residual),
                num(s.flow_residual),
                num(s.min_saturation),
                s.stabilized.to_string(),
                s.halvings.to_string(),
            ]
        })
        .collect();
    o.files.push(out.table("steps.csv", &STEP_HEADER, &rows)?);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let last = traj.states.last().expect("non-empty");
    if last.n > 0 || restart.is_some() {
        o.files.extend(state_checkpoint(&solver, last, out)?);
    }
    if let Some(w) = solver.nd3_warning(&traj) {
        traj.warnings.push(w);
    }
    let report = energy_monitor(&traj, &solver)?;
    let step_rows: Vec<Vec<String>> = report
        .steps
        .iter()
        .map(|e| {
            vec![
                e.n.to_string(),
                num(e.u_energy),
                num(e.du_energy),
                num(e.chi_flux),
                num(e.dchi_h1),
                num(e.dchi_l2),
                num(e.pore_l2),
                num(e.legendre_hat),
                num(e.legendre_bar),
                num(e.legendre_min_cell),
            ]
        })
        .collect();
    o.files.push(out.table(
        "energy_steps.csv",
        &[
            "step",
            "u_energy",
            "du_energy",
            "chi_flux",
            "dchi_h1",
            "dchi_l2",
            "pore_l2",
            "legendre_hat",
            "legendre_bar",
            "legendre_min_cell",
        ],
        &step_rows,
    )?);
    let mut summary: Vec<Vec<String>> = report
        .quantities()
        .into_iter()
        .map(|(k, v)| vec![k.to_string(), num(v)])
        .collect();
    summary.push(vec!["data_norm".into(), num(report.data_norm)]);
    summary.push(vec!["constant".into(), num(report.constant)]);
    summary.push(vec!["flagged".into(), report.flagged.to_string()]);
    o.files.push(out.table("energy_summary.csv", &["quantity", "value"], &summary)?);
    if cfg.output.plot_data {
        let law = solver.law();
        let rows = solver
            .mesh()
            .cells()
            .iter()
            .zip(&last.chi)
            .map(|(c, &chi)| {
                let pt = law.at_chi(chi)?;
                Ok(vec![c.center[0], c.center[1], chi, pt.p, pt.s])
            })
            .collect::<Result<Vec<_>, kirchpore::Error>>()?;
        o.files.push(out.plot_data("final_state.dat", &["x", "y", "chi", "p_w", "s_w"], &rows)?);
    }
    let iters: usize = traj.steps.iter().map(|s| s.iterations).sum();
    let min_s = traj.steps.iter().map(|s| s.min_saturation).fold(1.0, f64::min);
    o.lines.push(format!(
        "{} steps to t = {}, {} Newton iterations, min saturation {:.4}",
        traj.steps.len(),
        last.time,
        iters,
        min_s
    ));
    o.lines.push(format!(
        "energy constant {:.3e}{}",
        report.constant,
        if report.flagged { " (flagged)" } else { "" }
    ));
    for w in &traj.warnings {
        o.lines.push(format!("warning: {w}"));
    }
    Ok(o)
}

pub fn mms(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let mut misses = Vec::new();
    for &b in &cfg.mms.branches {
        let branch: MmsBranch = b.into();
        let table = mms_study(branch, &cfg.mms.levels)?;
        let (p, mut w) = out.file(&format!("mms_{}.csv", branch.name()))?;
        table.write_csv(&mut w)?;
        w.flush().map_err(|e| CliError::io(&p, e))?;
        o.files.push(p);
        for (m, name) in table.metrics.iter().enumerate() {
            let pairs = table.pairwise_orders(m);
            let fitted = table.fitted_order(m);
            let ok = fitted >= cfg.mms.min_order && pairs.iter().all(|&q| q >= cfg.mms.min_order);
            o.lines.push(format!(
                "{} {name}: fitted order {fitted:.3}, pairwise {:?}{}",
                branch.name(),
                pairs.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>(),
                if ok { "" } else { " BELOW THRESHOLD" }
            ));
            if !ok {
                misses.push(format!("{} {name} order {fitted:.3}", branch.name()));
            }
        }
    }
    if misses.is_empty() {
        Ok(o)
    } else {
        print_lines(&o);
        Err(CliError::Acceptance(misses.join(", ")))
    }
}

pub fn sweep(cfg: &RunConfig, out: &OutDir, param: Option<RegParam>) -> Result<Outcome, CliError> {
    let base = cfg.problem()?;
    let param = param.unwrap_or(cfg.sweep.param.into());
    let res = regularization_sweep(&base, param, &cfg.sweep.ladder)?;
    let table = res.to_table(base.mesh.h_max(), base.time.tau());
    let (p, mut w) = out.file(&format!("sweep_{}.csv", param.name()))?;
    table.write_csv(&mut w)?;
    w.flush().map_err(|e| CliError::io(&p, e))?;
    let mut o = Outcome {
        files: vec![p],
        ..Outcome::default()
    };
    for (i, d) in res.chi_differences.iter().enumerate() {
        o.lines.push(format!(
            "{} {:e} -> {:e}: chi difference {d:.4e}, u difference {:.4e}",
            param.name(),
            res.ladder[i],
            res.ladder[i + 1],
            res.u_differences[i]
        ));
    }
    for (v, e) in &res.failures {
        o.lines.push(format!("rung {v:e} failed: {e}"));
    }
    o.lines.push(format!("cauchy: {}", res.is_cauchy()));
    Ok(o)
}

pub fn terzaghi(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let t = &cfg.terzaghi;
    let mut o = Outcome::default();
    let mut errs = Vec::new();
    for i in 0..=t.refinements {
        let k = 1usize << i;
        errs.push(terzaghi_error(t.cells * k, t.steps * k)?);
    }
    let rows: Vec<Vec<String>> = errs
        .iter()
        .map(|e| {
            vec![
                e.cells.to_string(),
                e.steps.to_string(),
                num(1.0 / e.cells as f64),
                num(0.6 / e.steps as f64),
                num(e.relative_l2),
            ]
        })
        .collect();
    o.files.push(out.table("terzaghi.csv", &["cells", "steps", "h", "tau", "relative_l2"], &rows)?);
    for e in &errs {
        o.lines.push(format!(
            "{} cells, {} steps: relative L2 error {:.4}%",
            e.cells,
            e.steps,
            100.0 * e.relative_l2
        ));
    }
    let first = errs[0].relative_l2;
    let monotone = errs.windows(2).all(|w| w[1].relative_l2 < w[0].relative_l2);
    if first >= t.max_error || !monotone {
        print_lines(&o);
        return Err(CliError::Acceptance(format!(
            "error {first:.4} (limit {}), decreasing under refinement: {monotone}",
            t.max_error
        )));
    }
    Ok(o)
}

pub fn mesh_stats(cfg: &RunConfig, out: &OutDir) -> Result<Outcome, CliError> {
    let p = cfg.problem()?;
    let s = p.mesh.stats();
    let header = [
        "cells",
        "faces",
        "interior_faces",
        "boundary_faces",
        "regularity",
        "min_transmissibility",
        "max_transmissibility",
        "h_max",
        "area",
    ];
    let row = vec![
        s.cells.to_string(),
        s.faces.to_string(),
        s.interior_faces.to_string(),
        s.boundary_faces.to_string(),
        num(s.regularity),
        num(s.min_transmissibility),
        num(s.max_transmissibility),
        num(s.h_max),
        num(s.area),
    ];
    let mut o = Outcome::default();
    for (h, v) in header.iter().zip(&row) {
        o.lines.push(format!("{h:<22} {v}"));
    }
    o.files.push(out.table("mesh_stats.csv", &header, &[row])?);
    Ok(o)
}

pub fn print_lines(o: &Outcome) {
    for l in &o.lines {
        println!("{l}");
    }
}
