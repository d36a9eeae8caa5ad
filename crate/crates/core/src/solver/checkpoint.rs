use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use super::scheme::{Solver, State};
use crate::error::{Error, Result};

const CELL_HEADER: [&str; 7] = ["cell", "x", "y", "chi", "p_w", "s_w", "p_pore"];
const NODE_HEADER: [&str; 5] = ["node", "x", "y", "u_x", "u_y"];

fn csv_err(e: csv::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

/// Writes the cell and node tables of a state. Both start with a `#` block
/// carrying the step index and time; floats use shortest round-trip form so
/// a restart is exact.
pub fn write_checkpoint<W1: Write, W2: Write>(
    solver: &Solver,
    state: &State,
    mut cells: W1,
    mut nodes: W2,
) -> Result<()> {
    let law = solver.law();
    for out in [&mut cells as &mut dyn Write, &mut nodes as &mut dyn Write] {
        writeln!(out, "# step={}", state.n)?;
        writeln!(out, "# time={}", state.time)?;
    }
    let mut w = csv::Writer::from_writer(cells);
    w.write_record(CELL_HEADER).map_err(csv_err)?;
    for (k, (c, &chi)) in solver.mesh().cells().iter().zip(&state.chi).enumerate() {
        let pt = law.at_chi(chi)?;
        w.write_record([
            k.to_string(),
            c.center[0].to_string(),
            c.center[1].to_string(),
            chi.to_string(),
            pt.p.to_string(),
            pt.s.to_string(),
            pt.pore.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    let full = solver.space().expand(&state.u);
    let mut w = csv::Writer::from_writer(nodes);
    w.write_record(NODE_HEADER).map_err(csv_err)?;
    for (a, x) in solver.space().node_coords().iter().enumerate() {
        w.write_record([
            a.to_string(),
            x[0].to_string(),
            x[1].to_string(),
            full[2 * a].to_string(),
            full[2 * a + 1].to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// File names used by [`save_checkpoint`].
pub fn checkpoint_paths(dir: &Path, n: usize) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("state_{n:06}_cells.csv")),
        dir.join(format!("state_{n:06}_nodes.csv")),
    )
}

pub fn save_checkpoint(solver: &Solver, state: &State, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let (pc, pn) = checkpoint_paths(dir, state.n);
    write_checkpoint(solver, state, File::create(&pc)?, File::create(&pn)?)?;
    Ok((pc, pn))
}

pub fn load_checkpoint(solver: &Solver, cells: &Path, nodes: &Path) -> Result<State> {
    read_checkpoint(solver, File::open(cells)?, File::open(nodes)?)
}

/// Reads a state written by [`write_checkpoint`] and checks it against the
/// solver's mesh and displacement space.
pub fn read_checkpoint<R1: Read, R2: Read>(solver: &Solver, cells: R1, nodes: R2) -> Result<State> {
    let (meta, rows) = read_table(cells, &CELL_HEADER)?;
    let (meta_n, node_rows) = read_table(nodes, &NODE_HEADER)?;
    if meta != meta_n {
        return Err(Error::Checkpoint("cell and node files belong to different states".into()));
    }
    let (n, time) = meta;
    let mesh = solver.mesh();
    if rows.len() != mesh.num_cells() {
        return Err(Error::Checkpoint(format!(
            "{} cell rows for {} cells",
            rows.len(),
            mesh.num_cells()
        )));
    }
    let space = solver.space();
    if node_rows.len() != space.num_nodes() {
        return Err(Error::Checkpoint(format!(
            "{} node rows for {} nodes",
            node_rows.len(),
            space.num_nodes()
        )));
    }
    let mut chi = vec![0.0; rows.len()];
    for r in &rows {
        let k = r[0] as usize;
        if k >= chi.len() {
            return Err(Error::Checkpoint(format!("cell id {k} out of range")));
        }
        chi[k] = r[3];
    }
    let mut full = vec![0.0; 2 * space.num_nodes()];
    for r in &node_rows {
        let a = r[0] as usize;
        if a >= space.num_nodes() {
            return Err(Error::Checkpoint(format!("node id {a} out of range")));
        }
        full[2 * a] = r[3];
        full[2 * a + 1] = r[4];
    }
    let u = space.free_to_full().iter().map(|&d| full[d]).collect();
    Ok(State { n, time, u, chi })
}

type Table = ((usize, f64), Vec<Vec<f64>>);

fn read_table<R: Read>(src: R, header: &[&str]) -> Result<Table> {
    let mut reader = BufReader::new(src);
    let mut step = None;
    let mut time = None;
    let mut body = String::new();
    let mut line = String::new();
    while reader.read_line(&mut line)? > 0 {
        if let Some(meta) = line.trim().strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k.trim() {
                    "step" => step = v.trim().parse::<usize>().ok(),
                    "time" => time = v.trim().parse::<f64>().ok(),
                    _ => {}
                }
            }
        } else {
            body.push_str(&line);
        }
        line.clear();
    }
    let meta = match (step, time) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(Error::Checkpoint("missing step/time metadata".into())),
    };
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Checkpoint(format!("unexpected header {found:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let vals = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Checkpoint(format!("bad number {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    Ok((meta, rows))
}
