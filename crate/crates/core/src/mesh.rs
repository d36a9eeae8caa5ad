//! Admissible rectangular meshes for two-point flux finite volumes.
//!
//! Cells are axis-aligned rectangles with their centroids as cell centers,
//! so the segment joining two neighbouring centers is orthogonal to the
//! shared face by construction.

use crate::error::{Error, Result};
use crate::linalg::Triplets;

/// One value per cell.
pub type CellField = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    pub fn outward_normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        }
    }
}

/// Flow boundary type of one side of the rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowBc {
    /// homogeneous Dirichlet `χ = 0`
    Dirichlet,
    /// prescribed normal flux
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowBoundary {
    pub left: FlowBc,
    pub right: FlowBc,
    pub bottom: FlowBc,
    pub top: FlowBc,
}

impl FlowBoundary {
    pub fn all(bc: FlowBc) -> Self {
        Self {
            left: bc,
            right: bc,
            bottom: bc,
            top: bc,
        }
    }

    pub fn get(&self, side: Side) -> FlowBc {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
            Side::Top => self.top,
        }
    }

    pub fn has_dirichlet(&self) -> bool {
        Side::ALL.iter().any(|&s| self.get(s) == FlowBc::Dirichlet)
    }
}

impl Default for FlowBoundary {
    fn default() -> Self {
        Self::all(FlowBc::Dirichlet)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub center: [f64; 2],
    pub measure: f64,
    /// index pair `(i, j)` in the tensor grid
    pub ij: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceKind {
    /// shared by `k` and `l`; the normal points from `k` to `l`
    Interior { k: usize, l: usize },
    /// exterior face of cell `k`; the normal points outward
    Boundary { k: usize, side: Side },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub kind: FaceKind,
    pub center: [f64; 2],
    pub normal: [f64; 2],
    pub measure: f64,
    /// `d_σ`: center-to-center distance, or center-to-face on the boundary
    pub distance: f64,
    /// `d_{K,σ}` and `d_{L,σ}` (the second is zero on the boundary)
    pub sub_distances: [f64; 2],
    /// `τ_σ = |σ| / d_σ`
    pub transmissibility: f64,
    /// measure of the dual diamond `P_σ`
    pub dual_volume: f64,
}

impl Face {
    pub fn owner(&self) -> usize {
        match self.kind {
            FaceKind::Interior { k, .. } | FaceKind::Boundary { k, .. } => k,
        }
    }

    pub fn boundary_side(&self) -> Option<Side> {
        match self.kind {
            FaceKind::Boundary { side, .. } => Some(side),
            FaceKind::Interior { .. } => None,
        }
    }
}

/// Summary numbers of a mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats {
    pub cells: usize,
    pub faces: usize,
    pub interior_faces: usize,
    pub boundary_faces: usize,
    pub regularity: f64,
    pub min_transmissibility: f64,
    pub max_transmissibility: f64,
    pub h_max: f64,
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    xs: Vec<f64>,
    ys: Vec<f64>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    cell_faces: Vec<Vec<usize>>,
    flow: FlowBoundary,
}

pub const DIM: usize = 2;

fn check_coords(name: &str, c: &[f64]) -> Result<()> {
    if c.len() < 2 {
        return Err(Error::Mesh(format!("{name}: need at least two coordinates")));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Mesh(format!("{name}: non-finite coordinate")));
    }
    if c.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Mesh(format!("{name}: coordinates must increase strictly")));
    }
    Ok(())
}

impl Mesh {
    /// Uniform `nx × ny` grid on `[0, lx] × [0, ly]`, all flow sides Dirichlet.
    pub fn rect(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Mesh(format!("need nx, ny >= 1, got {nx} x {ny}")));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::Mesh(format!("degenerate domain {lx} x {ly}")));
        }
        let xs = (0..=nx).map(|i| lx * i as f64 / nx as f64).collect();
        let ys = (0..=ny).map(|j| ly * j as f64 / ny as f64).collect();
        Self::tensor(xs, ys)
    }

    /// Tensor-product grid with the given node coordinates.
    pub fn tensor(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_coords("x", &xs)?;
        check_coords("y", &ys)?;
        let (nx, ny) = (xs.len() - 1, ys.len() - 1);
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(Cell {
                    center: [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])],
                    measure: (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]),
                    ij: (i, j),
                });
            }
        }
        let idx = |i: usize, j: usize| i + nx * j;
        let mut faces = Vec::with_capacity((nx + 1) * ny + nx * (ny + 1));
        // faces normal to x
        for j in 0..ny {
            let h = ys[j + 1] - ys[j];
            let yc = 0.5 * (ys[j] + ys[j + 1]);
            for i in 0..=nx {
                let center = [xs[i], yc];
                let (kind, normal, subs) = if i == 0 {
                    let k = idx(0, j);
                    (FaceKind::Boundary { k, side: Side::Left }, [-1.0, 0.0], [cells[k].center[0] - xs[0], 0.0])
                } else if i == nx {
                    let k = idx(nx - 1, j);
                    (FaceKind::Boundary { k, side: Side::Right }, [1.0, 0.0], [xs[nx] - cells[k].center[0], 0.0])
                } else {
                    let (k, l) = (idx(i - 1, j), idx(i, j));
                    (
                        FaceKind::Interior { k, l },
                        [1.0, 0.0],
                        [xs[i] - cells[k].center[0], cells[l].center[0] - xs[i]],
                    )
                };
                faces.push(make_face(kind, center, normal, h, subs));
            }
        }
        // faces normal to y
        for j in 0..=ny {
            for i in 0..nx {
                let w = xs[i + 1] - xs[i];
                let center = [0.5 * (xs[i] + xs[i + 1]), ys[j]];
                let (kind, normal, subs) = if j == 0 {
                    let k = idx(i, 0);
                    (FaceKind::Boundary { k, side: Side::Bottom }, [0.0, -1.0], [cells[k].center[1] - ys[0], 0.0])
                } else if j == ny {
                    let k = idx(i, ny - 1);
                    (FaceKind::Boundary { k, side: Side::Top }, [0.0, 1.0], [ys[ny] - cells[k].center[1], 0.0])
                } else {
                    let (k, l) = (idx(i, j - 1), idx(i, j));
                    (
                        FaceKind::Interior { k, l },
                        [0.0, 1.0],
                        [ys[j] - cells[k].center[1], cells[l].center[1] - ys[j]],
                    )
                };
                faces.push(make_face(kind, center, normal, w, subs));
            }
        }
        let mut cell_faces = vec![Vec::with_capacity(4); cells.len()];
        for (f, face) in faces.iter().enumerate() {
            match face.kind {
                FaceKind::Interior { k, l } => {
                    cell_faces[k].push(f);
                    cell_faces[l].push(f);
                }
                FaceKind::Boundary { k, .. } => cell_faces[k].push(f),
            }
        }
        Ok(Self {
            xs,
            ys,
            cells,
            faces,
            cell_faces,
            flow: FlowBoundary::default(),
        })
    }

    pub fn with_flow_boundary(mut self, flow: FlowBoundary) -> Self {
        self.flow = flow;
        self
    }

    pub fn flow_boundary(&self) -> &FlowBoundary {
        &self.flow
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell_faces(&self, k: usize) -> &[usize] {
        &self.cell_faces[k]
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    pub fn area(&self) -> f64 {
        (self.xs[self.nx()] - self.xs[0]) * (self.ys[self.ny()] - self.ys[0])
    }

    pub fn diameter(&self) -> f64 {
        let lx = self.xs[self.nx()] - self.xs[0];
        let ly = self.ys[self.ny()] - self.ys[0];
        lx.hypot(ly)
    }

    /// Largest cell diagonal.
    pub fn h_max(&self) -> f64 {
        let dx = self.xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let dy = self.ys.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        dx.hypot(dy)
    }

    /// Whether the face enters the discrete gradient: interior faces and
    /// exterior faces on the Dirichlet part of the flow boundary.
    pub fn face_is_active(&self, face: &Face) -> bool {
        match face.kind {
            FaceKind::Interior { .. } => true,
            FaceKind::Boundary { side, .. } => self.flow.get(side) == FlowBc::Dirichlet,
        }
    }

    /// `δ_σ(q)` signed along the face normal: `q_L − q_K` inside, `0 − q_K`
    /// on Dirichlet faces, `None` on Neumann faces.
    pub fn jump(&self, q: &[f64], face: &Face) -> Option<f64> {
        match face.kind {
            FaceKind::Interior { k, l } => Some(q[l] - q[k]),
            FaceKind::Boundary { k, side } => {
                (self.flow.get(side) == FlowBc::Dirichlet).then(|| -q[k])
            }
        }
    }

    /// Dual-volume average of a cell weight on a face; one-sided on the
    /// boundary.
    pub fn face_weight(&self, omega: &[f64], face: &Face) -> f64 {
        match face.kind {
            FaceKind::Interior { k, l } => {
                (face.sub_distances[0] * omega[k] + face.sub_distances[1] * omega[l]) / face.distance
            }
            FaceKind::Boundary { k, .. } => omega[k],
        }
    }

    pub fn discrete_h1_norm(&self, q: &[f64]) -> f64 {
        self.discrete_h1_norm_sq(q).sqrt()
    }

    pub fn discrete_h1_norm_sq(&self, q: &[f64]) -> f64 {
        self.faces
            .iter()
            .filter_map(|f| self.jump(q, f).map(|d| f.transmissibility * d * d))
            .sum()
    }

    /// `Σ_σ τ_σ {ω}_σ δ_σ(χ) δ_σ(q)`
    pub fn weighted_grad_inner(&self, chi: &[f64], q: &[f64], omega: &[f64]) -> Result<f64> {
        if let Some(bad) = omega.iter().find(|&&w| !(w > 0.0)) {
            return Err(Error::Mesh(format!("face weights must be positive, got {bad}")));
        }
        Ok(self
            .faces
            .iter()
            .filter_map(|f| {
                let a = self.jump(chi, f)?;
                let b = self.jump(q, f)?;
                Some(f.transmissibility * self.face_weight(omega, f) * a * b)
            })
            .sum())
    }

    /// Dual-grid gradient `d δ_σ(χ) / d_σ · n_σ`, one vector per face
    /// (zero on Neumann faces).
    pub fn discrete_gradient(&self, chi: &[f64]) -> Vec<[f64; 2]> {
        self.faces
            .iter()
            .map(|f| match self.jump(chi, f) {
                Some(d) => {
                    let g = DIM as f64 * d / f.distance;
                    [g * f.normal[0], g * f.normal[1]]
                }
                None => [0.0, 0.0],
            })
            .collect()
    }

    /// Flux through a face along its normal, `τ {ω} (χ_K − χ_L)`; on a
    /// Dirichlet face the exterior value is zero, on a Neumann face the
    /// flux is prescribed and this returns zero.
    pub fn tpfa_flux(&self, chi: &[f64], omega: &[f64], face: &Face) -> f64 {
        match self.jump(chi, face) {
            Some(d) => -face.transmissibility * self.face_weight(omega, face) * d,
            None => 0.0,
        }
    }

    /// Matrix of `(Tχ)_K = Σ_{σ∈E_K} τ {ω} (χ_K − χ_L)`, with `χ_L = 0` on
    /// Dirichlet faces.
    pub fn tpfa_matrix(&self, omega: &[f64]) -> Triplets {
        let n = self.num_cells();
        let mut t = Triplets::with_capacity(n, n, 5 * n);
        for f in &self.faces {
            if !self.face_is_active(f) {
                continue;
            }
            let w = f.transmissibility * self.face_weight(omega, f);
            match f.kind {
                FaceKind::Interior { k, l } => {
                    t.push(k, k, w);
                    t.push(l, l, w);
                    t.push(k, l, -w);
                    t.push(l, k, -w);
                }
                FaceKind::Boundary { k, .. } => t.push(k, k, w),
            }
        }
        t
    }

    /// Regularity constant `max_K Σ_{σ∈E_K} |σ| d_σ / |K|`.
    pub fn regularity(&self) -> f64 {
        self.cells
            .iter()
            .enumerate()
            .map(|(k, c)| {
                self.cell_faces[k]
                    .iter()
                    .map(|&f| self.faces[f].measure * self.faces[f].distance)
                    .sum::<f64>()
                    / c.measure
            })
            .fold(0.0, f64::max)
    }

    pub fn stats(&self) -> MeshStats {
        let interior = self
            .faces
            .iter()
            .filter(|f| matches!(f.kind, FaceKind::Interior { .. }))
            .count();
        let (tmin, tmax) = self.faces.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), f| {
            (lo.min(f.transmissibility), hi.max(f.transmissibility))
        });
        MeshStats {
            cells: self.num_cells(),
            faces: self.faces.len(),
            interior_faces: interior,
            boundary_faces: self.faces.len() - interior,
            regularity: self.regularity(),
            min_transmissibility: tmin,
            max_transmissibility: tmax,
            h_max: self.h_max(),
            area: self.area(),
        }
    }

    /// Discrete `L²` norm of a cell field.
    pub fn l2_norm(&self, q: &[f64]) -> f64 {
        self.cells
            .iter()
            .zip(q)
            .map(|(c, v)| c.measure * v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Cell averages of a function by tensor Gauss quadrature (3×3 points).
    pub fn cell_average<F: Fn(f64, f64) -> f64>(&self, f: F) -> CellField {
        let (gx, gw) = crate::quadrature::gauss_legendre(3);
        self.cells
            .iter()
            .map(|c| {
                let (i, j) = c.ij;
                let (x0, x1) = (self.xs[i], self.xs[i + 1]);
                let (y0, y1) = (self.ys[j], self.ys[j + 1]);
                let mut acc = 0.0;
                for (a, wa) in gx.iter().zip(gw) {
                    for (b, wb) in gx.iter().zip(gw) {
                        let x = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * a;
                        let y = 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * b;
                        acc += wa * wb * f(x, y);
                    }
                }
                0.25 * acc
            })
            .collect()
    }
}

fn make_face(kind: FaceKind, center: [f64; 2], normal: [f64; 2], measure: f64, subs: [f64; 2]) -> Face {
    let distance = subs[0] + subs[1];
    Face {
        kind,
        center,
        normal,
        measure,
        distance,
        sub_distances: subs,
        transmissibility: measure / distance,
        dual_volume: measure * distance / DIM as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let m = Mesh::rect(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.faces().len(), 4);
        for f in m.faces() {
            assert!(f.boundary_side().is_some());
            assert_eq!(f.transmissibility, 2.0);
        }
        let c = 3.0;
        assert!((m.discrete_h1_norm(&[c]) - (4.0 * 2.0 * c * c).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn two_cells_interior_face() {
        let m = Mesh::rect(2, 1, 2.0, 1.0).unwrap();
        let interior: Vec<_> = m
            .faces()
            .iter()
            .filter(|f| f.boundary_side().is_none())
            .collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].distance, 1.0);
        assert_eq!(interior[0].transmissibility, 1.0);
        let flux = m.tpfa_flux(&[1.0, 0.0], &[1.0, 1.0], interior[0]);
        assert_eq!(flux, 1.0);
    }

    #[test]
    fn dual_volumes_partition_domain() {
        let m = Mesh::rect(8, 8, 1.0, 1.0).unwrap();
        let total: f64 = m.faces().iter().map(|f| f.dual_volume).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn piecewise_weight_on_two_cells() {
        let m = Mesh::tensor(vec![0.0, 1.0, 3.0], vec![0.0, 1.0]).unwrap();
        let f = m.faces().iter().find(|f| f.boundary_side().is_none()).unwrap();
        let omega = [2.0, 5.0];
        // direct integral of ω over the diamond divided by its measure
        let left = 0.5 * f.measure * 0.5 / 2.0;
        let right = 0.5 * f.measure * 1.0 / 2.0;
        let oracle = (left * omega[0] + right * omega[1]) / (left + right);
        assert!((m.face_weight(&omega, f) - oracle).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(Mesh::rect(0, 3, 1.0, 1.0).is_err());
        assert!(Mesh::rect(2, 2, 0.0, 1.0).is_err());
        assert!(Mesh::tensor(vec![0.0, 0.5, 0.5], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn neumann_faces_drop_out() {
        let m = Mesh::rect(1, 1, 1.0, 1.0)
            .unwrap()
            .with_flow_boundary(FlowBoundary {
                top: FlowBc::Neumann,
                ..FlowBoundary::default()
            });
        assert!((m.discrete_h1_norm_sq(&[1.0]) - 6.0).abs() < 1e-14);
    }
}
