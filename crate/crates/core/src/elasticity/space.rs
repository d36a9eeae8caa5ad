use crate::error::{Error, Result};
use crate::mesh::{Mesh, Side};

/// Which displacement components are held at zero on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MechSide {
    pub fix_x: bool,
    pub fix_y: bool,
}

impl MechSide {
    pub const CLAMPED: MechSide = MechSide {
        fix_x: true,
        fix_y: true,
    };
    pub const FREE: MechSide = MechSide {
        fix_x: false,
        fix_y: false,
    };

    /// Normal component fixed, tangential free.
    pub fn roller(side: Side) -> MechSide {
        match side {
            Side::Left | Side::Right => MechSide {
                fix_x: true,
                fix_y: false,
            },
            Side::Bottom | Side::Top => MechSide {
                fix_x: false,
                fix_y: true,
            },
        }
    }

    pub fn is_free(&self) -> bool {
        !self.fix_x && !self.fix_y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MechBoundary {
    pub left: MechSide,
    pub right: MechSide,
    pub bottom: MechSide,
    pub top: MechSide,
}

impl MechBoundary {
    pub fn all(side: MechSide) -> Self {
        Self {
            left: side,
            right: side,
            bottom: side,
            top: side,
        }
    }

    pub fn get(&self, side: Side) -> MechSide {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
            Side::Top => self.top,
        }
    }

    pub fn is_fully_clamped(&self) -> bool {
        Side::ALL.iter().all(|&s| self.get(s) == MechSide::CLAMPED)
    }
}

impl Default for MechBoundary {
    fn default() -> Self {
        Self::all(MechSide::CLAMPED)
    }
}

/// Affine triangle carrying six P2 nodes: vertices, then the midpoints of
/// edges (0,1), (1,2), (2,0).
#[derive(Clone, Debug)]
pub struct Triangle {
    pub nodes: [usize; 6],
    pub vertices: [[f64; 2]; 3],
    pub cell: usize,
    pub area: f64,
    /// constant gradients of the barycentric coordinates
    pub grad_lambda: [[f64; 2]; 3],
}

impl Triangle {
    fn new(nodes: [usize; 6], vertices: [[f64; 2]; 3], cell: usize) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_lambda = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        Self {
            nodes,
            vertices,
            cell,
            area: 0.5 * det.abs(),
            grad_lambda,
        }
    }

    pub fn point(&self, lambda: &[f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            lambda[0] * v[0][0] + lambda[1] * v[1][0] + lambda[2] * v[2][0],
            lambda[0] * v[0][1] + lambda[1] * v[1][1] + lambda[2] * v[2][1],
        ]
    }

    /// P2 shape function values at barycentric point `l`.
    pub fn shape(l: &[f64; 3]) -> [f64; 6] {
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }

    /// Physical gradients of the six shape functions at `l`.
    pub fn shape_grad(&self, l: &[f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_lambda;
        let mut out = [[0.0; 2]; 6];
        for i in 0..3 {
            for c in 0..2 {
                out[i][c] = (4.0 * l[i] - 1.0) * g[i][c];
            }
        }
        for (slot, (a, b)) in [(3, (0, 1)), (4, (1, 2)), (5, (2, 0))] {
            for c in 0..2 {
                out[slot][c] = 4.0 * (l[a] * g[b][c] + l[b] * g[a][c]);
            }
        }
        out
    }
}

/// Continuous piecewise-quadratic vector fields on the triangulated grid.
///
/// Each rectangle is split along its `(x₀,y₀)–(x₁,y₁)` diagonal. The P2
/// nodes form the `(2nx+1) × (2ny+1)` lattice of vertices, edge midpoints
/// and cell centers; node `a` carries dofs `2a` (x) and `2a+1` (y).
#[derive(Clone, Debug)]
pub struct DisplacementSpace {
    lattice: (usize, usize),
    coords: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    boundary: MechBoundary,
    full_to_free: Vec<Option<usize>>,
    free_to_full: Vec<usize>,
    /// boundary edges: side, three lattice nodes ordered along the side
    edges: Vec<(Side, [usize; 3])>,
}

impl DisplacementSpace {
    pub fn new(mesh: &Mesh, boundary: MechBoundary) -> Self {
        let (nx, ny) = (mesh.nx(), mesh.ny());
        let (lx, ly) = (2 * nx + 1, 2 * ny + 1);
        let xs = mesh.xs();
        let ys = mesh.ys();
        let lat_x: Vec<f64> = (0..lx)
            .map(|a| {
                if a % 2 == 0 {
                    xs[a / 2]
                } else {
                    0.5 * (xs[a / 2] + xs[a / 2 + 1])
                }
            })
            .collect();
        let lat_y: Vec<f64> = (0..ly)
            .map(|b| {
                if b % 2 == 0 {
                    ys[b / 2]
                } else {
                    0.5 * (ys[b / 2] + ys[b / 2 + 1])
                }
            })
            .collect();
        let node = |a: usize, b: usize| a + lx * b;
        let mut coords = Vec::with_capacity(lx * ly);
        for y in &lat_y {
            for x in &lat_x {
                coords.push([*x, *y]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let cell = mesh.cell_index(i, j);
                let (a, b) = (2 * i, 2 * j);
                let v00 = node(a, b);
                let v10 = node(a + 2, b);
                let v11 = node(a + 2, b + 2);
                let v01 = node(a, b + 2);
                let center = node(a + 1, b + 1);
                // (v00, v10, v11): edges bottom, right, diagonal
                triangles.push(Triangle::new(
                    [v00, v10, v11, node(a + 1, b), node(a + 2, b + 1), center],
                    [coords[v00], coords[v10], coords[v11]],
                    cell,
                ));
                // (v00, v11, v01): edges diagonal, top, left
                triangles.push(Triangle::new(
                    [v00, v11, v01, center, node(a + 1, b + 2), node(a, b + 1)],
                    [coords[v00], coords[v11], coords[v01]],
                    cell,
                ));
            }
        }
        let mut edges = Vec::new();
        for i in 0..nx {
            let a = 2 * i;
            edges.push((Side::Bottom, [node(a, 0), node(a + 1, 0), node(a + 2, 0)]));
            edges.push((Side::Top, [node(a, ly - 1), node(a + 1, ly - 1), node(a + 2, ly - 1)]));
        }
        for j in 0..ny {
            let b = 2 * j;
            edges.push((Side::Left, [node(0, b), node(0, b + 1), node(0, b + 2)]));
            edges.push((Side::Right, [node(lx - 1, b), node(lx - 1, b + 1), node(lx - 1, b + 2)]));
        }
        let mut fixed = vec![false; 2 * lx * ly];
        for b in 0..ly {
            for a in 0..lx {
                let n = node(a, b);
                let mut sides = Vec::new();
                if a == 0 {
                    sides.push(Side::Left);
                }
                if a == lx - 1 {
                    sides.push(Side::Right);
                }
                if b == 0 {
                    sides.push(Side::Bottom);
                }
                if b == ly - 1 {
                    sides.push(Side::Top);
                }
                for s in sides {
                    let ms = boundary.get(s);
                    fixed[2 * n] |= ms.fix_x;
                    fixed[2 * n + 1] |= ms.fix_y;
                }
            }
        }
        let mut full_to_free = vec![None; fixed.len()];
        let mut free_to_full = Vec::new();
        for (d, &f) in fixed.iter().enumerate() {
            if !f {
                full_to_free[d] = Some(free_to_full.len());
                free_to_full.push(d);
            }
        }
        Self {
            lattice: (lx, ly),
            coords,
            triangles,
            boundary,
            full_to_free,
            free_to_full,
            edges,
        }
    }

    pub fn boundary(&self) -> &MechBoundary {
        &self.boundary
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn lattice(&self) -> (usize, usize) {
        self.lattice
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[(Side, [usize; 3])] {
        &self.edges
    }

    pub fn num_free(&self) -> usize {
        self.free_to_full.len()
    }

    /// Free index of full dof `d`, `None` if constrained.
    pub fn free_index(&self, d: usize) -> Option<usize> {
        self.full_to_free[d]
    }

    pub fn free_to_full(&self) -> &[usize] {
        &self.free_to_full
    }

    /// Expands a free-dof vector to all nodal dofs, zeros on constraints.
    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_to_free.len()];
        for (i, &d) in self.free_to_full.iter().enumerate() {
            full[d] = free[i];
        }
        full
    }

    /// Nodal interpolant of `u(x, y)` restricted to the free dofs.
    pub fn interpolate<F: Fn(f64, f64) -> [f64; 2]>(&self, u: F) -> Vec<f64> {
        let mut out = vec![0.0; self.num_free()];
        for (n, c) in self.coords.iter().enumerate() {
            let v = u(c[0], c[1]);
            for comp in 0..2 {
                if let Some(i) = self.full_to_free[2 * n + comp] {
                    out[i] = v[comp];
                }
            }
        }
        out
    }

    /// Fails unless the constraints remove all rigid motions
    /// `(a − ωy, b + ωx)`.
    pub fn check_constrained(&self) -> Result<()> {
        // Gram matrix of the constraint rows acting on (a, b, ω)
        let mut g = [[0.0f64; 3]; 3];
        let scale = self
            .coords
            .iter()
            .fold(0.0f64, |m, c| m.max(c[0].abs()).max(c[1].abs()))
            .max(1.0);
        for (n, c) in self.coords.iter().enumerate() {
            let (x, y) = (c[0] / scale, c[1] / scale);
            for (comp, row) in [[1.0, 0.0, -y], [0.0, 1.0, x]].iter().enumerate() {
                if self.full_to_free[2 * n + comp].is_none() {
                    for r in 0..3 {
                        for s in 0..3 {
                            g[r][s] += row[r] * row[s];
                        }
                    }
                }
            }
        }
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        let trace = g[0][0] + g[1][1] + g[2][2];
        if det > 1e-12 * trace.powi(3) {
            Ok(())
        } else {
            Err(Error::LinearSolve(
                "mechanical boundary leaves rigid motions unconstrained".into(),
            ))
        }
    }
}
