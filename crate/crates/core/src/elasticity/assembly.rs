use rayon::prelude::*;

use super::space::{DisplacementSpace, Triangle};
use crate::error::{invalid, Result};
use crate::linalg::{CsrMatrix, SparseCholesky, Triplets};
use crate::mesh::{Mesh, Side};
use crate::quadrature::{gauss_legendre, triangle_order4};

/// Matrix of `a(u, v) = 2μ (ε(u), ε(v)) + λ (∇·u, ∇·v)` on the free dofs.
#[derive(Clone, Debug)]
pub struct ElasticOperator {
    pub matrix: CsrMatrix,
    pub mu: f64,
    pub lambda: f64,
}

impl ElasticOperator {
    /// Energy norm squared `a(v, v)`.
    pub fn energy_sq(&self, v: &[f64]) -> f64 {
        self.matrix.bilinear(v, v)
    }

    pub fn energy(&self, v: &[f64]) -> f64 {
        self.energy_sq(v).max(0.0).sqrt()
    }

    pub fn factor(&self) -> Result<SparseCholesky> {
        SparseCholesky::new(&self.matrix)
    }

    /// `‖f‖_{V*} = (fᵀ A⁻¹ f)^{1/2}` through a Riesz solve.
    pub fn dual_norm(&self, f: &[f64], chol: &SparseCholesky) -> f64 {
        if f.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let x = chol.solve(f);
        crate::linalg::dot(f, &x).max(0.0).sqrt()
    }
}

type Local = Vec<(usize, usize, f64)>;

fn element_stiffness(t: &Triangle, mu: f64, lambda: f64) -> [[f64; 12]; 12] {
    let mut k = [[0.0; 12]; 12];
    for (l, w) in triangle_order4() {
        let g = t.shape_grad(&l);
        let wq = w * t.area;
        for a in 0..6 {
            for c in 0..2 {
                for b in 0..6 {
                    for d in 0..2 {
                        let dot = if c == d {
                            g[a][0] * g[b][0] + g[a][1] * g[b][1]
                        } else {
                            0.0
                        };
                        let eps = 0.5 * (dot + g[a][d] * g[b][c]);
                        k[2 * a + c][2 * b + d] += wq * (2.0 * mu * eps + lambda * g[a][c] * g[b][d]);
                    }
                }
            }
        }
    }
    k
}

fn scatter<F>(space: &DisplacementSpace, map: F, n: usize, mu: f64, lambda: f64) -> CsrMatrix
where
    F: Fn(usize) -> Option<usize> + Sync,
{
    let locals: Vec<Local> = space
        .triangles()
        .par_iter()
        .map(|t| {
            let k = element_stiffness(t, mu, lambda);
            let mut out = Vec::with_capacity(144);
            for (i, row) in k.iter().enumerate() {
                let Some(r) = map(2 * t.nodes[i / 2] + i % 2) else { continue };
                for (j, &v) in row.iter().enumerate() {
                    if let Some(c) = map(2 * t.nodes[j / 2] + j % 2) {
                        out.push((r, c, v));
                    }
                }
            }
            out
        })
        .collect();
    let mut trip = Triplets::with_capacity(n, n, locals.iter().map(Vec::len).sum());
    for (r, c, v) in locals.into_iter().flatten() {
        trip.push(r, c, v);
    }
    trip.to_csr()
}

fn check_moduli(mu: f64, lambda: f64) -> Result<()> {
    if !(mu > 0.0) {
        return Err(invalid("mu", format!("must be > 0, got {mu}")));
    }
    if !(lambda >= 0.0) {
        return Err(invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    Ok(())
}

pub fn assemble_elastic(space: &DisplacementSpace, mu: f64, lambda: f64) -> Result<ElasticOperator> {
    check_moduli(mu, lambda)?;
    space.check_constrained()?;
    let matrix = scatter(space, |d| space.free_index(d), space.num_free(), mu, lambda);
    Ok(ElasticOperator { matrix, mu, lambda })
}

/// Elastic matrix on all nodal dofs, constraints ignored (singular).
pub fn assemble_elastic_unconstrained(space: &DisplacementSpace, mu: f64, lambda: f64) -> Result<CsrMatrix> {
    check_moduli(mu, lambda)?;
    let n = 2 * space.num_nodes();
    Ok(scatter(space, Some, n, mu, lambda))
}

/// `B_{K,j} = ∫_K ∇·φ_j` for cell constants against free dofs.
pub fn assemble_div_coupling(mesh: &Mesh, space: &DisplacementSpace) -> CsrMatrix {
    let mut t = Triplets::with_capacity(mesh.num_cells(), space.num_free(), 24 * mesh.num_cells());
    for tri in space.triangles() {
        let mut local = [0.0; 12];
        for (l, w) in triangle_order4() {
            let g = tri.shape_grad(&l);
            for a in 0..6 {
                for c in 0..2 {
                    local[2 * a + c] += w * tri.area * g[a][c];
                }
            }
        }
        for (i, v) in local.iter().enumerate() {
            if let Some(col) = space.free_index(2 * tri.nodes[i / 2] + i % 2) {
                t.push(tri.cell, col, *v);
            }
        }
    }
    t.to_csr()
}

/// Value and gradient of a nodal field on triangle `t` at `l`.
pub fn eval_on_triangle(full: &[f64], t: &Triangle, l: &[f64; 3]) -> ([f64; 2], [[f64; 2]; 2]) {
    let phi = Triangle::shape(l);
    let g = t.shape_grad(l);
    let mut u = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for a in 0..6 {
        let n = t.nodes[a];
        for c in 0..2 {
            let coef = full[2 * n + c];
            u[c] += coef * phi[a];
            grad[c][0] += coef * g[a][0];
            grad[c][1] += coef * g[a][1];
        }
    }
    (u, grad)
}

/// `‖∇·v‖²_{L²}` of a free-dof field.
pub fn div_l2_sq(space: &DisplacementSpace, v: &[f64]) -> f64 {
    let full = space.expand(v);
    space
        .triangles()
        .iter()
        .map(|t| {
            triangle_order4()
                .iter()
                .map(|(l, w)| {
                    let (_, g) = eval_on_triangle(&full, t, l);
                    let div = g[0][0] + g[1][1];
                    w * t.area * div * div
                })
                .sum::<f64>()
        })
        .sum()
}

/// `∫_{∂Ω} v·n` of a field given on all nodal dofs.
pub fn boundary_flux(space: &DisplacementSpace, full: &[f64]) -> f64 {
    let coords = space.node_coords();
    let (gx, gw) = gauss_legendre(3);
    let mut total = 0.0;
    for (side, nodes) in space.boundary_edges() {
        let n = side.outward_normal();
        let p0 = coords[nodes[0]];
        let p2 = coords[nodes[2]];
        let len = ((p2[0] - p0[0]).powi(2) + (p2[1] - p0[1]).powi(2)).sqrt();
        for (s, w) in gx.iter().zip(gw) {
            let phi = edge_shape(0.5 * (s + 1.0));
            let mut vn = 0.0;
            for k in 0..3 {
                vn += phi[k] * (full[2 * nodes[k]] * n[0] + full[2 * nodes[k] + 1] * n[1]);
            }
            total += 0.5 * len * w * vn;
        }
    }
    total
}

/// 1D quadratic Lagrange basis on `[0, 1]` with nodes 0, ½, 1.
fn edge_shape(t: f64) -> [f64; 3] {
    [
        (1.0 - t) * (1.0 - 2.0 * t),
        4.0 * t * (1.0 - t),
        t * (2.0 * t - 1.0),
    ]
}

/// Load vector `⟨f, v⟩ + ⟨σ_N, v⟩_{Γ_N}` on the free dofs. The traction is
/// integrated on every boundary edge; its constrained components drop out.
pub fn neumann_load<B, S>(space: &DisplacementSpace, body: B, traction: S) -> Vec<f64>
where
    B: Fn(f64, f64) -> [f64; 2],
    S: Fn(Side, f64, f64) -> [f64; 2],
{
    let mut full = vec![0.0; 2 * space.num_nodes()];
    for t in space.triangles() {
        for (l, w) in triangle_order4() {
            let x = t.point(&l);
            let f = body(x[0], x[1]);
            if f == [0.0, 0.0] {
                continue;
            }
            let phi = Triangle::shape(&l);
            for a in 0..6 {
                for c in 0..2 {
                    full[2 * t.nodes[a] + c] += w * t.area * f[c] * phi[a];
                }
            }
        }
    }
    let coords = space.node_coords();
    let (gx, gw) = gauss_legendre(3);
    for (side, nodes) in space.boundary_edges() {
        if space.boundary().get(*side).fix_x && space.boundary().get(*side).fix_y {
            continue;
        }
        let p0 = coords[nodes[0]];
        let p2 = coords[nodes[2]];
        let len = ((p2[0] - p0[0]).powi(2) + (p2[1] - p0[1]).powi(2)).sqrt();
        for (s, w) in gx.iter().zip(gw) {
            let tt = 0.5 * (s + 1.0);
            let x = [p0[0] + tt * (p2[0] - p0[0]), p0[1] + tt * (p2[1] - p0[1])];
            let sig = traction(*side, x[0], x[1]);
            let phi = edge_shape(tt);
            for k in 0..3 {
                for c in 0..2 {
                    full[2 * nodes[k] + c] += 0.5 * len * w * sig[c] * phi[k];
                }
            }
        }
    }
    space
        .free_to_full()
        .iter()
        .map(|&d| full[d])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{MechBoundary, MechSide};

    fn free_space(n: usize) -> (Mesh, DisplacementSpace) {
        let mesh = Mesh::rect(n, n, 1.0, 1.0).unwrap();
        let space = DisplacementSpace::new(&mesh, MechBoundary::all(MechSide::FREE));
        (mesh, space)
    }

    fn nodal<F: Fn(f64, f64) -> [f64; 2]>(space: &DisplacementSpace, f: F) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * space.num_nodes());
        for c in space.node_coords() {
            out.extend(f(c[0], c[1]));
        }
        out
    }

    #[test]
    fn rigid_motions_have_zero_energy() {
        let (_, space) = free_space(3);
        let a = assemble_elastic_unconstrained(&space, 1.3, 0.7).unwrap();
        for v in [nodal(&space, |_, _| [1.0, 0.0]), nodal(&space, |x, y| [-y, x])] {
            assert!(a.bilinear(&v, &v).abs() < 1e-12);
        }
    }

    #[test]
    fn uniaxial_stretch_energy() {
        let (_, space) = free_space(2);
        let mu = 0.8;
        let a = assemble_elastic_unconstrained(&space, mu, 0.0).unwrap();
        let v = nodal(&space, |x, _| [x, 0.0]);
        assert!((a.bilinear(&v, &v) - 2.0 * mu).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_radial_field() {
        let (mesh, space) = free_space(3);
        let b = assemble_div_coupling(&mesh, &space);
        let v = nodal(&space, |x, y| [0.5 * x, 0.5 * y]);
        for (k, val) in b.mul_vec(&v).iter().enumerate() {
            assert!((val - mesh.cells()[k].measure).abs() < 1e-13);
        }
        let curl = nodal(&space, |x, y| [x * x * y, -x * y * y]);
        assert!(b.mul_vec(&curl).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn traction_on_clamped_sides_is_ignored() {
        let mesh = Mesh::rect(2, 2, 1.0, 1.0).unwrap();
        let space = DisplacementSpace::new(&mesh, MechBoundary::default());
        let f = neumann_load(&space, |_, _| [0.0, 0.0], |_, _, _| [1.0, 1.0]);
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_body_force_total() {
        let (_, space) = free_space(4);
        let f = neumann_load(&space, |_, _| [2.0, -1.0], |_, _, _| [0.0, 0.0]);
        let sx: f64 = f.iter().step_by(2).sum();
        let sy: f64 = f.iter().skip(1).step_by(2).sum();
        assert!((sx - 2.0).abs() < 1e-13 && (sy + 1.0).abs() < 1e-13);
    }
}
