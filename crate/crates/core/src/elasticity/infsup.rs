use faer::{Mat, Side as FaerSide};

use super::assembly::assemble_elastic;
use super::space::DisplacementSpace;
use crate::error::{Error, Result};
use crate::linalg::Triplets;
use crate::mesh::{Mesh, Side};
use crate::quadrature::triangle_order4;

/// Pressure space paired with the P2 displacements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressureSpace {
    /// one constant per rectangle (the scheme's own pairing)
    CellConstant,
    /// linear per triangle, discontinuous; deliberately unstable control
    P1Discontinuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfSupEstimate {
    pub gamma: f64,
    /// smallest eigenvalues of the pressure Schur complement, ascending
    pub spectrum_head: Vec<f64>,
    /// number of kernel modes excluded before taking the minimum
    pub dropped: usize,
}

/// Discrete inf-sup constant
/// `γ = min_q sup_v (q, ∇·v) / (‖q‖ ‖v‖_V)` with `‖v‖_V² = a(v, v)`.
///
/// Computed densely as the square root of the smallest eigenvalue of
/// `M^{-1/2} B A⁻¹ Bᵀ M^{-1/2}`; intended for small meshes only. When the
/// normal displacement is fixed on the whole boundary the constant pressure
/// is a known kernel mode and is excluded.
pub fn inf_sup_constant(
    mesh: &Mesh,
    space: &DisplacementSpace,
    mu: f64,
    lambda: f64,
    pressure: PressureSpace,
) -> Result<InfSupEstimate> {
    let a = assemble_elastic(space, mu, lambda)?;
    let chol = a.factor()?;
    let (b, m_inv_sqrt) = coupling_and_scaling(mesh, space, pressure);
    let np = b.nrows;
    let nv = space.num_free();
    // scaled coupling C = M^{-1/2} B, stored transposed (nv × np)
    let bt = b.to_dense();
    let mut ct = Mat::<f64>::zeros(nv, np);
    for (rows, scale) in &m_inv_sqrt {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in rows.iter().enumerate() {
                let s = scale[i][j];
                if s == 0.0 {
                    continue;
                }
                for v in 0..nv {
                    ct[(v, r)] += s * bt[(c, v)];
                }
            }
        }
    }
    let x = chol.solve_many(&ct);
    let schur = ct.transpose() * &x;
    let sym = Mat::<f64>::from_fn(np, np, |i, j| 0.5 * (schur[(i, j)] + schur[(j, i)]));
    let eig = sym
        .self_adjoint_eigenvalues(FaerSide::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let normal_fixed = Side::ALL.iter().all(|&s| {
        let ms = space.boundary().get(s);
        match s {
            Side::Left | Side::Right => ms.fix_x,
            Side::Bottom | Side::Top => ms.fix_y,
        }
    });
    let dropped = usize::from(normal_fixed);
    let lam = eig
        .get(dropped)
        .copied()
        .ok_or_else(|| Error::Eigen("spectrum shorter than the kernel".into()))?;
    Ok(InfSupEstimate {
        gamma: lam.max(0.0).sqrt(),
        spectrum_head: eig.iter().take(8).copied().collect(),
        dropped,
    })
}

type ScalingBlock = (Vec<usize>, Vec<Vec<f64>>);

/// Coupling matrix for the chosen pressure space together with the blocks
/// of `M^{-1/2}` (the pressure mass matrix is block diagonal).
fn coupling_and_scaling(
    mesh: &Mesh,
    space: &DisplacementSpace,
    pressure: PressureSpace,
) -> (crate::linalg::CsrMatrix, Vec<ScalingBlock>) {
    match pressure {
        PressureSpace::CellConstant => {
            let b = super::assembly::assemble_div_coupling(mesh, space);
            let blocks = mesh
                .cells()
                .iter()
                .enumerate()
                .map(|(k, c)| (vec![k], vec![vec![1.0 / c.measure.sqrt()]]))
                .collect();
            (b, blocks)
        }
        PressureSpace::P1Discontinuous => {
            let nt = space.triangles().len();
            let mut t = Triplets::new(3 * nt, space.num_free());
            let mut blocks = Vec::with_capacity(nt);
            for (ti, tri) in space.triangles().iter().enumerate() {
                for (l, w) in triangle_order4() {
                    let g = tri.shape_grad(&l);
                    for (p, lp) in l.iter().enumerate() {
                        for a in 0..6 {
                            for c in 0..2 {
                                if let Some(col) = space.free_index(2 * tri.nodes[a] + c) {
                                    t.push(3 * ti + p, col, w * tri.area * lp * g[a][c]);
                                }
                            }
                        }
                    }
                }
                // local mass (|T|/12)(I + J); its inverse root is √(12/|T|)(I − J/6)
                let s = (12.0 / tri.area).sqrt();
                let block = (0..3)
                    .map(|i| {
                        (0..3)
                            .map(|j| s * (f64::from(u8::from(i == j)) - 1.0 / 6.0))
                            .collect()
                    })
                    .collect();
                blocks.push((vec![3 * ti, 3 * ti + 1, 3 * ti + 2], block));
            }
            (t.to_csr(), blocks)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::MechBoundary;

    #[test]
    fn two_by_two_is_positive() {
        let mesh = Mesh::rect(2, 2, 1.0, 1.0).unwrap();
        let space = DisplacementSpace::new(&mesh, MechBoundary::default());
        let est = inf_sup_constant(&mesh, &space, 1.0, 1.0, PressureSpace::CellConstant).unwrap();
        assert!(est.gamma > 1e-3, "{est:?}");
        assert_eq!(est.dropped, 1);
        assert!(est.spectrum_head[0].abs() < 1e-10);
    }
}
