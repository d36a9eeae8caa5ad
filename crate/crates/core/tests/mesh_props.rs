use kirchpore::mesh::{FaceKind, FlowBc, FlowBoundary, Mesh, DIM};
use proptest::prelude::*;

const CASES: u32 = 256;

fn coords(steps: Vec<f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    for s in steps {
        out.push(out.last().unwrap() + s);
    }
    out
}

fn tensor_mesh() -> impl Strategy<Value = Mesh> {
    (
        prop::collection::vec(0.05f64..1.0, 1..7),
        prop::collection::vec(0.05f64..1.0, 1..7),
    )
        .prop_map(|(dx, dy)| Mesh::tensor(coords(dx), coords(dy)).unwrap())
}

fn flow_bc() -> impl Strategy<Value = FlowBoundary> {
    let bc = prop_oneof![Just(FlowBc::Dirichlet), Just(FlowBc::Neumann)];
    (bc.clone(), bc.clone(), bc.clone(), bc).prop_map(|(left, right, bottom, top)| FlowBoundary {
        left,
        right,
        bottom,
        top,
    })
}

/// A mesh with a random flow boundary and two cell fields on it.
fn mesh_and_fields() -> impl Strategy<Value = (Mesh, Vec<f64>, Vec<f64>)> {
    (tensor_mesh(), flow_bc()).prop_flat_map(|(m, bc)| {
        let n = m.num_cells();
        let m = m.with_flow_boundary(bc);
        (
            Just(m),
            prop::collection::vec(-2.0f64..2.0, n),
            prop::collection::vec(0.1f64..3.0, n),
        )
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn dual_cells_partition_the_domain(m in tensor_mesh()) {
        let total: f64 = m.faces().iter().map(|f| f.dual_volume).sum();
        prop_assert!(close(total, m.area(), 1e-12));
        for f in m.faces() {
            prop_assert!(close(f.dual_volume, f.measure * f.distance / DIM as f64, 1e-12));
        }
        // Σ_{σ∈E_K} |σ| d_{K,σ} = d |K|
        for (k, c) in m.cells().iter().enumerate() {
            let s: f64 = m
                .cell_faces(k)
                .iter()
                .map(|&i| {
                    let f = &m.faces()[i];
                    let d = match f.kind {
                        FaceKind::Interior { l, .. } if l == k => f.sub_distances[1],
                        _ => f.sub_distances[0],
                    };
                    f.measure * d
                })
                .sum();
            prop_assert!(close(s, DIM as f64 * c.measure, 1e-12));
        }
    }

    #[test]
    fn faces_are_orthogonal_to_center_links(m in tensor_mesh()) {
        for f in m.faces() {
            prop_assert!(close(f.normal[0].hypot(f.normal[1]), 1.0, 1e-14));
            prop_assert!(close(f.transmissibility, f.measure / f.distance, 1e-14));
            let (a, b) = match f.kind {
                FaceKind::Interior { k, l } => (m.cells()[k].center, m.cells()[l].center),
                FaceKind::Boundary { k, .. } => (m.cells()[k].center, f.center),
            };
            let link = [b[0] - a[0], b[1] - a[1]];
            // parallel to the normal, same orientation, length d_σ
            let cross = link[0] * f.normal[1] - link[1] * f.normal[0];
            let along = link[0] * f.normal[0] + link[1] * f.normal[1];
            prop_assert!(cross.abs() <= 1e-12);
            prop_assert!(close(along, f.distance, 1e-12));
            prop_assert!(close(f.sub_distances[0] + f.sub_distances[1], f.distance, 1e-12));
        }
        let reg = m.regularity();
        prop_assert!(reg.is_finite() && reg >= DIM as f64);
    }

    #[test]
    fn gradient_norm_is_d_times_h1_seminorm((m, q, _) in mesh_and_fields()) {
        let g = m.discrete_gradient(&q);
        let lhs: f64 = m
            .faces()
            .iter()
            .zip(&g)
            .map(|(f, v)| f.dual_volume * (v[0] * v[0] + v[1] * v[1]))
            .sum();
        prop_assert!(close(lhs, DIM as f64 * m.discrete_h1_norm_sq(&q), 1e-12));
    }

    #[test]
    fn tpfa_rows_sum_outgoing_fluxes((m, q, w) in mesh_and_fields()) {
        let t = m.tpfa_matrix(&w).to_csr();
        prop_assert!(t.asymmetry() <= 1e-14 * t.max_abs().max(1.0));
        let tq = t.mul_vec(&q);
        let mut out = vec![0.0; m.num_cells()];
        let mut boundary = 0.0;
        for f in m.faces() {
            let flux = m.tpfa_flux(&q, &w, f);
            match f.kind {
                FaceKind::Interior { k, l } => {
                    out[k] += flux;
                    out[l] -= flux;
                }
                FaceKind::Boundary { k, .. } => {
                    out[k] += flux;
                    boundary += flux;
                }
            }
        }
        for (a, b) in tq.iter().zip(&out) {
            prop_assert!(close(*a, *b, 1e-12), "{a} vs {b}");
        }
        // interior fluxes cancel: the total is what leaves through Γ_D
        let total: f64 = tq.iter().sum();
        prop_assert!(close(total, boundary, 1e-11));
    }

    #[test]
    fn tpfa_energy_matches_face_sum((m, q, w) in mesh_and_fields()) {
        let t = m.tpfa_matrix(&w).to_csr();
        let ones = vec![1.0; m.num_cells()];
        let t1 = m.tpfa_matrix(&ones).to_csr();
        prop_assert!(close(t1.bilinear(&q, &q), m.discrete_h1_norm_sq(&q), 1e-12));
        let p: Vec<f64> = q.iter().map(|v| v * v - 0.5).collect();
        let inner = m.weighted_grad_inner(&q, &p, &w).unwrap();
        prop_assert!(close(t.bilinear(&p, &q), inner, 1e-12));
        prop_assert!(t.bilinear(&q, &q) >= -1e-14);
    }

    #[test]
    fn discrete_poincare_with_diameter(
        (m, q, _) in mesh_and_fields(),
    ) {
        let m = m.with_flow_boundary(FlowBoundary::all(FlowBc::Dirichlet));
        let lhs = m.l2_norm(&q);
        prop_assert!(lhs <= m.diameter() * m.discrete_h1_norm(&q) * (1.0 + 1e-12));
    }
}

#[test]
fn poincare_constant_on_a_fine_grid() {
    // the extremal field is close to the first Dirichlet eigenfunction
    let m = Mesh::rect(16, 16, 1.0, 1.0).unwrap();
    let q = m.cell_average(|x, y| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin());
    let ratio = m.l2_norm(&q) / m.discrete_h1_norm(&q);
    // continuous value 1/(π√2) ≈ 0.225
    assert!((ratio - 0.225).abs() < 0.01, "{ratio}");
    assert!(ratio <= m.diameter());
}
