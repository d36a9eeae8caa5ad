use kirchpore::elasticity::{
    assemble_div_coupling, assemble_elastic, boundary_flux, div_l2_sq, eval_on_triangle, DisplacementSpace,
    MechBoundary, MechSide,
};
use kirchpore::mesh::{Mesh, Side};
use kirchpore::quadrature::triangle_order4;
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
        prop::collection::vec(0.1f64..1.0, 1..4),
        prop::collection::vec(0.1f64..1.0, 1..4),
    )
        .prop_map(|(dx, dy)| Mesh::tensor(coords(dx), coords(dy)).unwrap())
}

fn moduli() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..10.0, 0.0f64..50.0)
}

fn field(space: &DisplacementSpace) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, space.num_free())
}

fn grad_l2_sq(space: &DisplacementSpace, v: &[f64]) -> f64 {
    let full = space.expand(v);
    space
        .triangles()
        .iter()
        .map(|t| {
            triangle_order4()
                .iter()
                .map(|(l, w)| {
                    let (_, g) = eval_on_triangle(&full, t, l);
                    w * t.area * g.iter().flatten().map(|x| x * x).sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum()
}

fn clamped() -> impl Strategy<Value = (DisplacementSpace, Vec<f64>, (f64, f64))> {
    (tensor_mesh(), moduli()).prop_flat_map(|(m, mods)| {
        let space = DisplacementSpace::new(&m, MechBoundary::default());
        let v = field(&space);
        (Just(space), v, Just(mods))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn stiffness_is_symmetric_positive((space, v, (mu, lambda)) in clamped()) {
        let a = assemble_elastic(&space, mu, lambda).unwrap();
        prop_assert!(a.matrix.asymmetry() <= 1e-12 * a.matrix.max_abs());
        let e = a.energy_sq(&v);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        prop_assert!(e > 0.0 || vv == 0.0);
    }

    #[test]
    fn energy_controls_divergence_and_gradient((space, v, (mu, lambda)) in clamped()) {
        let a = assemble_elastic(&space, mu, lambda).unwrap();
        let e = a.energy_sq(&v);
        // drained bulk modulus 2μ/d + λ in two dimensions
        let k_dr = mu + lambda;
        let div = div_l2_sq(&space, &v);
        prop_assert!(e >= k_dr * div * (1.0 - 1e-10), "{e} < {}", k_dr * div);
        // first Korn inequality on H¹₀: 2‖ε(v)‖² ≥ ‖∇v‖²
        let grad = grad_l2_sq(&space, &v);
        prop_assert!(e >= mu * grad * (1.0 - 1e-10), "{e} < {}", mu * grad);
    }

    #[test]
    fn divergence_integrates_to_boundary_flux(
        (space, v) in tensor_mesh().prop_flat_map(|m| {
            let space = DisplacementSpace::new(&m, MechBoundary::all(MechSide::FREE));
            let v = field(&space);
            (Just((m, space)), v)
        })
    ) {
        let (m, space) = space;
        let b = assemble_div_coupling(&m, &space);
        let total: f64 = b.mul_vec(&v).iter().sum();
        let flux = boundary_flux(&space, &space.expand(&v));
        prop_assert!((total - flux).abs() <= 1e-11 * (1.0 + flux.abs()), "{total} vs {flux}");
    }
}

#[test]
fn rigid_motions_are_rejected() {
    let m = Mesh::rect(2, 2, 1.0, 1.0).unwrap();
    let free = DisplacementSpace::new(&m, MechBoundary::all(MechSide::FREE));
    assert!(assemble_elastic(&free, 1.0, 1.0).is_err());
    let rollers = MechBoundary {
        left: MechSide::roller(Side::Left),
        right: MechSide::roller(Side::Right),
        bottom: MechSide::FREE,
        top: MechSide::FREE,
    };
    // vertical translation remains
    assert!(assemble_elastic(&DisplacementSpace::new(&m, rollers), 1.0, 1.0).is_err());
}

#[test]
fn linear_fields_have_exact_energy() {
    // u = (x, 0): ε = diag(1, 0), a(u, u) = (2μ + λ)|Ω|
    let m = Mesh::rect(3, 2, 2.0, 1.0).unwrap();
    let bc = MechBoundary {
        left: MechSide::roller(Side::Left),
        right: MechSide::FREE,
        bottom: MechSide::roller(Side::Bottom),
        top: MechSide::FREE,
    };
    let space = DisplacementSpace::new(&m, bc);
    let a = assemble_elastic(&space, 1.5, 2.0).unwrap();
    let free = space.interpolate(|x, _| [x, 0.0]);
    assert!((a.energy_sq(&free) - 5.0 * 2.0).abs() < 1e-10);
}
