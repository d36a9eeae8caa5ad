use std::sync::OnceLock;

use kirchpore::constitutive::direct;
use kirchpore::{Constitutive, MaterialParams, Permeability, VanGenuchtenParams};
use proptest::prelude::*;

const CASES: u32 = 256;

/// The six retention curves of the minimal-saturation study, compressible
/// storage with `η > 0` so the growth constant is positive.
fn laws() -> &'static [Constitutive] {
    static LAWS: OnceLock<Vec<Constitutive>> = OnceLock::new();
    LAWS.get_or_init(|| {
        let mat = material();
        [(0.1, 1.5), (2.0, 1.5), (0.1, 2.0), (2.0, 2.0), (0.1, 2.5), (2.0, 2.5)]
            .iter()
            .map(|&(a, n)| {
                let vg = VanGenuchtenParams::new(a, n).unwrap();
                Constitutive::van_genuchten(vg, mat.storage(1e-3))
            })
            .collect()
    })
}

fn material() -> MaterialParams {
    MaterialParams {
        mu: 1.0,
        lambda: 1.0,
        alpha_biot: 1.0,
        c_w: 0.3,
        inv_n: 0.05,
        phi0: 0.2,
        kappa_abs: Permeability::Uniform(1.0),
    }
}

/// Kirchhoff pressure of a random pressure in `[-50, 50]`.
fn chi_of(law: &Constitutive, p: f64) -> f64 {
    law.kirchhoff(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn saturation_and_kirchhoff_are_monotone(
        idx in 0usize..6,
        p1 in -50.0f64..50.0,
        gap in 1e-12f64..10.0,
    ) {
        let law = &laws()[idx];
        let p2 = p1 + gap;
        prop_assert!(law.saturation(p1) <= law.saturation(p2));
        let (c1, c2) = (law.kirchhoff(p1), law.kirchhoff(p2));
        prop_assert!(c2 >= c1);
        // strict wherever the increment is resolvable in double precision
        let resolvable = law.rel_perm(p1) * gap > 64.0 * f64::EPSILON * (1.0 + c1.abs());
        if resolvable {
            prop_assert!(c2 > c1, "chi({p1}) = {c1}, chi({p2}) = {c2}");
        }
    }

    #[test]
    fn pore_over_saturation_grows_at_least_linearly(
        idx in 0usize..6,
        p1 in -50.0f64..50.0,
        p2 in -50.0f64..50.0,
    ) {
        let law = &laws()[idx];
        let (c1, c2) = (chi_of(law, p1), chi_of(law, p2));
        prop_assume!((c1 - c2).abs() > 1e-6);
        let g1 = law.at_chi(c1).unwrap().pore_over_s();
        let g2 = law.at_chi(c2).unwrap().pore_over_s();
        let slope = (g2 - g1) / (c2 - c1);
        prop_assert!(slope >= 1.0 - 1e-6, "slope {slope} between chi {c1} and {c2}");
    }

    #[test]
    fn storage_is_uniformly_monotone(
        idx in 0usize..6,
        p1 in -50.0f64..50.0,
        p2 in -50.0f64..50.0,
    ) {
        let law = &laws()[idx];
        let (c1, c2) = (chi_of(law, p1), chi_of(law, p2));
        let b1 = law.at_chi(c1).unwrap().b;
        let b2 = law.at_chi(c2).unwrap().b;
        let m = law.storage().b_chi_m();
        let lhs = (b1 - b2) * (c1 - c2);
        let rhs = m * (c1 - c2).powi(2);
        prop_assert!(m >= 0.0);
        prop_assert!(lhs >= rhs - 1e-12 * (1.0 + rhs.abs()), "{lhs} < {rhs}");
    }

    #[test]
    fn legendre_inequalities(
        idx in 0usize..6,
        px in -50.0f64..50.0,
        py in -50.0f64..50.0,
    ) {
        let law = &laws()[idx];
        let (x, y) = (chi_of(law, px), chi_of(law, py));
        let bx = law.legendre_b_hat(x).unwrap();
        let by = law.legendre_b_hat(y).unwrap();
        prop_assert!(bx >= 0.0);
        let gap = (law.at_chi(x).unwrap().b - law.at_chi(y).unwrap().b) * x;
        prop_assert!(bx - by <= gap + 1e-10 * (1.0 + gap.abs()), "{} > {}", bx - by, gap);
        let bar = law.legendre_b_bar(x).unwrap();
        prop_assert!(bar >= 0.0);
    }

    #[test]
    fn kirchhoff_round_trip(idx in 0usize..6, p in -50.0f64..50.0) {
        let law = &laws()[idx];
        let chi = law.kirchhoff(p);
        let back = law.kirchhoff_inverse(chi).unwrap();
        // the inverse is only as well conditioned as 1/k(p); compare in chi
        // and require pressure accuracy where the slope is not degenerate
        prop_assert!((law.kirchhoff(back) - chi).abs() <= 1e-12 * (1.0 + chi.abs()));
        if law.rel_perm(p) >= 1e-4 {
            prop_assert!((back - p).abs() <= 1e-8 * p.abs().max(1.0), "{p} -> {back}");
        }
    }

    #[test]
    fn storage_derivative_matches_differences(
        idx in 0usize..6,
        p in prop_oneof![-20.0f64..-1e-2, 1e-2f64..20.0],
    ) {
        let law = &laws()[idx];
        let chi = law.kirchhoff(p);
        prop_assume!(chi.abs() >= 1e-3);
        // stencil in pressure, where the map is smooth even near the lower
        // end of the Kirchhoff range
        let dp = 1e-5 * p.abs().max(1.0);
        let (cm, cp) = (law.kirchhoff(p - dp), law.kirchhoff(p + dp));
        prop_assume!(cp - cm > 1e-9 * (1.0 + chi.abs()));
        let fd = (law.at_chi(cp).unwrap().b - law.at_chi(cm).unwrap().b) / (cp - cm);
        let exact = law.at_chi(chi).unwrap().b_prime;
        prop_assert!(exact >= 0.0);
        prop_assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1e-8), "fd {fd} vs {exact} at chi {chi}");
    }

    #[test]
    fn table_agrees_with_direct_evaluation(p in -20.0f64..5.0) {
        let vg = VanGenuchtenParams::new(2.0, 2.0).unwrap();
        let law = &laws()[3];
        let a = law.kirchhoff(p);
        let b = direct::kirchhoff(p, &vg);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        let a = law.pore_pressure(p);
        let b = direct::pore_pressure(p, &vg);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
    }
}

#[test]
fn growth_constant_matches_closed_form() {
    let mat = material();
    let st = mat.storage(0.02);
    assert_eq!(st.b_chi_m(), mat.phi0 * mat.c_w + mat.inv_n + 0.02);
    // in the saturated regime the derivative equals the growth constant
    let law = &laws()[3].with_storage(st);
    let pt = law.at_chi(1.5).unwrap();
    assert!((pt.b_prime - st.b_chi_m()).abs() < 1e-14);
}
