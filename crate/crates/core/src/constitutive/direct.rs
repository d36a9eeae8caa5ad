//! Reference evaluations by adaptive quadrature from zero on every call.
//!
//! Slow but table-free; [`super::Constitutive`] is the fast path used by
//! the solver.

use super::params::{MaterialParams, VanGenuchtenParams};
use super::van_genuchten::RetentionModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_scalar, Tolerance};

pub fn saturation(p_w: f64, vg: &VanGenuchtenParams) -> f64 {
    vg.saturation(p_w)
}

pub fn rel_perm(s: f64, vg: &VanGenuchtenParams) -> Result<f64> {
    vg.rel_perm_of_saturation(s)
}

/// `∫₀^p f` for `p < 0`: linear up to the capillary scale, then in `ln|q|`
/// so that power-law tails over many decades stay resolved.
fn integrate_negative<const N: usize, F>(f: F, p: f64, vg: &VanGenuchtenParams) -> [f64; N]
where
    F: Fn(f64) -> [f64; N],
{
    let knee = -1.0 / vg.alpha_vg;
    let tol = Tolerance::default();
    let mut out = integrate(&f, 0.0, p.max(knee), tol).value;
    if p < knee {
        let tail = integrate(
            |t| {
                let q = -t.exp();
                f(q).map(|v| -v * t.exp())
            },
            (-knee).ln(),
            (-p).ln(),
            tol,
        );
        for (o, v) in out.iter_mut().zip(tail.value) {
            *o += v;
        }
    }
    out
}

pub fn pore_pressure(p_w: f64, vg: &VanGenuchtenParams) -> f64 {
    if p_w >= 0.0 {
        return p_w;
    }
    integrate_negative(|q| [vg.saturation(q)], p_w, vg)[0]
}

pub fn kirchhoff(p_w: f64, vg: &VanGenuchtenParams) -> f64 {
    if p_w >= 0.0 {
        return p_w;
    }
    integrate_negative(|q| [vg.rel_perm_at(q)], p_w, vg)[0]
}

/// Inverse Kirchhoff transform: bracket `[C·χ, χ]` grown until it encloses
/// the root, then bisection with Newton polish.
pub fn kirchhoff_inverse(chi: f64, vg: &VanGenuchtenParams) -> Result<f64> {
    if chi >= 0.0 {
        return Ok(chi);
    }
    // |χ(p)| ≤ |p|, so the root lies below χ itself
    let mut hi = chi;
    let mut lo = 2.0 * chi;
    let mut expansions = 0;
    while kirchhoff(lo, vg) > chi {
        hi = lo;
        lo *= 4.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::KirchhoffInverse {
                chi,
                reason: "root bracket expansion did not converge".into(),
            });
        }
    }
    let mut p = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = kirchhoff(p, vg) - chi;
        if f.abs() <= 1e-14 * chi.abs() {
            break;
        }
        if f > 0.0 {
            hi = p;
        } else {
            lo = p;
        }
        let slope = vg.rel_perm_at(p);
        let newton = p - f / slope;
        p = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * p.abs() {
            break;
        }
    }
    Ok(p)
}

/// `b(p) = φ₀ s + c_w φ₀ ∫₀^p s + (1/N + η) ∫₀^p s²`
pub fn storage_b(p_w: f64, mat: &MaterialParams, vg: &VanGenuchtenParams, eta: f64) -> f64 {
    let st = mat.storage(eta);
    let [pore, s2] = if p_w >= 0.0 {
        [p_w, p_w]
    } else {
        integrate_negative(
            |q| {
                let s = vg.saturation(q);
                [s, s * s]
            },
            p_w,
            vg,
        )
    };
    st.combine(vg.saturation(p_w), pore, s2)
}

pub fn s_hat(chi: f64, vg: &VanGenuchtenParams) -> Result<f64> {
    Ok(vg.saturation(kirchhoff_inverse(chi, vg)?))
}

pub fn p_pore_hat(chi: f64, vg: &VanGenuchtenParams) -> Result<f64> {
    Ok(pore_pressure(kirchhoff_inverse(chi, vg)?, vg))
}

pub fn k_rel_hat(chi: f64, vg: &VanGenuchtenParams) -> Result<f64> {
    Ok(vg.rel_perm_at(kirchhoff_inverse(chi, vg)?))
}

pub fn b_hat_eta(chi: f64, mat: &MaterialParams, vg: &VanGenuchtenParams, eta: f64) -> Result<f64> {
    Ok(storage_b(kirchhoff_inverse(chi, vg)?, mat, vg, eta))
}

/// `b̂_η' = (c_w φ₀ ŝ + φ₀ s' + (1/N + η) ŝ²) / κ̂`
pub fn b_hat_eta_prime(
    chi: f64,
    mat: &MaterialParams,
    vg: &VanGenuchtenParams,
    eta: f64,
) -> Result<f64> {
    let p = kirchhoff_inverse(chi, vg)?;
    let st = mat.storage(eta);
    Ok(st.prime(vg.saturation(p), vg.saturation_prime(p)) / vg.rel_perm_at(p))
}

/// Legendre transform `B(z) = ∫₀^z (b(z) − b(s)) ds` of a non-decreasing `b`.
pub fn legendre_b<F: Fn(f64) -> f64>(z: f64, b: F) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let bz = b(z);
    integrate_scalar(|s| bz - b(s), 0.0, z, Tolerance::default())
}
