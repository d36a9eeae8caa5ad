use super::params::VanGenuchtenParams;
use crate::error::{Error, Result};

/// Saturation and relative permeability as functions of the water pressure.
///
/// Implementations must give `s = 1`, `κ = 1` for `p ≥ 0`, `s' ≥ 0`, and
/// `κ > 0` everywhere.
pub trait RetentionModel: Send + Sync + std::fmt::Debug {
    fn saturation(&self, p: f64) -> f64;
    /// `ds/dp`, taken from the saturated side at `p = 0`.
    fn saturation_prime(&self, p: f64) -> f64;
    fn rel_perm_at(&self, p: f64) -> f64;
    /// `dκ_rel/dp`
    fn rel_perm_prime_at(&self, p: f64) -> f64;
    /// Pressure magnitude at which desaturation becomes significant.
    fn pressure_scale(&self) -> f64;
}

impl VanGenuchtenParams {
    #[inline]
    fn x(&self, p: f64) -> f64 {
        -self.alpha_vg * p
    }

    /// `1 - (1 + x^{-n})^{-m}`, stable for every `x > 0`.
    #[inline]
    fn mualem_factor(&self, x: f64) -> f64 {
        -(-self.m_vg * x.powf(-self.n_vg).ln_1p()).exp_m1()
    }

    /// Relative permeability from saturation.
    pub fn rel_perm_of_saturation(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain {
                function: "rel_perm",
                value: s,
            });
        }
        if s == 1.0 {
            return Ok(1.0);
        }
        // 1 - s^{1/m} and its m-th power, both via log/expm1
        let one_minus = -(s.ln() / self.m_vg).exp_m1();
        let inner = -(self.m_vg * one_minus.ln()).exp_m1();
        Ok(s.sqrt() * inner * inner)
    }
}

impl RetentionModel for VanGenuchtenParams {
    fn saturation(&self, p: f64) -> f64 {
        if p >= 0.0 {
            return 1.0;
        }
        (-self.m_vg * self.x(p).powf(self.n_vg).ln_1p()).exp()
    }

    fn saturation_prime(&self, p: f64) -> f64 {
        if p >= 0.0 {
            return 0.0;
        }
        let x = self.x(p);
        let (n, m) = (self.n_vg, self.m_vg);
        m * n * self.alpha_vg * x.powf(n - 1.0) * (-(m + 1.0) * x.powf(n).ln_1p()).exp()
    }

    fn rel_perm_at(&self, p: f64) -> f64 {
        if p >= 0.0 {
            return 1.0;
        }
        let g = self.mualem_factor(self.x(p));
        self.saturation(p).sqrt() * g * g
    }

    fn rel_perm_prime_at(&self, p: f64) -> f64 {
        if p >= 0.0 {
            return 0.0;
        }
        let x = self.x(p);
        let (n, m) = (self.n_vg, self.m_vg);
        let s = self.saturation(p);
        let ds = self.saturation_prime(p);
        let g = self.mualem_factor(x);
        let xm = x.powf(-n);
        let dg = self.alpha_vg * m * n * x.powf(-n - 1.0) * (-(m + 1.0) * xm.ln_1p()).exp();
        0.5 * ds / s.sqrt() * g * g + s.sqrt() * 2.0 * g * dg
    }

    fn pressure_scale(&self) -> f64 {
        1.0 / self.alpha_vg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vg() -> VanGenuchtenParams {
        VanGenuchtenParams::new(2.0, 2.5).unwrap()
    }

    #[test]
    fn saturated_branch() {
        let v = vg();
        assert_eq!(v.saturation(5.0), 1.0);
        assert_eq!(v.saturation(0.0), 1.0);
        assert_eq!(v.rel_perm_at(0.0), 1.0);
        assert_eq!(v.rel_perm_of_saturation(1.0).unwrap(), 1.0);
    }

    #[test]
    fn saturation_at_inverse_alpha() {
        let v = vg();
        let s = v.saturation(-1.0 / v.alpha_vg);
        assert!((s - 2f64.powf(-v.m_vg)).abs() < 1e-15);
    }

    #[test]
    fn rel_perm_both_routes_agree() {
        let v = vg();
        for p in [-1e-3, -0.1, -0.5, -3.0, -40.0] {
            let a = v.rel_perm_at(p);
            let b = v.rel_perm_of_saturation(v.saturation(p)).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-15, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn rel_perm_rejects_bad_saturation() {
        let v = vg();
        assert!(v.rel_perm_of_saturation(0.0).is_err());
        assert!(v.rel_perm_of_saturation(1.2).is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        let v = vg();
        for p in [-0.01f64, -0.3, -1.0, -4.0] {
            let h = 1e-6 * p.abs();
            let fd = (v.saturation(p + h) - v.saturation(p - h)) / (2.0 * h);
            assert!((fd - v.saturation_prime(p)).abs() < 1e-6 * fd.abs().max(1e-12));
            let fd = (v.rel_perm_at(p + h) - v.rel_perm_at(p - h)) / (2.0 * h);
            assert!((fd - v.rel_perm_prime_at(p)).abs() < 1e-6 * fd.abs().max(1e-12));
        }
    }
}
