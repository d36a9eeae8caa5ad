use crate::error::{invalid, Result};

/// van Genuchten fitting constants. `m_vg = 1 - 1/n_vg` is derived, never set
/// independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanGenuchtenParams {
    pub alpha_vg: f64,
    pub n_vg: f64,
    pub m_vg: f64,
}

impl VanGenuchtenParams {
    pub fn new(alpha_vg: f64, n_vg: f64) -> Result<Self> {
        if !(alpha_vg.is_finite() && alpha_vg > 0.0) {
            return Err(invalid("alpha_vg", format!("must be > 0, got {alpha_vg}")));
        }
        if !(n_vg.is_finite() && n_vg > 1.0) {
            return Err(invalid("n_vg", format!("must be > 1, got {n_vg}")));
        }
        Ok(Self {
            alpha_vg,
            n_vg,
            m_vg: 1.0 - 1.0 / n_vg,
        })
    }
}

/// Absolute permeability, either uniform or one value per cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Permeability {
    Uniform(f64),
    PerCell(Vec<f64>),
}

impl Permeability {
    pub fn at(&self, cell: usize) -> f64 {
        match self {
            Permeability::Uniform(k) => *k,
            Permeability::PerCell(v) => v[cell],
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Permeability::Uniform(k) => (*k, *k),
            Permeability::PerCell(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                    (lo.min(k), hi.max(k))
                }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaterialParams {
    pub mu: f64,
    pub lambda: f64,
    pub alpha_biot: f64,
    pub c_w: f64,
    /// grain compressibility 1/N
    pub inv_n: f64,
    pub phi0: f64,
    pub kappa_abs: Permeability,
}

impl MaterialParams {
    /// Drained bulk modulus `2μ/d + λ`.
    pub fn k_dr(&self, dim: usize) -> f64 {
        2.0 * self.mu / dim as f64 + self.lambda
    }

    /// Collects every violated invariant instead of stopping at the first.
    pub fn violations(&self) -> Vec<crate::Error> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, name: &'static str, reason: String| {
            if !ok {
                errs.push(invalid(name, reason));
            }
        };
        check(self.mu > 0.0, "mu", format!("must be > 0, got {}", self.mu));
        check(self.lambda >= 0.0, "lambda", format!("must be >= 0, got {}", self.lambda));
        check(
            (0.0..=1.0).contains(&self.alpha_biot),
            "alpha_biot",
            format!("must lie in [0, 1], got {}", self.alpha_biot),
        );
        check(self.c_w >= 0.0, "c_w", format!("must be >= 0, got {}", self.c_w));
        check(self.inv_n >= 0.0, "inv_n", format!("must be >= 0, got {}", self.inv_n));
        check(
            self.phi0 > 0.0 && self.phi0 < 1.0,
            "phi0",
            format!("must lie in (0, 1), got {}", self.phi0),
        );
        let (lo, hi) = self.kappa_abs.bounds();
        check(
            lo > 0.0 && hi.is_finite(),
            "kappa_abs",
            format!("values must be positive and finite, got range [{lo}, {hi}]"),
        );
        errs
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Storage coefficients entering `b`, with `eta` added to `1/N`.
    pub fn storage(&self, eta: f64) -> StorageCoefficients {
        StorageCoefficients {
            phi0: self.phi0,
            c_w: self.c_w,
            inv_n: self.inv_n,
            eta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationParams {
    pub zeta: f64,
    pub eta: f64,
}

impl RegularizationParams {
    pub fn new(zeta: f64, eta: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(invalid("zeta", format!("must be >= 0, got {zeta}")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(invalid("eta", format!("must be >= 0, got {eta}")));
        }
        Ok(Self { zeta, eta })
    }
}

/// The scalars of the storage law
/// `b(p) = φ₀ s + c_w φ₀ ∫s + (1/N + η) ∫s²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StorageCoefficients {
    pub phi0: f64,
    pub c_w: f64,
    pub inv_n: f64,
    pub eta: f64,
}

impl StorageCoefficients {
    pub fn compressibility(&self) -> f64 {
        self.inv_n + self.eta
    }

    /// Lower monotonicity constant of `b̂_η`, attained in the saturated regime.
    pub fn b_chi_m(&self) -> f64 {
        self.phi0 * self.c_w + self.inv_n + self.eta
    }

    #[inline]
    pub fn combine(&self, s: f64, pore: f64, s2: f64) -> f64 {
        self.phi0 * s + self.c_w * self.phi0 * pore + self.compressibility() * s2
    }

    /// Derivative with respect to `p_w`, from `s`, `s'`.
    #[inline]
    pub fn prime(&self, s: f64, ds: f64) -> f64 {
        self.phi0 * ds + self.c_w * self.phi0 * s + self.compressibility() * s * s
    }
}
