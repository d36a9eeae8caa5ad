//! Quantitative checks of the structural and non-degeneracy conditions of
//! the constitutive laws.

use std::sync::Arc;

use crate::constitutive::{
    KirchhoffTable, MaterialParams, RetentionModel, StorageCoefficients, VanGenuchtenParams,
};
use crate::error::{invalid, Error, Result};

/// Where the reference porosity enters the third non-degeneracy criterion.
///
/// Written out for van Genuchten laws the criterion reads
/// `(1−κ)⁻² φ₀ s' κ / s² > α²/(4 K_dr)` in the incompressible case. The
/// tabulated minimal saturations that usually accompany it are reproduced
/// instead when `φ₀` scales the threshold, i.e.
/// `(1−κ)⁻² s' κ / s² > φ₀ α²/(4 K_dr)`. Both are offered; the second is
/// what `check-conditions --table` reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Nd3Scaling {
    /// `φ₀` multiplies the storage derivative.
    Storage,
    /// `φ₀` multiplies the threshold.
    #[default]
    Threshold,
}

impl Nd3Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Nd3Scaling::Storage => "storage",
            Nd3Scaling::Threshold => "threshold",
        }
    }
}

impl std::str::FromStr for Nd3Scaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "storage" => Ok(Nd3Scaling::Storage),
            "threshold" => Ok(Nd3Scaling::Threshold),
            other => Err(invalid(
                "nd3_scaling",
                format!("expected `storage` or `threshold`, got `{other}`"),
            )),
        }
    }
}

/// Scalars entering the third non-degeneracy criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nd3Params {
    pub k_dr: f64,
    pub alpha_biot: f64,
    pub phi0: f64,
    pub c_w: f64,
    pub inv_n: f64,
    pub scaling: Nd3Scaling,
}

impl Nd3Params {
    /// Incompressible setting (`c_w = 1/N = 0`).
    pub fn incompressible(k_dr: f64, alpha_biot: f64, phi0: f64, scaling: Nd3Scaling) -> Self {
        Self {
            k_dr,
            alpha_biot,
            phi0,
            c_w: 0.0,
            inv_n: 0.0,
            scaling,
        }
    }

    pub fn from_material(mat: &MaterialParams, dim: usize, scaling: Nd3Scaling) -> Self {
        Self {
            k_dr: mat.k_dr(dim),
            alpha_biot: mat.alpha_biot,
            phi0: mat.phi0,
            c_w: mat.c_w,
            inv_n: mat.inv_n,
            scaling,
        }
    }

    fn threshold(&self) -> f64 {
        let base = self.alpha_biot * self.alpha_biot / (4.0 * self.k_dr);
        match self.scaling {
            Nd3Scaling::Storage => base,
            Nd3Scaling::Threshold => base * self.phi0 * self.phi0,
        }
    }
}

/// Left-hand side of the criterion at water pressure `p < 0`, minus the
/// threshold. Positive where the condition holds.
pub fn nd3_margin(p: f64, params: &Nd3Params, vg: &VanGenuchtenParams) -> f64 {
    if p >= 0.0 {
        return f64::INFINITY;
    }
    let s = vg.saturation(p);
    let ds = vg.saturation_prime(p);
    let kr = vg.rel_perm_at(p);
    let one_minus = 1.0 - kr;
    let lhs = (params.phi0 * params.c_w * kr / s + params.phi0 * ds * kr / (s * s)
        + params.inv_n * kr)
        / (one_minus * one_minus);
    lhs - params.threshold()
}

/// Result of the minimal-saturation search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Nd3Outcome {
    /// The criterion holds exactly for `s ≥ s_min`.
    Root { s_min: f64, p_star: f64 },
    /// The criterion holds over the whole searched pressure range.
    HoldsEverywhere { s_floor: f64 },
}

const X_SEARCH_MIN: f64 = 1e-12;
const X_SEARCH_MAX: f64 = 1e40;

/// Locates the pressure below which the criterion fails by bisection in
/// `ln(−α_vG p)`, using that the margin increases with `p`.
pub fn nd3_search(params: &Nd3Params, vg: &VanGenuchtenParams) -> Result<Nd3Outcome> {
    if !(params.k_dr > 0.0) {
        return Err(invalid("k_dr", format!("must be > 0, got {}", params.k_dr)));
    }
    let margin = |t: f64| nd3_margin(-t.exp() / vg.alpha_vg, params, vg);
    let (mut lo, mut hi) = (X_SEARCH_MIN.ln(), X_SEARCH_MAX.ln());
    if margin(lo) <= 0.0 {
        return Err(Error::NoRoot(format!(
            "criterion already violated at saturation {}",
            vg.saturation(-X_SEARCH_MIN / vg.alpha_vg)
        )));
    }
    if margin(hi) > 0.0 {
        return Ok(Nd3Outcome::HoldsEverywhere {
            s_floor: vg.saturation(-X_SEARCH_MAX / vg.alpha_vg),
        });
    }
    // 1e-12 relative in p is 1e-12 absolute in ln|p|
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_star = -(0.5 * (lo + hi)).exp() / vg.alpha_vg;
    Ok(Nd3Outcome::Root {
        s_min: vg.saturation(p_star),
        p_star,
    })
}

/// Minimal admissible saturation. Errors with [`Error::NoRoot`] if the
/// criterion holds for every saturation in the search range.
pub fn nd3_smin(params: &Nd3Params, vg: &VanGenuchtenParams) -> Result<f64> {
    match nd3_search(params, vg)? {
        Nd3Outcome::Root { s_min, .. } => Ok(s_min),
        Nd3Outcome::HoldsEverywhere { s_floor } => Err(Error::NoRoot(format!(
            "criterion holds down to saturation {s_floor:e}"
        ))),
    }
}

/// Supremum of a grid search together with its safety-scaled bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridBound {
    pub supremum: f64,
    /// `1.05 · supremum`
    pub bound: f64,
    pub points: usize,
    /// false if refinement kept moving the supremum by more than 0.5%
    pub converged: bool,
}

/// Lower and upper bounds of `p̂_pore' = ŝ/κ̂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridRange {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    pub converged: bool,
}

const GRID_POINTS: usize = 4096;
const GRID_X_MIN: f64 = 1e-6;
const MAX_REFINEMENTS: usize = 6;

/// Capillary pressure `x = −α_vG p` at which `s = s_floor`.
fn x_at_saturation(vg: &VanGenuchtenParams, s_floor: f64) -> f64 {
    ((s_floor.powf(-1.0 / vg.m_vg)) - 1.0).powf(1.0 / vg.n_vg)
}

fn check_floor(s_floor: f64) -> Result<()> {
    if !(s_floor > 0.0 && s_floor <= 1.0) {
        return Err(invalid("s_floor", format!("must lie in (0, 1], got {s_floor}")));
    }
    Ok(())
}

/// Grid of water pressures log-spaced in capillary pressure between the
/// near-saturated end and the saturation floor, plus `p = 1` for the
/// saturated branch.
fn pressure_grid(vg: &VanGenuchtenParams, s_floor: f64, points: usize) -> Vec<f64> {
    let mut grid = vec![1.0];
    if s_floor >= 1.0 {
        return grid;
    }
    let x_max = x_at_saturation(vg, s_floor);
    if x_max <= GRID_X_MIN {
        grid.push(-x_max / vg.alpha_vg);
        return grid;
    }
    let step = (x_max / GRID_X_MIN).ln() / (points - 1) as f64;
    grid.extend((0..points).map(|i| {
        let x = if i + 1 == points {
            x_max
        } else {
            GRID_X_MIN * (step * i as f64).exp()
        };
        -x / vg.alpha_vg
    }));
    grid
}

fn refine_until_stable<F>(mut eval: F) -> (f64, f64, usize, bool)
where
    F: FnMut(usize) -> (f64, f64),
{
    let mut points = GRID_POINTS;
    let (mut lo, mut hi) = eval(points);
    for _ in 0..MAX_REFINEMENTS {
        points *= 2;
        let (l2, h2) = eval(points);
        let stable = ((h2 - hi) / hi).abs() < 5e-3 && ((l2 - lo) / lo).abs() < 5e-3;
        lo = l2;
        hi = h2;
        if stable {
            return (lo, hi, points, true);
        }
    }
    (lo, hi, points, false)
}

/// Bound on `|p̂_pore / (ŝ χ)|` for saturations at or above `s_floor`.
pub fn nd1_bound(vg: &VanGenuchtenParams, s_floor: f64) -> Result<GridBound> {
    check_floor(s_floor)?;
    let table = KirchhoffTable::new(Arc::new(*vg));
    Ok(nd1_bound_with(&table, vg, s_floor))
}

fn nd1_bound_with(table: &KirchhoffTable, vg: &VanGenuchtenParams, s_floor: f64) -> GridBound {
    let ratio = |p: f64| {
        let prim = table.primary(p);
        (prim[0] / (vg.saturation(p) * prim[1])).abs()
    };
    let (_, sup, points, converged) = refine_until_stable(|n| {
        let sup = pressure_grid(vg, s_floor, n)
            .into_iter()
            .map(ratio)
            .fold(0.0f64, f64::max);
        (1.0, sup)
    });
    GridBound {
        supremum: sup,
        bound: 1.05 * sup,
        points,
        converged,
    }
}

/// Range of `ŝ/κ̂` for saturations at or above `s_floor`.
pub fn nd2_bounds(vg: &VanGenuchtenParams, s_floor: f64) -> Result<GridRange> {
    check_floor(s_floor)?;
    let ratio = |p: f64| vg.saturation(p) / vg.rel_perm_at(p);
    let (lower, upper, points, converged) = refine_until_stable(|n| {
        pressure_grid(vg, s_floor, n)
            .into_iter()
            .map(ratio)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)))
    });
    Ok(GridRange {
        lower,
        upper,
        points,
        converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub nd1_bound: GridBound,
    pub nd2_bounds: GridRange,
    pub nd3: Nd3Outcome,
    pub nd3_scaling: Nd3Scaling,
    /// Monotonicity constant `φ₀ c_w + 1/N + η`.
    pub a1star_constant: f64,
    /// Tested saturation range `(s_floor, 1]`.
    pub range: (f64, f64),
}

impl ConditionReport {
    pub fn nd3_smin(&self) -> Option<f64> {
        match self.nd3 {
            Nd3Outcome::Root { s_min, .. } => Some(s_min),
            Nd3Outcome::HoldsEverywhere { .. } => None,
        }
    }

    /// True when the third criterion holds on the whole tested range.
    pub fn nd3_holds_on_range(&self) -> bool {
        self.nd3_smin().is_none_or(|s| s <= self.range.0)
    }
}

pub fn check_report(
    mat: &MaterialParams,
    vg: &VanGenuchtenParams,
    eta: f64,
    s_floor: f64,
    dim: usize,
    scaling: Nd3Scaling,
) -> Result<ConditionReport> {
    check_floor(s_floor)?;
    let table = KirchhoffTable::new(Arc::new(*vg));
    let storage: StorageCoefficients = mat.storage(eta);
    Ok(ConditionReport {
        nd1_bound: nd1_bound_with(&table, vg, s_floor),
        nd2_bounds: nd2_bounds(vg, s_floor)?,
        nd3: nd3_search(&Nd3Params::from_material(mat, dim, scaling), vg)?,
        nd3_scaling: scaling,
        a1star_constant: storage.b_chi_m(),
        range: (s_floor, 1.0),
    })
}

/// One row of the minimal-saturation table: `(α_vG, n_vG)` and `s_min` for
/// each stiffness in [`SMIN_TABLE_STIFFNESS`].
#[derive(Clone, Debug, PartialEq)]
pub struct SminRow {
    pub alpha_vg: f64,
    pub n_vg: f64,
    pub s_min: [f64; 3],
}

pub const SMIN_TABLE_STIFFNESS: [f64; 3] = [1e5, 1e8, 1e11];
pub const SMIN_TABLE_VG: [(f64, f64); 6] = [
    (0.1, 1.5),
    (2.0, 1.5),
    (0.1, 2.0),
    (2.0, 2.0),
    (0.1, 2.5),
    (2.0, 2.5),
];

/// Minimal saturations for the standard grid of van Genuchten parameters and
/// drained stiffnesses, incompressible fluid and grains.
pub fn smin_table(phi0: f64, alpha_biot: f64, scaling: Nd3Scaling) -> Result<Vec<SminRow>> {
    SMIN_TABLE_VG
        .iter()
        .map(|&(a, n)| {
            let vg = VanGenuchtenParams::new(a, n)?;
            let mut s_min = [0.0; 3];
            for (slot, &k) in s_min.iter_mut().zip(&SMIN_TABLE_STIFFNESS) {
                *slot = nd3_smin(&Nd3Params::incompressible(k, alpha_biot, phi0, scaling), &vg)?;
            }
            Ok(SminRow {
                alpha_vg: a,
                n_vg: n,
                s_min,
            })
        })
        .collect()
}

/// Rounds to two decimals, or to one significant digit below 0.01.
pub fn display_round(v: f64) -> f64 {
    if v >= 0.01 {
        (v * 100.0).round() / 100.0
    } else {
        let scale = 10f64.powi(-(v.log10().floor() as i32));
        (v * scale).round() / scale
    }
}
