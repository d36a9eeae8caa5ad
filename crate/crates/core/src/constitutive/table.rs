//! Tabulated constitutive law.
//!
//! All pressure integrals are cumulative from `p = 0`. Nodes are placed
//! geometrically in capillary pressure; between nodes a single Gauss–Kronrod
//! panel starting from the nearest node closes the gap, so one evaluation
//! costs fifteen constitutive calls instead of a full adaptive integration.

use std::sync::Arc;

use super::params::{StorageCoefficients, VanGenuchtenParams};
use super::van_genuchten::RetentionModel;
use crate::error::{Error, Result};
use crate::quadrature::{gk15, integrate, Tolerance};

const NODES: usize = 2048;
const X_FIRST: f64 = 1e-8;
const X_LAST: f64 = 1e10;

/// Primary integrals `[∫s, ∫κ, ∫s²]`.
type Primary = [f64; 3];
/// Moments `∫χ b'`-style: `[∫χs', ∫χs, ∫χs², ∫ys', ∫ys, ∫ys²]`, `y = p_pore/s`.
type Secondary = [f64; 6];

#[derive(Clone, Copy, Debug)]
struct Node {
    p: f64,
    prim: Primary,
    sec: Secondary,
}

/// Cumulative integral tables of a retention model. Immutable after
/// construction and shared between [`Constitutive`] instances.
#[derive(Debug)]
pub struct KirchhoffTable {
    retention: Arc<dyn RetentionModel>,
    scale: f64,
    log_ratio: f64,
    /// `nodes[0]` is `p = 0`; pressures decrease with the index.
    nodes: Vec<Node>,
}

impl KirchhoffTable {
    pub fn new(retention: Arc<dyn RetentionModel>) -> Self {
        let scale = retention.pressure_scale();
        let log_ratio = (X_LAST / X_FIRST).ln() / (NODES - 1) as f64;
        let mut table = Self {
            retention,
            scale,
            log_ratio,
            nodes: Vec::with_capacity(NODES + 1),
        };
        table.nodes.push(Node {
            p: 0.0,
            prim: [0.0; 3],
            sec: [0.0; 6],
        });
        for i in 0..NODES {
            let p = -scale * X_FIRST * (log_ratio * i as f64).exp();
            let prev = *table.nodes.last().unwrap();
            let (prim, sec) = table.panel(&prev, p);
            table.nodes.push(Node { p, prim, sec });
        }
        table
    }

    pub fn retention(&self) -> &dyn RetentionModel {
        self.retention.as_ref()
    }

    fn primary_integrand(&self, q: f64) -> Primary {
        let s = self.retention.saturation(q);
        [s, self.retention.rel_perm_at(q), s * s]
    }

    /// Integrals from `node.p` to `p` added to the node values.
    fn panel_primary(&self, node: &Node, p: f64) -> Primary {
        let (v, _) = gk15(&|q| self.primary_integrand(q), node.p, p);
        [node.prim[0] + v[0], node.prim[1] + v[1], node.prim[2] + v[2]]
    }

    fn panel(&self, node: &Node, p: f64) -> (Primary, Secondary) {
        let prim = self.panel_primary(node, p);
        let (v, _) = gk15(
            &|q: f64| {
                let inner = self.panel_primary(node, q);
                let s = self.retention.saturation(q);
                let ds = self.retention.saturation_prime(q);
                let chi = inner[1];
                let y = inner[0] / s;
                [chi * ds, chi * s, chi * s * s, y * ds, y * s, y * s * s]
            },
            node.p,
            p,
        );
        let mut sec = node.sec;
        for (a, b) in sec.iter_mut().zip(v) {
            *a += b;
        }
        (prim, sec)
    }

    /// Index of the node at or above `p` (closest to zero), for `p < 0`.
    fn node_above(&self, p: f64) -> usize {
        let x = -p / self.scale;
        if x < X_FIRST {
            return 0;
        }
        let mut i = ((x / X_FIRST).ln() / self.log_ratio).floor() as usize + 1;
        i = i.min(self.nodes.len() - 1);
        while i > 0 && self.nodes[i].p < p {
            i -= 1;
        }
        while i + 1 < self.nodes.len() && self.nodes[i + 1].p >= p {
            i += 1;
        }
        i
    }

    fn beyond_last(&self, p: f64) -> bool {
        p < self.nodes.last().unwrap().p
    }

    /// `[p_pore, χ, ∫s²]` at `p`.
    pub fn primary(&self, p: f64) -> Primary {
        if p >= 0.0 {
            return [p, p, p];
        }
        let last = self.nodes.last().unwrap();
        if self.beyond_last(p) {
            let r = integrate(|q| self.primary_integrand(q), last.p, p, Tolerance::default());
            return [last.prim[0] + r.value[0], last.prim[1] + r.value[1], last.prim[2] + r.value[2]];
        }
        let node = &self.nodes[self.node_above(p)];
        self.panel_primary(node, p)
    }

    /// Legendre moments at `p`.
    pub fn secondary(&self, p: f64) -> Secondary {
        if p >= 0.0 {
            let h = 0.5 * p * p;
            return [0.0, h, h, 0.0, h, h];
        }
        if self.beyond_last(p) {
            // geometric sub-panels keep the nested rule accurate on the tail
            let mut node = *self.nodes.last().unwrap();
            let ratio = self.log_ratio.exp();
            while node.p * ratio > p {
                let q = node.p * ratio;
                let (prim, sec) = self.panel(&node, q);
                node = Node { p: q, prim, sec };
            }
            return self.panel(&node, p).1;
        }
        let node = &self.nodes[self.node_above(p)];
        self.panel(node, p).1
    }

    /// Smallest tabulated Kirchhoff pressure. Below it the inverse falls back
    /// to bracket expansion.
    pub fn chi_tabulated_floor(&self) -> f64 {
        self.nodes.last().unwrap().prim[1]
    }

    pub fn kirchhoff(&self, p: f64) -> f64 {
        self.primary(p)[1]
    }

    /// Inverse Kirchhoff transform by bracketed Newton iteration.
    pub fn kirchhoff_inverse(&self, chi: f64) -> Result<f64> {
        if chi >= 0.0 {
            return Ok(chi);
        }
        if !chi.is_finite() {
            return Err(Error::KirchhoffInverse {
                chi,
                reason: "non-finite argument".into(),
            });
        }
        let (mut lo, mut hi) = self.bracket(chi)?;
        // f(p) = χ(p) − chi is increasing; f(lo) ≤ 0 ≤ f(hi)
        let mut p = lo + (hi - lo) * 0.5;
        let tol_chi = 1e-15 * chi.abs().max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            let f = self.kirchhoff(p) - chi;
            if f.abs() <= tol_chi {
                return Ok(p);
            }
            if f > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let slope = self.retention.rel_perm_at(p);
            let newton = p - f / slope;
            p = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) <= 4.0 * f64::EPSILON * p.abs() {
                return Ok(p);
            }
        }
        Ok(p)
    }

    fn bracket(&self, chi: f64) -> Result<(f64, f64)> {
        if chi >= self.chi_tabulated_floor() {
            // node χ values decrease with the index
            let idx = self.nodes.partition_point(|n| n.prim[1] > chi);
            let hi = self.nodes[idx - 1].p;
            let lo = self.nodes[idx.min(self.nodes.len() - 1)].p;
            return Ok((lo, hi));
        }
        let mut hi = self.nodes.last().unwrap().p;
        let mut lo = 2.0 * hi;
        for _ in 0..64 {
            if self.kirchhoff(lo) <= chi {
                return Ok((lo, hi));
            }
            hi = lo;
            lo *= 2.0;
        }
        Err(Error::KirchhoffInverse {
            chi,
            reason: format!(
                "bracket expansion failed down to p = {lo:.3e}; the Kirchhoff range is bounded \
                 below near {:.6e}",
                self.kirchhoff(lo)
            ),
        })
    }
}

/// Values of every constitutive quantity at one Kirchhoff pressure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HatPoint {
    pub chi: f64,
    pub p: f64,
    pub s: f64,
    /// `dŝ/dχ`
    pub s_prime: f64,
    pub kr: f64,
    pub pore: f64,
    /// `dp̂_pore/dχ = ŝ/κ̂`
    pub pore_prime: f64,
    pub b: f64,
    /// `db̂_η/dχ`
    pub b_prime: f64,
}

impl HatPoint {
    /// `p̂_pore / ŝ`
    pub fn pore_over_s(&self) -> f64 {
        self.pore / self.s
    }
}

/// Storage law plus retention model, evaluated through a shared table.
#[derive(Clone, Debug)]
pub struct Constitutive {
    table: Arc<KirchhoffTable>,
    storage: StorageCoefficients,
}

impl Constitutive {
    pub fn new(retention: Arc<dyn RetentionModel>, storage: StorageCoefficients) -> Self {
        Self {
            table: Arc::new(KirchhoffTable::new(retention)),
            storage,
        }
    }

    pub fn van_genuchten(vg: VanGenuchtenParams, storage: StorageCoefficients) -> Self {
        Self::new(Arc::new(vg), storage)
    }

    /// Same retention table, different storage scalars.
    pub fn with_storage(&self, storage: StorageCoefficients) -> Self {
        Self {
            table: Arc::clone(&self.table),
            storage,
        }
    }

    pub fn storage(&self) -> &StorageCoefficients {
        &self.storage
    }

    pub fn table(&self) -> &KirchhoffTable {
        &self.table
    }

    pub fn retention(&self) -> &dyn RetentionModel {
        self.table.retention()
    }

    pub fn saturation(&self, p: f64) -> f64 {
        self.retention().saturation(p)
    }

    pub fn rel_perm(&self, p: f64) -> f64 {
        self.retention().rel_perm_at(p)
    }

    pub fn pore_pressure(&self, p: f64) -> f64 {
        self.table.primary(p)[0]
    }

    pub fn kirchhoff(&self, p: f64) -> f64 {
        self.table.kirchhoff(p)
    }

    pub fn kirchhoff_inverse(&self, chi: f64) -> Result<f64> {
        self.table.kirchhoff_inverse(chi)
    }

    pub fn storage_b(&self, p: f64) -> f64 {
        let prim = self.table.primary(p);
        self.storage.combine(self.saturation(p), prim[0], prim[2])
    }

    /// `db/dp`
    pub fn storage_b_prime(&self, p: f64) -> f64 {
        let r = self.retention();
        self.storage.prime(r.saturation(p), r.saturation_prime(p))
    }

    /// Evaluates all hatted quantities at `chi`.
    pub fn at_chi(&self, chi: f64) -> Result<HatPoint> {
        let p = self.kirchhoff_inverse(chi)?;
        Ok(self.at_pressure(p, chi))
    }

    /// Evaluates the hatted quantities given the pressure directly.
    pub fn at_pressure(&self, p: f64, chi: f64) -> HatPoint {
        let r = self.retention();
        let s = r.saturation(p);
        let ds = r.saturation_prime(p);
        let kr = r.rel_perm_at(p);
        let prim = self.table.primary(p);
        HatPoint {
            chi,
            p,
            s,
            s_prime: ds / kr,
            kr,
            pore: prim[0],
            pore_prime: s / kr,
            b: self.storage.combine(s, prim[0], prim[2]),
            b_prime: self.storage.prime(s, ds) / kr,
        }
    }

    /// Legendre transform `B̂_η(χ) = ∫₀^χ (b̂_η(χ) − b̂_η(c)) dc`.
    pub fn legendre_b_hat(&self, chi: f64) -> Result<f64> {
        let p = self.kirchhoff_inverse(chi)?;
        let m = self.table.secondary(p);
        Ok(self.moments(m[0], m[1], m[2]))
    }

    /// Legendre transform `B̄_η` evaluated at `p̂_pore(χ)/ŝ(χ)`.
    pub fn legendre_b_bar(&self, chi: f64) -> Result<f64> {
        let p = self.kirchhoff_inverse(chi)?;
        let m = self.table.secondary(p);
        Ok(self.moments(m[3], m[4], m[5]))
    }

    fn moments(&self, m_ds: f64, m_s: f64, m_s2: f64) -> f64 {
        let st = &self.storage;
        // the integrand is nonnegative; clip rounding noise near zero
        (st.phi0 * m_ds + st.c_w * st.phi0 * m_s + st.compressibility() * m_s2).max(0.0)
    }
}
