use std::f64::consts::PI;

use crate::error::Result;
use crate::scenarios;
use crate::solver::Solver;

/// One-dimensional saturated consolidation column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerzaghiParams {
    pub height: f64,
    /// compressive load on the drained top
    pub load: f64,
    pub kappa: f64,
    /// `φ₀c_w + 1/N`
    pub storage: f64,
    /// constrained modulus `2μ + λ`
    pub modulus: f64,
    pub alpha: f64,
}

impl TerzaghiParams {
    /// Undrained pressure right after loading.
    pub fn initial_pressure(&self) -> f64 {
        self.alpha * self.load / (self.alpha * self.alpha + self.storage * self.modulus)
    }

    /// `c_v = κ / (S + α²/M)`
    pub fn consolidation_coefficient(&self) -> f64 {
        self.kappa / (self.storage + self.alpha * self.alpha / self.modulus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// bound on the neglected terms
    pub tail_bound: f64,
}

/// Excess pressure at depth `depth` below the drained top, by the Fourier
/// series truncated after `n_terms` terms.
pub fn terzaghi_analytic(params: &TerzaghiParams, depth: f64, t: f64, n_terms: usize) -> SeriesValue {
    let p0 = params.initial_pressure();
    let h = params.height;
    let a = PI * PI * params.consolidation_coefficient() * t / (4.0 * h * h);
    let mut value = 0.0;
    for k in 0..n_terms {
        let m = (2 * k + 1) as f64;
        value += 4.0 * p0 / (PI * m) * (m * PI * depth / (2.0 * h)).sin() * (-m * m * a).exp();
    }
    let m = (2 * n_terms + 1) as f64;
    let ratio = (-a * 8.0 * (n_terms as f64 + 1.0)).exp();
    let tail_bound = if ratio < 1.0 {
        4.0 * p0 / (PI * m) * (-m * m * a).exp() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    SeriesValue { value, tail_bound }
}

/// Outcome of one simulated column compared with the series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerzaghiError {
    pub cells: usize,
    pub steps: usize,
    /// relative `L²(Q_T)` pressure error
    pub relative_l2: f64,
}

pub const TERZAGHI_TERMS: usize = 400;

/// Runs the column scenario and measures the relative space-time error of
/// the cell pressures at every time level after the initial one.
pub fn terzaghi_error(cells: usize, steps: usize) -> Result<TerzaghiError> {
    let (spec, params) = scenarios::terzaghi(cells, steps)?;
    let solver = Solver::new(spec)?;
    let traj = solver.run()?;
    let tau = solver.problem().time.tau();
    let mut err = 0.0;
    let mut norm = 0.0;
    for s in traj.states.iter().skip(1) {
        let law = solver.law();
        for (c, &chi) in solver.mesh().cells().iter().zip(&s.chi) {
            let p = law.kirchhoff_inverse(chi)?;
            let exact = terzaghi_analytic(&params, params.height - c.center[1], s.time, TERZAGHI_TERMS).value;
            err += tau * c.measure * (p - exact).powi(2);
            norm += tau * c.measure * exact * exact;
        }
    }
    Ok(TerzaghiError {
        cells,
        steps,
        relative_l2: (err / norm).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> TerzaghiParams {
        TerzaghiParams {
            height: 1.0,
            load: 1.0,
            kappa: 1.0,
            storage: 0.3,
            modulus: 3.0,
            alpha: 1.0,
        }
    }

    #[test]
    fn late_time_decays() {
        let v = terzaghi_analytic(&params(), 1.0, 50.0, 50);
        assert!(v.value.abs() < 1e-12);
    }

    #[test]
    fn early_time_is_undrained() {
        let p = params();
        // away from the drained boundary the pressure has not moved yet
        let v = terzaghi_analytic(&p, 0.9, 1e-5, 20_000);
        assert!((v.value - p.initial_pressure()).abs() < 1e-3 * p.initial_pressure(), "{v:?}");
    }

    #[test]
    fn undrained_pressure_closed_form() {
        // S p + α ε = 0 and M ε − α p = −load
        let p = params();
        let p0 = p.initial_pressure();
        let eps = -p.storage * p0 / p.alpha;
        assert!((p.modulus * eps - p.alpha * p0 + p.load).abs() < 1e-14);
    }

    #[test]
    fn doubling_terms_is_stable() {
        let p = params();
        let tc = p.height * p.height / p.consolidation_coefficient();
        for &t in &[0.01 * tc, 0.1 * tc, tc] {
            for &z in &[0.1, 0.5, 0.9] {
                let a = terzaghi_analytic(&p, z, t, 100).value;
                let b = terzaghi_analytic(&p, z, t, 200).value;
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tail_bound_covers_truncation() {
        let p = params();
        let full = terzaghi_analytic(&p, 0.3, 0.01, 5000).value;
        for n in [3, 6, 12] {
            let v = terzaghi_analytic(&p, 0.3, 0.01, n);
            assert!((v.value - full).abs() <= v.tail_bound * (1.0 + 1e-9), "{n}: {v:?} vs {full}");
        }
    }
}
