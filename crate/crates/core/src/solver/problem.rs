use std::fmt;
use std::sync::Arc;

use crate::conditions::Nd3Scaling;
use crate::constitutive::{MaterialParams, Permeability, RegularizationParams, VanGenuchtenParams};
use crate::elasticity::{DisplacementSpace, MechBoundary};
use crate::error::{invalid, Error, Result};
use crate::mesh::{Mesh, Side};

/// `h(x, y, t)`
pub type ScalarField = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
/// `f(x, y, t)`
pub type VectorField = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;
/// `σ_N(side, x, y, t)`
pub type TractionField = Arc<dyn Fn(Side, f64, f64, f64) -> [f64; 2] + Send + Sync>;
/// outward normal flux `w_N(side, x, y, t)`
pub type FluxField = Arc<dyn Fn(Side, f64, f64, f64) -> f64 + Send + Sync>;
/// `χ₀(x, y)`
pub type InitialField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// External data. Missing entries are zero.
#[derive(Clone, Default)]
pub struct Sources {
    pub body_force: Option<VectorField>,
    /// applied on every side whose displacement is not fully clamped
    pub traction: Option<TractionField>,
    pub fluid_source: Option<ScalarField>,
    /// applied on the Neumann part of the flow boundary
    pub boundary_outflux: Option<FluxField>,
}

impl fmt::Debug for Sources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sources")
            .field("body_force", &self.body_force.is_some())
            .field("traction", &self.traction.is_some())
            .field("fluid_source", &self.fluid_source.is_some())
            .field("boundary_outflux", &self.boundary_outflux.is_some())
            .finish()
    }
}

/// Uniform grid `0 = t₀ < … < t_N = T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn tau(&self) -> f64 {
        if self.steps == 0 {
            self.t_end
        } else {
            self.t_end / self.steps as f64
        }
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iters: usize,
    /// L-scheme weight used from the start (0 = pure Newton)
    pub theta: f64,
    /// retry a failed step with `theta = 1`
    pub l_scheme_fallback: bool,
    /// retry a failed step as two half steps, up to this depth
    pub tau_halving: usize,
    pub damping: f64,
    /// stability monitors on (requires `τ < 1/8`)
    pub monitors: bool,
    /// external mechanical load applied from `0⁺`; the initial displacement
    /// sees only the pore pressure
    pub unloaded_initial_state: bool,
    pub nd3_scaling: Nd3Scaling,
    /// trapezoid panels per slab when averaging sources in time
    pub source_panels: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_abs: 1e-9,
            tol_rel: 1e-9,
            max_iters: 50,
            theta: 0.0,
            l_scheme_fallback: true,
            tau_halving: 0,
            damping: 0.5,
            monitors: false,
            unloaded_initial_state: false,
            nd3_scaling: Nd3Scaling::default(),
            source_panels: 1,
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    /// carries the flow boundary partition
    pub mesh: Mesh,
    pub mech_boundary: MechBoundary,
    pub material: MaterialParams,
    pub van_genuchten: VanGenuchtenParams,
    pub regularization: RegularizationParams,
    pub sources: Sources,
    pub chi0: InitialField,
    pub time: TimeGrid,
    pub options: SolverOptions,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("cells", &self.mesh.num_cells())
            .field("mech_boundary", &self.mech_boundary)
            .field("flow_boundary", self.mesh.flow_boundary())
            .field("material", &self.material)
            .field("van_genuchten", &self.van_genuchten)
            .field("regularization", &self.regularization)
            .field("sources", &self.sources)
            .field("time", &self.time)
            .field("options", &self.options)
            .finish()
    }
}

impl ProblemSpec {
    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<Error> {
        let mut errs = self.material.violations();
        if let Permeability::PerCell(v) = &self.material.kappa_abs {
            if v.len() != self.mesh.num_cells() {
                errs.push(invalid(
                    "kappa_abs",
                    format!("{} values for {} cells", v.len(), self.mesh.num_cells()),
                ));
            }
        }
        if !self.mesh.flow_boundary().has_dirichlet() {
            errs.push(invalid("flow_boundary", "needs at least one Dirichlet side"));
        }
        let space = DisplacementSpace::new(&self.mesh, self.mech_boundary);
        if space.check_constrained().is_err() {
            errs.push(invalid(
                "mech_boundary",
                "Dirichlet part must remove all rigid motions",
            ));
        }
        if !(self.time.t_end > 0.0 && self.time.t_end.is_finite()) {
            errs.push(invalid("t_end", format!("must be > 0, got {}", self.time.t_end)));
        }
        if self.options.monitors && self.time.steps > 0 && self.time.tau() >= 0.125 {
            errs.push(invalid(
                "steps",
                format!(
                    "stability monitors need tau < 1/8, got tau = {}",
                    self.time.tau()
                ),
            ));
        }
        let o = &self.options;
        if !(o.tol_abs > 0.0 && o.tol_rel >= 0.0) {
            errs.push(invalid("tolerance", "tol_abs must be > 0 and tol_rel >= 0"));
        }
        if o.source_panels == 0 {
            errs.push(invalid("source_panels", "must be >= 1"));
        }
        if o.max_iters == 0 {
            errs.push(invalid("max_iters", "must be >= 1"));
        }
        if !(o.damping > 0.0 && o.damping <= 1.0) {
            errs.push(invalid("damping", format!("must lie in (0, 1], got {}", o.damping)));
        }
        if !(o.theta >= 0.0) {
            errs.push(invalid("theta", format!("must be >= 0, got {}", o.theta)));
        }
        errs
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
