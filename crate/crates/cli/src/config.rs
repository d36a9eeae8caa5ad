//! TOML run configuration.
//!
//! A config names a base scenario and may override any block of it. Every
//! key is optional; unknown keys are rejected. Units are SI throughout.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use kirchpore::conditions::Nd3Scaling;
use kirchpore::constitutive::direct;
use kirchpore::diagnostics::RegParam;
use kirchpore::elasticity::{MechBoundary, MechSide};
use kirchpore::scenarios::{self, MmsBranch};
use kirchpore::{
    Error, FlowBc, FlowBoundary, MaterialParams, Mesh, Permeability, ProblemSpec, RegularizationParams, Side,
    Sources, VanGenuchtenParams,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    ZeroData,
    SteadyLoad,
    #[default]
    Drainage,
    DrainageIncompressible,
    Terzaghi,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: ScenarioName,
    pub mesh: Option<MeshConfig>,
    pub time: Option<TimeConfig>,
    pub material: Option<MaterialConfig>,
    pub van_genuchten: Option<VgConfig>,
    pub regularization: Option<RegConfig>,
    pub boundary: Option<BoundaryConfig>,
    pub loads: Option<LoadsConfig>,
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub conditions: ConditionsConfig,
    #[serde(default)]
    pub mms: MmsConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub terzaghi: TerzaghiConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// `[0, lx] × [0, ly]` in m, split into `nx × ny` rectangles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
}

/// Final time in s and number of uniform steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: Option<f64>,
    pub steps: Option<usize>,
}

/// Moduli in Pa, compressibilities in 1/Pa, permeability over viscosity in
/// m²/(Pa s); porosity and Biot coefficient are dimensionless.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha_biot: Option<f64>,
    pub c_w: Option<f64>,
    pub inv_n: Option<f64>,
    pub phi0: Option<f64>,
    pub kappa_abs: Option<f64>,
}

/// `alpha` in 1/Pa, `n` dimensionless (> 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VgConfig {
    pub alpha: f64,
    pub n: f64,
}

/// Viscous regularization `zeta` in s, extra storage `eta` in 1/Pa.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegConfig {
    pub zeta: Option<f64>,
    pub eta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSide {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechKind {
    Clamped,
    Roller,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sides<T> {
    pub left: Option<T>,
    pub right: Option<T>,
    pub bottom: Option<T>,
    pub top: Option<T>,
}

impl<T> Default for Sides<T> {
    fn default() -> Self {
        Self {
            left: None,
            right: None,
            bottom: None,
            top: None,
        }
    }
}

impl<T: Copy> Sides<T> {
    fn get(&self, side: Side) -> Option<T> {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
            Side::Top => self.top,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub flow: Sides<FlowSide>,
    #[serde(default)]
    pub mech: Sides<MechKind>,
}

/// Replaces the scenario's sources. Body force in N/m³, tractions in Pa,
/// fluid source in 1/s, outward fluxes in m/s. All loads ramp linearly from
/// zero over `ramp_time` s (0 = applied at once).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    pub body_force: Option<[f64; 2]>,
    pub fluid_source: Option<f64>,
    #[serde(default)]
    pub ramp_time: f64,
    #[serde(default)]
    pub traction: Sides<[f64; 2]>,
    #[serde(default)]
    pub outflux: Sides<f64>,
}

/// Uniform initial water pressure in Pa.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub pressure: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub max_iters: Option<usize>,
    pub theta: Option<f64>,
    pub l_scheme_fallback: Option<bool>,
    pub tau_halving: Option<usize>,
    pub damping: Option<f64>,
    pub monitors: Option<bool>,
    pub unloaded_initial_state: Option<bool>,
    pub source_panels: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingName {
    Storage,
    Threshold,
}

impl From<ScalingName> for Nd3Scaling {
    fn from(s: ScalingName) -> Self {
        match s {
            ScalingName::Storage => Nd3Scaling::Storage,
            ScalingName::Threshold => Nd3Scaling::Threshold,
        }
    }
}

/// Settings of `check-conditions`. `s_floor` is the lowest saturation the
/// run is declared to reach.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionsConfig {
    pub s_floor: f64,
    pub scaling: ScalingName,
    /// porosity and Biot coefficient of the minimal-saturation table
    pub table_phi0: f64,
    pub table_alpha_biot: f64,
}

impl Default for ConditionsConfig {
    fn default() -> Self {
        Self {
            s_floor: 0.5,
            scaling: ScalingName::Threshold,
            table_phi0: 0.1,
            table_alpha_biot: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchName {
    Saturated,
    Unsaturated,
}

impl From<BranchName> for MmsBranch {
    fn from(b: BranchName) -> Self {
        match b {
            BranchName::Saturated => MmsBranch::Saturated,
            BranchName::Unsaturated => MmsBranch::Unsaturated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmsConfig {
    /// cells per side, coarse to fine
    pub levels: Vec<usize>,
    pub branches: Vec<BranchName>,
    pub min_order: f64,
}

impl Default for MmsConfig {
    fn default() -> Self {
        Self {
            levels: vec![8, 16, 32],
            branches: vec![BranchName::Saturated, BranchName::Unsaturated],
            min_order: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    Zeta,
    Eta,
}

impl From<ParamName> for RegParam {
    fn from(p: ParamName) -> Self {
        match p {
            ParamName::Zeta => RegParam::Zeta,
            ParamName::Eta => RegParam::Eta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub param: ParamName,
    /// decreasing values of the swept parameter
    pub ladder: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            param: ParamName::Eta,
            ladder: vec![1e-2, 1e-3, 1e-4, 1e-5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerzaghiConfig {
    pub cells: usize,
    pub steps: usize,
    /// extra runs with `h` and `τ` halved each time
    pub refinements: usize,
    pub max_error: f64,
}

impl Default for TerzaghiConfig {
    fn default() -> Self {
        Self {
            cells: 64,
            steps: 200,
            refinements: 1,
            max_error: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// checkpoint every this many steps (0 = final state only)
    pub checkpoint_every: usize,
    /// also write whitespace-separated `.dat` files for plotting
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("kirchpore-out"),
            checkpoint_every: 0,
            plot_data: false,
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Environment variable overriding `output.dir`.
pub const OUT_DIR_ENV: &str = "KIRCHPORE_OUT_DIR";

impl RunConfig {
    /// Parses TOML text; type errors carry the path of the offending key.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| CliError::Validation(vec![e.to_string().trim().to_string()]))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.into_inner().message().trim().to_string();
            CliError::Validation(vec![if path == "." { msg } else { format!("{path}: {msg}") }])
        })
    }

    /// Canonical TOML of the config with all defaults filled in.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every violated invariant, each prefixed with its key path.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if let Some(m) = &self.mesh {
            if m.nx == 0 || m.ny == 0 {
                errs.push(format!("mesh.nx, mesh.ny: need at least one cell, got {} x {}", m.nx, m.ny));
            }
            if !(m.lx > 0.0 && m.ly > 0.0) {
                errs.push(format!("mesh.lx, mesh.ly: must be > 0, got {} x {}", m.lx, m.ly));
            }
        }
        if let Some(l) = &self.loads {
            if !(l.ramp_time >= 0.0 && l.ramp_time.is_finite()) {
                errs.push(format!("loads.ramp_time: must be >= 0, got {}", l.ramp_time));
            }
        }
        let c = &self.conditions;
        if !(c.s_floor > 0.0 && c.s_floor <= 1.0) {
            errs.push(format!("conditions.s_floor: must lie in (0, 1], got {}", c.s_floor));
        }
        if !(c.table_phi0 > 0.0 && c.table_phi0 < 1.0) {
            errs.push(format!("conditions.table_phi0: must lie in (0, 1), got {}", c.table_phi0));
        }
        if self.mms.levels.len() < 2 || self.mms.levels.windows(2).any(|w| w[1] <= w[0]) || self.mms.levels[0] == 0 {
            errs.push("mms.levels: need at least two increasing positive levels".into());
        }
        if self.sweep.ladder.len() < 2 || self.sweep.ladder.iter().any(|v| !(*v >= 0.0)) {
            errs.push("sweep.ladder: need at least two nonnegative values".into());
        }
        let t = &self.terzaghi;
        if t.cells == 0 || t.steps == 0 {
            errs.push("terzaghi.cells, terzaghi.steps: must be >= 1".into());
        }
        match self.problem() {
            Ok(p) => errs.extend(p.violations().iter().map(describe)),
            Err(CliError::Validation(v)) => errs.extend(v),
            Err(e) => errs.push(e.to_string()),
        }
        errs
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let errs = self.violations();
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(errs))
        }
    }

    /// Output directory: command line, then environment, then config.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output.dir.clone(),
        }
    }

    /// The problem described by the config: the base scenario with every
    /// given block applied on top.
    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let mut errs = Vec::new();
        let mesh = self.mesh;
        let n = mesh.map_or(8, |m| m.nx.max(1));
        let steps = self.time.and_then(|t| t.steps).unwrap_or(10);
        let base = match self.scenario {
            ScenarioName::ZeroData => scenarios::zero_data(n, steps),
            ScenarioName::SteadyLoad => scenarios::steady_load(n, steps),
            ScenarioName::Drainage => scenarios::drainage(n, steps),
            ScenarioName::DrainageIncompressible => scenarios::drainage_incompressible(n, steps, 0.01, 1e-4),
            ScenarioName::Terzaghi => scenarios::terzaghi(mesh.map_or(64, |m| m.ny.max(1)), steps).map(|(p, _)| p),
        };
        let mut p = base.map_err(|e| CliError::Validation(vec![describe(&e)]))?;
        if let Some(t) = self.time {
            if let Some(te) = t.t_end {
                p.time.t_end = te;
            }
        }
        if let Some(m) = &self.material {
            let mat = &mut p.material;
            set(&mut mat.mu, m.mu);
            set(&mut mat.lambda, m.lambda);
            set(&mut mat.alpha_biot, m.alpha_biot);
            set(&mut mat.c_w, m.c_w);
            set(&mut mat.inv_n, m.inv_n);
            set(&mut mat.phi0, m.phi0);
            if let Some(k) = m.kappa_abs {
                mat.kappa_abs = Permeability::Uniform(k);
            }
        }
        if let Some(vg) = self.van_genuchten {
            match VanGenuchtenParams::new(vg.alpha, vg.n) {
                Ok(v) => p.van_genuchten = v,
                Err(e) => errs.push(describe(&e)),
            }
        }
        if let Some(r) = self.regularization {
            let zeta = r.zeta.unwrap_or(p.regularization.zeta);
            let eta = r.eta.unwrap_or(p.regularization.eta);
            match RegularizationParams::new(zeta, eta) {
                Ok(v) => p.regularization = v,
                Err(e) => errs.push(describe(&e)),
            }
        }
        let mut flow = *p.mesh.flow_boundary();
        if let Some(b) = &self.boundary {
            for side in Side::ALL {
                if let Some(f) = b.flow.get(side) {
                    let bc = match f {
                        FlowSide::Dirichlet => FlowBc::Dirichlet,
                        FlowSide::Neumann => FlowBc::Neumann,
                    };
                    set_flow(&mut flow, side, bc);
                }
                if let Some(k) = b.mech.get(side) {
                    let ms = match k {
                        MechKind::Clamped => MechSide::CLAMPED,
                        MechKind::Roller => MechSide::roller(side),
                        MechKind::Free => MechSide::FREE,
                    };
                    set_mech(&mut p.mech_boundary, side, ms);
                }
            }
        }
        if let Some(m) = mesh {
            match Mesh::rect(m.nx, m.ny, m.lx, m.ly) {
                Ok(mesh) => p.mesh = mesh,
                Err(e) => errs.push(format!("mesh: {e}")),
            }
        }
        p.mesh = p.mesh.clone().with_flow_boundary(flow);
        if let Some(l) = self.loads {
            p.sources = loads(l);
        }
        if let Some(init) = self.initial {
            let chi = direct::kirchhoff(init.pressure, &p.van_genuchten);
            p.chi0 = Arc::new(move |_, _| chi);
        }
        let s = &self.solver;
        let o = &mut p.options;
        set(&mut o.tol_abs, s.tol_abs);
        set(&mut o.tol_rel, s.tol_rel);
        set(&mut o.max_iters, s.max_iters);
        set(&mut o.theta, s.theta);
        set(&mut o.l_scheme_fallback, s.l_scheme_fallback);
        set(&mut o.tau_halving, s.tau_halving);
        set(&mut o.damping, s.damping);
        set(&mut o.monitors, s.monitors);
        set(&mut o.unloaded_initial_state, s.unloaded_initial_state);
        set(&mut o.source_panels, s.source_panels);
        o.nd3_scaling = self.conditions.scaling.into();
        if errs.is_empty() {
            Ok(p)
        } else {
            Err(CliError::Validation(errs))
        }
    }

    /// Material of the problem, for the condition checks.
    pub fn material(&self) -> Result<(MaterialParams, VanGenuchtenParams, f64), CliError> {
        let p = self.problem()?;
        Ok((p.material, p.van_genuchten, p.regularization.eta))
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_flow(f: &mut FlowBoundary, side: Side, bc: FlowBc) {
    match side {
        Side::Left => f.left = bc,
        Side::Right => f.right = bc,
        Side::Bottom => f.bottom = bc,
        Side::Top => f.top = bc,
    }
}

fn set_mech(m: &mut MechBoundary, side: Side, s: MechSide) {
    match side {
        Side::Left => m.left = s,
        Side::Right => m.right = s,
        Side::Bottom => m.bottom = s,
        Side::Top => m.top = s,
    }
}

fn loads(l: LoadsConfig) -> Sources {
    let ramp = move |t: f64| {
        if l.ramp_time > 0.0 {
            (t / l.ramp_time).min(1.0)
        } else {
            1.0
        }
    };
    let traction = l.traction;
    let outflux = l.outflux;
    let has_traction = Side::ALL.iter().any(|&s| traction.get(s).is_some());
    let has_outflux = Side::ALL.iter().any(|&s| outflux.get(s).is_some());
    Sources {
        body_force: l.body_force.map(|f| {
            Arc::new(move |_: f64, _: f64, t: f64| [ramp(t) * f[0], ramp(t) * f[1]]) as kirchpore::solver::VectorField
        }),
        traction: has_traction.then(|| {
            Arc::new(move |side: Side, _: f64, _: f64, t: f64| {
                let v = traction.get(side).unwrap_or([0.0; 2]);
                [ramp(t) * v[0], ramp(t) * v[1]]
            }) as kirchpore::solver::TractionField
        }),
        fluid_source: l
            .fluid_source
            .map(|h| Arc::new(move |_: f64, _: f64, t: f64| ramp(t) * h) as kirchpore::solver::ScalarField),
        boundary_outflux: has_outflux.then(|| {
            Arc::new(move |side: Side, _: f64, _: f64, t: f64| ramp(t) * outflux.get(side).unwrap_or(0.0))
                as kirchpore::solver::FluxField
        }),
    }
}

/// Library error with its config key path.
pub fn describe(e: &Error) -> String {
    match e {
        Error::InvalidParameter { name, reason } => format!("{}: {reason}", key_path(name)),
        other => other.to_string(),
    }
}

fn key_path(name: &str) -> String {
    let section = match name {
        "mu" | "lambda" | "alpha_biot" | "c_w" | "inv_n" | "phi0" | "kappa_abs" => "material",
        "alpha_vg" => return "van_genuchten.alpha".into(),
        "n_vg" => return "van_genuchten.n".into(),
        "zeta" | "eta" => "regularization",
        "flow_boundary" => return "boundary.flow".into(),
        "mech_boundary" => return "boundary.mech".into(),
        "t_end" | "steps" => "time",
        "tolerance" => return "solver.tol_abs, solver.tol_rel".into(),
        "source_panels" | "max_iters" | "damping" | "theta" => "solver",
        _ => return name.into(),
    };
    format!("{section}.{name}")
}
