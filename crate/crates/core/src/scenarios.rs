//! Ready-made problems used by the CLI, the tests and the benches.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::constitutive::{Constitutive, MaterialParams, Permeability, RegularizationParams, VanGenuchtenParams};
use crate::diagnostics::TerzaghiParams;
use crate::elasticity::{MechBoundary, MechSide};
use crate::error::Result;
use crate::mesh::{FlowBc, FlowBoundary, Mesh, Side};
use crate::solver::{ProblemSpec, SolverOptions, Sources, TimeGrid};

fn unit_vg() -> VanGenuchtenParams {
    VanGenuchtenParams::new(1.0, 2.0).expect("valid constants")
}

/// Everything zero: the discrete solution stays at the zero state.
pub fn zero_data(n: usize, steps: usize) -> Result<ProblemSpec> {
    Ok(ProblemSpec {
        mesh: Mesh::rect(n, n, 1.0, 1.0)?,
        mech_boundary: MechBoundary::default(),
        material: MaterialParams {
            mu: 1.0,
            lambda: 1.0,
            alpha_biot: 1.0,
            c_w: 0.0,
            inv_n: 0.0,
            phi0: 0.2,
            kappa_abs: Permeability::Uniform(1.0),
        },
        van_genuchten: unit_vg(),
        regularization: RegularizationParams::new(0.0, 0.0)?,
        sources: Sources::default(),
        chi0: Arc::new(|_, _| 0.0),
        time: TimeGrid { t_end: 0.5, steps },
        options: SolverOptions::default(),
    })
}

/// Saturated body loaded by a constant body force and top traction; the
/// pressure stays zero and the displacement stays at its initial value.
pub fn steady_load(n: usize, steps: usize) -> Result<ProblemSpec> {
    let mut p = zero_data(n, steps)?;
    p.mech_boundary = drainage_mech();
    p.sources.body_force = Some(Arc::new(|_, _, _| [0.0, -0.5]));
    p.sources.traction = Some(Arc::new(|side, _, _, _| match side {
        Side::Top => [0.1, -1.0],
        _ => [0.0, 0.0],
    }));
    p.material.c_w = 0.1;
    Ok(p)
}

fn drainage_mech() -> MechBoundary {
    MechBoundary {
        left: MechSide::roller(Side::Left),
        right: MechSide::roller(Side::Right),
        bottom: MechSide::CLAMPED,
        top: MechSide::FREE,
    }
}

/// Outflux through the bottom, ramped up over the first half of the run.
pub const DRAINAGE_OUTFLUX: f64 = 0.35;

/// Default unsaturated scenario: a unit square drained through its bottom
/// while the top is held at zero pressure. The bottom cells desaturate to
/// roughly 80 %.
pub fn drainage(n: usize, steps: usize) -> Result<ProblemSpec> {
    let t_end = 0.5;
    let flow = FlowBoundary {
        left: FlowBc::Neumann,
        right: FlowBc::Neumann,
        bottom: FlowBc::Neumann,
        top: FlowBc::Dirichlet,
    };
    Ok(ProblemSpec {
        mesh: Mesh::rect(n, n, 1.0, 1.0)?.with_flow_boundary(flow),
        mech_boundary: drainage_mech(),
        material: MaterialParams {
            mu: 10.0,
            lambda: 10.0,
            alpha_biot: 1.0,
            c_w: 0.05,
            inv_n: 0.05,
            phi0: 0.2,
            kappa_abs: Permeability::Uniform(1.0),
        },
        van_genuchten: unit_vg(),
        regularization: RegularizationParams::new(0.01, 0.0)?,
        sources: Sources {
            boundary_outflux: Some(Arc::new(move |side, _, _, t| match side {
                Side::Bottom => DRAINAGE_OUTFLUX * (2.0 * t / t_end).min(1.0),
                _ => 0.0,
            })),
            ..Sources::default()
        },
        chi0: Arc::new(|_, _| 0.0),
        time: TimeGrid { t_end, steps },
        options: SolverOptions {
            monitors: true,
            ..SolverOptions::default()
        },
    })
}

/// Drainage with incompressible fluid and grains; the storage law then
/// degenerates at full saturation unless `η > 0`.
pub fn drainage_incompressible(n: usize, steps: usize, zeta: f64, eta: f64) -> Result<ProblemSpec> {
    let mut p = drainage(n, steps)?;
    p.material.c_w = 0.0;
    p.material.inv_n = 0.0;
    p.regularization = RegularizationParams::new(zeta, eta)?;
    Ok(p)
}

/// Saturated one-dimensional consolidation column of unit height under a
/// constant top load, drained at the top only.
pub fn terzaghi(cells: usize, steps: usize) -> Result<(ProblemSpec, TerzaghiParams)> {
    let material = MaterialParams {
        mu: 1.0,
        lambda: 1.0,
        alpha_biot: 1.0,
        c_w: 0.5,
        inv_n: 0.2,
        phi0: 0.2,
        kappa_abs: Permeability::Uniform(1.0),
    };
    let load = 1.0;
    let params = TerzaghiParams {
        height: 1.0,
        load,
        kappa: 1.0,
        storage: material.phi0 * material.c_w + material.inv_n,
        modulus: 2.0 * material.mu + material.lambda,
        alpha: material.alpha_biot,
    };
    let p0 = params.initial_pressure();
    let flow = FlowBoundary {
        left: FlowBc::Neumann,
        right: FlowBc::Neumann,
        bottom: FlowBc::Neumann,
        top: FlowBc::Dirichlet,
    };
    let width = 1.0 / cells as f64;
    let spec = ProblemSpec {
        mesh: Mesh::rect(1, cells, width, params.height)?.with_flow_boundary(flow),
        mech_boundary: MechBoundary {
            left: MechSide::roller(Side::Left),
            right: MechSide::roller(Side::Right),
            bottom: MechSide::roller(Side::Bottom),
            top: MechSide::FREE,
        },
        material,
        // effectively never desaturates at the small undershoots near the top
        van_genuchten: VanGenuchtenParams::new(1e-3, 2.0)?,
        regularization: RegularizationParams::new(0.0, 0.0)?,
        sources: Sources {
            traction: Some(Arc::new(move |side, _, _, _| match side {
                Side::Top => [0.0, -load],
                _ => [0.0, 0.0],
            })),
            ..Sources::default()
        },
        chi0: Arc::new(move |_, _| p0),
        time: TimeGrid { t_end: 0.6, steps },
        options: SolverOptions::default(),
    };
    Ok((spec, params))
}

/// Branch of the retention curve a manufactured solution lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmsBranch {
    Saturated,
    Unsaturated,
}

impl MmsBranch {
    pub fn name(self) -> &'static str {
        match self {
            MmsBranch::Saturated => "saturated",
            MmsBranch::Unsaturated => "unsaturated",
        }
    }
}

/// Manufactured pressure `p* = c sin(πx) sin(πy) (1 + t)` and displacement
/// `u* = d sin(πx) sin(πy) (1 + t) (1, 1)` on the unit square, with the
/// forcing that makes them exact.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub branch: MmsBranch,
    pub amplitude_p: f64,
    pub amplitude_u: f64,
    pub law: Constitutive,
}

impl Manufactured {
    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.amplitude_p * (PI * x).sin() * (PI * y).sin() * (1.0 + t)
    }

    pub fn chi(&self, x: f64, y: f64, t: f64) -> f64 {
        self.law.kirchhoff(self.pressure(x, y, t))
    }

    pub fn displacement(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let v = self.amplitude_u * (PI * x).sin() * (PI * y).sin() * (1.0 + t);
        [v, v]
    }
}

pub const MMS_T_END: f64 = 0.25;

/// MMS problem on an `n × n` grid with `τ = h/4`.
pub fn mms(branch: MmsBranch, n: usize, law: Option<&Constitutive>) -> Result<(ProblemSpec, Manufactured)> {
    let material = MaterialParams {
        mu: 1.0,
        lambda: 1.0,
        alpha_biot: 1.0,
        c_w: 0.5,
        inv_n: 0.1,
        phi0: 0.2,
        kappa_abs: Permeability::Uniform(1.0),
    };
    let vg = unit_vg();
    let storage = material.storage(0.0);
    let law = match law {
        Some(l) => l.with_storage(storage),
        None => Constitutive::van_genuchten(vg, storage),
    };
    let amplitude_p = match branch {
        MmsBranch::Saturated => 1.0,
        MmsBranch::Unsaturated => -0.8,
    };
    let ms = Manufactured {
        branch,
        amplitude_p,
        amplitude_u: 0.1,
        law,
    };
    let (mu, lambda, alpha) = (material.mu, material.lambda, material.alpha_biot);
    let (c, d) = (ms.amplitude_p, ms.amplitude_u);
    let law_f = ms.law.clone();
    let body = move |x: f64, y: f64, t: f64| {
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let g = 1.0 + t;
        let s = sx * sy;
        let sxy = PI * PI * cx * cy;
        let sxx = -PI * PI * s;
        let p = c * s * g;
        let grad_p = [c * g * PI * cx * sy, c * g * PI * sx * cy];
        let sat = law_f.saturation(p);
        let lap = 2.0 * PI * PI * d * g * s;
        [
            mu * lap - (mu + lambda) * d * g * (sxx + sxy) + alpha * sat * grad_p[0],
            mu * lap - (mu + lambda) * d * g * (sxy + sxx) + alpha * sat * grad_p[1],
        ]
    };
    let law_h = ms.law.clone();
    let kappa_abs = 1.0;
    let source = move |x: f64, y: f64, t: f64| {
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let g = 1.0 + t;
        let s = sx * sy;
        let p = c * s * g;
        let grad_p = [c * g * PI * cx * sy, c * g * PI * sx * cy];
        let lap_p = -2.0 * PI * PI * p;
        let r = law_h.retention();
        let dt_b = law_h.storage_b_prime(p) * c * s;
        let dt_div = d * PI * (cx * sy + sx * cy);
        let div_flux = r.rel_perm_prime_at(p) * (grad_p[0] * grad_p[0] + grad_p[1] * grad_p[1])
            + r.rel_perm_at(p) * lap_p;
        dt_b + alpha * r.saturation(p) * dt_div - kappa_abs * div_flux
    };
    let ms0 = ms.clone();
    let spec = ProblemSpec {
        mesh: Mesh::rect(n, n, 1.0, 1.0)?,
        mech_boundary: MechBoundary::default(),
        material,
        van_genuchten: vg,
        regularization: RegularizationParams::new(0.0, 0.0)?,
        sources: Sources {
            body_force: Some(Arc::new(body)),
            fluid_source: Some(Arc::new(source)),
            ..Sources::default()
        },
        chi0: Arc::new(move |x, y| ms0.chi(x, y, 0.0)),
        time: TimeGrid {
            t_end: MMS_T_END,
            steps: n,
        },
        options: SolverOptions::default(),
    };
    Ok((spec, ms))
}
