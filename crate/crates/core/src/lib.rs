//! Fully discrete FEM–TPFA solver for unsaturated poroelasticity written in
//! the Kirchhoff pressure.
//!
//! Displacements use P2 triangles on a rectangular grid split along one
//! diagonal; the Kirchhoff pressure is cell-wise constant with two-point
//! fluxes on the rectangles.

pub mod conditions;
pub mod constitutive;
pub mod diagnostics;
pub mod elasticity;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scenarios;
pub mod solver;

pub use constitutive::{
    Constitutive, HatPoint, MaterialParams, Permeability, RegularizationParams, RetentionModel,
    StorageCoefficients, VanGenuchtenParams,
};
pub use error::{Error, Result};
pub use mesh::{FlowBc, FlowBoundary, Mesh, Side};
pub use solver::{ProblemSpec, Solver, SolverOptions, Sources, State, TimeGrid, Trajectory};
