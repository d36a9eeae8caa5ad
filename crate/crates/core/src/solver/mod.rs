//! Implicit Euler time stepping of the coupled system with a monolithic
//! Newton iteration per step.

mod checkpoint;
mod problem;
mod scheme;

pub use checkpoint::{checkpoint_paths, load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use problem::{
    FluxField, InitialField, ProblemSpec, ScalarField, Sources, SolverOptions, TimeGrid, TractionField,
    VectorField,
};
pub use scheme::{average_source, Residual, Solver, State, StepInfo, Trajectory};
