//! P2 vector finite elements for the displacement on the triangulated grid.

mod assembly;
mod infsup;
mod space;

pub use assembly::{
    assemble_div_coupling, assemble_elastic, assemble_elastic_unconstrained, boundary_flux,
    div_l2_sq, eval_on_triangle, neumann_load, ElasticOperator,
};
pub use infsup::{inf_sup_constant, InfSupEstimate, PressureSpace};
pub use space::{DisplacementSpace, MechBoundary, MechSide, Triangle};
