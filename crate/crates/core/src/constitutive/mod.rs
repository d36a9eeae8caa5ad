//! Scalar nonlinearities: saturation, relative permeability, pore pressure,
//! storage, the Kirchhoff transform and their χ-domain versions.

pub mod direct;
mod params;
mod table;
mod van_genuchten;

pub use params::{
    MaterialParams, Permeability, RegularizationParams, StorageCoefficients, VanGenuchtenParams,
};
pub use table::{Constitutive, HatPoint, KirchhoffTable};
pub use van_genuchten::RetentionModel;
