//! Stability monitors and experiment drivers.

mod energy;
mod mms;
mod sweep;
mod table;
mod terzaghi;

pub use energy::{energy_monitor, EnergyReport, EnergyStep, ENERGY_CONSTANT_LIMIT};
pub use mms::{mms_errors, mms_study, MMS_METRICS};
pub use sweep::{regularization_sweep, RegParam, SweepResult};
pub use table::{ConvergenceRow, ConvergenceTable};
pub use terzaghi::{terzaghi_analytic, terzaghi_error, SeriesValue, TerzaghiError, TerzaghiParams, TERZAGHI_TERMS};
