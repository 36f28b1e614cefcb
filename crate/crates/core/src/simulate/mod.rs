//! Data-generating processes: Cox-type event simulation by thinning, the
//! threshold-adoption cascade and the torus autoregressive field.

mod adoption;
mod covariates;
mod cox;
mod events;
mod path;
pub mod rng;
mod torus;

pub use adoption::{propagate_adoption, simulate_adoption, AdoptionConfig, AdoptionOutcome, BlockModel, Delays, PerceptionLaw};
pub use covariates::{CovariateField, CovariateKind, CovariateFn, CovariatePiece};
pub use cox::{compensator, intensity, simulate_cox};
pub use events::EventLog;
pub use path::{Interpolation, ParameterPath};
pub use torus::{simulate_torus_ar, torus_covariance, TorusCovariance, TorusDraw, TorusField, TorusSampler};
