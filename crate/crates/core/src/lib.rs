//! Models of an optomechanical single-phonon cache: cooling, heralded
//! phonon preparation, retrieval into photons, parallel multiplexing and
//! heralded GHZ-state generation, with a truncated Fock-space simulator
//! used as a reference.
//!
//! Numerical code is generic over [`Real`] (or [`Field`] for exact
//! enumeration). The aliases below fix the scalar to `f64`.

pub mod constants;
pub mod design;
pub mod error;
pub mod fock;
pub mod ghz;
pub mod herald;
pub mod multiplex;
pub mod ode;
pub mod om;
pub mod optim;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Field, Real};

pub type SystemParams = om::SystemParams<f64>;
pub type DrivePulse = om::DrivePulse<f64>;
pub type PumpAmplitude = om::PumpAmplitude<f64>;
pub type PairDistribution = om::PairDistribution<f64>;
pub type Config = om::Config<f64>;
pub type HeraldModel = herald::HeraldModel<f64>;
pub type ScheduleParams = multiplex::ScheduleParams<f64>;
pub type FidelityBudget = multiplex::FidelityBudget<f64>;
pub type DualRailRates = multiplex::DualRailRates<f64>;
pub type GivenParams = design::GivenParams<f64>;
pub type FreeParams = design::FreeParams<f64>;
pub type OptimizerResult = design::OptimizerResult<f64>;
pub type FixedBudget = design::FixedBudget<f64>;
pub type GhzConfig = ghz::GhzConfig<f64>;
pub type AcousticState = ghz::AcousticState<f64>;
pub type RetrievalSchedule = ghz::RetrievalSchedule<f64>;
pub type PureState = fock::PureState<f64>;
pub type DensityMatrix = fock::DensityMatrix<f64>;
