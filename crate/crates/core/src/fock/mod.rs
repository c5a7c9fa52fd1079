//! Truncated Fock-space oracle: operators, Lindblad evolution, Kraus maps,
//! linear-optical scattering and photon counting.

pub mod detect;
pub mod kraus;
pub mod lindblad;
pub mod ops;
pub mod registry;
pub mod scatter;
pub mod state;

pub use detect::{detect_photon_number, detect_photon_number_pure, DetectionOutcome, DetectorModel};
pub use kraus::{completeness_error, KrausOp};
pub use lindblad::{evolve, EvolveOptions, LindbladSpec};
pub use ops::SparseOp;
pub use registry::{Mode, ModeKind, ModeRegistry};
pub use scatter::{beam_splitter_50_50, optical_scatter, transmissivity_splitter, CMatrix};
pub use state::{DensityMatrix, PureState};
