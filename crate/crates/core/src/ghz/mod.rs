//! Heralded GHZ-state preparation on dual-rail acoustic qubits: single-shot
//! and iterated ("bleeding") retrieval, asymptotic success probabilities,
//! and expected rounds with single-phonon reset.

mod asymptotic;
mod engine;
mod kraus;
mod oracle;
mod rounds;
mod layout;
mod record;

pub use engine::{
    bleed_step, bleed_success_probability, optimize_bleed_schedule, retrieval_round, single_shot, summarize, AcousticState,
    BleedState, BleedSummary, GhzConfig, Pathway, RetrievalSchedule, ShotOutcome, ShotSummary,
    BLEED_SWEEPS, BLEED_TOL, MAX_COMPONENTS,
};
pub use layout::{network_matrix, Layout, MAX_QUBITS};
pub use record::{DetectionRecord, RecordClass};
pub use asymptotic::{
    asymptotic_breakdown, asymptotic_fit, asymptotic_success, AsymptoticBreakdown,
    MAX_ASYMPTOTIC_QUBITS,
};
pub use kraus::{acoustic_registry, ghz_kraus, mask_to_index};
pub use rounds::{
    expected_rounds, optimize_rounds, single_shot_rounds, RoundsChain, RoundsOptimum, RoundsResult,
    LEVEL_BOUNDS, LEVEL_TOL, MAX_LEVELS, MAX_ROUNDS_QUBITS,
};
pub use oracle::{sample_herald_fidelity, single_shot_fock, FidelitySample};
