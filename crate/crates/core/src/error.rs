use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock truncation too small: tail weight {weight:.3e} in mode `{mode}` exceeds {limit:.1e}")]
    Truncation { mode: String, weight: f64, limit: f64 },

    #[error("integrator step size underflowed at t = {t:.6e} s (h = {h:.3e})")]
    IntegratorStall { t: f64, h: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("transform is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("p1 = {0} exceeds the geometric maximum 1/4")]
    InvalidP1(f64),

    #[error("strong-coupling regime: g0*alpha = {coupling:.4e} rad/s >= kappa/4 = {limit:.4e} rad/s (power threshold {power_threshold:.4e} W)")]
    StrongCoupling {
        coupling: f64,
        limit: f64,
        power_threshold: f64,
    },

    #[error("target {target} is unreachable (asymptote {asymptote})")]
    Unreachable { target: f64, asymptote: f64 },

    #[error("enumeration limit exceeded: {0}")]
    ComplexityLimit(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no feasible point: {0}")]
    Infeasible(String),

    #[error("target fidelity {target} not reached even at the upper bracket (best {best})")]
    NoCrossing { target: f64, best: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
