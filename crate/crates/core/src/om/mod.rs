//! Optomechanical dynamics: parameters, pulses, closed forms and pulse
//! solvers.

pub mod closed;
pub mod moments;
pub mod params;
pub mod pulse;
pub mod solve;

pub use closed::{
    cooled_population, cooling_rate_equation, optical_damping, pump_photon_number,
    power_for_photon_number, retrieval_bound, squeeze_population, strong_coupling_power,
    swap_populations, Damping, PairDistribution, PumpAmplitude,
};
pub use moments::{
    cooled_after_pulse, cooling_trajectory, retrieval, retrieval_efficiency,
    retrieval_probability, retrieval_until, PumpDrive, Retrieval,
};
pub use params::{Config, SystemParams};
pub use pulse::{Carrier, DrivePulse, PulseShape};
pub use solve::{solve_pulse_duration, DurationTarget};
