use serde::Serialize;

use super::closed::{cooled_population, pump_photon_number, retrieval_bound};
use super::moments::{cooled_after_pulse, retrieval};
use super::params::SystemParams;
use super::pulse::DrivePulse;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationTarget<T> {
    /// Cool from `n_init` to at most `n_target` phonons.
    Population { n_init: T, n_target: T },
    /// Reach retrieval probability `p` (photons leaving either port).
    RetrievalProbability { p: T },
    /// Reach retrieval efficiency `eta` (photons leaving the external port).
    RetrievalEfficiency { eta: T },
}

/// Longest duration tried, in units of 1/κ.
pub const MAX_DURATION_KAPPA: f64 = 1e4;
/// Relative bisection tolerance on the duration.
pub const DURATION_REL_TOL: f64 = 1e-4;

/// Signed progress towards the target: ≥ 0 once reached.
fn progress<T: Real>(p: &SystemParams<T>, pulse: &DrivePulse<T>, target: &DurationTarget<T>) -> Result<T> {
    Ok(match *target {
        DurationTarget::Population { n_init, n_target } => {
            n_target - cooled_after_pulse(p, pulse, n_init)?
        }
        DurationTarget::RetrievalProbability { p: want } => retrieval(p, pulse)?.probability - want,
        DurationTarget::RetrievalEfficiency { eta } => retrieval(p, pulse)?.efficiency - eta,
    })
}

fn target_value<T: Real>(target: &DurationTarget<T>) -> T {
    match *target {
        DurationTarget::Population { n_target, .. } => n_target,
        DurationTarget::RetrievalProbability { p } => p,
        DurationTarget::RetrievalEfficiency { eta } => eta,
    }
}

/// Shortest pulse (half-power duration for tanh pulses) of the template's
/// shape and power that meets `target`. Returns 0 if the target holds
/// without any drive.
pub fn solve_pulse_duration<T: Real>(
    p: &SystemParams<T>,
    template: &DrivePulse<T>,
    target: DurationTarget<T>,
) -> Result<T> {
    p.validate()?;
    let alpha = pump_photon_number(p, template.power);
    let unreachable = |asymptote: T| Error::Unreachable {
        target: target_value(&target).to_f64_lossy(),
        asymptote: asymptote.to_f64_lossy(),
    };
    match target {
        DurationTarget::Population { n_init, n_target } => {
            if n_target >= n_init {
                return Ok(T::zero());
            }
            let floor = cooled_population(p, &alpha);
            if n_target <= floor {
                return Err(unreachable(floor));
            }
        }
        DurationTarget::RetrievalProbability { p: want } => {
            if want <= T::zero() {
                return Ok(T::zero());
            }
            let ceil = retrieval_bound(p, &alpha) / p.eta_ex();
            if want >= ceil {
                return Err(unreachable(ceil));
            }
        }
        DurationTarget::RetrievalEfficiency { eta } => {
            if eta <= T::zero() {
                return Ok(T::zero());
            }
            let ceil = retrieval_bound(p, &alpha);
            if eta >= ceil {
                return Err(unreachable(ceil));
            }
        }
    }
    let unit = p.kappa().recip();
    let cap = T::lit(MAX_DURATION_KAPPA) * unit;
    let mut lo = T::zero();
    let mut hi = unit;
    loop {
        let f = progress(p, &template.with_duration(hi), &target)?;
        if f >= T::zero() {
            break;
        }
        if hi >= cap {
            let best = target_value(&target) - f;
            return Err(unreachable(best));
        }
        lo = hi;
        hi = (hi * T::lit(2.0)).min(cap);
    }
    let tol = T::lit(DURATION_REL_TOL);
    while hi - lo > tol * hi {
        let mid = (lo + hi) / T::lit(2.0);
        if progress(p, &template.with_duration(mid), &target)? >= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::om::pulse::Carrier;

    #[test]
    fn trivial_target() {
        let p = SystemParams::<f64>::target();
        let t = solve_pulse_duration(
            &p,
            &DrivePulse::tanh(1e-3, 1e-9, Carrier::Red),
            DurationTarget::Population {
                n_init: 3.7,
                n_target: 3.7,
            },
        )
        .unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn unreachable_floor() {
        let p = SystemParams::<f64>::target();
        let r = solve_pulse_duration(
            &p,
            &DrivePulse::tanh(1e-3, 1e-9, Carrier::Red),
            DurationTarget::Population {
                n_init: 3.7,
                n_target: 1e-9,
            },
        );
        assert!(matches!(r, Err(Error::Unreachable { .. })));
        let r = solve_pulse_duration(
            &p,
            &DrivePulse::tanh(1e-3, 1e-9, Carrier::Red),
            DurationTarget::RetrievalEfficiency { eta: 0.9999 },
        );
        assert!(matches!(r, Err(Error::Unreachable { .. })));
    }
}
