//! Heralding probabilities and Bayesian fidelities for single phonons and
//! GHZ states under detector inefficiency and dark counts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::om::PairDistribution;
use crate::scalar::Real;

/// Detection chain for a herald.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldModel<T> {
    pub eta_d: T,
    /// κ_ex/κ of the herald cavity.
    pub eta_ex: T,
    /// counts/s
    pub dark_rate: T,
    /// s
    pub window: T,
}

/// Largest dark-count probability per window the formulas are used for.
pub const MAX_DARK_PROB: f64 = 1e-2;

impl<T: Real> HeraldModel<T> {
    pub fn new(eta_d: T, eta_ex: T, dark_rate: T, window: T) -> Result<Self> {
        let h = Self {
            eta_d,
            eta_ex,
            dark_rate,
            window,
        };
        h.validate()?;
        Ok(h)
    }

    /// Model with a given dark-count probability, expressed as a unit window.
    pub fn with_dark_prob(eta_d: T, eta_ex: T, p_d: T) -> Result<Self> {
        Self::new(eta_d, eta_ex, p_d, T::one())
    }

    pub fn ideal() -> Self {
        Self {
            eta_d: T::one(),
            eta_ex: T::one(),
            dark_rate: T::zero(),
            window: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("eta_d", self.eta_d)?;
        unit("eta_ex", self.eta_ex)?;
        if !(self.dark_rate >= T::zero() && self.window >= T::zero()) {
            return Err(Error::InvalidParameter(
                "dark rate and window must be >= 0".into(),
            ));
        }
        if self.p_d() >= T::lit(MAX_DARK_PROB) {
            return Err(Error::InvalidParameter(format!(
                "dark-count probability {} must stay below {MAX_DARK_PROB}",
                self.p_d()
            )));
        }
        Ok(())
    }

    /// Overall efficiency η = η_ex η_d.
    pub fn eta(&self) -> T {
        self.eta_ex * self.eta_d
    }

    /// Dark-count probability per detection window.
    pub fn p_d(&self) -> T {
        self.dark_rate * self.window
    }

    /// Same chain with `p_d → 1 − (1 − p_d)^k`, for k detection windows.
    pub fn over_windows(&self, k: usize) -> Self {
        let p = self.p_d();
        let pk = T::one() - (T::one() - p).powi(k as i32);
        Self {
            dark_rate: pk,
            window: T::one(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeraldResult<T> {
    pub probability: T,
    pub fidelity: T,
    /// Leading-order fidelity, where one is available.
    pub fidelity_simplified: T,
    pub dark_count_dominated: bool,
    pub multipair_dominated: bool,
}

fn unit_check<T: Real>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// p_h,sp = ηp₁ + 2η(1−η)p₁²/p₀ + p_d p₀.
pub fn sp_herald_probability<T: Real>(p1: T, h: &HeraldModel<T>) -> Result<T> {
    let p0 = PairDistribution::from_p1(p1)?.p0();
    let eta = h.eta();
    Ok(eta * p1 + T::lit(2.0) * eta * (T::one() - eta) * p1 * p1 / p0 + h.p_d() * p0)
}

pub fn sp_herald_fidelity<T: Real>(p1: T, h: &HeraldModel<T>) -> Result<HeraldResult<T>> {
    let p = sp_herald_probability(p1, h)?;
    let eta = h.eta();
    let fidelity = if p > T::zero() { eta * p1 / p } else { T::one() };
    let multi = T::lit(2.0) * p1 * (T::one() - eta);
    let dark = if p1 > T::zero() && eta > T::zero() {
        h.p_d() / (p1 * eta)
    } else if h.p_d() > T::zero() {
        T::infinity()
    } else {
        T::zero()
    };
    Ok(HeraldResult {
        probability: p,
        fidelity,
        fidelity_simplified: (T::one() - multi - dark).max(T::zero()),
        dark_count_dominated: dark > multi,
        multipair_dominated: multi > dark,
    })
}

/// p₁ at which the multipair and dark-count infidelities balance.
pub fn sp_dark_count_crossover<T: Real>(h: &HeraldModel<T>) -> T {
    let eta = h.eta();
    (h.p_d() / (T::lit(2.0) * eta * (T::one() - eta))).sqrt()
}

/// Population of the approximately thermal state left after a failed herald.
pub fn no_herald_residual<T: Real>(f_hsp: T) -> Result<T> {
    unit_check("F_hsp", f_hsp)?;
    Ok((T::one() - f_hsp) / T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhzHerald<T> {
    pub probability: T,
    pub fidelity: T,
    /// n·p_d ≥ η·p_re/10: multiple-dark-count terms are no longer negligible.
    pub dark_count_regime: bool,
}

/// Heralding probability and fidelity for an n-qubit GHZ state.
pub fn ghz_herald<T: Real>(n: usize, p_re: T, h: &HeraldModel<T>) -> Result<GhzHerald<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ needs n >= 2, got {n}")));
    }
    unit_check("p_re", p_re)?;
    let eta = h.eta();
    let q = eta * p_re;
    let nn = T::from_usize_lossy(n);
    let pd = h.p_d();
    let dark = if q > T::zero() {
        T::one() + nn * nn * pd * (T::one() - q) / q
    } else {
        T::one()
    };
    let base = T::lit(2.0) * q.powi(n as i32) * (T::one() - q).powi(n as i32);
    let probability = if q > T::zero() {
        base * dark
    } else {
        T::zero()
    };
    let loss = if T::one() - q > T::zero() {
        ((T::one() - p_re) / (T::one() - q)).powi(n as i32)
    } else {
        T::one()
    };
    Ok(GhzHerald {
        probability,
        fidelity: loss / dark,
        dark_count_regime: nn * pd >= q / T::lit(10.0),
    })
}

pub fn ghz_herald_probability<T: Real>(n: usize, p_re: T, h: &HeraldModel<T>) -> Result<T> {
    Ok(ghz_herald(n, p_re, h)?.probability)
}

pub fn ghz_herald_fidelity<T: Real>(n: usize, p_re: T, h: &HeraldModel<T>) -> Result<T> {
    Ok(ghz_herald(n, p_re, h)?.fidelity)
}

/// p_re maximizing the heralding probability, 1/(2η), capped at 1.
pub fn ghz_optimal_retrieval<T: Real>(h: &HeraldModel<T>) -> T {
    (T::lit(2.0) * h.eta()).recip().min(T::one())
}

/// 1 − Π(1 − p_k).
pub fn effective_retrieval<T: Real>(p_list: &[T]) -> Result<T> {
    let mut eff = T::zero();
    for (k, &p) in p_list.iter().enumerate() {
        unit_check(&format!("p_re[{k}]"), p)?;
        eff += (T::one() - eff) * p;
    }
    Ok(eff)
}
