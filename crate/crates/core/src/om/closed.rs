//! Closed-form expressions for pumping, cooling, squeezing and swapping.

use serde::Serialize;

use super::params::SystemParams;
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PumpAmplitude<T> {
    /// Intracavity photon number |α|².
    pub alpha_sq: T,
    /// |α|, taken real and non-negative.
    pub alpha: T,
}

impl<T: Real> PumpAmplitude<T> {
    pub fn from_alpha_sq(alpha_sq: T) -> Self {
        Self {
            alpha_sq,
            alpha: alpha_sq.max(T::zero()).sqrt(),
        }
    }

    /// Stiff-pump check: the pump amplitude must dominate the quantum
    /// correlations it is replaced for, |α| ≫ 2g/κ · |⟨a b⟩|. `corr` bounds
    /// |⟨a b⟩|; a margin of 10 is required.
    pub fn stiff_pump_ok(&self, g: T, kappa: T, corr: T) -> bool {
        self.alpha >= T::lit(10.0) * T::lit(2.0) * g / kappa * corr
    }
}

/// Steady-state intracavity pump photon number for input power `power` (W).
pub fn pump_photon_number<T: Real>(p: &SystemParams<T>, power: T) -> PumpAmplitude<T> {
    let k = p.kappa();
    let a2 = T::lit(4.0) * p.kappa_ex / (k * k) * power / (T::lit(HBAR) * p.omega0);
    PumpAmplitude::from_alpha_sq(a2)
}

/// Power that produces intracavity photon number `alpha_sq`.
pub fn power_for_photon_number<T: Real>(p: &SystemParams<T>, alpha_sq: T) -> T {
    let k = p.kappa();
    alpha_sq * k * k * T::lit(HBAR) * p.omega0 / (T::lit(4.0) * p.kappa_ex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Damping<T> {
    /// Optical damping rate Γ_opt, rad/s.
    pub gamma_opt: T,
    /// Pump-enhanced cooperativity C = C₀|α|².
    pub cooperativity: T,
    /// 2g₀|α| < κ/2.
    pub weak_coupling: bool,
}

pub fn optical_damping<T: Real>(p: &SystemParams<T>, alpha: &PumpAmplitude<T>) -> Damping<T> {
    let k = p.kappa();
    Damping {
        gamma_opt: T::lit(4.0) * p.g0 * p.g0 * alpha.alpha_sq / k,
        cooperativity: p.c0() * alpha.alpha_sq,
        weak_coupling: T::lit(2.0) * p.g0 * alpha.alpha < k / T::lit(2.0),
    }
}

/// Steady-state phonon number under continuous cooling.
pub fn cooled_population<T: Real>(p: &SystemParams<T>, alpha: &PumpAmplitude<T>) -> T {
    p.n_th / (p.c0() * alpha.alpha_sq + T::one())
}

/// Weak-coupling rate equation dn/dt = −(Γ_opt+Γ)(n − n_ss) for a constant
/// drive, solved in closed form.
pub fn cooling_rate_equation<T: Real>(
    p: &SystemParams<T>,
    alpha: &PumpAmplitude<T>,
    n_init: T,
    t: T,
) -> T {
    let d = optical_damping(p, alpha);
    let n_ss = cooled_population(p, alpha);
    n_ss + (n_init - n_ss) * (-(d.gamma_opt + p.gamma) * t).exp()
}

/// (1 − e^{−2x})/(2x), continuous at 0.
fn h<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        T::one() - x
    } else {
        -(-T::lit(2.0) * x).exp_m1() / (T::lit(2.0) * x)
    }
}

/// ln[e^{−κt/2}(cosh(rt) + κ/(4r) sinh(rt))²], evaluated without overflow
/// or cancellation at small t.
fn log_growth<T: Real>(r: T, kappa: T, t: T) -> T {
    let x = r * t;
    let d = kappa * t / T::lit(4.0) - x;
    -T::lit(2.0) * d + T::lit(2.0) * (h(x) * d).ln_1p()
}

/// Phonon population after squeezing for time `t` from vacuum at constant
/// blue-pump photon number.
pub fn squeeze_population<T: Real>(p: &SystemParams<T>, alpha_b: &PumpAmplitude<T>, t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let g = p.gh * alpha_b.alpha;
    let k = p.kappa();
    let q = k / T::lit(4.0);
    let gt = (g * g + q * q).sqrt();
    log_growth(gt, k, t).exp_m1()
}

/// Photon–phonon pair-number distribution, geometric with mean `n_bar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDistribution<T> {
    pub n_bar: T,
}

impl<T: Real> PairDistribution<T> {
    pub fn new(n_bar: T) -> Self {
        Self { n_bar }
    }

    /// Inverts p₁ = n̄/(1+n̄)² on the n̄ < 1 branch.
    pub fn from_p1(p1: T) -> Result<Self> {
        if p1 > T::lit(0.25) {
            return Err(Error::InvalidP1(p1.to_f64_lossy()));
        }
        if p1 < T::zero() {
            return Err(Error::InvalidParameter(format!("p1 must be >= 0, got {p1}")));
        }
        if p1 == T::zero() {
            return Ok(Self::new(T::zero()));
        }
        // p1 n² + (2p1 − 1) n + p1 = 0, smaller root in the stable form
        let b = T::one() - T::lit(2.0) * p1;
        let disc = (b * b - T::lit(4.0) * p1 * p1).max(T::zero()).sqrt();
        Ok(Self::new(T::lit(2.0) * p1 / (b + disc)))
    }

    pub fn p0(&self) -> T {
        (T::one() + self.n_bar).recip()
    }

    pub fn p1(&self) -> T {
        self.n_bar / ((T::one() + self.n_bar) * (T::one() + self.n_bar))
    }

    pub fn p(&self, k: usize) -> T {
        let q = self.n_bar / (T::one() + self.n_bar);
        self.p0() * q.powi(k as i32)
    }

    pub fn mean(&self) -> T {
        self.n_bar
    }

    pub fn variance(&self) -> T {
        self.n_bar * (self.n_bar + T::one())
    }
}

/// Red-pump power at which g₀|α| reaches κ/4.
pub fn strong_coupling_power<T: Real>(p: &SystemParams<T>) -> T {
    let k = p.kappa();
    power_for_photon_number(p, k * k / (T::lit(16.0) * p.g0 * p.g0))
}

fn check_weak<T: Real>(p: &SystemParams<T>, alpha: &PumpAmplitude<T>) -> Result<T> {
    let g = p.g0 * alpha.alpha;
    let lim = p.kappa() / T::lit(4.0);
    if g >= lim {
        return Err(Error::StrongCoupling {
            coupling: g.to_f64_lossy(),
            limit: lim.to_f64_lossy(),
            power_threshold: strong_coupling_power(p).to_f64_lossy(),
        });
    }
    Ok(g)
}

/// Phonon and output-photon populations during a constant red drive
/// starting from `n_ph0` phonons and an empty cavity (Γ neglected).
pub fn swap_populations<T: Real>(
    p: &SystemParams<T>,
    alpha_r: &PumpAmplitude<T>,
    t: T,
    n_ph0: T,
) -> Result<(T, T)> {
    let g = check_weak(p, alpha_r)?;
    if t <= T::zero() {
        return Ok((n_ph0, T::zero()));
    }
    let k = p.kappa();
    let q = k / T::lit(4.0);
    let zeta = (q * q - g * g).sqrt();
    let n_ph = n_ph0 * log_growth(zeta, k, t).exp();
    // (g²/ζ²) e^{−κt/2} sinh²(ζt) = g²t² e^{2ζt−κt/2} h(ζt)²
    let x = zeta * t;
    let hx = h(x);
    let n_0 = n_ph0 * g * g * t * t * hx * hx * (T::lit(2.0) * x - k * t / T::lit(2.0)).exp();
    Ok((n_ph, n_0))
}

/// Long-time, weak-coupling retrieval efficiency bound η_ex·C/(C+1).
pub fn retrieval_bound<T: Real>(p: &SystemParams<T>, alpha_r: &PumpAmplitude<T>) -> T {
    let c = p.c0() * alpha_r.alpha_sq;
    p.eta_ex() * c / (c + T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target() -> SystemParams<f64> {
        SystemParams::target()
    }

    #[test]
    fn pump_numbers() {
        let p = target();
        assert_eq!(pump_photon_number(&p, 0.0).alpha_sq, 0.0);
        let a = pump_photon_number(&p, 1e-3);
        assert!((a.alpha_sq - 4.97e6).abs() / 4.97e6 < 5e-3, "{}", a.alpha_sq);
        let mut p3 = p;
        p3.kappa_ex = p.kappa() / 4.0;
        p3.kappa_int = p.kappa() - p3.kappa_ex;
        let mut p4 = p3;
        p4.kappa_ex = p.kappa() / 2.0;
        p4.kappa_int = p.kappa() - p4.kappa_ex;
        let r = pump_photon_number(&p4, 1e-3).alpha_sq / pump_photon_number(&p3, 1e-3).alpha_sq;
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn damping_and_cooling() {
        let p = target();
        let a = pump_photon_number(&p, 1e-3);
        let d = optical_damping(&p, &a);
        let tp = std::f64::consts::TAU;
        assert!((d.gamma_opt / tp / 0.2e9 - 1.0).abs() < 0.1);
        assert!(d.weak_coupling);
        let n = cooled_population(&p, &a);
        assert!((n / 2e-7 - 1.0).abs() < 0.2, "{n}");
        let mut q = p;
        q.n_th = 1.0;
        let a9 = PumpAmplitude::from_alpha_sq(9.0 / q.c0());
        assert!((cooled_population(&q, &a9) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rate_equation_fixed_point() {
        let p = target();
        let a = pump_photon_number(&p, 1e-3);
        let n_ss = cooled_population(&p, &a);
        assert!((cooling_rate_equation(&p, &a, n_ss, 1e-9) - n_ss).abs() < 1e-20);
    }

    #[test]
    fn squeeze_small_time_is_quadratic() {
        let p = target();
        let a = pump_photon_number(&p, 1e-4);
        assert_eq!(squeeze_population(&p, &a, 0.0), 0.0);
        let g = p.gh * a.alpha;
        for &x in &[1e-4, 1e-3, 0.01, 0.05] {
            let t = x / g;
            let n = squeeze_population(&p, &a, t);
            // κ damping reduces growth once κt is not small; compare only in the
            // regime where the cavity has not yet responded.
            if p.kappa() * t < 1e-2 {
                assert!((n / (x * x) - 1.0).abs() < 0.01, "x={x} n={n}");
            }
        }
    }

    #[test]
    fn pair_distribution_moments() {
        let d = PairDistribution::new(1.0f64);
        assert!((d.p0() - 0.5).abs() < 1e-15);
        assert!((d.p1() - 0.25).abs() < 1e-15);
        assert!((d.p(2) - 0.125).abs() < 1e-15);
        let d = PairDistribution::new(0.3f64);
        let (m, v): (f64, f64) = (0..200).fold((0.0, 0.0), |(m, v), k| {
            let pk = d.p(k);
            (m + k as f64 * pk, v + (k * k) as f64 * pk)
        });
        assert!((m - 0.3).abs() < 1e-12);
        assert!((v - m * m - d.variance()).abs() < 1e-12);
        assert!(PairDistribution::from_p1(0.3f64).is_err());
        let r = PairDistribution::from_p1(d.p1()).unwrap();
        assert!((r.n_bar - 0.3).abs() < 1e-12);
    }

    #[test]
    fn swap_limits() {
        let p = target();
        let a = pump_photon_number(&p, 1e-3);
        assert_eq!(swap_populations(&p, &a, 0.0, 1.0).unwrap(), (1.0, 0.0));
        let z = PumpAmplitude::from_alpha_sq(0.0);
        let (n, n0) = swap_populations(&p, &z, 1e-9, 1.0).unwrap();
        assert!((n - 1.0).abs() < 1e-12 && n0 == 0.0);
        let threshold = strong_coupling_power(&p);
        assert!((threshold / 1.3e-3 - 1.0).abs() < 0.05, "{threshold}");
        let strong = pump_photon_number(&p, 1.5e-3);
        assert!(matches!(
            swap_populations(&p, &strong, 1e-9, 1.0),
            Err(Error::StrongCoupling { .. })
        ));
        let nt = SystemParams::<f64>::near_term();
        assert!((strong_coupling_power(&nt) / 1.6e-3 - 1.0).abs() < 0.05);
    }
}
