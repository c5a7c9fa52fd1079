//! Order statistics of N parallel heralded sources, idling decay, the total
//! single-photon fidelity budget and dual-rail lifetimes.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{evolve, DensityMatrix, EvolveOptions, LindbladSpec, ModeKind, ModeRegistry};
use crate::scalar::{Field, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleParams<T> {
    /// Number of OM systems.
    pub n: usize,
    pub p_hsp: T,
    /// Heralding cycle duration, s.
    pub t_h: T,
    /// Acoustic linewidth, rad/s.
    pub gamma: T,
    pub n_th: T,
}

impl<T: Real> ScheduleParams<T> {
    pub fn new(n: usize, p_hsp: T, t_h: T, gamma: T, n_th: T) -> Result<Self> {
        let s = Self {
            n,
            p_hsp,
            t_h,
            gamma,
            n_th,
        };
        s.validate()?;
        Ok(s)
    }

    /// Only N and p set; timing and decay left at zero.
    pub fn counting(n: usize, p_hsp: T) -> Result<Self> {
        Self::new(n, p_hsp, T::one(), T::zero(), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        if !(self.p_hsp > T::zero() && self.p_hsp <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "p_hsp must lie in (0, 1], got {}",
                self.p_hsp
            )));
        }
        if !(self.t_h > T::zero()) || self.gamma < T::zero() || self.n_th < T::zero() {
            return Err(Error::InvalidParameter(
                "T_h must be > 0, Gamma and n_th >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Decay rate of an idling single phonon, (3n_th+1)Γ.
    pub fn idle_rate(&self) -> T {
        (T::lit(3.0) * self.n_th + T::one()) * self.gamma
    }
}

/// P(all N sources heralded within M cycles) = (1 − (1−p)^M)^N.
pub fn herald_cdf<T: Real>(m: u64, s: &ScheduleParams<T>) -> T {
    if m == 0 {
        return T::zero();
    }
    // 1 − (1−p)^M without cancellation for small p
    let single = if s.p_hsp >= T::one() {
        T::one()
    } else {
        -(T::from_u64(m).unwrap() * (-s.p_hsp).ln_1p()).exp_m1()
    };
    single.powi(s.n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCycle<T> {
    /// Expected cycle on which the last source heralds.
    pub m_bar: T,
    /// Expected herald cycle of one source, 1/p.
    pub m_single: T,
    /// Cycles summed before the tail bound was met.
    pub terms: u64,
}

/// Relative accuracy of the truncated series for M̄.
pub const MAX_CYCLE_REL_TOL: f64 = 1e-12;

/// Below this p the sum is replaced by its Euler–Maclaurin expansion.
pub const MAX_CYCLE_SERIES_P: f64 = 0.02;

/// M̄ = Σ_{M≥0} (1 − 𝒫(M)), truncated once the tail bound
/// N(1−p)^{M+1}/p falls below the tolerance. For small p the sum has
/// O(1/p) terms and the Euler–Maclaurin form is used instead (`terms` = 0).
pub fn expected_max_cycle<T: Real>(s: &ScheduleParams<T>) -> MaxCycle<T> {
    let p = s.p_hsp;
    if p < T::lit(MAX_CYCLE_SERIES_P) {
        return MaxCycle {
            m_bar: max_cycle_euler_maclaurin(s.n, p),
            m_single: p.recip(),
            terms: 0,
        };
    }
    let q = T::one() - p;
    let nn = T::from_usize_lossy(s.n);
    let tol = T::lit(MAX_CYCLE_REL_TOL);
    let mut sum = T::zero();
    let mut m: u64 = 0;
    loop {
        sum += T::one() - herald_cdf(m, s);
        m += 1;
        let tail = if q > T::zero() {
            nn * q.powf(T::from_u64(m).unwrap()) / p
        } else {
            T::zero()
        };
        if tail <= tol * sum {
            break;
        }
    }
    MaxCycle {
        m_bar: sum,
        m_single: p.recip(),
        terms: m,
    }
}

/// H_N/a + 1/2 − Σ_k B_2k/(2k)! f^(2k−1)(0) with a = −ln(1−p) and
/// f(x) = 1 − (1 − e^{−ax})^N. The odd derivatives at 0 vanish below order
/// N, so only N ≤ 5 picks up corrections; the next term is O(a⁷).
fn max_cycle_euler_maclaurin<T: Real>(n: usize, p: T) -> T {
    let a = -(-p).ln_1p();
    let harmonic = (1..=n).rev().fold(T::zero(), |acc, k| acc + T::from_usize_lossy(k).recip());
    let mut sum = harmonic / a + T::lit(0.5);
    if n <= 5 {
        for (j, b) in [(1i32, 1.0 / 12.0), (3, -1.0 / 720.0), (5, 1.0 / 30240.0)] {
            // f^(j)(0) = −(−a)^j Σ_k C(N,k)(−1)^k k^j
            let mut binom = 1.0f64;
            let mut acc = 0.0f64;
            for k in 1..=n {
                binom = binom * (n + 1 - k) as f64 / k as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * (k as f64).powi(j);
            }
            let deriv = -(-a).powi(j) * T::lit(acc);
            sum -= T::lit(b) * deriv;
        }
    }
    sum
}

/// Exact inclusion–exclusion form Σ_k C(N,k)(−1)^{k+1}/(1 − (1−p)^k), over
/// any field. Alternating terms cancel badly in floating point for large N;
/// use an exact field there.
pub fn expected_max_cycle_exact<F: Field>(n: usize, p: F) -> F {
    let q = F::one() - p;
    let mut qk = F::one();
    let mut binom = F::one();
    let mut sum = F::zero();
    for k in 1..=n {
        binom = binom * F::from_i64((n + 1 - k) as i64) / F::from_i64(k as i64);
        qk = qk * q.clone();
        let term = binom.clone() / (F::one() - qk.clone());
        sum = if k % 2 == 1 { sum + term } else { sum - term };
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdleFidelity<T> {
    pub f_idle: T,
    /// (n_th+1)Γ, loss from |1⟩.
    pub loss_rate: T,
    /// 2n_thΓ, heating from |1⟩ to |2⟩.
    pub heating_rate: T,
    /// M̄ − m̄.
    pub idle_cycles: T,
}

/// exp(−(3n_th+1)Γ(M̄ − m̄)T_h).
pub fn idling_fidelity<T: Real>(s: &ScheduleParams<T>) -> IdleFidelity<T> {
    let mc = expected_max_cycle(s);
    let idle = (mc.m_bar - mc.m_single).max(T::zero());
    IdleFidelity {
        f_idle: (-s.idle_rate() * idle * s.t_h).exp(),
        loss_rate: (s.n_th + T::one()) * s.gamma,
        heating_rate: T::lit(2.0) * s.n_th * s.gamma,
        idle_cycles: idle,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityBudget<T> {
    pub f_init: T,
    pub f_hsp: T,
    pub f_idle: T,
    pub eta_re: T,
    pub f_tot: T,
}

pub fn total_fidelity<T: Real>(f_init: T, f_hsp: T, f_idle: T, eta_re: T) -> Result<FidelityBudget<T>> {
    for (name, v) in [("F_init", f_init), ("F_hsp", f_hsp), ("F_idle", f_idle), ("eta_re", eta_re)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(FidelityBudget {
        f_init,
        f_hsp,
        f_idle,
        eta_re,
        f_tot: f_init * f_hsp * f_idle * eta_re,
    })
}

/// Monte Carlo summary of the parallel schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSample {
    pub trials: u64,
    pub seed: u64,
    pub mean_m: f64,
    pub se_m: f64,
    /// Mean idle cycles per source, averaged over sources and trials.
    pub mean_idle: f64,
    pub se_idle: f64,
    /// Mean of exp(−rate·idle·T_h) over sources and trials.
    pub mean_idle_factor: f64,
    pub se_idle_factor: f64,
    /// Histogram of the last herald cycle, index M (index 0 unused).
    pub histogram: Vec<u64>,
}

impl ScheduleSample {
    /// Empirical P(M_max ≤ m) with its binomial standard error.
    pub fn cdf(&self, m: u64) -> (f64, f64) {
        let upto = (m as usize + 1).min(self.histogram.len());
        let hits: u64 = self.histogram[..upto].iter().sum();
        let f = hits as f64 / self.trials as f64;
        (f, (f * (1.0 - f) / self.trials as f64).sqrt())
    }
}

/// Trials per work unit; fixed so that results do not depend on the
/// thread count.
const CHUNK: u64 = 4096;

#[derive(Default, Clone)]
struct Acc {
    m: f64,
    m2: f64,
    idle: f64,
    idle2: f64,
    fac: f64,
    fac2: f64,
    hist: Vec<u64>,
}

/// Draws herald cycles for every source in every trial. Each trial uses its
/// own ChaCha stream, selected from the master seed by the trial index.
pub fn monte_carlo_schedule(s: &ScheduleParams<f64>, trials: u64, seed: u64) -> Result<ScheduleSample> {
    s.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let ln_q = (-s.p_hsp).ln_1p();
    let rate_th = s.idle_rate() * s.t_h;
    let n = s.n;
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Acc> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::default();
            let mut cycles = vec![0u64; n];
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let mut mx = 0;
                for slot in cycles.iter_mut() {
                    *slot = if s.p_hsp >= 1.0 {
                        1
                    } else {
                        // inverse CDF of the geometric distribution on {1, 2, ...}
                        let u: f64 = 1.0 - rng.gen::<f64>();
                        ((u.ln() / ln_q).ceil() as u64).max(1)
                    };
                    mx = mx.max(*slot);
                }
                let mf = mx as f64;
                acc.m += mf;
                acc.m2 += mf * mf;
                let mut idle_sum = 0.0;
                let mut fac_sum = 0.0;
                for &m in &cycles {
                    let idle = (mx - m) as f64;
                    idle_sum += idle;
                    fac_sum += (-rate_th * idle).exp();
                }
                let idle = idle_sum / n as f64;
                let fac = fac_sum / n as f64;
                acc.idle += idle;
                acc.idle2 += idle * idle;
                acc.fac += fac;
                acc.fac2 += fac * fac;
                if acc.hist.len() <= mx as usize {
                    acc.hist.resize(mx as usize + 1, 0);
                }
                acc.hist[mx as usize] += 1;
            }
            acc
        })
        .collect();
    let mut tot = Acc::default();
    for a in parts {
        tot.m += a.m;
        tot.m2 += a.m2;
        tot.idle += a.idle;
        tot.idle2 += a.idle2;
        tot.fac += a.fac;
        tot.fac2 += a.fac2;
        if tot.hist.len() < a.hist.len() {
            tot.hist.resize(a.hist.len(), 0);
        }
        for (t, h) in tot.hist.iter_mut().zip(&a.hist) {
            *t += h;
        }
    }
    let nt = trials as f64;
    let mean_se = |s1: f64, s2: f64| {
        let mean = s1 / nt;
        let var = (s2 / nt - mean * mean).max(0.0) * nt / (nt - 1.0).max(1.0);
        (mean, (var / nt).sqrt())
    };
    let (mean_m, se_m) = mean_se(tot.m, tot.m2);
    let (mean_idle, se_idle) = mean_se(tot.idle, tot.idle2);
    let (mean_idle_factor, se_idle_factor) = mean_se(tot.fac, tot.fac2);
    Ok(ScheduleSample {
        trials,
        seed,
        mean_m,
        se_m,
        mean_idle,
        se_idle,
        mean_idle_factor,
        se_idle_factor,
        histogram: tot.hist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualRailRates<T> {
    /// 1/((4n_th+1)Γ), s.
    pub tau_leak: T,
    /// Leakage rate read off the oracle at short times, 1/s.
    pub leak_rate_numeric: T,
    /// Bit-flip lifetime, s; infinite if the threshold is never reached.
    pub tau_x: T,
    /// Phase-flip lifetime, s; infinite if the threshold is never reached.
    pub tau_z: T,
    /// τ_X/τ_Z, absent when both are infinite.
    pub bias: Option<T>,
    pub loss_rate: T,
    pub absorption_rate: T,
    pub heating_rate: T,
}

/// Conditional error probability defining τ_X and τ_Z.
pub const LIFETIME_THRESHOLD: f64 = 0.183_939_720_585_721_16; // 1/(2e)
/// Search horizon in leakage lifetimes.
pub const LIFETIME_HORIZON: f64 = 200.0;

/// Single-rail channel elements after time t: populations of |0⟩ and |1⟩
/// from |0⟩⟨0| and |1⟩⟨1|, and ⟨1|E(|1⟩⟨0|)|0⟩.
#[derive(Debug, Clone, Copy)]
struct RailElements<T> {
    a00: T,
    a11: T,
    b00: T,
    b11: T,
    c10: Complex<T>,
}

/// Both rails share one thermal channel; the two-mode evolution factorizes
/// into single-rail evolutions of |0⟩⟨0|, |1⟩⟨1| and |1⟩⟨0|.
struct Rail<T> {
    spec: LindbladSpec<T>,
    inputs: [DensityMatrix<T>; 3],
}

impl<T: Real> Rail<T> {
    fn new(gamma: T, n_th: T) -> Result<Self> {
        let n = n_th.to_f64_lossy();
        let dim = ((10.0 * (n + 1.0)).ceil() as usize + 8).max(8);
        let reg = ModeRegistry::new([("b", dim, ModeKind::Acoustic)])?;
        let mut spec = LindbladSpec::new(&reg);
        spec.add_thermal_damping("b", gamma, n_th)?;
        // the evolution assumes Hermitian inputs, so the coherence is carried
        // by |1⟩⟨0| + |0⟩⟨1|; the channel keeps the two halves apart
        let unit = |pairs: &[(usize, usize)]| {
            let mut m = vec![Complex::new(T::zero(), T::zero()); dim * dim];
            for &(i, j) in pairs {
                m[i * dim + j] = Complex::new(T::one(), T::zero());
            }
            DensityMatrix::from_matrix(&reg, m)
        };
        let inputs = [unit(&[(0, 0)])?, unit(&[(1, 1)])?, unit(&[(1, 0), (0, 1)])?];
        Ok(Self { spec, inputs })
    }

    fn at(&self, t: T) -> Result<RailElements<T>> {
        let opts = EvolveOptions {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-12),
            ..EvolveOptions::default()
        };
        let mut out = Vec::with_capacity(3);
        for rho0 in &self.inputs {
            let (r, _) = evolve(&self.spec, rho0, &[T::zero(), t], &opts)?;
            out.push(r.into_iter().last().expect("two outputs"));
        }
        Ok(RailElements {
            b00: out[0].at(0, 0).re,
            b11: out[0].at(1, 1).re,
            a00: out[1].at(0, 0).re,
            a11: out[1].at(1, 1).re,
            c10: out[2].at(1, 0),
        })
    }
}

impl<T: Real> RailElements<T> {
    /// Probability of staying in the dual-rail subspace from |0_L⟩ = |10⟩.
    fn survival(&self) -> T {
        self.a11 * self.b00 + self.a00 * self.b11
    }

    /// Conditional P(|1_L⟩) from |0_L⟩.
    fn bit_flip(&self) -> T {
        let s = self.survival();
        if s > T::zero() {
            self.a00 * self.b11 / s
        } else {
            T::zero()
        }
    }

    /// Conditional P(|−_L⟩) from |+_L⟩.
    fn phase_flip(&self) -> T {
        let s = self.survival();
        if s > T::zero() {
            (T::lit(0.5) - self.c10.norm_sqr() / (T::lit(2.0) * s)).max(T::zero())
        } else {
            T::zero()
        }
    }
}

fn first_crossing<T: Real, F>(rail: &Rail<T>, horizon: T, f: F) -> Result<T>
where
    F: Fn(&RailElements<T>) -> T,
{
    let thr = T::lit(LIFETIME_THRESHOLD);
    if f(&rail.at(horizon)?) < thr {
        return Ok(T::infinity());
    }
    // geometric scan for a bracket, then bisection
    let mut hi = horizon;
    let mut lo = T::zero();
    let mut t = horizon;
    for _ in 0..40 {
        t /= T::lit(2.0);
        if f(&rail.at(t)?) >= thr {
            hi = t;
        } else {
            lo = t;
            break;
        }
    }
    while hi - lo > T::lit(1e-4) * hi {
        let mid = (lo + hi) / T::lit(2.0);
        if f(&rail.at(mid)?) >= thr {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Lifetimes of a phononic dual-rail qubit made of two identical
/// resonators in contact with the same bath.
pub fn dual_rail_lifetimes<T: Real>(gamma: T, n_th: T) -> Result<DualRailRates<T>> {
    if !(gamma > T::zero()) || n_th < T::zero() {
        return Err(Error::InvalidParameter("need Gamma > 0 and n_th >= 0".into()));
    }
    let four = T::lit(4.0);
    let rate = (four * n_th + T::one()) * gamma;
    let rail = Rail::new(gamma, n_th)?;
    let t_s = T::lit(1e-3) / rate;
    let s = rail.at(t_s)?.survival();
    let leak_rate_numeric = -s.ln() / t_s;
    let horizon = T::lit(LIFETIME_HORIZON) / rate;
    let (tau_x, tau_z) = if n_th > T::zero() {
        (
            first_crossing(&rail, horizon, RailElements::bit_flip)?,
            first_crossing(&rail, horizon, RailElements::phase_flip)?,
        )
    } else {
        (T::infinity(), T::infinity())
    };
    let bias = if tau_x.is_finite() || tau_z.is_finite() {
        Some(tau_x / tau_z)
    } else {
        None
    };
    Ok(DualRailRates {
        tau_leak: rate.recip(),
        leak_rate_numeric,
        tau_x,
        tau_z,
        bias,
        loss_rate: (n_th + T::one()) * gamma,
        absorption_rate: n_th * gamma,
        heating_rate: T::lit(2.0) * n_th * gamma,
    })
}
