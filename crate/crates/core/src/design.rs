//! Operating-point search for the parallel single-photon source: total
//! fidelity as a function of the free knobs, its maximization, and the
//! smallest coupling rate g₀ that reaches a fidelity target.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::herald::{no_herald_residual, sp_herald_fidelity, HeraldModel, HeraldResult};
use crate::multiplex::{expected_max_cycle, total_fidelity, FidelityBudget, ScheduleParams};
use crate::om::{
    cooled_population, optical_damping, pump_photon_number, squeeze_population, swap_populations,
    PairDistribution, PumpAmplitude, SystemParams,
};
use crate::optim::{golden_section_min, nelder_mead_min, NelderMeadOptions};
use crate::scalar::Real;

/// Detector dark-count rate, counts/s.
pub const DARK_RATE: f64 = 100.0;
/// Classical feedback allowance per heralding cycle, s.
pub const FEEDBACK_TIME: f64 = 5e-9;
/// Drive rise and fall allowance per cycle, in optical periods 2π/κ.
pub const RISE_PERIODS: f64 = 8.0;
/// Drive power limit, W.
pub const MAX_DRIVE_POWER: f64 = 1e-3;
/// Drives are capped at g₀|α| ≤ margin · κ/4.
pub const WEAK_COUPLING_MARGIN: f64 = 0.99;

/// Search box, (lower, upper).
pub const KAPPA_EX_RANGE: (f64, f64) = (std::f64::consts::TAU * 1e6, std::f64::consts::TAU * 1e9);
pub const P1_RANGE: (f64, f64) = (1e-5, 0.24);
pub const T_INIT_RANGE: (f64, f64) = (1e-9, 1e-4);
pub const GRID_PER_DECADE: usize = 20;
/// Number of grid points refined by Nelder–Mead.
pub const REFINE_STARTS: usize = 5;
/// Candidates within this of the optimum are reported as plateaus.
pub const PLATEAU_TOL: f64 = 1e-4;

/// Bracket and relative tolerance of the g₀ search, rad/s.
pub const G0_BRACKET: (f64, f64) = (std::f64::consts::TAU * 100.0, std::f64::consts::TAU * 1e6);
pub const G0_REL_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GivenParams<T> {
    pub g0: T,
    pub eta_d: T,
    pub n_th: T,
    /// Number of OM systems run in parallel.
    pub n: usize,
    pub max_power: T,
    pub kappa_int: T,
    pub gamma: T,
    pub omega0: T,
    pub big_omega: T,
}

impl<T: Real> GivenParams<T> {
    /// Loss rates and frequencies from the near-term set, 1 mW drive limit.
    pub fn new(g0: T, eta_d: T, n_th: T, n: usize) -> Result<Self> {
        let base = SystemParams::<T>::near_term();
        let g = Self {
            g0,
            eta_d,
            n_th,
            n,
            max_power: T::lit(MAX_DRIVE_POWER),
            kappa_int: base.kappa_int,
            gamma: base.gamma,
            omega0: base.omega0,
            big_omega: base.big_omega,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g0 > T::zero()) || !self.g0.is_finite() {
            return Err(Error::InvalidParameter(format!("g0 must be > 0, got {}", self.g0)));
        }
        if !(self.eta_d > T::zero() && self.eta_d <= T::one()) {
            return Err(Error::InvalidParameter(format!("eta_d must lie in (0, 1], got {}", self.eta_d)));
        }
        if !(self.n_th >= T::zero()) {
            return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {}", self.n_th)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("N must be >= 1".into()));
        }
        if !(self.max_power > T::zero()) {
            return Err(Error::InvalidParameter("max_power must be > 0".into()));
        }
        Ok(())
    }

    pub fn system(&self, kappa_ex: T) -> SystemParams<T> {
        SystemParams {
            omega0: self.omega0,
            big_omega: self.big_omega,
            kappa_int: self.kappa_int,
            kappa_ex,
            gamma: self.gamma,
            g0: self.g0,
            gh: self.g0,
            n_th: self.n_th,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeParams<T> {
    pub kappa_ex: T,
    pub p1: T,
    /// Re-initialization drive duration, s.
    pub t_init: T,
}

impl<T: Real> FreeParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_ex > T::zero()) || !self.kappa_ex.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa_ex must be > 0, got {}", self.kappa_ex)));
        }
        if !(self.p1 > T::zero() && self.p1 < T::lit(0.25)) {
            return Err(Error::InvalidParameter(format!("p1 must lie in (0, 0.25), got {}", self.p1)));
        }
        if !(self.t_init > T::zero()) || !self.t_init.is_finite() {
            return Err(Error::InvalidParameter(format!("T_init must be > 0, got {}", self.t_init)));
        }
        Ok(())
    }
}

/// Everything behind one total-fidelity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub budget: FidelityBudget<T>,
    pub p_hsp: T,
    pub p_d: T,
    pub t_squeeze: T,
    /// Heralding cycle duration, s.
    pub t_h: T,
    /// Power of the red (cooling and retrieval) drive, W.
    pub red_power: T,
    pub blue_power: T,
    pub cooperativity: T,
    /// Fixed-point phonon population at the start of a cycle.
    pub residual: T,
    /// M̄ − 1/p_hsp.
    pub idle_cycles: T,
}

/// Parts of the evaluation that do not depend on T_init.
struct HeraldStage<T> {
    sys: SystemParams<T>,
    red: PumpAmplitude<T>,
    red_power: T,
    blue_power: T,
    t_squeeze: T,
    herald: HeraldResult<T>,
    p_d: T,
    idle_cycles: T,
    eta_re: T,
    cooperativity: T,
}

fn infeasible(e: Error) -> Error {
    match e {
        Error::Infeasible(_) => e,
        other => Error::Infeasible(other.to_string()),
    }
}

/// Largest power ≤ `max_power` keeping g|α| within the weak-coupling margin.
fn capped_drive<T: Real>(sys: &SystemParams<T>, g: T, max_power: T) -> (T, PumpAmplitude<T>) {
    let full = pump_photon_number(sys, max_power);
    let lim = T::lit(WEAK_COUPLING_MARGIN) * sys.kappa() / T::lit(4.0);
    if g * full.alpha <= lim {
        return (max_power, full);
    }
    let a = lim / g;
    let scale = a * a / full.alpha_sq;
    (max_power * scale, PumpAmplitude::from_alpha_sq(a * a))
}

/// Time for the squeeze to reach mean pair number `n_bar`.
fn squeeze_time<T: Real>(sys: &SystemParams<T>, blue: &PumpAmplitude<T>, n_bar: T) -> T {
    let mut hi = sys.kappa().recip();
    while squeeze_population(sys, blue, hi) < n_bar {
        hi = hi * T::lit(2.0);
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if squeeze_population(sys, blue, mid) < n_bar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn herald_stage<T: Real>(given: &GivenParams<T>, kappa_ex: T, p1: T) -> Result<HeraldStage<T>> {
    let sys = given.system(kappa_ex);
    sys.validate().map_err(infeasible)?;
    let period = T::two_pi() / sys.kappa();
    let (blue_power, blue) = capped_drive(&sys, sys.gh, given.max_power);
    let n_bar = PairDistribution::from_p1(p1)?.n_bar;
    let t_fast = squeeze_time(&sys, &blue, n_bar);
    // shorter than the cavity response is not possible; the power is lowered instead
    let (t_squeeze, blue_power) = if t_fast < period {
        let scale = squeeze_power_scale(&sys, &blue, n_bar, period);
        (period, blue_power * scale)
    } else {
        (t_fast, blue_power)
    };
    let window = t_squeeze + period;
    let model = HeraldModel::new(given.eta_d, sys.eta_ex(), T::lit(DARK_RATE), window).map_err(infeasible)?;
    let herald = sp_herald_fidelity(p1, &model)?;
    if !(herald.probability > T::zero()) {
        return Err(Error::Infeasible("zero heralding probability".into()));
    }
    let sched = ScheduleParams::new(given.n, herald.probability.min(T::one()), T::one(), given.gamma, given.n_th)?;
    let mc = expected_max_cycle(&sched);
    let (red_power, red) = capped_drive(&sys, sys.g0, given.max_power);
    let cooperativity = optical_damping(&sys, &red).cooperativity;
    // long-time weak-coupling retrieval
    let eta_re = sys.eta_ex() * cooperativity / (cooperativity + T::one());
    Ok(HeraldStage {
        sys,
        red,
        red_power,
        blue_power,
        t_squeeze,
        herald,
        p_d: model.p_d(),
        idle_cycles: (mc.m_bar - mc.m_single).max(T::zero()),
        eta_re,
        cooperativity,
    })
}

/// Fraction of the capped blue photon number that reaches `n_bar` at `t`.
fn squeeze_power_scale<T: Real>(sys: &SystemParams<T>, blue: &PumpAmplitude<T>, n_bar: T, t: T) -> T {
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let amp = PumpAmplitude::from_alpha_sq(blue.alpha_sq * mid);
        if squeeze_population(sys, &amp, t) < n_bar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn finish<T: Real>(given: &GivenParams<T>, st: &HeraldStage<T>, t_init: T) -> Result<Evaluation<T>> {
    let sys = &st.sys;
    let period = T::two_pi() / sys.kappa();
    let t_h = st.t_squeeze + t_init + T::lit(RISE_PERIODS) * period + T::lit(FEEDBACK_TIME);
    let rate = (T::lit(3.0) * given.n_th + T::one()) * given.gamma;
    let f_idle = (-rate * st.idle_cycles * t_h).exp();

    // residual population before each squeeze: heating from failed heralds
    // and the bath over one cycle, removed by the cooling drive
    let (keep, _) = swap_populations(sys, &st.red, t_init, T::one()).map_err(infeasible)?;
    if !(keep < T::one()) {
        return Err(Error::Infeasible("cooling drive removes no phonons".into()));
    }
    let n_ss = cooled_population(sys, &st.red);
    let heat = (T::one() - st.herald.probability).max(T::zero()) * no_herald_residual(st.herald.fidelity)?
        + given.n_th * -(-given.gamma * t_h).exp_m1();
    let residual = n_ss + heat * keep / (T::one() - keep);
    let f_init = (T::one() - residual).max(T::zero());
    let budget = total_fidelity(f_init, st.herald.fidelity.min(T::one()), f_idle, st.eta_re)?;
    Ok(Evaluation {
        budget,
        p_hsp: st.herald.probability,
        p_d: st.p_d,
        t_squeeze: st.t_squeeze,
        t_h,
        red_power: st.red_power,
        blue_power: st.blue_power,
        cooperativity: st.cooperativity,
        residual,
        idle_cycles: st.idle_cycles,
    })
}

/// F_tot = F_init·F_hsp·F_idle·η_re for one operating point. Points that
/// violate a physical constraint return [`Error::Infeasible`].
pub fn evaluate_total_fidelity<T: Real>(given: &GivenParams<T>, free: &FreeParams<T>) -> Result<Evaluation<T>> {
    given.validate()?;
    free.validate()?;
    let st = herald_stage(given, free.kappa_ex, free.p1)?;
    finish(given, &st, free.t_init)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate<T> {
    pub free: FreeParams<T>,
    pub evaluation: Evaluation<T>,
}

impl<T: Real> Candidate<T> {
    pub fn f_tot(&self) -> T {
        self.evaluation.budget.f_tot
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerResult<T> {
    pub given: GivenParams<T>,
    pub best: Candidate<T>,
    /// Distinct refined optima within [`PLATEAU_TOL`] of the best, best first.
    pub plateaus: Vec<Candidate<T>>,
    pub grid_points: usize,
    pub feasible_points: usize,
    /// Grid points within [`PLATEAU_TOL`] of the best.
    pub near_optimal_points: usize,
    pub evaluations: usize,
}

/// `lo·10^(k/per_decade)` up to and including `hi`.
fn log_axis(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).ceil() as usize;
    (0..=steps).map(|k| lo * (hi / lo).powf(k as f64 / steps as f64)).collect()
}

/// Orders by F_tot descending, then smaller κ_ex, p1, T_init.
fn better<T: Real>(a: &Candidate<T>, b: &Candidate<T>) -> bool {
    let (fa, fb) = (a.f_tot(), b.f_tot());
    if fa != fb {
        return fa > fb;
    }
    (a.free.kappa_ex, a.free.p1, a.free.t_init) < (b.free.kappa_ex, b.free.p1, b.free.t_init)
}

/// Grid search over (κ_ex, p1, T_init) on logarithmic axes, then
/// Nelder–Mead in log coordinates from the best grid points.
pub fn maximize_fidelity<T: Real>(given: &GivenParams<T>) -> Result<OptimizerResult<T>> {
    use rayon::prelude::*;
    given.validate()?;
    let kx = log_axis(KAPPA_EX_RANGE.0, KAPPA_EX_RANGE.1, GRID_PER_DECADE);
    let px = log_axis(P1_RANGE.0, P1_RANGE.1, GRID_PER_DECADE);
    let tx = log_axis(T_INIT_RANGE.0, T_INIT_RANGE.1, GRID_PER_DECADE);
    let rows: Vec<Vec<Option<Candidate<T>>>> = kx
        .par_iter()
        .flat_map_iter(|&k| px.iter().map(move |&p| (k, p)))
        .map(|(k, p)| {
            let (k, p) = (T::lit(k), T::lit(p));
            match herald_stage(given, k, p) {
                Ok(st) => tx
                    .iter()
                    .map(|&t| {
                        let free = FreeParams { kappa_ex: k, p1: p, t_init: T::lit(t) };
                        finish(given, &st, free.t_init).ok().map(|evaluation| Candidate { free, evaluation })
                    })
                    .collect(),
                Err(_) => vec![None; tx.len()],
            }
        })
        .collect();
    let grid: Vec<Candidate<T>> = rows.into_iter().flatten().flatten().collect();
    let grid_points = kx.len() * px.len() * tx.len();
    if grid.is_empty() {
        return Err(Error::Infeasible("no grid point satisfies the constraints".into()));
    }
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        if better(&grid[a], &grid[b]) {
            std::cmp::Ordering::Less
        } else if better(&grid[b], &grid[a]) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });

    let bounds = [KAPPA_EX_RANGE, P1_RANGE, T_INIT_RANGE].map(|(a, b)| (T::lit(a).ln(), T::lit(b).ln()));
    let objective = |x: &[T]| -> T {
        if x.iter().zip(&bounds).any(|(v, (a, b))| !(*v >= *a && *v <= *b)) {
            return T::lit(2.0);
        }
        let free = FreeParams {
            kappa_ex: x[0].exp(),
            p1: x[1].exp(),
            t_init: x[2].exp(),
        };
        match evaluate_total_fidelity(given, &free) {
            Ok(e) => T::one() - e.budget.f_tot,
            Err(_) => T::lit(2.0),
        }
    };
    let opts = NelderMeadOptions {
        max_evals: 2000,
        f_tol: T::lit(1e-14),
        step: T::lit(std::f64::consts::LN_10 / GRID_PER_DECADE as f64),
    };
    let mut evaluations = grid_points;
    let mut refined: Vec<Candidate<T>> = Vec::new();
    for &i in order.iter().take(REFINE_STARTS) {
        let c = &grid[i];
        let x0 = [c.free.kappa_ex.ln(), c.free.p1.ln(), c.free.t_init.ln()];
        let mut count = 0usize;
        let (x, _) = nelder_mead_min(
            |x| {
                count += 1;
                objective(x)
            },
            &x0,
            &opts,
        );
        evaluations += count;
        let free = FreeParams {
            kappa_ex: x[0].exp(),
            p1: x[1].exp(),
            t_init: x[2].exp(),
        };
        let cand = match evaluate_total_fidelity(given, &free) {
            Ok(evaluation) if evaluation.budget.f_tot >= c.f_tot() => Candidate { free, evaluation },
            _ => *c,
        };
        refined.push(cand);
    }
    refined.sort_by(|a, b| {
        if better(a, b) {
            std::cmp::Ordering::Less
        } else if better(b, a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    let best = refined[0];
    let tol = T::lit(PLATEAU_TOL);
    let mut plateaus: Vec<Candidate<T>> = Vec::new();
    for c in refined {
        if c.f_tot() < best.f_tot() - tol {
            continue;
        }
        let distinct = plateaus.iter().all(|q| {
            let d = |a: T, b: T| (a / b).ln().abs();
            d(c.free.kappa_ex, q.free.kappa_ex) > T::lit(0.05)
                || d(c.free.p1, q.free.p1) > T::lit(0.05)
                || d(c.free.t_init, q.free.t_init) > T::lit(0.05)
        });
        if distinct {
            plateaus.push(c);
        }
    }
    let near_optimal_points = grid.iter().filter(|c| c.f_tot() >= best.f_tot() - tol).count();
    Ok(OptimizerResult {
        given: *given,
        best,
        plateaus,
        grid_points,
        feasible_points: grid.len(),
        near_optimal_points,
        evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinG0<T> {
    /// Smallest bracketed g₀ meeting the target, rad/s.
    pub g0: T,
    pub target: T,
    /// Final bracket (fails, meets); equal when the lower end already meets.
    pub bracket: (T, T),
    pub iterations: usize,
    pub optimum: OptimizerResult<T>,
}

/// Bisection on ln g₀ for the crossing of the maximized F_tot with `target`.
/// The returned g₀ meets the target and g₀/(1 + tol) does not (assuming
/// F_tot rises with g₀).
pub fn min_g0<T: Real>(eta_d: T, n_th: T, n: usize, target: T) -> Result<MinG0<T>> {
    if !(target >= T::zero() && target < T::one()) {
        return Err(Error::InvalidParameter(format!("target must lie in [0, 1), got {target}")));
    }
    let at = |g0: T| -> Result<Option<OptimizerResult<T>>> {
        match maximize_fidelity(&GivenParams::new(g0, eta_d, n_th, n)?) {
            Ok(r) => Ok(Some(r)),
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let meets = |r: &Option<OptimizerResult<T>>| r.as_ref().is_some_and(|r| r.best.f_tot() >= target);
    let (mut lo, mut hi) = (T::lit(G0_BRACKET.0), T::lit(G0_BRACKET.1));
    let r_lo = at(lo)?;
    if meets(&r_lo) || target == T::zero() {
        let optimum = r_lo.ok_or_else(|| Error::Infeasible("no feasible point at the lower bracket".into()))?;
        return Ok(MinG0 {
            g0: lo,
            target,
            bracket: (lo, lo),
            iterations: 0,
            optimum,
        });
    }
    let r_hi = at(hi)?;
    let mut best_hi = match r_hi {
        Some(r) if r.best.f_tot() >= target => r,
        other => {
            return Err(Error::NoCrossing {
                target: target.to_f64_lossy(),
                best: other.map_or(0.0, |r| r.best.f_tot().to_f64_lossy()),
            })
        }
    };
    let mut iterations = 0;
    while hi / lo > T::one() + T::lit(G0_REL_TOL) {
        let mid = (lo * hi).sqrt();
        let r = at(mid)?;
        iterations += 1;
        if meets(&r) {
            hi = mid;
            best_hi = r.expect("meets implies feasible");
        } else {
            lo = mid;
        }
    }
    Ok(MinG0 {
        g0: hi,
        target,
        bracket: (lo, hi),
        iterations,
        optimum: best_hi,
    })
}

/// Fixed initialization, retrieval and cycle time; only p1 is tuned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedBudget<T> {
    pub f_init: T,
    pub eta_re: T,
    /// Heralding cycle duration, s.
    pub t_h: T,
}

impl<T: Real> FixedBudget<T> {
    pub fn target() -> Self {
        Self {
            f_init: T::lit(0.999),
            eta_re: T::lit(0.998),
            t_h: T::lit(10e-9),
        }
    }

    pub fn near_term() -> Self {
        Self {
            f_init: T::lit(0.99),
            eta_re: T::lit(0.97),
            t_h: T::lit(200e-9),
        }
    }

    /// Settings matching a preset name.
    pub fn for_preset(name: &str) -> Result<Self> {
        match name {
            "target" => Ok(Self::target()),
            "near-term" | "near_term" | "nearterm" => Ok(Self::near_term()),
            other => Err(Error::Config(format!("no fixed budget for preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint<T> {
    pub p1: T,
    pub p_hsp: T,
    pub budget: FidelityBudget<T>,
}

/// Budget at one p1. Dark counts accumulate over the whole cycle.
pub fn fixed_budget_point<T: Real>(
    sys: &SystemParams<T>,
    eta_d: T,
    n: usize,
    fixed: &FixedBudget<T>,
    p1: T,
) -> Result<TradeoffPoint<T>> {
    let model = HeraldModel::new(eta_d, sys.eta_ex(), T::lit(DARK_RATE), fixed.t_h)?;
    let h = sp_herald_fidelity(p1, &model)?;
    let sched = ScheduleParams::new(n, h.probability.min(T::one()), fixed.t_h, sys.gamma, sys.n_th)?;
    let mc = expected_max_cycle(&sched);
    let idle = (mc.m_bar - mc.m_single).max(T::zero());
    let f_idle = (-sched.idle_rate() * idle * fixed.t_h).exp();
    Ok(TradeoffPoint {
        p1,
        p_hsp: h.probability,
        budget: total_fidelity(fixed.f_init, h.fidelity.min(T::one()), f_idle, fixed.eta_re)?,
    })
}

/// p1 maximizing F_tot: log grid over [`P1_RANGE`], then golden section
/// around the best grid point.
pub fn optimize_fixed_budget<T: Real>(
    sys: &SystemParams<T>,
    eta_d: T,
    n: usize,
    fixed: &FixedBudget<T>,
) -> Result<TradeoffPoint<T>> {
    let axis = log_axis(P1_RANGE.0, P1_RANGE.1, GRID_PER_DECADE);
    let mut best: Option<(usize, TradeoffPoint<T>)> = None;
    for (i, &p) in axis.iter().enumerate() {
        let pt = fixed_budget_point(sys, eta_d, n, fixed, T::lit(p))?;
        if best.as_ref().is_none_or(|(_, b)| pt.budget.f_tot > b.budget.f_tot) {
            best = Some((i, pt));
        }
    }
    let (i, grid_best) = best.expect("non-empty axis");
    let lo = T::lit(axis[i.saturating_sub(1)]).ln();
    let hi = T::lit(axis[(i + 1).min(axis.len() - 1)]).ln();
    let (x, _) = golden_section_min(
        |x: T| {
            fixed_budget_point(sys, eta_d, n, fixed, x.exp()).map_or(T::lit(2.0), |p| T::one() - p.budget.f_tot)
        },
        lo,
        hi,
        T::lit(1e-6),
    );
    let refined = fixed_budget_point(sys, eta_d, n, fixed, x.exp())?;
    Ok(if refined.budget.f_tot >= grid_best.budget.f_tot { refined } else { grid_best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(x: f64) -> f64 {
        std::f64::consts::TAU * x
    }

    #[test]
    fn ideal_limit() {
        let mut g = GivenParams::new(tau(1e6), 1.0, 0.0, 1).unwrap();
        g.kappa_int = tau(1.0);
        g.gamma = tau(1e-3);
        let free = FreeParams {
            kappa_ex: tau(1e9),
            p1: 1e-2,
            t_init: 1e-6,
        };
        let e = evaluate_total_fidelity(&g, &free).unwrap();
        assert!(e.budget.f_tot > 0.9999, "{:?}", e.budget);
    }

    #[test]
    fn cycle_time_accounting() {
        let g = GivenParams::new(tau(10e3), 0.9, 0.01, 10).unwrap();
        let free = FreeParams {
            kappa_ex: tau(50e6),
            p1: 0.01,
            t_init: 100e-9,
        };
        let e = evaluate_total_fidelity(&g, &free).unwrap();
        let period = 1.0 / 51e6;
        assert!(e.t_squeeze >= period * (1.0 - 1e-12));
        let expect = e.t_squeeze + 100e-9 + 8.0 * period + 5e-9;
        assert!((e.t_h - expect).abs() < 1e-18);
        assert!((e.p_d - 100.0 * (e.t_squeeze + period)).abs() < 1e-15);
        assert!(e.red_power <= 1e-3 && e.blue_power <= 1e-3);
    }

    #[test]
    fn rejects_bad_free_params() {
        let g = GivenParams::new(tau(10e3), 0.9, 0.01, 10).unwrap();
        let bad = FreeParams {
            kappa_ex: tau(50e6),
            p1: 0.3,
            t_init: 1e-7,
        };
        assert!(matches!(evaluate_total_fidelity(&g, &bad), Err(Error::InvalidParameter(_))));
        // cavity wider than the mechanical frequency
        let wide = FreeParams {
            kappa_ex: tau(20e9),
            p1: 0.01,
            t_init: 1e-7,
        };
        assert!(matches!(evaluate_total_fidelity(&g, &wide), Err(Error::Infeasible(_))));
    }

    #[test]
    fn fixed_budget_has_interior_optimum() {
        let sys = SystemParams::<f64>::target().with_bath_temperature(0.04);
        let fixed = FixedBudget::target();
        let opt = optimize_fixed_budget(&sys, 0.9, 1000, &fixed).unwrap();
        assert!(opt.p1 > P1_RANGE.0 * 1.01 && opt.p1 < P1_RANGE.1 * 0.99);
        for k in [0.3, 3.0] {
            let p = fixed_budget_point(&sys, 0.9, 1000, &fixed, opt.p1 * k).unwrap();
            assert!(p.budget.f_tot < opt.budget.f_tot);
        }
        assert!(opt.budget.f_tot >= 0.99, "{:?}", opt);
    }

    #[test]
    fn log_axis_density() {
        let a = log_axis(1e-3, 1.0, 20);
        assert_eq!(a.len(), 61);
        assert!((a[60] - 1.0).abs() < 1e-12);
    }
}
