use clap::ValueEnum;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use omcache::design::{min_g0, optimize_fixed_budget, FixedBudget};
use omcache::ghz::{
    asymptotic_breakdown, asymptotic_fit, bleed_success_probability, optimize_bleed_schedule, optimize_rounds,
    sample_herald_fidelity, single_shot, summarize, AcousticState, GhzConfig, RoundsChain,
};
use omcache::herald::{ghz_herald, sp_herald_fidelity, HeraldModel};
use omcache::multiplex::{dual_rail_lifetimes, expected_max_cycle, idling_fidelity, monte_carlo_schedule, ScheduleParams};
use omcache::om::{
    cooled_population, optical_damping, pump_photon_number, retrieval, retrieval_bound, solve_pulse_duration, Carrier,
    DrivePulse, DurationTarget,
};
use omcache::Error;

use crate::context::{knob, Context, Knob};
use crate::table::{col, Cell, Output, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Cooling-pulse durations and the continuous-drive steady state
    #[value(name = "cool")]
    Cool,
    /// Single-phonon heralding probability against fidelity
    #[value(name = "herald-tradeoff")]
    HeraldTradeoff,
    /// Retrieval efficiency against drive duration and power
    #[value(name = "retrieval")]
    Retrieval,
    /// Herald cycles of N parallel sources and the idling fidelity
    #[value(name = "schedule")]
    Schedule,
    /// Total single-photon fidelity with p1 optimized, against eta_d and N
    #[value(name = "total-fidelity")]
    TotalFidelity,
    /// Smallest g0 reaching a total-fidelity target
    #[value(name = "min-g0")]
    MinG0,
    /// Dual-rail qubit leakage, bit-flip and phase-flip lifetimes
    #[value(name = "lifetimes")]
    Lifetimes,
    /// Bell-state herald probability and fidelity against p_re
    #[value(name = "bell")]
    Bell,
    /// Iterated Bell retrieval with an optimized schedule
    #[value(name = "bleed")]
    Bleed,
    /// GHZ success probability in the weak-retrieval limit
    #[value(name = "asymptotic")]
    Asymptotic,
    /// Expected rounds to a GHZ state with adaptive retrieval
    #[value(name = "rounds-to-ghz")]
    RoundsToGhz,
}

const COOL_KNOBS: &[Knob] = &[
    knob("n_target", 1e-3, 1e-2, "phonon number to reach"),
    knob("n_residual", 0.06, 0.1, "starting population after a failed herald"),
];
const HERALD_KNOBS: &[Knob] = &[
    knob("window_ns", 4.0, 95.0, "detection window, ns"),
    knob("dark_rate_cps", 100.0, 100.0, "dark-count rate, counts/s"),
    knob("points", 60.0, 60.0, "p1 values"),
    knob("p1_min", 1e-5, 1e-5, "smallest p1"),
    knob("p1_max", 0.2, 0.2, "largest p1"),
];
const RETRIEVAL_KNOBS: &[Knob] = &[
    knob("points", 40.0, 40.0, "durations per power"),
    knob("eta_target", 0.998, 0.97, "efficiency whose duration is reported"),
];
const SCHEDULE_KNOBS: &[Knob] = &[
    knob("trials", 20000.0, 20000.0, "Monte Carlo trials per row"),
    knob("t_h_ns", 10.0, 200.0, "heralding cycle duration, ns"),
];
const TOTAL_KNOBS: &[Knob] = &[
    knob("f_init", 0.999, 0.99, "initialization fidelity"),
    knob("eta_re", 0.998, 0.97, "retrieval efficiency"),
    knob("t_h_ns", 10.0, 200.0, "heralding cycle duration, ns"),
];
const MIN_G0_KNOBS: &[Knob] = &[knob("target", 0.99, 0.99, "total-fidelity target")];
const LIFETIME_KNOBS: &[Knob] = &[];
const BELL_KNOBS: &[Knob] = &[
    knob("window_ns", 4.4, 100.0, "detection window, ns"),
    knob("dark_rate_cps", 100.0, 100.0, "dark-count rate, counts/s"),
    knob("trials", 100000.0, 100000.0, "Monte Carlo trials per p_re"),
    knob("points", 19.0, 19.0, "p_re values"),
];
const BLEED_KNOBS: &[Knob] = &[
    knob("iterations", 2.0, 2.0, "retrieval iterations"),
    knob("dark_prob", 0.0, 0.0, "dark-count probability per window"),
];
const ASYMPTOTIC_KNOBS: &[Knob] = &[knob("n_max", 6.0, 6.0, "largest number of qubits")];
const ROUNDS_KNOBS: &[Knob] = &[knob("n_max", 3.0, 3.0, "largest number of qubits")];

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cool => "cool",
            Experiment::HeraldTradeoff => "herald-tradeoff",
            Experiment::Retrieval => "retrieval",
            Experiment::Schedule => "schedule",
            Experiment::TotalFidelity => "total-fidelity",
            Experiment::MinG0 => "min-g0",
            Experiment::Lifetimes => "lifetimes",
            Experiment::Bell => "bell",
            Experiment::Bleed => "bleed",
            Experiment::Asymptotic => "asymptotic",
            Experiment::RoundsToGhz => "rounds-to-ghz",
        }
    }

    pub fn description(self) -> String {
        self.to_possible_value()
            .and_then(|v| v.get_help().map(|h| h.to_string()))
            .unwrap_or_default()
    }

    pub fn knobs(self) -> &'static [Knob] {
        match self {
            Experiment::Cool => COOL_KNOBS,
            Experiment::HeraldTradeoff => HERALD_KNOBS,
            Experiment::Retrieval => RETRIEVAL_KNOBS,
            Experiment::Schedule => SCHEDULE_KNOBS,
            Experiment::TotalFidelity => TOTAL_KNOBS,
            Experiment::MinG0 => MIN_G0_KNOBS,
            Experiment::Lifetimes => LIFETIME_KNOBS,
            Experiment::Bell => BELL_KNOBS,
            Experiment::Bleed => BLEED_KNOBS,
            Experiment::Asymptotic => ASYMPTOTIC_KNOBS,
            Experiment::RoundsToGhz => ROUNDS_KNOBS,
        }
    }

    pub fn uses_eta_d(self) -> bool {
        matches!(
            self,
            Experiment::HeraldTradeoff | Experiment::TotalFidelity | Experiment::MinG0 | Experiment::Bell | Experiment::Bleed
        )
    }

    pub fn uses_n(self) -> bool {
        matches!(self, Experiment::Schedule | Experiment::TotalFidelity | Experiment::MinG0)
    }

    /// Whether `--n-th` overrides the system's thermal population (otherwise
    /// the experiment reads it as its own input).
    pub fn n_th_is_system(self) -> bool {
        !matches!(self, Experiment::Lifetimes | Experiment::MinG0)
    }

    pub fn run(self, ctx: &Context) -> Result<Output, CliError> {
        match self {
            Experiment::Cool => cool(ctx),
            Experiment::HeraldTradeoff => herald_tradeoff(ctx),
            Experiment::Retrieval => retrieval_sweep(ctx),
            Experiment::Schedule => schedule(ctx),
            Experiment::TotalFidelity => total_fidelity(ctx),
            Experiment::MinG0 => min_g0_search(ctx),
            Experiment::Lifetimes => lifetimes(ctx),
            Experiment::Bell => bell(ctx),
            Experiment::Bleed => bleed(ctx),
            Experiment::Asymptotic => asymptotic(ctx),
            Experiment::RoundsToGhz => rounds(ctx),
        }
    }
}

const TAU: f64 = std::f64::consts::TAU;

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn unit(name: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("`{name}` must lie in [0, 1], got {v}")))
    }
}

fn opt_num(x: Option<f64>) -> Cell {
    x.map_or(Cell::Text(String::new()), Cell::Num)
}

fn cool(ctx: &Context) -> Result<Output, CliError> {
    let sys = &ctx.system;
    let n_target = ctx.knob("n_target");
    let n_res = ctx.knob("n_residual");
    let template = ctx
        .drive("cool")
        .unwrap_or_else(|| DrivePulse::tanh(1e-3, 1e-9, Carrier::Red));
    let powers = if ctx.drive("cool").is_some() {
        vec![template.power]
    } else {
        vec![0.25e-3, 0.5e-3, 1e-3]
    };
    let mut t = Table::new(vec![
        col("power_mw", "drive power, mW"),
        col("n_init", "starting phonon number"),
        col("n_target", "phonon number to reach"),
        col("duration_ns", "shortest pulse duration, ns; empty if below the steady state"),
        col("n_steady", "steady-state phonon number under the constant drive"),
        col("gamma_opt_over_2pi_hz", "optical damping rate / 2pi, Hz"),
        col("cooperativity", "pump-enhanced cooperativity"),
        col("weak_coupling", "1 if 2 g0 |alpha| < kappa/2"),
    ]);
    let mut unreachable = 0;
    for &power in &powers {
        let alpha = pump_photon_number(sys, power);
        let d = optical_damping(sys, &alpha);
        for n_init in [sys.n_th, n_res] {
            let pulse = DrivePulse { power, ..template };
            let duration = match solve_pulse_duration(sys, &pulse, DurationTarget::Population { n_init, n_target }) {
                Ok(x) => Some(x * 1e9),
                Err(Error::Unreachable { .. }) => {
                    unreachable += 1;
                    None
                }
                Err(e) => return Err(e.into()),
            };
            t.push(vec![
                (power * 1e3).into(),
                n_init.into(),
                n_target.into(),
                opt_num(duration),
                cooled_population(sys, &alpha).into(),
                (d.gamma_opt / TAU).into(),
                d.cooperativity.into(),
                Cell::Int(d.weak_coupling as i64),
            ]);
        }
    }
    let full = pump_photon_number(sys, 1e-3);
    Ok(Output {
        table: t,
        settings: json!({ "shape": format!("{:?}", template.shape), "powers_w": powers }),
        summary: json!({
            "n_steady_1mw": cooled_population(sys, &full),
            "gamma_opt_1mw_over_2pi_hz": optical_damping(sys, &full).gamma_opt / TAU,
            "unreachable_rows": unreachable,
        }),
    })
}

fn herald_tradeoff(ctx: &Context) -> Result<Output, CliError> {
    let eta_ds = ctx.flags.eta_d.map_or(vec![0.90, 0.98], |e| vec![e]);
    let window = ctx.knob("window_ns") * 1e-9;
    let rate = ctx.knob("dark_rate_cps");
    let (lo, hi) = (ctx.knob("p1_min"), ctx.knob("p1_max"));
    if !(lo > 0.0 && hi > lo && hi <= 0.25) {
        return Err(CliError::Validation("need 0 < p1_min < p1_max <= 0.25".into()));
    }
    let p1s = log_space(lo, hi, ctx.count("points")?);
    let mut t = Table::new(vec![
        col("eta_d", "detector efficiency"),
        col("p1", "single-pair probability"),
        col("p_h_sp", "single-phonon heralding probability"),
        col("F_exact", "heralding fidelity, Bayes"),
        col("F_simplified", "heralding fidelity, leading order"),
        col("p_d", "dark-count probability per window"),
    ]);
    let mut crossover = Vec::new();
    for &eta_d in &eta_ds {
        let h = HeraldModel::new(eta_d, ctx.system.eta_ex(), rate, window)?;
        crossover.push(omcache::herald::sp_dark_count_crossover(&h));
        for &p1 in &p1s {
            let r = sp_herald_fidelity(p1, &h)?;
            t.push(vec![
                eta_d.into(),
                p1.into(),
                r.probability.into(),
                r.fidelity.into(),
                r.fidelity_simplified.into(),
                h.p_d().into(),
            ]);
        }
    }
    Ok(Output {
        table: t,
        settings: json!({ "eta_d": eta_ds, "eta_ex": ctx.system.eta_ex() }),
        summary: json!({ "dark_count_crossover_p1": crossover }),
    })
}

fn retrieval_sweep(ctx: &Context) -> Result<Output, CliError> {
    let sys = &ctx.system;
    let template = ctx
        .drive("retrieve")
        .unwrap_or_else(|| DrivePulse::tanh(1e-3, 1e-9, Carrier::Red));
    let powers = if ctx.drive("retrieve").is_some() {
        vec![template.power]
    } else {
        vec![0.25e-3, 0.5e-3, 1e-3]
    };
    let k = sys.kappa();
    let durations = log_space(0.5 / k, 200.0 / k, ctx.count("points")?);
    let eta_target = unit("eta_target", ctx.knob("eta_target"))?;
    let mut t = Table::new(vec![
        col("power_mw", "drive power, mW"),
        col("duration_ns", "pulse duration, ns"),
        col("eta_re", "photons out of the external port per phonon"),
        col("p_re", "photons out of the cavity per phonon"),
        col("residual", "phonon population left per phonon"),
        col("eta_bound", "long-time weak-coupling bound eta_ex C/(C+1)"),
    ]);
    let mut solved = Vec::new();
    for &power in &powers {
        let pulse = DrivePulse { power, ..template };
        let bound = retrieval_bound(sys, &pump_photon_number(sys, power));
        for &d in &durations {
            let r = retrieval(sys, &pulse.with_duration(d))?;
            t.push(vec![
                (power * 1e3).into(),
                (d * 1e9).into(),
                r.efficiency.into(),
                r.probability.into(),
                r.residual.into(),
                bound.into(),
            ]);
        }
        let dur = match solve_pulse_duration(sys, &pulse, DurationTarget::RetrievalEfficiency { eta: eta_target }) {
            Ok(x) => Some(x * 1e9),
            Err(Error::Unreachable { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        solved.push(json!({ "power_mw": power * 1e3, "duration_ns": dur }));
    }
    Ok(Output {
        table: t,
        settings: json!({ "shape": format!("{:?}", template.shape), "powers_w": powers }),
        summary: json!({ "eta_target": eta_target, "durations_for_target": solved }),
    })
}

fn schedule(ctx: &Context) -> Result<Output, CliError> {
    let ns = ctx.flags.n.map_or(vec![1, 2, 10, 100, 1000], |n| vec![n]);
    let trials = ctx.count("trials")? as u64;
    let t_h = ctx.knob("t_h_ns") * 1e-9;
    let sys = &ctx.system;
    let mut t = Table::new(vec![
        col("N", "number of sources"),
        col("p_h_sp", "heralding probability per cycle"),
        col("M_bar", "expected cycle of the last herald"),
        col("M_bar_mc", "Monte Carlo estimate of M_bar"),
        col("M_bar_mc_se", "standard error of M_bar_mc"),
        col("idle_cycles", "M_bar - 1/p_h_sp"),
        col("F_idle", "idling fidelity"),
        col("F_idle_mc", "Monte Carlo mean idling factor"),
        col("F_idle_mc_se", "standard error of F_idle_mc"),
    ]);
    for &n in &ns {
        for p in [0.01, 0.1, 0.5] {
            let s = ScheduleParams::new(n, p, t_h, sys.gamma, sys.n_th)?;
            let mc = expected_max_cycle(&s);
            let idle = idling_fidelity(&s);
            let sample = monte_carlo_schedule(&s, trials, ctx.seed)?;
            t.push(vec![
                n.into(),
                p.into(),
                mc.m_bar.into(),
                sample.mean_m.into(),
                sample.se_m.into(),
                idle.idle_cycles.into(),
                idle.f_idle.into(),
                sample.mean_idle_factor.into(),
                sample.se_idle_factor.into(),
            ]);
        }
    }
    Ok(Output {
        table: t,
        settings: json!({ "N": ns, "p_h_sp": [0.01, 0.1, 0.5] }),
        summary: json!({}),
    })
}

fn total_fidelity(ctx: &Context) -> Result<Output, CliError> {
    let eta_ds = ctx.flags.eta_d.map_or_else(|| lin_space(0.5, 1.0, 11), |e| vec![e]);
    let ns = ctx.flags.n.map_or(vec![1, 10, 100, 1000], |n| vec![n]);
    let fixed = FixedBudget {
        f_init: unit("f_init", ctx.knob("f_init"))?,
        eta_re: unit("eta_re", ctx.knob("eta_re"))?,
        t_h: ctx.knob("t_h_ns") * 1e-9,
    };
    if !(fixed.t_h > 0.0) {
        return Err(CliError::Validation("t_h_ns must be > 0".into()));
    }
    let mut t = Table::new(vec![
        col("eta_d", "detector efficiency"),
        col("N", "number of sources"),
        col("p1", "optimal single-pair probability"),
        col("p_h_sp", "heralding probability at the optimum"),
        col("F_init", "initialization fidelity"),
        col("F_hsp", "heralding fidelity"),
        col("F_idle", "idling fidelity"),
        col("eta_re", "retrieval efficiency"),
        col("F_tot", "total single-photon fidelity"),
    ]);
    let mut best = f64::NEG_INFINITY;
    for &n in &ns {
        for &eta_d in &eta_ds {
            let pt = optimize_fixed_budget(&ctx.system, eta_d, n, &fixed)?;
            best = best.max(pt.budget.f_tot);
            t.push(vec![
                eta_d.into(),
                n.into(),
                pt.p1.into(),
                pt.p_hsp.into(),
                pt.budget.f_init.into(),
                pt.budget.f_hsp.into(),
                pt.budget.f_idle.into(),
                pt.budget.eta_re.into(),
                pt.budget.f_tot.into(),
            ]);
        }
    }
    Ok(Output {
        table: t,
        settings: json!({ "eta_d": eta_ds, "N": ns, "fixed": fixed, "bath_temperature_k": ctx.system.bath_temperature() }),
        summary: json!({ "max_F_tot": best }),
    })
}

fn min_g0_search(ctx: &Context) -> Result<Output, CliError> {
    let eta_d = ctx.flags.eta_d.unwrap_or(0.99);
    let n_th = ctx.flags.n_th.unwrap_or(1e-3);
    let n = ctx.flags.n.unwrap_or(10);
    let target = ctx.knob("target");
    if !(0.0..1.0).contains(&target) {
        return Err(CliError::Validation(format!("`target` must lie in [0, 1), got {target}")));
    }
    let r = min_g0(eta_d, n_th, n, target)?;
    let b = &r.optimum.best;
    let e = &b.evaluation;
    let mut t = Table::new(vec![
        col("eta_d", "detector efficiency"),
        col("n_th", "thermal phonon number"),
        col("N", "number of sources"),
        col("target", "total-fidelity target"),
        col("g0_over_2pi_hz", "smallest g0 meeting the target / 2pi, Hz"),
        col("g0_fail_over_2pi_hz", "largest bracketed g0 missing the target / 2pi, Hz"),
        col("F_tot", "maximized total fidelity at g0"),
        col("kappa_ex_over_2pi_hz", "optimal external coupling / 2pi, Hz"),
        col("p1", "optimal single-pair probability"),
        col("t_init_ns", "optimal re-initialization duration, ns"),
        col("t_squeeze_ns", "squeeze duration, ns"),
        col("t_h_ns", "heralding cycle duration, ns"),
        col("p_h_sp", "heralding probability"),
        col("F_init", "initialization fidelity"),
        col("F_hsp", "heralding fidelity"),
        col("F_idle", "idling fidelity"),
        col("eta_re", "retrieval efficiency"),
    ]);
    t.push(vec![
        eta_d.into(),
        n_th.into(),
        n.into(),
        target.into(),
        (r.g0 / TAU).into(),
        (r.bracket.0 / TAU).into(),
        b.f_tot().into(),
        (b.free.kappa_ex / TAU).into(),
        b.free.p1.into(),
        (b.free.t_init * 1e9).into(),
        (e.t_squeeze * 1e9).into(),
        (e.t_h * 1e9).into(),
        e.p_hsp.into(),
        e.budget.f_init.into(),
        e.budget.f_hsp.into(),
        e.budget.f_idle.into(),
        e.budget.eta_re.into(),
    ]);
    Ok(Output {
        table: t,
        settings: json!({ "eta_d": eta_d, "n_th": n_th, "N": n, "target": target }),
        summary: json!({
            "g0_over_2pi_hz": r.g0 / TAU,
            "iterations": r.iterations,
            "result": serde_json::to_value(&r).unwrap_or(Value::Null),
        }),
    })
}

fn lifetimes(ctx: &Context) -> Result<Output, CliError> {
    let n_ths = ctx
        .flags
        .n_th
        .map_or(vec![0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0], |n| vec![n]);
    let gamma = ctx.system.gamma;
    let mut t = Table::new(vec![
        col("n_th", "thermal phonon number"),
        col("tau_leak_s", "leakage lifetime 1/((4 n_th + 1) Gamma), s"),
        col("leak_rate_per_s", "leakage rate read off the evolution, 1/s"),
        col("tau_x_s", "bit-flip lifetime, s; inf if never reached"),
        col("tau_z_s", "phase-flip lifetime, s; inf if never reached"),
        col("tau_x_n_th_s", "tau_x times n_th, s"),
    ]);
    for &n_th in &n_ths {
        let r = dual_rail_lifetimes(gamma, n_th)?;
        t.push(vec![
            n_th.into(),
            r.tau_leak.into(),
            r.leak_rate_numeric.into(),
            r.tau_x.into(),
            r.tau_z.into(),
            (r.tau_x * n_th).into(),
        ]);
    }
    Ok(Output {
        table: t,
        settings: json!({ "n_th": n_ths, "Gamma_over_2pi_hz": gamma / TAU }),
        summary: json!({}),
    })
}

fn bell(ctx: &Context) -> Result<Output, CliError> {
    let eta_d = ctx.flags.eta_d.unwrap_or(0.98);
    let h = HeraldModel::new(eta_d, ctx.system.eta_ex(), ctx.knob("dark_rate_cps"), ctx.knob("window_ns") * 1e-9)?;
    let trials = ctx.count("trials")? as u64;
    let points = ctx.count("points")?;
    let ps = if points == 1 {
        vec![0.5]
    } else {
        lin_space(0.05, 0.95, points)
    };
    let initial = AcousticState::all_ones(2)?;
    let mut t = Table::new(vec![
        col("p_re", "retrieval probability"),
        col("p_herald", "Bell herald probability, closed form"),
        col("p_herald_engine", "Bell herald probability, state enumeration"),
        col("F_formula", "heralding fidelity, closed form"),
        col("F_engine", "heralding fidelity, state enumeration"),
        col("F_mc", "heralding fidelity, sampled"),
        col("F_mc_se", "standard error of F_mc"),
    ]);
    for &p in &ps {
        let f = ghz_herald(2, p, &h)?;
        let outcomes = single_shot(&GhzConfig::single_shot(2, p, h)?, &initial)?;
        let s = summarize(&outcomes, false);
        let mc = sample_herald_fidelity(&outcomes, trials, ctx.seed)?;
        t.push(vec![
            p.into(),
            f.probability.into(),
            s.herald_probability.into(),
            f.fidelity.into(),
            s.fidelity.into(),
            mc.fidelity.into(),
            mc.se.into(),
        ]);
    }
    Ok(Output {
        table: t,
        settings: json!({ "eta_d": eta_d, "eta": h.eta(), "p_d": h.p_d(), "trials": trials }),
        summary: json!({}),
    })
}

fn bleed(ctx: &Context) -> Result<Output, CliError> {
    let eta_d = ctx.flags.eta_d.unwrap_or(0.98);
    let iterations = ctx.count("iterations")?;
    if iterations > 4 {
        return Err(CliError::Validation(format!("`iterations` must be <= 4, got {iterations}")));
    }
    let initial = AcousticState::all_ones(2)?;
    let (sched, ideal) = optimize_bleed_schedule(2, iterations, &HeraldModel::ideal(), &initial)?;
    let h = HeraldModel::with_dark_prob(eta_d, ctx.system.eta_ex(), ctx.knob("dark_prob"))?;
    let lossy = bleed_success_probability(&GhzConfig::new(2, sched.clone(), h)?, &initial)?;
    let join = |v: Vec<String>| v.join(" ");
    let mut t = Table::new(vec![
        col("clicks_per_iteration", "detections in each iteration"),
        col("p_history", "retrieval probability used in each iteration"),
        col("probability", "probability of the pathway"),
        col("weight", "share of all heralds"),
        col("fidelity", "heralding fidelity of the pathway"),
        col("fidelity_formula", "closed-form fidelity at the effective retrieval"),
    ]);
    for p in &lossy.pathways {
        t.push(vec![
            join(p.clicks_per_iteration.iter().map(|c| c.to_string()).collect()).into(),
            join(p.p_history.iter().map(|x| format!("{x:?}")).collect()).into(),
            p.probability.into(),
            p.weight.into(),
            p.fidelity.into(),
            p.fidelity_formula.into(),
        ]);
    }
    Ok(Output {
        table: t,
        settings: json!({ "eta_d": eta_d, "eta": h.eta(), "iterations": iterations, "schedule": sched.rounds }),
        summary: json!({
            "success_ideal": ideal.success,
            "success": lossy.success,
            "fidelity": lossy.fidelity,
        }),
    })
}

fn asymptotic(ctx: &Context) -> Result<Output, CliError> {
    let n_max = ctx.count("n_max")?;
    if !(2..=8).contains(&n_max) {
        return Err(CliError::Validation(format!("`n_max` must lie in 2..=8, got {n_max}")));
    }
    let mut t = Table::new(vec![
        col("n", "number of qubits"),
        col("p_asym", "success probability"),
        col("p_asym_exact", "success probability as a fraction"),
        col("fit", "0.759 / 2.24^(n-1)"),
        col("single_shot_bound", "0.5 / 4^(n-1)"),
        col("failure", "probability of a repeated pair click"),
        col("stalled", "probability of running out of phonons"),
    ]);
    for n in 2..=n_max {
        let b = asymptotic_breakdown::<BigRational>(n)?;
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        t.push(vec![
            n.into(),
            f(&b.success).into(),
            b.success.to_string().into(),
            asymptotic_fit(n).into(),
            (0.5 / 4f64.powi(n as i32 - 1)).into(),
            f(&b.failure).into(),
            f(&b.stalled).into(),
        ]);
    }
    Ok(Output {
        table: t,
        settings: json!({ "n_max": n_max }),
        summary: json!({}),
    })
}

fn rounds(ctx: &Context) -> Result<Output, CliError> {
    let n_max = ctx.count("n_max")?;
    if !(2..=omcache::ghz::MAX_ROUNDS_QUBITS).contains(&n_max) {
        return Err(CliError::Validation(format!(
            "`n_max` must lie in 2..={}, got {n_max}",
            omcache::ghz::MAX_ROUNDS_QUBITS
        )));
    }
    let ps = [0.01, 0.05, 0.1, 0.3, 0.5, 0.9, 0.99];
    let mut t = Table::new(vec![
        col("n", "number of qubits"),
        col("p_h_sp", "single-phonon heralding probability"),
        col("level_0", "retrieval probability with no pair clicked"),
        col("level_1", "retrieval probability with one pair clicked"),
        col("level_2", "retrieval probability with two pairs clicked"),
        col("expected_rounds", "expected retrieval plus reset rounds, adaptive"),
        col("success_per_attempt", "success probability of one attempt"),
        col("rounds_per_attempt", "mean retrieval rounds per attempt"),
        col("reset_cost", "expected reset cycles after a failure"),
        col("single_shot_rounds", "expected rounds with one p_re = 1/2 round per attempt"),
    ]);
    for n in 2..=n_max {
        let chain = RoundsChain::new(n)?;
        for &p in &ps {
            let o = optimize_rounds(&chain, p)?;
            let a = &o.adaptive;
            let level = |i: usize| opt_num(a.levels.get(i).copied());
            t.push(vec![
                n.into(),
                p.into(),
                level(0),
                level(1),
                level(2),
                a.expected_rounds.into(),
                a.success_per_attempt.into(),
                a.rounds_per_attempt.into(),
                a.reset_cost.into(),
                o.single_shot.expected_rounds.into(),
            ]);
        }
    }
    Ok(Output {
        table: t,
        settings: json!({ "n_max": n_max, "p_h_sp": ps }),
        summary: json!({}),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing() {
        assert_eq!(lin_space(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = log_space(1e-3, 1e-1, 3);
        assert!((l[1] - 1e-2).abs() < 1e-15);
        assert_eq!(log_space(2.0, 5.0, 1), vec![2.0]);
    }

    #[test]
    fn names_are_stable() {
        for e in Experiment::value_variants() {
            let parsed = Experiment::from_str(e.name(), false).unwrap();
            assert_eq!(parsed, *e);
            assert!(!e.description().is_empty());
        }
    }
}
