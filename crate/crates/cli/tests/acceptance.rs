//! Acceptance checks, one PASS/FAIL line each.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::TAU;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use omcache::design::{min_g0, optimize_fixed_budget, FixedBudget};
use omcache::ghz::{
    asymptotic_fit, asymptotic_success, bleed_success_probability, optimize_bleed_schedule, sample_herald_fidelity,
    single_shot, single_shot_fock, summarize, AcousticState, GhzConfig, RecordClass,
};
use omcache::herald::{ghz_herald, HeraldModel};
use omcache::multiplex::{
    dual_rail_lifetimes, expected_max_cycle, expected_max_cycle_exact, herald_cdf, monte_carlo_schedule,
    ScheduleParams,
};
use omcache::om::{
    cooled_population, optical_damping, pump_photon_number, retrieval, retrieval_bound, solve_pulse_duration,
    Carrier, DrivePulse, DurationTarget, SystemParams,
};

/// Criteria that fail for reasons recorded with the project, so their FAIL
/// line does not fail the run.
const KNOWN_FAILURES: &[u32] = &[12];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol * want.abs()
}

fn c1_cooling() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    let cases = [
        ("target", 3.7, 1e-3, 5.2e-9),
        ("target", 0.06, 1e-3, 2.8e-9),
        ("near-term", -1.0, 1e-2, 96e-9),
        ("near-term", 0.1, 1e-2, 43e-9),
    ];
    for (preset, n_init, n_target, quoted) in cases {
        let sys = SystemParams::<f64>::preset(preset).unwrap();
        let n_init = if n_init < 0.0 { sys.n_th } else { n_init };
        let start = Instant::now();
        let t = solve_pulse_duration(
            &sys,
            &DrivePulse::tanh(1e-3, 1e-9, Carrier::Red),
            DurationTarget::Population { n_init, n_target },
        )
        .unwrap();
        let secs = start.elapsed().as_secs_f64();
        ok &= within(t, quoted, 0.15) && secs < 1.0;
        notes.push(format!("{preset} {n_init:.3}->{n_target}: {:.2} ns ({secs:.3} s)", t * 1e9));
    }
    verdict(ok, notes.join("; "))
}

fn c2_steady_state() -> Verdict {
    let sys = SystemParams::<f64>::target();
    let alpha = pump_photon_number(&sys, 1e-3);
    let n = cooled_population(&sys, &alpha);
    let g = optical_damping(&sys, &alpha).gamma_opt / TAU;
    verdict(
        within(n, 2e-7, 0.2) && within(g, 0.2e9, 0.1) && (sys.n_th - 3.7).abs() < 0.05,
        format!("n_th={:.3} n_ss={n:.3e} Γ_opt/2π={:.3} GHz", sys.n_th, g / 1e9),
    )
}

fn c3_oracle() -> Verdict {
    let start = Instant::now();
    let (mut mean_err, mut var_err, mut swap_err) = (0.0f64, 0.0f64, 0.0f64);
    for ratio in [40.0, 60.0] {
        for s in common::squeeze_comparison(ratio) {
            mean_err = mean_err.max(common::rel(s.closed, s.mean));
            var_err = var_err.max(common::rel(s.variance, s.mean * (s.mean + 1.0)));
        }
    }
    for ratio in [40.0, 10.0, 5.0] {
        for n0 in [1, 2] {
            for s in common::swap_comparison(ratio, n0) {
                swap_err = swap_err.max(common::rel(s.closed.0, s.oracle.0));
                if s.oracle.1 > 1e-12 {
                    swap_err = swap_err.max(common::rel(s.closed.1, s.oracle.1));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mean_err < 1e-3 && var_err < 1e-3 && swap_err < 1e-3 && secs < 60.0,
        format!("squeeze {mean_err:.1e}, variance {var_err:.1e}, swap {swap_err:.1e} ({secs:.1} s)"),
    )
}

fn c4_herald() -> Verdict {
    let p = SystemParams::<f64>::target();
    let sims: Vec<_> = common::herald_p1_grid().into_iter().map(|x| common::herald_sim(&p, x)).collect();
    let mut worst = 0.0f64;
    let mut peaks = true;
    for eta_d in [0.90, 0.98] {
        let rows = common::herald_fidelities(&p, &sims, eta_d);
        worst = rows.iter().fold(worst, |w, r| w.max((r.1 - r.2).abs()));
        let closed: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let oracle: Vec<f64> = rows.iter().map(|r| r.2).collect();
        peaks &= common::has_interior_peak(&closed) && common::has_interior_peak(&oracle);
    }
    verdict(
        worst < 5e-3 && peaks,
        format!("max |ΔF| = {worst:.2e}, interior peak: {peaks}"),
    )
}

fn c5_retrieval() -> Verdict {
    let sys = SystemParams::<f64>::target();
    let mut ok = true;
    let mut notes = Vec::new();
    for (power, quoted) in [(0.25e-3, 21e-9), (0.5e-3, 10e-9), (1e-3, 4.4e-9)] {
        let pulse = DrivePulse::tanh(power, 1e-9, Carrier::Red);
        let t = solve_pulse_duration(&sys, &pulse, DurationTarget::RetrievalEfficiency { eta: 0.998 }).unwrap();
        ok &= within(t, quoted, 0.10);
        notes.push(format!("{:.2} mW: {:.2} ns", power * 1e3, t * 1e9));
    }
    let mut worst = f64::NEG_INFINITY;
    for power in [0.1e-3, 0.25e-3, 0.5e-3, 1e-3] {
        let bound = retrieval_bound(&sys, &pump_photon_number(&sys, power));
        for i in 0..30 {
            let d = 0.2e-9 * 1.3f64.powi(i);
            let pulse = DrivePulse::tanh(power, d, Carrier::Red);
            worst = worst.max(retrieval(&sys, &pulse).unwrap().efficiency - bound);
        }
    }
    ok &= worst <= 1e-9;
    notes.push(format!("max η_re − bound = {worst:.2e}"));
    verdict(ok, notes.join("; "))
}

fn c6_order_statistics() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [1, 2, 10, 100] {
        for p in [0.01, 0.1, 0.5] {
            let s = ScheduleParams::counting(n, p).unwrap();
            let mc = monte_carlo_schedule(&s, 1_000_000, 0).unwrap();
            let m = expected_max_cycle(&s).m_bar;
            worst = worst.max((mc.mean_m - m).abs() / mc.se_m);
            // CDF near its lower quartile, median and upper quartile
            for q in [0.25, 0.5, 0.75] {
                let k = (1..).find(|&k| herald_cdf(k, &s) >= q).unwrap();
                let (emp, se) = mc.cdf(k);
                if se > 0.0 {
                    worst = worst.max((emp - herald_cdf(k, &s)).abs() / se);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut series = 0.0f64;
    for n in 1..=50 {
        for (num, den) in [(1, 100), (1, 10), (1, 2), (3, 7)] {
            let exact = expected_max_cycle_exact(n, BigRational::new(num.into(), den.into())).to_f64().unwrap();
            let s = ScheduleParams::counting(n, num as f64 / den as f64).unwrap();
            series = series.max(common::rel(expected_max_cycle(&s).m_bar, exact));
        }
    }
    verdict(
        worst <= 3.0 && series <= 1e-9 && secs < 30.0,
        format!("max deviation {worst:.2}σ, series vs inclusion-exclusion {series:.1e} ({secs:.1} s)"),
    )
}

fn c7_total_fidelity() -> Verdict {
    let cold = 0.04;
    let warm = 2.0;
    let target = FixedBudget::for_preset("target").unwrap();
    let near = FixedBudget::for_preset("near-term").unwrap();
    let f = |preset: &str, fixed: &FixedBudget<f64>, t_b: f64, eta_d: f64, n: usize| {
        let sys = SystemParams::<f64>::preset(preset).unwrap().with_bath_temperature(t_b);
        optimize_fixed_budget(&sys, eta_d, n, fixed).unwrap().budget.f_tot
    };
    let mut target_min = f64::INFINITY;
    for eta_d in [0.9, 0.95, 0.99, 1.0] {
        for n in [1, 10, 100, 1000] {
            target_min = target_min.min(f("target", &target, cold, eta_d, n));
        }
    }
    let n = 1000;
    let cold_min = [0.5, 0.7, 0.8, 0.9, 0.95, 0.99]
        .iter()
        .map(|&e| f("near-term", &near, cold, e, n))
        .fold(f64::INFINITY, f64::min);
    let warm_high_min = [0.95, 0.99]
        .iter()
        .map(|&e| f("near-term", &near, warm, e, n))
        .fold(f64::INFINITY, f64::min);
    let warm_low_max = [0.5, 0.7, 0.8]
        .iter()
        .map(|&e| f("near-term", &near, warm, e, n))
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        target_min >= 0.99 && cold_min > 0.90 && warm_high_min > 0.90 && warm_low_max <= 0.90,
        format!(
            "target 40 mK min {target_min:.4}; near-term N=1000: 40 mK min {cold_min:.4}, 2 K high-η_d min {warm_high_min:.4}, 2 K low-η_d max {warm_low_max:.4}"
        ),
    )
}

fn c8_bell() -> Verdict {
    let initial = AcousticState::all_ones(2).unwrap();
    let ideal = single_shot(&GhzConfig::single_shot(2, 0.5, HeraldModel::<f64>::ideal()).unwrap(), &initial).unwrap();
    let s = summarize(&ideal, false);
    let exact = (s.herald_probability - 0.125).abs() < 1e-15;
    let worst_f = ideal
        .iter()
        .filter_map(|o| o.fidelity)
        .fold(0.0f64, |w, f| w.max((1.0 - f).abs()));
    let sys = SystemParams::<f64>::target();
    let h = HeraldModel::new(0.98, sys.eta_ex(), 100.0, 4.4e-9).unwrap();
    let mut sigmas = 0.0f64;
    let mut fock_gap = 0.0f64;
    for i in 0..19 {
        let p = 0.05 + 0.05 * i as f64;
        let outcomes = single_shot(&GhzConfig::single_shot(2, p, h).unwrap(), &initial).unwrap();
        let mc = sample_herald_fidelity(&outcomes, 100_000, 0).unwrap();
        let formula = ghz_herald(2, p, &h).unwrap().fidelity;
        sigmas = sigmas.max((mc.fidelity - formula).abs() / mc.se);
        if i % 6 == 0 {
            // engine against the general Fock-space path
            let fock = single_shot_fock(p, &h).unwrap();
            let complete: f64 = outcomes
                .iter()
                .filter(|o| matches!(o.class, RecordClass::Complete { .. }))
                .map(|o| o.probability)
                .sum();
            let fock_complete: f64 = fock
                .iter()
                .filter(|o| {
                    let pairs = [o.counts[0] + o.counts[1], o.counts[2] + o.counts[3]];
                    o.counts.iter().sum::<usize>() == 2 && pairs == [1, 1]
                })
                .map(|o| o.probability)
                .sum();
            fock_gap = fock_gap.max((complete - fock_complete).abs());
        }
    }
    verdict(
        exact && worst_f < 1e-9 && sigmas <= 3.0 && fock_gap < 1e-9,
        format!(
            "P = {}, max |1−F| = {worst_f:.1e}, formula vs sampled {sigmas:.2}σ, engine vs Fock {fock_gap:.1e}",
            s.herald_probability
        ),
    )
}

fn c9_bleed() -> Verdict {
    let initial = AcousticState::all_ones(2).unwrap();
    let (sched, ideal) = optimize_bleed_schedule(2, 2, &HeraldModel::<f64>::ideal(), &initial).unwrap();
    let h = HeraldModel::with_dark_prob(0.98, 0.999, 0.0).unwrap();
    let lossy = bleed_success_probability(&GhzConfig::new(2, sched, h).unwrap(), &initial).unwrap();
    let mut ok = (ideal.success - 0.183).abs() <= 0.002;
    let mut notes = vec![format!("success {:.4}", ideal.success)];
    let want = [(0.59, 0.976), (0.30, 0.944), (0.11, 0.914)];
    ok &= lossy.pathways.len() == 3;
    for (p, (w, f)) in lossy.pathways.iter().zip(want) {
        ok &= (p.weight - w).abs() <= 0.005 && (p.fidelity - f).abs() <= 0.002;
        notes.push(format!("{:.3}/{:.4}", p.weight, p.fidelity));
    }
    ok &= (lossy.fidelity - 0.959).abs() <= 0.002;
    notes.push(format!("average {:.4}", lossy.fidelity));
    verdict(ok, notes.join(", "))
}

fn c10_asymptotic() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 2..=6 {
        let p = asymptotic_success::<BigRational>(n).unwrap().to_f64().unwrap();
        let fit = asymptotic_fit(n);
        ok &= within(p, fit, 0.05) && p > 0.5 / 4f64.powi(n as i32 - 1);
        notes.push(format!("n={n}: {p:.5} ({:+.1}%)", 100.0 * (p / fit - 1.0)));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    verdict(ok, format!("{} ({secs:.1} s)", notes.join(", ")))
}

fn c11_min_g0() -> Verdict {
    let g = |eta_d: f64, n_th: f64, n: usize| min_g0(eta_d, n_th, n, 0.99).unwrap().g0 / TAU;
    let corner = g(0.99, 1e-3, 10);
    let mut ok = (1e3..=10e3).contains(&corner);
    let eta = [g(0.9, 1e-3, 10), g(0.95, 1e-3, 10), corner];
    let nth = [corner, g(0.99, 1e-2, 10), g(0.99, 1e-1, 10)];
    let ns = [g(0.99, 1e-3, 1), corner, g(0.99, 1e-3, 100)];
    ok &= eta[0] >= eta[1] && eta[1] >= eta[2];
    ok &= nth[0] <= nth[1] && nth[1] <= nth[2];
    ok &= ns[0] <= ns[1] && ns[1] <= ns[2];
    let show = |v: &[f64; 3]| v.iter().map(|x| format!("{:.0}", x)).collect::<Vec<_>>().join("/");
    verdict(
        ok,
        format!(
            "corner {corner:.0} Hz; η_d 0.9/0.95/0.99: {} Hz; n_th 1e-3/1e-2/1e-1: {} Hz; N 1/10/100: {} Hz",
            show(&eta),
            show(&nth),
            show(&ns)
        ),
    )
}

fn c12_lifetimes() -> Verdict {
    let gamma = SystemParams::<f64>::target().gamma;
    let mut leak = 0.0f64;
    for n_th in [0.0, 0.1, 1.0] {
        let r = dual_rail_lifetimes(gamma, n_th).unwrap();
        leak = leak.max(common::rel(r.leak_rate_numeric, (4.0 * n_th + 1.0) * gamma));
    }
    let products: Vec<f64> = [0.01, 0.03, 0.1, 0.3, 1.0]
        .iter()
        .map(|&n| dual_rail_lifetimes(gamma, n).unwrap().tau_x * n)
        .collect();
    let mut sorted = products.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted[sorted.len() / 2];
    let spread = products.iter().fold(0.0f64, |w, &x| w.max(common::rel(x, mid)));
    verdict(
        leak <= 0.02 && spread <= 0.25,
        format!(
            "leak-rate error {leak:.1e}; τ_X·n_th {} s, max deviation from median {:.0}%",
            products.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join("/"),
            spread * 100.0
        ),
    )
}

fn c13_determinism() -> Verdict {
    let exps: [(&str, &[&str]); 11] = [
        ("cool", &[]),
        ("herald-tradeoff", &[]),
        ("retrieval", &[]),
        ("schedule", &["--set", "trials=20000"]),
        ("total-fidelity", &[]),
        ("min-g0", &[]),
        ("lifetimes", &["--n-th", "0.1"]),
        ("bell", &["--set", "trials=20000"]),
        ("bleed", &[]),
        ("asymptotic", &[]),
        ("rounds-to-ghz", &["--set", "n_max=2"]),
    ];
    let mut differing = Vec::new();
    for (exp, extra) in exps {
        let mut runs = Vec::new();
        for threads in ["1", "3"] {
            let dir = tempfile::tempdir().unwrap();
            let status = Command::new(env!("CARGO_BIN_EXE_omcache"))
                .args(["run", exp, "--seed", "11", "--out", dir.path().to_str().unwrap()])
                .args(extra)
                .env("OMCACHE_THREADS", threads)
                .output()
                .unwrap();
            if !status.status.success() {
                differing.push(format!("{exp} exited {:?}", status.status.code()));
                break;
            }
            runs.push(fs::read(dir.path().join(format!("{exp}.csv"))).unwrap());
        }
        if runs.len() == 2 && runs[0] != runs[1] {
            differing.push(exp.to_string());
        }
    }
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            "11 experiments byte-identical across reruns".into()
        } else {
            format!("differs: {}", differing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Verdict); 13] = [
        (1, "cooling durations", c1_cooling),
        (2, "steady-state cooling", c2_steady_state),
        (3, "squeeze and swap against master equation", c3_oracle),
        (4, "heralding fidelity against herald simulation", c4_herald),
        (5, "retrieval durations and bound", c5_retrieval),
        (6, "order statistics", c6_order_statistics),
        (7, "total-fidelity thresholds", c7_total_fidelity),
        (8, "Bell herald algebra", c8_bell),
        (9, "bleeding", c9_bleed),
        (10, "weak-retrieval asymptotics", c10_asymptotic),
        (11, "minimum g0", c11_min_g0),
        (12, "dual-rail lifetimes", c12_lifetimes),
        (13, "determinism", c13_determinism),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let known = !v.pass && KNOWN_FAILURES.contains(&id);
        println!("{tag} {id:>2} {name}: {}{}", v.detail, if known { " [known]" } else { "" });
        if !v.pass && !known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
