use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use omcache::design::{evaluate_total_fidelity, FreeParams, GivenParams};
use omcache::herald::{
    effective_retrieval, ghz_herald_fidelity, ghz_herald_probability, sp_herald_fidelity,
    sp_herald_probability, HeraldModel,
};
use omcache::multiplex::{expected_max_cycle, expected_max_cycle_exact, herald_cdf, ScheduleParams};
use omcache::om::{swap_populations, PairDistribution, PumpAmplitude, SystemParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bayes_consistency(p1 in 1e-6f64..0.24, eta_d in 0.3f64..1.0, rate in 0.0f64..1e4) {
        let h = HeraldModel::new(eta_d, 0.999, rate, 5e-9).unwrap();
        let f = sp_herald_fidelity(p1, &h).unwrap().fidelity;
        let p = sp_herald_probability(p1, &h).unwrap();
        prop_assert!((f * p - h.eta() * p1).abs() <= 1e-15 * p1.max(1e-300) + 1e-18);
        prop_assert!(f > 0.0 && f <= 1.0);
    }

    #[test]
    fn pair_inversion_round_trips(p1 in 0.0f64..0.25) {
        let d = PairDistribution::from_p1(p1).unwrap();
        prop_assert!(d.n_bar <= 1.0 + 1e-9);
        prop_assert!((d.p1() - p1).abs() < 1e-12);
        let total: f64 = (0..200).map(|k| d.p(k)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_fidelity_monotone(n in 2usize..=6, p in 0.05f64..0.9, dp in 0.01f64..0.09, eta in 0.5f64..0.99) {
        let h = HeraldModel::with_dark_prob(eta, 1.0, 0.0).unwrap();
        let h2 = HeraldModel::with_dark_prob((eta + 0.01).min(1.0), 1.0, 0.0).unwrap();
        let f = ghz_herald_fidelity(n, p, &h).unwrap();
        prop_assert!(ghz_herald_fidelity(n, p + dp, &h).unwrap() < f);
        prop_assert!(ghz_herald_fidelity(n, p, &h2).unwrap() > f);
    }

    #[test]
    fn ideal_ghz_probability(n in 2usize..=6, p in 0.0f64..=1.0) {
        let got = ghz_herald_probability(n, p, &HeraldModel::ideal()).unwrap();
        let want = 2.0 * p.powi(n as i32) * (1.0 - p).powi(n as i32);
        prop_assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn detector_loss_is_retrieval_loss(n in 2usize..=5, p in 0.01f64..0.99, eta in 0.3f64..1.0) {
        let lossy = ghz_herald_probability(n, p, &HeraldModel::with_dark_prob(eta, 1.0, 0.0).unwrap()).unwrap();
        let ideal = ghz_herald_probability(n, eta * p, &HeraldModel::ideal()).unwrap();
        prop_assert!((lossy - ideal).abs() <= 1e-14 * ideal.max(1e-300));
    }

    #[test]
    fn effective_retrieval_bounds(ps in prop::collection::vec(0.0f64..=1.0, 1..6)) {
        let e = effective_retrieval(&ps).unwrap();
        let best = ps.iter().cloned().fold(0.0, f64::max);
        let sum: f64 = ps.iter().sum();
        prop_assert!(e >= best - 1e-15 && e <= sum.min(1.0) + 1e-15);
    }

    #[test]
    fn herald_cdf_is_a_cdf(n in 1usize..500, p in 1e-4f64..1.0, m in 0u64..10_000) {
        let s = ScheduleParams::counting(n, p).unwrap();
        let (a, b) = (herald_cdf(m, &s), herald_cdf(m + 1, &s));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn max_cycle_bounds(n in 1usize..2000, p in 1e-3f64..1.0) {
        let s = ScheduleParams::counting(n, p).unwrap();
        let m = expected_max_cycle(&s).m_bar;
        // the single-source mean below, the union bound above
        prop_assert!(m >= 1.0 / p * (1.0 - 1e-9));
        prop_assert!(m <= n as f64 / p + 1.0);
    }

    #[test]
    fn swap_conserves_or_loses(g_over_k in 0.001f64..0.249, kt in 0.0f64..200.0, n0 in 0.0f64..5.0) {
        let p = SystemParams::<f64>::target();
        let k = p.kappa();
        let alpha = PumpAmplitude::from_alpha_sq((g_over_k * k / p.g0).powi(2));
        let (n_ph, n_a) = swap_populations(&p, &alpha, kt / k, n0).unwrap();
        prop_assert!(n_ph >= 0.0 && n_a >= 0.0);
        prop_assert!(n_ph + n_a <= n0 * (1.0 + 1e-12) + 1e-300);
    }
}

#[test]
fn max_cycle_matches_exact_series() {
    for n in 1..=50usize {
        for p in [0.01f64, 0.1, 0.5] {
            let s = ScheduleParams::counting(n, p).unwrap();
            let exact = expected_max_cycle_exact(
                n,
                BigRational::new((p * 1000.0).round().to_i64().unwrap().into(), 1000.into()),
            )
            .to_f64()
            .unwrap();
            let got = expected_max_cycle(&s).m_bar;
            assert!((got - exact).abs() <= 1e-9 * exact, "N={n} p={p}: {got} vs {exact}");
        }
    }
}

fn corner() -> GivenParams<f64> {
    GivenParams::new(std::f64::consts::TAU * 2e3, 0.99, 1e-3, 10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn design_evaluation_is_honest(lk in 6.0f64..9.0, lp in -5.0f64..-0.63, lt in -9.0f64..-4.0) {
        let g = corner();
        let free = FreeParams { kappa_ex: std::f64::consts::TAU * 10f64.powf(lk), p1: 10f64.powf(lp), t_init: 10f64.powf(lt) };
        let e = evaluate_total_fidelity(&g, &free).unwrap();
        let b = e.budget;
        for v in [b.f_init, b.f_hsp, b.f_idle, b.eta_re, b.f_tot] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!((b.f_tot - b.f_init * b.f_hsp * b.f_idle * b.eta_re).abs() < 1e-15);
        prop_assert!(e.red_power <= g.max_power * (1.0 + 1e-12));
        prop_assert!(e.blue_power <= g.max_power * (1.0 + 1e-12));
        prop_assert!(e.t_h >= e.t_squeeze + free.t_init);
        let again = evaluate_total_fidelity(&g, &free).unwrap();
        prop_assert_eq!(e, again);
    }
}

#[test]
fn design_evaluation_tracks_given_parameters() {
    let free = FreeParams { kappa_ex: std::f64::consts::TAU * 3e8, p1: 0.02, t_init: 1e-7 };
    let f = |g0: f64, eta_d: f64, n_th: f64, n: usize| {
        let g = GivenParams::new(std::f64::consts::TAU * g0, eta_d, n_th, n).unwrap();
        evaluate_total_fidelity(&g, &free).unwrap().budget.f_tot
    };
    let base = f(2e3, 0.95, 1e-2, 10);
    assert!(f(4e3, 0.95, 1e-2, 10) > base);
    assert!(f(2e3, 0.99, 1e-2, 10) > base);
    assert!(f(2e3, 0.95, 1e-1, 10) < base);
    assert!(f(2e3, 0.95, 1e-2, 100) < base);
}
