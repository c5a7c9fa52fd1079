//! Brute-force master-equation runs that mirror the closed forms.

#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex;
use omcache::fock::{
    detect_photon_number, evolve, DensityMatrix, DetectorModel, EvolveOptions, LindbladSpec, ModeKind,
    ModeRegistry, PureState, SparseOp,
};
use omcache::herald::{sp_herald_fidelity, HeraldModel};
use omcache::om::{squeeze_population, swap_populations, PairDistribution, PumpAmplitude, SystemParams};

pub fn opts() -> EvolveOptions<f64> {
    EvolveOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        truncation_limit: None,
        max_step: None,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn pump_for(g: f64, g_single: f64) -> PumpAmplitude<f64> {
    PumpAmplitude::from_alpha_sq((g / g_single).powi(2))
}

/// g(a†b† + ab)
fn squeeze_spec(reg: &ModeRegistry, g: f64) -> LindbladSpec<f64> {
    let pair = SparseOp::create(reg, "a")
        .unwrap()
        .mul(&SparseOp::create(reg, "b").unwrap())
        .unwrap();
    let mut spec = LindbladSpec::new(reg);
    spec.add_hamiltonian(pair, true, move |_| Complex::new(g, 0.0));
    spec
}

/// Sample times with g·t from 0 to 3.
fn times(g: f64) -> Vec<f64> {
    (0..=12).map(|i| 0.25 * i as f64 / g).collect()
}

pub struct SqueezePoint {
    pub gt: f64,
    pub closed: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Squeezing from vacuum at coupling κ/`ratio`, target preset, Fock dim 8.
pub fn squeeze_comparison(ratio: f64) -> Vec<SqueezePoint> {
    let p = SystemParams::<f64>::target();
    let k = p.kappa();
    let g = k / ratio;
    let alpha = pump_for(g, p.gh);
    let reg = ModeRegistry::new([("a", 8, ModeKind::Optical), ("b", 8, ModeKind::Acoustic)]).unwrap();
    let mut spec = squeeze_spec(&reg, g);
    spec.add_collapse(k, SparseOp::destroy(&reg, "a").unwrap()).unwrap();
    let ts = times(g);
    let (rhos, _) = evolve(&spec, &PureState::vacuum(&reg).to_density(), &ts, &opts()).unwrap();
    ts.iter()
        .zip(&rhos)
        .skip(1)
        .map(|(&t, rho)| {
            let mean = rho.mean_number("b").unwrap();
            let dist = rho.number_distribution("b").unwrap();
            let m2: f64 = dist.iter().enumerate().map(|(i, w)| (i * i) as f64 * w).sum();
            SqueezePoint {
                gt: g * t,
                closed: squeeze_population(&p, &alpha, t),
                mean,
                variance: m2 - mean * mean,
            }
        })
        .collect()
}

pub struct SwapPoint {
    pub gt: f64,
    pub closed: (f64, f64),
    pub oracle: (f64, f64),
}

/// Beam splitting from `n0` phonons at coupling κ/`ratio`; (phonons, photons).
pub fn swap_comparison(ratio: f64, n0: usize) -> Vec<SwapPoint> {
    let p = SystemParams::<f64>::target();
    let k = p.kappa();
    let g = k / ratio;
    let alpha = pump_for(g, p.g0);
    let reg = ModeRegistry::new([("a", 4, ModeKind::Optical), ("b", 4, ModeKind::Acoustic)]).unwrap();
    let bs = SparseOp::create(&reg, "a")
        .unwrap()
        .mul(&SparseOp::destroy(&reg, "b").unwrap())
        .unwrap();
    let mut spec = LindbladSpec::new(&reg);
    spec.add_hamiltonian(bs, true, move |_| Complex::new(g, 0.0));
    spec.add_collapse(k, SparseOp::destroy(&reg, "a").unwrap()).unwrap();
    let ts = times(g);
    let rho0 = PureState::fock(&reg, &[0, n0]).unwrap().to_density();
    let (rhos, _) = evolve(&spec, &rho0, &ts, &opts()).unwrap();
    ts.iter()
        .zip(&rhos)
        .map(|(&t, rho)| SwapPoint {
            gt: g * t,
            closed: swap_populations(&p, &alpha, t, n0 as f64).unwrap(),
            oracle: (rho.mean_number("b").unwrap(), rho.mean_number("a").unwrap()),
        })
        .collect()
}

/// State after squeezing and a full ring-down of the cavity into a photon
/// counter `c`.
pub struct HeraldSim {
    pub p1: f64,
    pub state: DensityMatrix<f64>,
}

pub fn herald_sim(p: &SystemParams<f64>, p1_target: f64) -> HeraldSim {
    let k = p.kappa();
    let g = k / 40.0;
    let alpha = pump_for(g, p.gh);
    let n_bar = PairDistribution::from_p1(p1_target).unwrap().n_bar;
    let (mut lo, mut hi) = (0.0, 1e4 / k);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if squeeze_population(p, &alpha, mid) < n_bar {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_on = 0.5 * (lo + hi);
    let reg = ModeRegistry::new([
        ("a", 3, ModeKind::Optical),
        ("b", 7, ModeKind::Acoustic),
        ("c", 6, ModeKind::Counter),
    ])
    .unwrap();
    let a = SparseOp::destroy(&reg, "a").unwrap();
    let mut spec = squeeze_spec(&reg, g);
    spec.hamiltonian[0].coeff = Arc::new(move |t: f64| Complex::new(if t <= t_on { g } else { 0.0 }, 0.0));
    spec.add_counted_collapse(k, &a, "c").unwrap();
    let o = EvolveOptions {
        max_step: Some(t_on.max(0.1 / k)),
        ..opts()
    };
    let rho0 = PureState::vacuum(&reg).to_density();
    let (rhos, _) = evolve(&spec, &rho0, &[0.0, t_on, t_on + 30.0 / k], &o).unwrap();
    let rho = rhos.into_iter().last().unwrap();
    HeraldSim {
        p1: rho.number_distribution("b").unwrap()[1],
        state: rho,
    }
}

/// Eight p1 values spread logarithmically over [1e-6, 0.2].
pub fn herald_p1_grid() -> Vec<f64> {
    (0..8).map(|i| 1e-6 * (0.2f64 / 1e-6).powf(i as f64 / 7.0)).collect()
}

/// (p1, Bayes fidelity, simulated single-click phonon fidelity) per run.
pub fn herald_fidelities(p: &SystemParams<f64>, sims: &[HeraldSim], eta_d: f64) -> Vec<(f64, f64, f64)> {
    let h = HeraldModel::new(eta_d, p.eta_ex(), 100.0, 4e-9).unwrap();
    let det = DetectorModel {
        efficiency: h.eta(),
        dark_prob: h.p_d(),
    };
    sims.iter()
        .map(|s| {
            let f = sp_herald_fidelity(s.p1, &h).unwrap().fidelity;
            let outcomes = detect_photon_number(&s.state, &["c"], &det).unwrap();
            let one = outcomes.iter().find(|o| o.counts == [1]).expect("single click");
            (s.p1, f, one.state.number_distribution("b").unwrap()[1])
        })
        .collect()
}

/// Interior maximum: both ends sit clearly below the peak.
pub fn has_interior_peak(series: &[f64]) -> bool {
    let peak = series.iter().cloned().fold(f64::MIN, f64::max);
    series[0] < peak - 1e-3 && series[series.len() - 1] < peak - 1e-3
}
