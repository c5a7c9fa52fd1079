//! Cross-checks of the bitmask engine: the n = 2 protocol run through the
//! general Fock-space machinery, and a seeded sampler of herald outcomes.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::ShotOutcome;
use super::layout::network_matrix;
use super::record::RecordClass;
use crate::error::{Error, Result};
use crate::fock::scatter::mode_transform;
use crate::fock::{
    detect_photon_number_pure, optical_scatter, transmissivity_splitter, DetectionOutcome, DetectorModel,
    ModeKind, ModeRegistry, PureState,
};
use crate::herald::HeraldModel;
use crate::scalar::Real;

/// n = 2 single shot in the truncated Fock space: each acoustic mode swaps
/// into its own optical mode with transmissivity `p_re`, the optical modes
/// pass the splitter network and are counted. The returned states live on
/// the four acoustic modes `b[i,q]`.
pub fn single_shot_fock<T: Real>(p_re: T, herald: &HeraldModel<T>) -> Result<Vec<DetectionOutcome<T>>> {
    herald.validate()?;
    let n = 2;
    let b: Vec<String> = (0..2 * n).map(|k| format!("b[{},{}]", k / 2 + 1, k % 2)).collect();
    let a: Vec<String> = (0..2 * n).map(|k| format!("a[{},{}]", k / 2 + 1, k % 2)).collect();
    let modes = b
        .iter()
        .map(|l| (l.as_str(), 2, ModeKind::Acoustic))
        .chain(a.iter().map(|l| (l.as_str(), 2 * n + 1, ModeKind::Optical)));
    let reg = ModeRegistry::new(modes)?;
    let mut occ = vec![1; 2 * n];
    occ.extend(vec![0; 2 * n]);
    let mut psi = PureState::fock(&reg, &occ)?;
    let split = transmissivity_splitter(p_re);
    for (bl, al) in b.iter().zip(&a) {
        psi = mode_transform(&psi, &[bl.as_str(), al.as_str()], &split)?;
    }
    let u: Vec<Vec<Complex<T>>> = network_matrix::<T>(n)
        .into_iter()
        .map(|row| row.into_iter().map(|x| Complex::new(x, T::zero())).collect())
        .collect();
    let labels: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
    psi = optical_scatter(&psi, &labels, &u)?;
    let model = DetectorModel {
        efficiency: herald.eta(),
        dark_prob: herald.p_d(),
    };
    detect_photon_number_pure(&psi, &labels, &model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelitySample {
    pub trials: u64,
    pub seed: u64,
    pub heralds: u64,
    pub herald_probability: f64,
    pub fidelity: f64,
    /// Binomial standard error of `fidelity`.
    pub se: f64,
}

const CHUNK: u64 = 4096;

/// Samples detection records from an outcome table and, for complete
/// heralds, a GHZ projection test. Each trial draws from its own ChaCha
/// stream, so the result does not depend on the thread count.
pub fn sample_herald_fidelity(outcomes: &[ShotOutcome<f64>], trials: u64, seed: u64) -> Result<FidelitySample> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let mut cdf = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.probability;
        let f = match o.class {
            RecordClass::Complete { .. } => o.fidelity,
            _ => None,
        };
        cdf.push((acc, f));
    }
    let total = acc;
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<(u64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut heralds = 0;
            let mut passed = 0;
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let u: f64 = rng.gen::<f64>() * total;
                let k = cdf.partition_point(|(c, _)| *c <= u).min(cdf.len() - 1);
                if let Some(f) = cdf[k].1 {
                    heralds += 1;
                    if rng.gen::<f64>() < f {
                        passed += 1;
                    }
                }
            }
            (heralds, passed)
        })
        .collect();
    let heralds: u64 = parts.iter().map(|p| p.0).sum();
    let passed: u64 = parts.iter().map(|p| p.1).sum();
    let fidelity = if heralds > 0 { passed as f64 / heralds as f64 } else { 0.0 };
    let se = if heralds > 0 {
        (fidelity * (1.0 - fidelity) / heralds as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(FidelitySample {
        trials,
        seed,
        heralds,
        herald_probability: heralds as f64 / trials as f64,
        fidelity,
        se,
    })
}
