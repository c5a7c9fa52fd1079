//! Photon-number detection with inefficiency and dark counts, enumerated
//! exhaustively.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use super::registry::ModeRegistry;
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-detector efficiency and single-dark-count probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel<T> {
    pub efficiency: T,
    pub dark_prob: T,
}

impl<T: Real> DetectorModel<T> {
    pub fn ideal() -> Self {
        Self {
            efficiency: T::one(),
            dark_prob: T::zero(),
        }
    }

    /// P(c clicks | k photons): binomial thinning plus at most one dark count.
    pub fn click_probability(&self, k: usize, c: usize) -> T {
        let eta = self.efficiency;
        let bin = |m: usize| -> T {
            if m > k {
                return T::zero();
            }
            binomial::<T>(k, m) * eta.powi(m as i32) * (T::one() - eta).powi((k - m) as i32)
        };
        let mut p = (T::one() - self.dark_prob) * bin(c);
        if c > 0 {
            p += self.dark_prob * bin(c - 1);
        }
        p
    }
}

fn binomial<T: Real>(n: usize, k: usize) -> T {
    let mut r = T::one();
    for i in 0..k {
        r = r * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1);
    }
    r
}

/// Outcome of a detection: per-detector click counts, probability, and the
/// normalized state of the undetected modes.
#[derive(Debug, Clone)]
pub struct DetectionOutcome<T> {
    pub counts: Vec<usize>,
    pub probability: T,
    pub state: DensityMatrix<T>,
}

/// Largest number of distinct outcomes enumerated.
pub const MAX_OUTCOMES: usize = 10_000;

struct Split {
    rest: ModeRegistry,
    /// basis index → (detected occupations key, index in `rest`)
    map: Vec<(usize, usize)>,
    det_dims: Vec<usize>,
}

fn split(reg: &ModeRegistry, labels: &[&str]) -> Result<Split> {
    let detected: Vec<usize> = labels.iter().map(|l| reg.index_of(l)).collect::<Result<_>>()?;
    let rest = reg.without(&detected)?;
    let keep: Vec<usize> = (0..reg.len()).filter(|k| !detected.contains(k)).collect();
    let det_dims: Vec<usize> = detected.iter().map(|&k| reg.mode(k).dim).collect();
    let map = (0..reg.dim())
        .map(|i| {
            let mut key = 0;
            for &k in &detected {
                key = key * reg.mode(k).dim + reg.occupation(i, k);
            }
            let r: usize = keep
                .iter()
                .enumerate()
                .map(|(kk, &k)| reg.occupation(i, k) * rest.stride(kk))
                .sum();
            (key, r)
        })
        .collect();
    Ok(Split {
        rest,
        map,
        det_dims,
    })
}

fn decode(mut key: usize, dims: &[usize]) -> Vec<usize> {
    let mut v = vec![0; dims.len()];
    for (slot, &d) in v.iter_mut().zip(dims).rev() {
        *slot = key % d;
        key /= d;
    }
    v
}

/// All click patterns reachable from photon numbers `k`, with probability.
fn click_patterns<T: Real>(k: &[usize], model: &DetectorModel<T>) -> Vec<(Vec<usize>, T)> {
    let mut out = vec![(Vec::new(), T::one())];
    for &kd in k {
        let mut next = Vec::new();
        for (pat, p) in &out {
            for c in 0..=kd + 1 {
                let q = model.click_probability(kd, c);
                if q > T::zero() {
                    let mut np: Vec<usize> = pat.clone();
                    np.push(c);
                    next.push((np, *p * q));
                }
            }
        }
        out = next;
    }
    out
}

fn finish<T: Real>(
    acc: BTreeMap<Vec<usize>, Vec<Complex<T>>>,
    rest: &ModeRegistry,
) -> Result<Vec<DetectionOutcome<T>>> {
    if acc.len() > MAX_OUTCOMES {
        return Err(Error::ComplexityLimit(format!(
            "{} detection outcomes exceed {MAX_OUTCOMES}",
            acc.len()
        )));
    }
    let mut out = Vec::with_capacity(acc.len());
    for (counts, m) in acc {
        let mut state = DensityMatrix::from_matrix(rest, m)?;
        let p = state.trace();
        if p <= T::zero() {
            continue;
        }
        state.scale(p.recip());
        out.push(DetectionOutcome {
            counts,
            probability: p,
            state,
        });
    }
    Ok(out)
}

/// Measures the listed modes of a density matrix. Outcomes are sorted by
/// click pattern.
pub fn detect_photon_number<T: Real>(
    rho: &DensityMatrix<T>,
    labels: &[&str],
    model: &DetectorModel<T>,
) -> Result<Vec<DetectionOutcome<T>>> {
    let sp = split(&rho.registry, labels)?;
    let dr = sp.rest.dim();
    let d = rho.dim();
    // diagonal blocks in the detected occupations
    let mut blocks: BTreeMap<usize, Vec<Complex<T>>> = BTreeMap::new();
    for i in 0..d {
        let (ki, ri) = sp.map[i];
        for j in 0..d {
            let (kj, rj) = sp.map[j];
            if ki != kj {
                continue;
            }
            let v = rho.at(i, j);
            if v.is_zero() {
                continue;
            }
            blocks.entry(ki).or_insert_with(|| vec![Complex::zero(); dr * dr])[ri * dr + rj] += v;
        }
    }
    let mut acc: BTreeMap<Vec<usize>, Vec<Complex<T>>> = BTreeMap::new();
    for (key, block) in blocks {
        let k = decode(key, &sp.det_dims);
        for (pat, p) in click_patterns(&k, model) {
            let dst = acc.entry(pat).or_insert_with(|| vec![Complex::zero(); dr * dr]);
            for (o, b) in dst.iter_mut().zip(&block) {
                *o += *b * p;
            }
        }
        if acc.len() > MAX_OUTCOMES {
            break;
        }
    }
    finish(acc, &sp.rest)
}

/// Pure-state input; avoids forming the full density matrix.
pub fn detect_photon_number_pure<T: Real>(
    psi: &PureState<T>,
    labels: &[&str],
    model: &DetectorModel<T>,
) -> Result<Vec<DetectionOutcome<T>>> {
    let sp = split(&psi.registry, labels)?;
    let dr = sp.rest.dim();
    let mut vecs: BTreeMap<usize, Vec<Complex<T>>> = BTreeMap::new();
    for (i, a) in psi.amplitudes.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let (k, r) = sp.map[i];
        vecs.entry(k).or_insert_with(|| vec![Complex::zero(); dr])[r] += *a;
    }
    let mut acc: BTreeMap<Vec<usize>, Vec<Complex<T>>> = BTreeMap::new();
    for (key, v) in vecs {
        let k = decode(key, &sp.det_dims);
        let nz: Vec<usize> = (0..dr).filter(|&r| !v[r].is_zero()).collect();
        for (pat, p) in click_patterns(&k, model) {
            let dst = acc.entry(pat).or_insert_with(|| vec![Complex::zero(); dr * dr]);
            for &r in &nz {
                for &s in &nz {
                    dst[r * dr + s] += v[r] * v[s].conj() * p;
                }
            }
        }
        if acc.len() > MAX_OUTCOMES {
            break;
        }
    }
    finish(acc, &sp.rest)
}
