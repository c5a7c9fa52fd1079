//! Linear-optical mode transformations on Fock states.
//!
//! Creation operators transform as a_i† → Σ_j U_{ji} a_j†. With the 50/50
//! matrix [[1, 1], [1, −1]]/√2 this sends |11⟩ to (|20⟩ − |02⟩)/√2.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use super::ops::SparseOp;
use super::registry::{ModeKind, ModeRegistry};
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CMatrix<T> = Vec<Vec<Complex<T>>>;

/// 50/50 splitter with the (p+q, p−q)/√2 convention.
pub fn beam_splitter_50_50<T: Real>() -> CMatrix<T> {
    let h = Complex::new(T::lit(0.5).sqrt(), T::zero());
    vec![vec![h, h], vec![h, -h]]
}

/// Two-mode splitter with power transmissivity `p` from mode 0 into mode 1:
/// a₀† → √(1−p) a₀† + √p a₁†, a₁† → −√p a₀† + √(1−p) a₁†.
pub fn transmissivity_splitter<T: Real>(p: T) -> CMatrix<T> {
    let t = Complex::new((T::one() - p).sqrt(), T::zero());
    let r = Complex::new(p.sqrt(), T::zero());
    vec![vec![t, -r], vec![r, t]]
}

pub fn unitarity_error<T: Real>(u: &CMatrix<T>) -> T {
    let n = u.len();
    let mut e = T::zero();
    for i in 0..n {
        if u[i].len() != n {
            return T::infinity();
        }
        for j in 0..n {
            let mut s: Complex<T> = Complex::zero();
            for k in 0..n {
                s += u[k][i].conj() * u[k][j];
            }
            let target = if i == j { T::one() } else { T::zero() };
            e = e.max((s - Complex::new(target, T::zero())).norm());
        }
    }
    e
}

/// Builds the Fock-space operator implementing `u` on the listed modes.
/// Components that would leave the truncated space are dropped, so the
/// operator is only unitary on inputs whose images fit.
pub fn transfer_operator<T: Real>(
    reg: &ModeRegistry,
    labels: &[&str],
    u: &CMatrix<T>,
) -> Result<SparseOp<T>> {
    if u.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: u.len(),
        });
    }
    let dev = unitarity_error(u);
    if dev > T::lit(1e-10) {
        return Err(Error::NonUnitary {
            deviation: dev.to_f64_lossy(),
        });
    }
    let ks: Vec<usize> = labels.iter().map(|l| reg.index_of(l)).collect::<Result<_>>()?;
    let m = ks.len();
    let mut cache: BTreeMap<Vec<usize>, Vec<(Vec<usize>, Complex<T>)>> = BTreeMap::new();
    let mut op_rows: Vec<BTreeMap<usize, Complex<T>>> = vec![BTreeMap::new(); reg.dim()];
    for j in 0..reg.dim() {
        let occ: Vec<usize> = ks.iter().map(|&k| reg.occupation(j, k)).collect();
        let base = j - ks
            .iter()
            .zip(&occ)
            .map(|(&k, &n)| n * reg.stride(k))
            .sum::<usize>();
        let image = cache
            .entry(occ.clone())
            .or_insert_with(|| expand(&occ, u, m));
        for (out_occ, coeff) in image.iter() {
            let fits = ks
                .iter()
                .zip(out_occ)
                .all(|(&k, &n)| n < reg.mode(k).dim);
            if !fits {
                // leaves the truncated space; callers detect the norm loss
                continue;
            }
            let i = base
                + ks
                    .iter()
                    .zip(out_occ)
                    .map(|(&k, &n)| n * reg.stride(k))
                    .sum::<usize>();
            *op_rows[i].entry(j).or_insert_with(Complex::zero) += *coeff;
        }
    }
    Ok(SparseOp::from_rows(
        reg.dim(),
        op_rows
            .into_iter()
            .map(|r| r.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect(),
    ))
}

/// Image of Π_i (a_i†)^{n_i}/√(n_i!) |0⟩ as (output occupation, amplitude).
fn expand<T: Real>(occ: &[usize], u: &CMatrix<T>, m: usize) -> Vec<(Vec<usize>, Complex<T>)> {
    // polynomial in output creation operators, keyed by exponent vector
    let mut poly: BTreeMap<Vec<usize>, Complex<T>> = BTreeMap::new();
    poly.insert(vec![0; m], Complex::new(T::one(), T::zero()));
    let mut norm = T::one();
    for (i, &n) in occ.iter().enumerate() {
        for _ in 0..n {
            let mut next = BTreeMap::new();
            for (key, c) in &poly {
                for j in 0..m {
                    let w = u[j][i];
                    if w.is_zero() {
                        continue;
                    }
                    let mut k2 = key.clone();
                    k2[j] += 1;
                    *next.entry(k2).or_insert_with(Complex::zero) += *c * w;
                }
            }
            poly = next;
        }
        norm *= factorial::<T>(n).sqrt();
    }
    poly.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let f: T = k.iter().map(|&x| factorial::<T>(x).sqrt()).fold(T::one(), |a, b| a * b);
            (k, c * (f / norm))
        })
        .collect()
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |a, k| a * T::from_usize_lossy(k))
}

fn require_optical(reg: &ModeRegistry, labels: &[&str]) -> Result<()> {
    for l in labels {
        let k = reg.index_of(l)?;
        if reg.mode(k).kind != ModeKind::Optical {
            return Err(Error::InvalidParameter(format!("mode `{l}` is not optical")));
        }
    }
    Ok(())
}

/// Applies a passive linear-optical transformation to optical modes.
pub fn optical_scatter<T: Real>(
    psi: &PureState<T>,
    labels: &[&str],
    u: &CMatrix<T>,
) -> Result<PureState<T>> {
    require_optical(&psi.registry, labels)?;
    mode_transform(psi, labels, u)
}

pub fn optical_scatter_density<T: Real>(
    rho: &DensityMatrix<T>,
    labels: &[&str],
    u: &CMatrix<T>,
) -> Result<DensityMatrix<T>> {
    require_optical(&rho.registry, labels)?;
    let op = transfer_operator(&rho.registry, labels, u)?;
    let out = DensityMatrix::from_matrix(&rho.registry, op.sandwich(&rho.matrix))?;
    check_loss(rho.trace(), out.trace(), labels)?;
    Ok(out)
}

fn check_loss<T: Real>(before: T, after: T, labels: &[&str]) -> Result<()> {
    let lost = before - after;
    if lost > T::lit(1e-12) * before.max(T::one()) {
        return Err(Error::Truncation {
            mode: labels.join(","),
            weight: lost.to_f64_lossy(),
            limit: 1e-12,
        });
    }
    Ok(())
}

/// Same as [`optical_scatter`] without the optical-mode restriction. Used for
/// the abstract phonon-to-photon conversion map.
pub fn mode_transform<T: Real>(
    psi: &PureState<T>,
    labels: &[&str],
    u: &CMatrix<T>,
) -> Result<PureState<T>> {
    let op = transfer_operator(&psi.registry, labels, u)?;
    let out = PureState {
        registry: psi.registry.clone(),
        amplitudes: op.apply(&psi.amplitudes),
        unnormalized: psi.unnormalized,
    };
    check_loss(psi.norm_sqr(), out.norm_sqr(), labels)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> ModeRegistry {
        ModeRegistry::uniform(&["a", "b"], 3, ModeKind::Optical).unwrap()
    }

    #[test]
    fn identity_is_noop() {
        let r = reg();
        let one = Complex::new(1.0, 0.0);
        let z = Complex::zero();
        let psi = PureState::<f64>::fock(&r, &[2, 1]).unwrap();
        let out = optical_scatter(&psi, &["a", "b"], &vec![vec![one, z], vec![z, one]]).unwrap();
        assert!((out.fidelity(&psi) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_photon_splits() {
        let r = reg();
        let psi = PureState::<f64>::fock(&r, &[1, 0]).unwrap();
        let out = optical_scatter(&psi, &["a", "b"], &beam_splitter_50_50()).unwrap();
        let h = 0.5f64.sqrt();
        assert!((out.amplitudes[r.index(&[1, 0]).unwrap()].re - h).abs() < 1e-14);
        assert!((out.amplitudes[r.index(&[0, 1]).unwrap()].re - h).abs() < 1e-14);
    }

    #[test]
    fn hong_ou_mandel() {
        let r = reg();
        let psi = PureState::<f64>::fock(&r, &[1, 1]).unwrap();
        let out = optical_scatter(&psi, &["a", "b"], &beam_splitter_50_50()).unwrap();
        let h = 0.5f64.sqrt();
        assert!(out.amplitudes[r.index(&[1, 1]).unwrap()].norm() < 1e-14);
        assert!((out.amplitudes[r.index(&[2, 0]).unwrap()].re - h).abs() < 1e-14);
        assert!((out.amplitudes[r.index(&[0, 2]).unwrap()].re + h).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let r = reg();
        let psi = PureState::<f64>::fock(&r, &[1, 0]).unwrap();
        let bad = vec![
            vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)],
            vec![Complex::zero(), Complex::new(1.0, 0.0)],
        ];
        assert!(matches!(
            optical_scatter(&psi, &["a", "b"], &bad),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn truncation_overflow_detected() {
        let r = ModeRegistry::uniform(&["a", "b"], 2, ModeKind::Optical).unwrap();
        let psi = PureState::<f64>::fock(&r, &[1, 1]).unwrap();
        assert!(matches!(
            optical_scatter(&psi, &["a", "b"], &beam_splitter_50_50()),
            Err(Error::Truncation { .. })
        ));
    }
}
