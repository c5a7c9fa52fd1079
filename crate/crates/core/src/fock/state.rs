use num_complex::Complex;
use num_traits::Zero;
use serde::Serialize;

use super::ops::SparseOp;
use super::registry::{ModeKind, ModeRegistry};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tail weight above which a truncated thermal distribution is rejected.
pub const THERMAL_TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    pub registry: ModeRegistry,
    pub amplitudes: Vec<Complex<T>>,
    /// Set after a Kraus map or projection that was not renormalized.
    pub unnormalized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    pub registry: ModeRegistry,
    /// Row-major, `dim × dim`.
    pub matrix: Vec<Complex<T>>,
}

fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

impl<T: Real> PureState<T> {
    /// Product Fock state with the given occupations.
    pub fn fock(registry: &ModeRegistry, occ: &[usize]) -> Result<Self> {
        let mut amplitudes = vec![Complex::zero(); registry.dim()];
        amplitudes[registry.index(occ)?] = c(T::one());
        Ok(Self {
            registry: registry.clone(),
            amplitudes,
            unnormalized: false,
        })
    }

    pub fn vacuum(registry: &ModeRegistry) -> Self {
        Self::fock(registry, &vec![0; registry.len()]).expect("vacuum fits any truncation")
    }

    pub fn from_amplitudes(registry: &ModeRegistry, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != registry.dim() {
            return Err(Error::DimensionMismatch {
                expected: registry.dim(),
                got: amplitudes.len(),
            });
        }
        let mut s = Self {
            registry: registry.clone(),
            amplitudes,
            unnormalized: false,
        };
        s.unnormalized = (s.norm_sqr() - T::one()).abs() > T::lit(1e-10);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Renormalizes and returns the previous squared norm. A zero state is
    /// left untouched and flagged.
    pub fn normalize(&mut self) -> T {
        let n = self.norm_sqr();
        if n > T::zero() {
            let s = n.sqrt().recip();
            for a in &mut self.amplitudes {
                *a = *a * s;
            }
            self.unnormalized = false;
        } else {
            self.unnormalized = true;
        }
        n
    }

    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    /// |⟨self|other⟩|² for normalized states.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn expect(&self, op: &SparseOp<T>) -> Complex<T> {
        let y = op.apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&y)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        let d = self.dim();
        let mut m = vec![Complex::zero(); d * d];
        for i in 0..d {
            if self.amplitudes[i].is_zero() {
                continue;
            }
            for j in 0..d {
                m[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix {
            registry: self.registry.clone(),
            matrix: m,
        }
    }
}

impl<T: Real> DensityMatrix<T> {
    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    pub fn from_matrix(registry: &ModeRegistry, matrix: Vec<Complex<T>>) -> Result<Self> {
        let d = registry.dim();
        if matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: matrix.len(),
            });
        }
        Ok(Self {
            registry: registry.clone(),
            matrix,
        })
    }

    /// Thermal (Boltzmann) state on `mode_label` with mean occupation `n_th`,
    /// all other modes in vacuum.
    pub fn thermal(registry: &ModeRegistry, mode_label: &str, n_th: T) -> Result<Self> {
        if n_th < T::zero() {
            return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {n_th}")));
        }
        let k = registry.index_of(mode_label)?;
        let dim = registry.mode(k).dim;
        let pops = thermal_populations(n_th, dim, mode_label)?;
        let d = registry.dim();
        let mut m = vec![Complex::zero(); d * d];
        let mut occ = vec![0; registry.len()];
        for (n, p) in pops.into_iter().enumerate() {
            occ[k] = n;
            let i = registry.index(&occ)?;
            m[i * d + i] = c(p);
        }
        Ok(Self {
            registry: registry.clone(),
            matrix: m,
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[i * self.dim() + j]
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.at(i, i).re).sum()
    }

    pub fn expect(&self, op: &SparseOp<T>) -> Complex<T> {
        // Tr(O ρ) = Σ_i Σ_k O_ik ρ_ki
        let mut acc = Complex::zero();
        for (i, row) in op.rows().iter().enumerate() {
            for &(k, v) in row {
                acc += v * self.at(k, i);
            }
        }
        acc
    }

    /// Mean occupation of a mode.
    pub fn mean_number(&self, label: &str) -> Result<T> {
        let k = self.registry.index_of(label)?;
        Ok((0..self.dim())
            .map(|i| T::from_usize_lossy(self.registry.occupation(i, k)) * self.at(i, i).re)
            .sum())
    }

    /// Marginal photon/phonon-number distribution of a mode.
    pub fn number_distribution(&self, label: &str) -> Result<Vec<T>> {
        let k = self.registry.index_of(label)?;
        let mut p = vec![T::zero(); self.registry.mode(k).dim];
        for i in 0..self.dim() {
            p[self.registry.occupation(i, k)] += self.at(i, i).re;
        }
        Ok(p)
    }

    pub fn max_hermiticity_error(&self) -> T {
        let d = self.dim();
        let mut e = T::zero();
        for i in 0..d {
            for j in i..d {
                e = e.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        e
    }

    /// Smallest eigenvalue of the Hermitian part. O(d³) per sweep, meant
    /// for validation of small systems.
    pub fn min_eigenvalue(&self) -> T {
        // Jacobi on the real symmetric embedding [[A, -B], [B, A]].
        let d = self.dim();
        let n = 2 * d;
        let mut m = vec![T::zero(); n * n];
        for i in 0..d {
            for j in 0..d {
                let h = (self.at(i, j) + self.at(j, i).conj()) * T::lit(0.5);
                m[i * n + j] = h.re;
                m[(i + d) * n + (j + d)] = h.re;
                m[i * n + (j + d)] = -h.im;
                m[(i + d) * n + j] = h.im;
            }
        }
        jacobi_eigenvalues(&mut m, n)
            .into_iter()
            .fold(T::infinity(), T::min)
    }

    /// Checks the density-matrix invariants with the given tolerances.
    pub fn validate(&self, herm_tol: T, trace_tol: T, eig_tol: T) -> Result<()> {
        let h = self.max_hermiticity_error();
        if h > herm_tol {
            return Err(Error::InvalidState(format!("not Hermitian (error {h})")));
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let ev = self.min_eigenvalue();
        if ev < -eig_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {ev}")));
        }
        Ok(())
    }

    /// Largest population found in the top Fock level of any non-counter
    /// mode, with the mode label.
    pub fn top_level_population(&self) -> (T, String) {
        let mut worst = (T::zero(), String::new());
        for (k, m) in self.registry.modes().iter().enumerate() {
            if m.kind == ModeKind::Counter {
                continue;
            }
            let p: T = (0..self.dim())
                .filter(|&i| self.registry.occupation(i, k) == m.dim - 1)
                .map(|i| self.at(i, i).re)
                .sum();
            if p > worst.0 {
                worst = (p, m.label.clone());
            }
        }
        worst
    }

    /// Partial trace over the listed modes.
    pub fn trace_out(&self, labels: &[&str]) -> Result<Self> {
        let drop: Vec<usize> = labels
            .iter()
            .map(|l| self.registry.index_of(l))
            .collect::<Result<_>>()?;
        let keep_reg = self.registry.without(&drop)?;
        let keep: Vec<usize> = (0..self.registry.len()).filter(|k| !drop.contains(k)).collect();
        let dk = keep_reg.dim();
        let mut out = vec![Complex::zero(); dk * dk];
        let d = self.dim();
        let reduced = |i: usize| -> usize {
            keep.iter()
                .enumerate()
                .map(|(kk, &k)| self.registry.occupation(i, k) * keep_reg.stride(kk))
                .sum()
        };
        let traced_key = |i: usize| -> Vec<usize> {
            drop.iter().map(|&k| self.registry.occupation(i, k)).collect()
        };
        for i in 0..d {
            let ti = traced_key(i);
            let ri = reduced(i);
            for j in 0..d {
                let v = self.at(i, j);
                if v.is_zero() || traced_key(j) != ti {
                    continue;
                }
                out[ri * dk + reduced(j)] += v;
            }
        }
        Ok(Self {
            registry: keep_reg,
            matrix: out,
        })
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure state on the same registry.
    pub fn fidelity_pure(&self, psi: &PureState<T>) -> T {
        let d = self.dim();
        let mut acc = Complex::zero();
        for i in 0..d {
            if psi.amplitudes[i].is_zero() {
                continue;
            }
            for j in 0..d {
                acc += psi.amplitudes[i].conj() * self.at(i, j) * psi.amplitudes[j];
            }
        }
        acc.re
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.matrix {
            *v = *v * s;
        }
    }

    /// JSON dump: mode labels/dims and the matrix as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump<'a> {
            modes: &'a ModeRegistry,
            dim: usize,
            matrix: Vec<[f64; 2]>,
        }
        serde_json::to_value(Dump {
            modes: &self.registry,
            dim: self.dim(),
            matrix: self
                .matrix
                .iter()
                .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                .collect(),
        })
        .expect("serializable")
    }
}

/// Truncated Boltzmann populations, renormalized. Errors when the dropped
/// tail exceeds [`THERMAL_TAIL_LIMIT`].
pub fn thermal_populations<T: Real>(n_th: T, dim: usize, label: &str) -> Result<Vec<T>> {
    if n_th == T::zero() {
        let mut p = vec![T::zero(); dim];
        p[0] = T::one();
        return Ok(p);
    }
    let q = n_th / (T::one() + n_th);
    let tail = q.powi(dim as i32);
    if tail.to_f64_lossy() > THERMAL_TAIL_LIMIT {
        return Err(Error::Truncation {
            mode: label.to_string(),
            weight: tail.to_f64_lossy(),
            limit: THERMAL_TAIL_LIMIT,
        });
    }
    let p0 = T::one() - q;
    let mut p: Vec<T> = (0..dim).map(|k| p0 * q.powi(k as i32)).collect();
    let s: T = p.iter().copied().sum();
    for v in &mut p {
        *v /= s;
    }
    Ok(p)
}

/// Eigenvalues of a real symmetric matrix (cyclic Jacobi). Destroys `m`.
pub(crate) fn jacobi_eigenvalues<T: Real>(m: &mut [T], n: usize) -> Vec<T> {
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = (t * t + T::one()).sqrt().recip();
                let sn = t * cs;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = cs * akp - sn * akq;
                    m[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = cs * apk - sn * aqk;
                    m[q * n + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_mean_matches() {
        let r = ModeRegistry::new([("b", 60, ModeKind::Acoustic)]).unwrap();
        let rho = DensityMatrix::<f64>::thermal(&r, "b", 3.7).unwrap();
        assert!((rho.mean_number("b").unwrap() - 3.7).abs() < 1e-3);
        let r = ModeRegistry::new([("b", 10, ModeKind::Acoustic)]).unwrap();
        let rho = DensityMatrix::<f64>::thermal(&r, "b", 0.1).unwrap();
        assert!((rho.mean_number("b").unwrap() - 0.1).abs() < 1e-6);
    }

    #[test]
    fn thermal_rejects_short_truncation() {
        let r = ModeRegistry::new([("b", 10, ModeKind::Acoustic)]).unwrap();
        assert!(matches!(
            DensityMatrix::<f64>::thermal(&r, "b", 3.7),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn zero_temperature_is_vacuum() {
        let r = ModeRegistry::new([("a", 3, ModeKind::Optical), ("b", 4, ModeKind::Acoustic)])
            .unwrap();
        let rho = DensityMatrix::<f64>::thermal(&r, "b", 0.0).unwrap();
        assert_eq!(rho.at(0, 0).re, 1.0);
        assert_eq!(rho.mean_number("b").unwrap(), 0.0);
    }

    #[test]
    fn partial_trace_of_product() {
        let r = ModeRegistry::new([("a", 2, ModeKind::Optical), ("b", 3, ModeKind::Acoustic)])
            .unwrap();
        let psi = PureState::<f64>::fock(&r, &[1, 2]).unwrap();
        let red = psi.to_density().trace_out(&["a"]).unwrap();
        assert_eq!(red.dim(), 3);
        assert!((red.at(2, 2).re - 1.0).abs() < 1e-15);
        red.validate(1e-10, 1e-8, 1e-8).unwrap();
    }

    #[test]
    fn jacobi_known_spectrum() {
        let mut m = vec![2.0, 1.0, 1.0, 2.0];
        let mut ev = jacobi_eigenvalues(&mut m, 2);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
