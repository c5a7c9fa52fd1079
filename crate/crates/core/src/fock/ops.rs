use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use super::registry::ModeRegistry;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sparse operator on the full registry Hilbert space, stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp<T> {
    dim: usize,
    rows: Vec<Vec<(usize, Complex<T>)>>,
}

impl<T: Real> SparseOp<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            rows: (0..dim)
                .map(|i| vec![(i, Complex::new(T::one(), T::zero()))])
                .collect(),
        }
    }

    /// Builds from row lists of `(column, value)`.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, Complex<T>)>>) -> Self {
        debug_assert_eq!(rows.len(), dim);
        Self { dim, rows }
    }

    fn from_map(dim: usize, f: impl Fn(usize) -> Option<(usize, T)>) -> Self {
        // column-major description: basis state j maps to coefficient * |i>
        let mut rows = vec![Vec::new(); dim];
        for j in 0..dim {
            if let Some((i, c)) = f(j) {
                rows[i].push((j, Complex::new(c, T::zero())));
            }
        }
        Self { dim, rows }
    }

    /// Annihilation operator on `label`.
    pub fn destroy(reg: &ModeRegistry, label: &str) -> Result<Self> {
        let k = reg.index_of(label)?;
        let s = reg.stride(k);
        Ok(Self::from_map(reg.dim(), |j| {
            let n = reg.occupation(j, k);
            (n > 0).then(|| (j - s, T::from_usize_lossy(n).sqrt()))
        }))
    }

    /// Creation operator on `label`; the top Fock level maps to zero.
    pub fn create(reg: &ModeRegistry, label: &str) -> Result<Self> {
        Ok(Self::destroy(reg, label)?.adjoint())
    }

    pub fn number(reg: &ModeRegistry, label: &str) -> Result<Self> {
        let k = reg.index_of(label)?;
        Ok(Self::from_map(reg.dim(), |j| {
            let n = reg.occupation(j, k);
            (n > 0).then(|| (j, T::from_usize_lossy(n)))
        }))
    }

    /// Raising map |n⟩ → |n+1⟩ below the top level of a counter mode (the
    /// top level maps to zero). Paired with [`SparseOp::projector`] on the
    /// top level it forms a saturating counter whose two branches satisfy
    /// `R†R + P†P = 1`.
    pub fn counter_raise(reg: &ModeRegistry, label: &str) -> Result<Self> {
        let k = reg.index_of(label)?;
        let s = reg.stride(k);
        let top = reg.mode(k).dim - 1;
        Ok(Self::from_map(reg.dim(), |j| {
            (reg.occupation(j, k) < top).then(|| (j + s, T::one()))
        }))
    }

    /// Projector onto Fock level `n` of mode `label`.
    pub fn projector(reg: &ModeRegistry, label: &str, n: usize) -> Result<Self> {
        let k = reg.index_of(label)?;
        Ok(Self::from_map(reg.dim(), |j| {
            (reg.occupation(j, k) == n).then_some((j, T::one()))
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn rows(&self) -> &[Vec<(usize, Complex<T>)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.rows[i]
            .iter()
            .find(|(c, _)| *c == j)
            .map(|(_, v)| *v)
            .unwrap_or_else(Complex::zero)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v.conj()));
            }
        }
        for r in &mut rows {
            r.sort_by_key(|e| e.0);
        }
        Self { dim: self.dim, rows }
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, v * c)).collect())
                .collect(),
        }
    }

    pub fn scale_re(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other.dim)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut m: BTreeMap<usize, Complex<T>> = BTreeMap::new();
                for &(j, v) in a.iter().chain(b) {
                    *m.entry(j).or_insert_with(Complex::zero) += v;
                }
                m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Ok(Self { dim: self.dim, rows })
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other.dim)?;
        let rows = self
            .rows
            .iter()
            .map(|a| {
                let mut m: BTreeMap<usize, Complex<T>> = BTreeMap::new();
                for &(k, v) in a {
                    for &(j, w) in &other.rows[k] {
                        *m.entry(j).or_insert_with(Complex::zero) += v * w;
                    }
                }
                m.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        Ok(Self { dim: self.dim, rows })
    }

    /// `y = self * x`
    pub fn apply(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(Complex::zero(), |acc, &(j, v)| acc + v * x[j]))
            .collect()
    }

    /// `out += c * self * rho` for dense row-major `rho`.
    pub fn left_mul_acc(&self, c: Complex<T>, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        let d = self.dim;
        for (i, row) in self.rows.iter().enumerate() {
            let dst = &mut out[i * d..(i + 1) * d];
            for &(k, v) in row {
                let cv = c * v;
                let src = &rho[k * d..(k + 1) * d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += cv * s;
                }
            }
        }
    }

    /// `out += c * rho * self` for dense row-major `rho`.
    pub fn right_mul_acc(&self, c: Complex<T>, rho: &[Complex<T>], out: &mut [Complex<T>]) {
        let d = self.dim;
        for i in 0..d {
            let src = &rho[i * d..(i + 1) * d];
            let dst = &mut out[i * d..(i + 1) * d];
            for (k, row) in self.rows.iter().enumerate() {
                let r = src[k];
                if r.is_zero() {
                    continue;
                }
                let cr = c * r;
                for &(j, v) in row {
                    dst[j] += cr * v;
                }
            }
        }
    }

    /// `self * rho * self†` for dense row-major `rho`.
    pub fn sandwich(&self, rho: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim;
        let mut tmp = vec![Complex::zero(); d * d];
        self.left_mul_acc(Complex::new(T::one(), T::zero()), rho, &mut tmp);
        // (tmp * self†)_{ij} = Σ_k tmp_ik conj(self_jk)
        let mut out = vec![Complex::zero(); d * d];
        for i in 0..d {
            let src = &tmp[i * d..(i + 1) * d];
            for (j, row) in self.rows.iter().enumerate() {
                let mut acc = Complex::zero();
                for &(k, v) in row {
                    acc += src[k] * v.conj();
                }
                out[i * d + j] = acc;
            }
        }
        out
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        let adj = self.adjoint();
        (0..self.dim).all(|i| {
            self.rows[i]
                .iter()
                .all(|&(j, v)| (v - adj.get(i, j)).norm() <= tol)
                && adj.rows[i]
                    .iter()
                    .all(|&(j, v)| (v - self.get(i, j)).norm() <= tol)
        })
    }

    fn check(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: d,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::registry::ModeKind;

    fn reg() -> ModeRegistry {
        ModeRegistry::new([("a", 4, ModeKind::Optical), ("b", 3, ModeKind::Acoustic)]).unwrap()
    }

    #[test]
    fn commutator_below_cutoff() {
        let r = reg();
        let a = SparseOp::<f64>::destroy(&r, "a").unwrap();
        let ad = SparseOp::<f64>::create(&r, "a").unwrap();
        let c = a.mul(&ad).unwrap().add(&ad.mul(&a).unwrap().scale_re(-1.0)).unwrap();
        // [a, a†] = 1 except on the top level of `a`
        for idx in 0..r.dim() {
            let expect = if r.occupation(idx, 0) < 3 { 1.0 } else { -3.0 };
            assert!((c.get(idx, idx).re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn number_is_adag_a() {
        let r = reg();
        let b = SparseOp::<f64>::destroy(&r, "b").unwrap();
        let n = b.adjoint().mul(&b).unwrap();
        let m = SparseOp::number(&r, "b").unwrap();
        for i in 0..r.dim() {
            for j in 0..r.dim() {
                assert!((n.get(i, j) - m.get(i, j)).norm() < 1e-12);
            }
        }
        assert!(n.is_hermitian(1e-14));
    }

    #[test]
    fn counter_branches_complete() {
        let r = ModeRegistry::uniform(&["c"], 3, ModeKind::Counter).unwrap();
        let up = SparseOp::<f64>::counter_raise(&r, "c").unwrap();
        let top = SparseOp::<f64>::projector(&r, "c", 2).unwrap();
        let sum = up.adjoint().mul(&up).unwrap().add(&top.adjoint().mul(&top).unwrap()).unwrap();
        assert_eq!(sum, SparseOp::identity(3));
        assert_eq!(up.get(1, 0).re, 1.0);
    }
}
