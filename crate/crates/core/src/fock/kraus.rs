use num_complex::Complex;
use num_traits::Zero;

use super::ops::SparseOp;
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausOp<T> {
    pub operator: SparseOp<T>,
    pub label: String,
}

impl<T: Real> KrausOp<T> {
    pub fn new(label: impl Into<String>, operator: SparseOp<T>) -> Self {
        Self {
            operator,
            label: label.into(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("I", SparseOp::identity(dim))
    }

    /// Maps a pure state. Returns the renormalized result and the outcome
    /// probability relative to the input norm. A zero-probability outcome
    /// returns the zero vector flagged as unnormalized.
    pub fn apply_pure(&self, psi: &PureState<T>) -> Result<(PureState<T>, T)> {
        check(self.operator.dim(), psi.dim())?;
        let n0 = psi.norm_sqr();
        let mut out = PureState {
            registry: psi.registry.clone(),
            amplitudes: self.operator.apply(&psi.amplitudes),
            unnormalized: true,
        };
        let n1 = out.normalize();
        let p = if n0 > T::zero() { n1 / n0 } else { T::zero() };
        Ok((out, p))
    }

    pub fn apply_density(&self, rho: &DensityMatrix<T>) -> Result<(DensityMatrix<T>, T)> {
        check(self.operator.dim(), rho.dim())?;
        let tr0 = rho.trace();
        let mut out = DensityMatrix::from_matrix(&rho.registry, self.operator.sandwich(&rho.matrix))?;
        let tr1 = out.trace();
        let p = if tr0 > T::zero() { tr1 / tr0 } else { T::zero() };
        if tr1 > T::zero() {
            out.scale(tr1.recip());
        } else {
            out.matrix.iter_mut().for_each(|v| *v = Complex::zero());
        }
        Ok((out, p))
    }
}

fn check(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Largest entry of `Σ K†K − 1`.
pub fn completeness_error<T: Real>(set: &[KrausOp<T>]) -> Result<T> {
    let Some(first) = set.first() else {
        return Ok(T::infinity());
    };
    let d = first.operator.dim();
    let mut sum = SparseOp::identity(d).scale_re(-T::one());
    for k in set {
        sum = sum.add(&k.operator.adjoint().mul(&k.operator)?)?;
    }
    Ok(sum
        .rows()
        .iter()
        .flat_map(|r| r.iter().map(|(_, v)| v.norm()))
        .fold(T::zero(), T::max))
}
