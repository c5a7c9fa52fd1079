use serde::Serialize;

use crate::error::{Error, Result};

/// Physical role of a mode. Counter modes are bookkeeping registers that
/// tally emitted photons; they are exempt from the truncation check because
/// they saturate by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Optical,
    Acoustic,
    Counter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mode {
    pub label: String,
    pub dim: usize,
    pub kind: ModeKind,
}

/// Ordered list of truncated bosonic modes. Basis index is row-major with
/// the first mode most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    total: usize,
}

impl ModeRegistry {
    pub fn new<I, S>(modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize, ModeKind)>,
        S: Into<String>,
    {
        let modes: Vec<Mode> = modes
            .into_iter()
            .map(|(l, dim, kind)| Mode {
                label: l.into(),
                dim,
                kind,
            })
            .collect();
        for (i, m) in modes.iter().enumerate() {
            if m.dim < 2 {
                return Err(Error::InvalidParameter(format!(
                    "mode `{}` needs fock_dim >= 2, got {}",
                    m.label, m.dim
                )));
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate mode label `{}`",
                    m.label
                )));
            }
        }
        let mut strides = vec![1; modes.len()];
        for i in (0..modes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * modes[i + 1].dim;
        }
        let total = modes.iter().map(|m| m.dim).product();
        Ok(Self {
            modes,
            strides,
            total,
        })
    }

    /// Shorthand for registries whose modes are all of one kind.
    pub fn uniform(labels: &[&str], dim: usize, kind: ModeKind) -> Result<Self> {
        Self::new(labels.iter().map(|l| (*l, dim, kind)))
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode `{label}`")))
    }

    pub fn mode(&self, k: usize) -> &Mode {
        &self.modes[k]
    }

    pub fn stride(&self, k: usize) -> usize {
        self.strides[k]
    }

    /// Occupation of mode `k` in basis state `idx`.
    #[inline]
    pub fn occupation(&self, idx: usize, k: usize) -> usize {
        (idx / self.strides[k]) % self.modes[k].dim
    }

    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        (0..self.modes.len()).map(|k| self.occupation(idx, k)).collect()
    }

    pub fn index(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                got: occ.len(),
            });
        }
        let mut idx = 0;
        for (k, &n) in occ.iter().enumerate() {
            if n >= self.modes[k].dim {
                return Err(Error::InvalidState(format!(
                    "occupation {n} exceeds truncation of `{}`",
                    self.modes[k].label
                )));
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    /// Registry with the listed modes removed (order of the rest preserved).
    pub fn without(&self, drop: &[usize]) -> Result<Self> {
        Self::new(
            self.modes
                .iter()
                .enumerate()
                .filter(|(k, _)| !drop.contains(k))
                .map(|(_, m)| (m.label.clone(), m.dim, m.kind)),
        )
    }
}
