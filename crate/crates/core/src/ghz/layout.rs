//! Mode and detector indexing for n dual-rail acoustic qubits.
//!
//! Acoustic mode `[i,q]` (qubit i = 1..n, rail q ∈ {0,1}) has index
//! `2(i−1)+q` and owns bit `2(i−1)+q` of an occupation mask. Detector `[i,q]`
//! is indexed the same way. Detector pair i is `{[i,1], [(i mod n)+1,0]}`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest qubit count the bitmask representation supports.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub n: usize,
    /// Per detector: (mode, ±1) terms of 2× the detector amplitude operator.
    pub detectors: Vec<Vec<(usize, i64)>>,
}

impl Layout {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("GHZ needs n >= 2, got {n}")));
        }
        if n > MAX_QUBITS {
            return Err(Error::ComplexityLimit(format!(
                "{n} qubits exceeds the supported {MAX_QUBITS}"
            )));
        }
        let u = network_matrix::<f64>(n);
        let detectors = u
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| c.abs() > 1e-12)
                    .map(|(m, c)| (m, (2.0 * c).round() as i64))
                    .collect()
            })
            .collect();
        Ok(Self { n, detectors })
    }

    pub fn modes(&self) -> usize {
        2 * self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.modes()
    }

    /// All modes occupied.
    pub fn full_mask(&self) -> usize {
        self.dim() - 1
    }

    pub fn index(&self, qubit: usize, rail: usize) -> usize {
        2 * (qubit - 1) + rail
    }

    pub fn label(&self, k: usize) -> String {
        format!("[{},{}]", k / 2 + 1, k % 2)
    }

    /// Detector pair (0-based) a detector belongs to, and its parity bit.
    pub fn pair_of(&self, det: usize) -> (usize, i8) {
        let (i, q) = (det / 2, det % 2);
        if q == 1 {
            (i, 1)
        } else {
            ((i + self.n - 1) % self.n, -1)
        }
    }

    /// Detector of pair `pair` (0-based) with parity bit `s`.
    pub fn detector(&self, pair: usize, s: i8) -> usize {
        if s > 0 {
            2 * pair + 1
        } else {
            2 * ((pair + 1) % self.n)
        }
    }

    /// Qubits (0-based) whose modes feed a pair.
    pub fn pair_qubits(&self, pair: usize) -> [usize; 2] {
        [pair, (pair + 1) % self.n]
    }

    /// Mode mask of qubits still retrieved: a qubit drops out once both
    /// neighbouring pairs have clicked.
    pub fn active_mask(&self, clicked: &[bool]) -> usize {
        let mut mask = 0;
        for j in 0..self.n {
            let left = clicked[(j + self.n - 1) % self.n];
            if !(left && clicked[j]) {
                mask |= 0b11 << (2 * j);
            }
        }
        mask
    }

    /// Ideal GHZ state with sign `sign` in the occupation basis.
    pub fn ghz_state<T: Real>(&self, sign: i8) -> Vec<T> {
        let mut v = vec![T::zero(); self.dim()];
        for (mask, out) in v.iter_mut().enumerate() {
            let mut minus = 1i8;
            let mut ok = true;
            for j in 0..self.n {
                match (mask >> (2 * j)) & 0b11 {
                    0b01 => {}
                    0b10 => minus = -minus,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            // |+⟩ⁿ contributes +1 everywhere, |−⟩ⁿ flips sign per occupied rail 1
            if ok && minus == sign {
                *out = T::one();
            }
        }
        let n2: T = v.iter().map(|x| *x * *x).fold(T::zero(), |a, b| a + b);
        let s = n2.sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }
}

/// Output-mode amplitudes of the two splitter rounds: row d lists the
/// coefficients of detector d on the input modes.
pub fn network_matrix<T: Real>(n: usize) -> Vec<Vec<T>> {
    let m = 2 * n;
    let mut u: Vec<Vec<T>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let split = |u: &mut Vec<Vec<T>>, p: usize, q: usize| {
        let (rp, rq) = (u[p].clone(), u[q].clone());
        for k in 0..m {
            u[p][k] = (rp[k] + rq[k]) * h;
            u[q][k] = (rp[k] - rq[k]) * h;
        }
    };
    for i in 0..n {
        split(&mut u, 2 * i + 1, 2 * i);
    }
    for i in 0..n {
        split(&mut u, 2 * i + 1, 2 * ((i + 1) % n));
    }
    u
}
