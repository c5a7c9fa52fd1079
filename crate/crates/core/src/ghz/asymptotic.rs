//! Success probability in the limit of vanishing retrieval per iteration
//! and unlimited iterations, where detections arrive one at a time.
//!
//! States are kept as sparse integer vectors of 2×detector operators, so
//! every step probability is a ratio of integers and the recursion is exact
//! in any [`Field`].

use std::collections::HashMap;

use super::layout::Layout;
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Largest n accepted; the state space is 4ⁿ and the record space 3ⁿ.
pub const MAX_ASYMPTOTIC_QUBITS: usize = 12;

type Sparse = Vec<(u32, i64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticBreakdown<F> {
    pub success: F,
    /// A second click in an already clicked pair.
    pub failure: F,
    /// No active phonon left before completion.
    pub stalled: F,
}

/// 2d̃ψ with common factors removed, and ‖2d̃ψ‖² before the reduction.
fn lower2(layout: &Layout, det: usize, active: usize, v: &Sparse) -> (Sparse, i128) {
    let mut acc: HashMap<u32, i64> = HashMap::new();
    for &(mask, x) in v {
        for &(m, c) in &layout.detectors[det] {
            let bit = 1u32 << m;
            if active & bit as usize != 0 && mask & bit != 0 {
                *acc.entry(mask ^ bit).or_insert(0) += c * x;
            }
        }
    }
    let mut out: Sparse = acc.into_iter().filter(|&(_, x)| x != 0).collect();
    out.sort_unstable();
    let w = out.iter().map(|&(_, x)| (x as i128) * (x as i128)).sum();
    let g = out.iter().fold(0i64, |g, &(_, x)| gcd(g, x.abs()));
    if g > 1 {
        out.iter_mut().for_each(|e| e.1 /= g);
    }
    (out, w)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn field_from_i128<F: Field>(v: i128) -> F {
    if let Ok(x) = i64::try_from(v) {
        return F::from_i64(x);
    }
    let base = F::from_i64(1i64 << 62);
    let hi = v >> 62;
    let lo = v - (hi << 62);
    field_from_i128::<F>(hi) * base + F::from_i64(lo as i64)
}

struct Walker<'a, F> {
    layout: &'a Layout,
    memo: HashMap<Vec<i8>, AsymptoticBreakdown<F>>,
}

impl<F: Field> Walker<'_, F> {
    /// `record[i]`: 0 if pair i is dark, else its parity bit.
    fn visit(&mut self, record: &mut Vec<i8>, psi: &Sparse) -> AsymptoticBreakdown<F> {
        if let Some(r) = self.memo.get(record) {
            return r.clone();
        }
        let n = self.layout.n;
        let zero = || F::from_i64(0);
        let result = if record.iter().all(|&r| r != 0) {
            AsymptoticBreakdown {
                success: F::from_i64(1),
                failure: zero(),
                stalled: zero(),
            }
        } else {
            let clicked: Vec<bool> = record.iter().map(|&r| r != 0).collect();
            let active = self.layout.active_mask(&clicked);
            // Σ_d ‖2d̃ψ‖² = 4 Σ_active ⟨n_m⟩
            let total: i128 = 4 * psi
                .iter()
                .map(|&(mask, x)| (x as i128) * (x as i128) * ((mask as usize & active).count_ones() as i128))
                .sum::<i128>();
            if total == 0 {
                AsymptoticBreakdown {
                    success: zero(),
                    failure: zero(),
                    stalled: F::from_i64(1),
                }
            } else {
                let w_total = field_from_i128::<F>(total);
                let mut acc = AsymptoticBreakdown {
                    success: zero(),
                    failure: zero(),
                    stalled: zero(),
                };
                let mut consistent: i128 = 0;
                for pair in 0..n {
                    if record[pair] != 0 {
                        continue;
                    }
                    for s in [1i8, -1] {
                        let det = self.layout.detector(pair, s);
                        let (v, w) = lower2(self.layout, det, active, psi);
                        if w == 0 {
                            continue;
                        }
                        consistent += w;
                        record[pair] = s;
                        let sub = self.visit(record, &v);
                        record[pair] = 0;
                        let q = field_from_i128::<F>(w) / w_total.clone();
                        acc.success = acc.success + q.clone() * sub.success;
                        acc.failure = acc.failure + q.clone() * sub.failure;
                        acc.stalled = acc.stalled + q * sub.stalled;
                    }
                }
                acc.failure = acc.failure + field_from_i128::<F>(total - consistent) / w_total;
                acc
            }
        };
        self.memo.insert(record.clone(), result.clone());
        result
    }
}

/// Exact success, failure and stall probabilities.
pub fn asymptotic_breakdown<F: Field>(n: usize) -> Result<AsymptoticBreakdown<F>> {
    if n > MAX_ASYMPTOTIC_QUBITS {
        return Err(Error::ComplexityLimit(format!(
            "asymptotic enumeration supports n <= {MAX_ASYMPTOTIC_QUBITS}, got {n}"
        )));
    }
    let layout = Layout::new(n)?;
    let psi: Sparse = vec![(layout.full_mask() as u32, 1)];
    let mut w = Walker {
        layout: &layout,
        memo: HashMap::new(),
    };
    Ok(w.visit(&mut vec![0; n], &psi))
}

pub fn asymptotic_success<F: Field>(n: usize) -> Result<F> {
    Ok(asymptotic_breakdown::<F>(n)?.success)
}

/// 0.759 / 2.24^(n−1)
pub fn asymptotic_fit(n: usize) -> f64 {
    0.759 / 2.24f64.powi(n as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn bell_is_one_third() {
        let p = asymptotic_success::<BigRational>(2).unwrap();
        assert_eq!(p, BigRational::new(1.into(), 3.into()));
        let f = asymptotic_success::<f64>(2).unwrap();
        assert!((f - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn complete() {
        for n in 2..5 {
            let b = asymptotic_breakdown::<BigRational>(n).unwrap();
            let one = BigRational::from_integer(1.into());
            assert_eq!(b.success + b.failure + b.stalled, one);
        }
    }

    #[test]
    fn limit() {
        assert!(matches!(asymptotic_success::<f64>(13), Err(Error::ComplexityLimit(_))));
    }
}
