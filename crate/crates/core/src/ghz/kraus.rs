use num_complex::Complex;

use super::engine::lower;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::fock::{KrausOp, ModeKind, ModeRegistry, SparseOp};
use crate::scalar::Real;

/// Registry of the 2n acoustic modes `b[i,q]`, one phonon at most each.
pub fn acoustic_registry(n: usize) -> Result<ModeRegistry> {
    let labels: Vec<String> = (0..2 * n).map(|k| format!("b[{},{}]", k / 2 + 1, k % 2)).collect();
    ModeRegistry::new(labels.iter().map(|l| (l.as_str(), 2, ModeKind::Acoustic)))
}

/// Registry index of an occupation mask (mode 0 is the most significant).
pub fn mask_to_index(n: usize, mask: usize) -> usize {
    let m = 2 * n;
    (0..m).filter(|k| mask & (1 << k) != 0).map(|k| 1 << (m - 1 - k)).sum()
}

/// (p/2)^{n/2} (1−p)^{n̂/2} Π_i (b_{i,+} − s_i b_{i+1,−}) on the 2n-mode
/// registry of [`acoustic_registry`].
pub fn ghz_kraus<T: Real>(n: usize, s: &[i8], p_re: T) -> Result<KrausOp<T>> {
    let layout = Layout::new(n)?;
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.len(),
        });
    }
    if s.iter().any(|&x| x != 1 && x != -1) {
        return Err(Error::InvalidParameter("parity bits must be ±1".into()));
    }
    if !(p_re >= T::zero() && p_re <= T::one()) {
        return Err(Error::InvalidParameter(format!("p_re must lie in [0, 1], got {p_re}")));
    }
    let dim = layout.dim();
    let all = layout.full_mask();
    // b_{i,+} − s b_{i+1,−} = √2 d̃ with d̃ the detector operator of the pair
    let pref = p_re.powi(n as i32).sqrt();
    let decay = (T::one() - p_re).sqrt();
    let mut rows: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); dim];
    for col in 0..dim {
        let mut v = vec![T::zero(); dim];
        v[col] = T::one();
        for (i, &si) in s.iter().enumerate() {
            v = lower(&layout, layout.detector(i, si), all, &v);
        }
        for (mask, &x) in v.iter().enumerate() {
            if x != T::zero() {
                let amp = pref * decay.powi(mask.count_ones() as i32) * x;
                rows[mask_to_index(n, mask)].push((mask_to_index(n, col), Complex::new(amp, T::zero())));
            }
        }
    }
    let label = s.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect::<String>();
    Ok(KrausOp::new(format!("K_GHZ[{label}]"), SparseOp::from_rows(dim, rows)))
}
