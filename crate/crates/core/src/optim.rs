//! Small derivative-free minimizers.

use crate::scalar::Real;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))`; the bracket ends are also compared so a monotone `f`
/// returns the better end.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let r = T::lit(INV_PHI);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions<T> {
    pub max_evals: usize,
    /// Stop when the simplex's spread in f falls below this.
    pub f_tol: T,
    /// Initial simplex step per coordinate.
    pub step: T,
}

/// Nelder–Mead minimization from `x0`. Ties keep the earlier vertex, so the
/// result is deterministic.
pub fn nelder_mead_min<T: Real, F: FnMut(&[T]) -> T>(
    mut f: F,
    x0: &[T],
    opts: &NelderMeadOptions<T>,
) -> (Vec<T>, T) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let order = |s: &mut Vec<(Vec<T>, T)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Greater));
    };
    while evals < opts.max_evals {
        order(&mut simplex);
        let spread = simplex[n].1 - simplex[0].1;
        if !(spread > opts.f_tol) {
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v.0[k]).fold(T::zero(), |a, b| a + b) / T::from_usize_lossy(n))
            .collect();
        let along = |t: T, worst: &[T]| -> Vec<T> {
            centroid.iter().zip(worst).map(|(&c, &w)| c + t * (w - c)).collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(-T::one(), &worst);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-two, &worst);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = along(half, &worst);
            let fc = f(&xc);
            evals += 1;
            if fc < simplex[n].1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<T> = best.iter().zip(&v.0).map(|(&b, &x)| b + half * (x - b)).collect();
                    let fx = f(&x);
                    *v = (x, fx);
                }
                evals += n;
            }
        }
    }
    order(&mut simplex);
    simplex.swap_remove(0)
}
