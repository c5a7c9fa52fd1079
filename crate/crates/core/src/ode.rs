//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Steps are clipped so that every requested output time is hit exactly;
//! no interpolation is involved in the reported states.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Vector space operations the integrator needs from a state type.
pub trait OdeVector<T: Real>: Clone {
    fn zeros_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: T, x: &Self);
    /// Weighted RMS norm of `err` relative to `scale_a`/`scale_b`.
    fn err_norm(err: &Self, y0: &Self, y1: &Self, rel_tol: T, abs_tol: T) -> T;
}

impl<T: Real> OdeVector<T> for Vec<T> {
    fn zeros_like(&self) -> Self {
        vec![T::zero(); self.len()]
    }

    fn axpy(&mut self, a: T, x: &Self) {
        for (s, &v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn err_norm(err: &Self, y0: &Self, y1: &Self, rel_tol: T, abs_tol: T) -> T {
        let mut acc = T::zero();
        for ((e, a), b) in err.iter().zip(y0).zip(y1) {
            let sc = abs_tol + rel_tol * a.abs().max(b.abs());
            let r = *e / sc;
            acc += r * r;
        }
        (acc / T::from_usize_lossy(err.len().max(1))).sqrt()
    }
}

impl<T: Real> OdeVector<T> for Vec<Complex<T>> {
    fn zeros_like(&self) -> Self {
        vec![Complex::new(T::zero(), T::zero()); self.len()]
    }

    fn axpy(&mut self, a: T, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            s.re += a * v.re;
            s.im += a * v.im;
        }
    }

    fn err_norm(err: &Self, y0: &Self, y1: &Self, rel_tol: T, abs_tol: T) -> T {
        let mut acc = T::zero();
        for ((e, a), b) in err.iter().zip(y0).zip(y1) {
            let sc = abs_tol + rel_tol * a.norm().max(b.norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        (acc / T::from_usize_lossy(err.len().max(1))).sqrt()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// First trial step; `None` picks one from the output spacing.
    pub initial_step: Option<T>,
    /// Upper bound on any single step.
    pub max_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            initial_step: None,
            max_step: None,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, used for the embedded error estimate
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `t0` and returns the state at each of
/// `times` (all `>= t0`, non-decreasing).
pub fn integrate<T, Y, F>(
    mut rhs: F,
    t0: T,
    y0: &Y,
    times: &[T],
    opts: &OdeOptions<T>,
) -> Result<(Vec<Y>, OdeStats)>
where
    T: Real,
    Y: OdeVector<T>,
    F: FnMut(T, &Y, &mut Y),
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    let mut t = t0;
    let mut y = y0.clone();
    let span = times.last().map(|&te| te - t0).unwrap_or_else(T::zero);
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| (span * T::lit(1e-3)).max(T::lit(1e-300)));
    if let Some(hm) = opts.max_step {
        h = h.min(hm);
    }

    let mut k1 = y.zeros_like();
    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;
    let mut k2 = y.zeros_like();
    let mut k3 = y.zeros_like();
    let mut k4 = y.zeros_like();
    let mut k5 = y.zeros_like();
    let mut k6 = y.zeros_like();
    let mut k7 = y.zeros_like();
    let mut tmp;

    for &t_out in times {
        while t < t_out {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::IntegratorStall {
                    t: t.to_f64_lossy(),
                    h: h.to_f64_lossy(),
                });
            }
            let remaining = t_out - t;
            let mut step = h.min(remaining);
            let last = step >= remaining;
            if last {
                step = remaining;
            }
            if step <= t.abs().max(span) * T::epsilon() * T::lit(4.0) && !last {
                return Err(Error::IntegratorStall {
                    t: t.to_f64_lossy(),
                    h: step.to_f64_lossy(),
                });
            }

            tmp = y.clone();
            tmp.axpy(step * T::lit(A21), &k1);
            rhs(t + step * T::lit(C2), &tmp, &mut k2);

            tmp = y.clone();
            tmp.axpy(step * T::lit(A31), &k1);
            tmp.axpy(step * T::lit(A32), &k2);
            rhs(t + step * T::lit(C3), &tmp, &mut k3);

            tmp = y.clone();
            tmp.axpy(step * T::lit(A41), &k1);
            tmp.axpy(step * T::lit(A42), &k2);
            tmp.axpy(step * T::lit(A43), &k3);
            rhs(t + step * T::lit(C4), &tmp, &mut k4);

            tmp = y.clone();
            tmp.axpy(step * T::lit(A51), &k1);
            tmp.axpy(step * T::lit(A52), &k2);
            tmp.axpy(step * T::lit(A53), &k3);
            tmp.axpy(step * T::lit(A54), &k4);
            rhs(t + step * T::lit(C5), &tmp, &mut k5);

            tmp = y.clone();
            tmp.axpy(step * T::lit(A61), &k1);
            tmp.axpy(step * T::lit(A62), &k2);
            tmp.axpy(step * T::lit(A63), &k3);
            tmp.axpy(step * T::lit(A64), &k4);
            tmp.axpy(step * T::lit(A65), &k5);
            rhs(t + step, &tmp, &mut k6);

            let mut y_new = y.clone();
            y_new.axpy(step * T::lit(B1), &k1);
            y_new.axpy(step * T::lit(B3), &k3);
            y_new.axpy(step * T::lit(B4), &k4);
            y_new.axpy(step * T::lit(B5), &k5);
            y_new.axpy(step * T::lit(B6), &k6);
            rhs(t + step, &y_new, &mut k7);
            stats.rhs_evals += 6;

            let mut err = y.zeros_like();
            err.axpy(step * T::lit(E1), &k1);
            err.axpy(step * T::lit(E3), &k3);
            err.axpy(step * T::lit(E4), &k4);
            err.axpy(step * T::lit(E5), &k5);
            err.axpy(step * T::lit(E6), &k6);
            err.axpy(step * T::lit(E7), &k7);
            let en = Y::err_norm(&err, &y, &y_new, opts.rel_tol, opts.abs_tol);

            if en <= T::one() {
                t = if last { t_out } else { t + step };
                y = y_new;
                std::mem::swap(&mut k1, &mut k7);
                stats.accepted += 1;
                let fac = if en == T::zero() {
                    T::lit(5.0)
                } else {
                    (T::lit(0.9) * en.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                };
                // a clipped final step says nothing about the natural size
                if !last || step >= h {
                    h = step * fac;
                }
            } else {
                stats.rejected += 1;
                let fac = if en.is_finite() {
                    (T::lit(0.9) * en.powf(T::lit(-0.2))).max(T::lit(0.1))
                } else {
                    T::lit(0.1)
                };
                h = step * fac;
            }
            if let Some(hm) = opts.max_step {
                h = h.min(hm);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
