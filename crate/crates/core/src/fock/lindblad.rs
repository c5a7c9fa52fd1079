use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

use super::ops::SparseOp;
use super::registry::ModeRegistry;
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::scalar::Real;

pub type Coefficient<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;

#[derive(Clone)]
pub struct HamiltonianTerm<T> {
    pub coeff: Coefficient<T>,
    pub op: SparseOp<T>,
    /// Adds the Hermitian conjugate `conj(c) op†`.
    pub plus_hc: bool,
}

#[derive(Clone, Debug)]
pub struct CollapseTerm<T> {
    /// 1/s
    pub rate: T,
    pub op: SparseOp<T>,
}

/// Time-dependent Hamiltonian plus Lindblad collapse channels.
#[derive(Clone)]
pub struct LindbladSpec<T> {
    pub registry: ModeRegistry,
    pub hamiltonian: Vec<HamiltonianTerm<T>>,
    pub collapse: Vec<CollapseTerm<T>>,
}

impl<T: Real> LindbladSpec<T> {
    pub fn new(registry: &ModeRegistry) -> Self {
        Self {
            registry: registry.clone(),
            hamiltonian: Vec::new(),
            collapse: Vec::new(),
        }
    }

    /// `c(t) · op (+ h.c.)`
    pub fn add_hamiltonian<F>(&mut self, op: SparseOp<T>, plus_hc: bool, coeff: F) -> &mut Self
    where
        F: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        self.hamiltonian.push(HamiltonianTerm {
            coeff: Arc::new(coeff),
            op,
            plus_hc,
        });
        self
    }

    pub fn add_collapse(&mut self, rate: T, op: SparseOp<T>) -> Result<&mut Self> {
        if rate < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "collapse rate must be >= 0, got {rate}"
            )));
        }
        self.collapse.push(CollapseTerm { rate, op });
        Ok(self)
    }

    /// Collapse `√rate · op` that also bumps the saturating counter mode
    /// `counter`, so the counter records the number of jumps.
    pub fn add_counted_collapse(
        &mut self,
        rate: T,
        op: &SparseOp<T>,
        counter: &str,
    ) -> Result<&mut Self> {
        let reg = self.registry.clone();
        let top = reg.mode(reg.index_of(counter)?).dim - 1;
        let up = SparseOp::counter_raise(&reg, counter)?;
        let stay = SparseOp::projector(&reg, counter, top)?;
        self.add_collapse(rate, up.mul(op)?)?;
        self.add_collapse(rate, stay.mul(op)?)?;
        Ok(self)
    }

    /// Thermal damping pair √(Γ(n+1)) b and √(Γn) b† on `mode`.
    pub fn add_thermal_damping(&mut self, mode: &str, gamma: T, n_th: T) -> Result<&mut Self> {
        let b = SparseOp::destroy(&self.registry, mode)?;
        self.add_collapse(gamma * (n_th + T::one()), b.clone())?;
        if n_th > T::zero() {
            self.add_collapse(gamma * n_th, b.adjoint())?;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Top-Fock-level population allowed at output times (`None` disables).
    pub truncation_limit: Option<T>,
    pub max_step: Option<T>,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-8),
            abs_tol: T::lit(1e-10),
            truncation_limit: Some(T::lit(1e-6)),
            max_step: None,
        }
    }
}

struct Prepared<T> {
    terms: Vec<(Coefficient<T>, SparseOp<T>, Option<SparseOp<T>>)>,
    decay: SparseOp<T>,
    jumps: Vec<(T, SparseOp<T>)>,
}

fn prepare<T: Real>(spec: &LindbladSpec<T>) -> Result<Prepared<T>> {
    let d = spec.registry.dim();
    let mut decay = SparseOp::zeros(d);
    for c in &spec.collapse {
        decay = decay.add(&c.op.adjoint().mul(&c.op)?.scale_re(c.rate))?;
    }
    let mut terms = Vec::new();
    for h in &spec.hamiltonian {
        if h.op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.op.dim(),
            });
        }
        terms.push((
            h.coeff.clone(),
            h.op.clone(),
            h.plus_hc.then(|| h.op.adjoint()),
        ));
    }
    let jumps = spec
        .collapse
        .iter()
        .filter(|c| c.rate > T::zero())
        .map(|c| (c.rate, c.op.clone()))
        .collect();
    Ok(Prepared {
        terms,
        decay,
        jumps,
    })
}

fn rhs<T: Real>(p: &Prepared<T>, d: usize, t: T, rho: &[Complex<T>], out: &mut [Complex<T>]) {
    // dρ = −i(Hρ − ρH) − ½(Dρ + ρD) + Σ γ L ρ L†, with D = Σ γ L†L. Written
    // without assuming ρ Hermitian so that coherences can be propagated too.
    for o in out.iter_mut() {
        *o = Complex::zero();
    }
    let mi = Complex::new(T::zero(), -T::one());
    let pi = Complex::new(T::zero(), T::one());
    for (coeff, op, adj) in &p.terms {
        let c = coeff(t);
        op.left_mul_acc(mi * c, rho, out);
        op.right_mul_acc(pi * c, rho, out);
        if let Some(adj) = adj {
            adj.left_mul_acc(mi * c.conj(), rho, out);
            adj.right_mul_acc(pi * c.conj(), rho, out);
        }
    }
    let h = Complex::new(T::lit(-0.5), T::zero());
    p.decay.left_mul_acc(h, rho, out);
    p.decay.right_mul_acc(h, rho, out);
    for (g, l) in &p.jumps {
        let rows = l.rows();
        for (i, ri) in rows.iter().enumerate() {
            for &(k, v) in ri {
                let gv = v * *g;
                for (j, rj) in rows.iter().enumerate() {
                    for &(m, w) in rj {
                        out[i * d + j] += gv * rho[k * d + m] * w.conj();
                    }
                }
            }
        }
    }
}

/// Integrates the master equation starting at `times[0]` and reports the
/// state at every entry of `times`.
pub fn evolve<T: Real>(
    spec: &LindbladSpec<T>,
    rho0: &DensityMatrix<T>,
    times: &[T],
    opts: &EvolveOptions<T>,
) -> Result<(Vec<DensityMatrix<T>>, OdeStats)> {
    if rho0.registry != spec.registry {
        return Err(Error::DimensionMismatch {
            expected: spec.registry.dim(),
            got: rho0.dim(),
        });
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("times must be non-decreasing".into()));
    }
    let Some(&t0) = times.first() else {
        return Ok((Vec::new(), OdeStats::default()));
    };
    let d = spec.registry.dim();
    let prep = prepare(spec)?;
    let ode = OdeOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..OdeOptions::default()
    };
    let (ys, stats) = integrate(
        |t, y: &Vec<Complex<T>>, dy: &mut Vec<Complex<T>>| rhs(&prep, d, t, y, dy),
        t0,
        &rho0.matrix,
        times,
        &ode,
    )?;
    let mut out = Vec::with_capacity(ys.len());
    for y in ys {
        let rho = DensityMatrix::from_matrix(&spec.registry, y)?;
        if let Some(lim) = opts.truncation_limit {
            let (w, mode) = rho.top_level_population();
            if w > lim {
                return Err(Error::Truncation {
                    mode,
                    weight: w.to_f64_lossy(),
                    limit: lim.to_f64_lossy(),
                });
            }
        }
        out.push(rho);
    }
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::registry::ModeKind;
    use crate::fock::state::PureState;

    #[test]
    fn single_photon_decay() {
        let r = ModeRegistry::uniform(&["a"], 3, ModeKind::Optical).unwrap();
        let kappa = 2.0;
        let mut spec = LindbladSpec::<f64>::new(&r);
        spec.add_collapse(kappa, SparseOp::destroy(&r, "a").unwrap())
            .unwrap();
        let rho0 = PureState::fock(&r, &[1]).unwrap().to_density();
        let times: Vec<f64> = (0..6).map(|k| k as f64 * 0.4).collect();
        let (rhos, _) = evolve(&spec, &rho0, &times, &EvolveOptions::default()).unwrap();
        for (t, rho) in times.iter().zip(&rhos) {
            let n = rho.mean_number("a").unwrap();
            assert!((n - (-kappa * t).exp()).abs() < 1e-6);
            assert!((rho.trace() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn counter_records_emission() {
        let r = ModeRegistry::new([("a", 4, ModeKind::Optical), ("c", 3, ModeKind::Counter)])
            .unwrap();
        let mut spec = LindbladSpec::<f64>::new(&r);
        let a = SparseOp::destroy(&r, "a").unwrap();
        spec.add_counted_collapse(1.0, &a, "c").unwrap();
        let rho0 = PureState::fock(&r, &[2, 0]).unwrap().to_density();
        let (rhos, _) = evolve(&spec, &rho0, &[0.0, 40.0], &EvolveOptions::default()).unwrap();
        let p = rhos[1].number_distribution("c").unwrap();
        assert!((p[2] - 1.0).abs() < 1e-8, "{p:?}");
    }

    #[test]
    fn thermal_steady_state() {
        let r = ModeRegistry::uniform(&["b"], 25, ModeKind::Acoustic).unwrap();
        let mut spec = LindbladSpec::<f64>::new(&r);
        spec.add_thermal_damping("b", 1.0, 0.5).unwrap();
        let rho0 = PureState::vacuum(&r).to_density();
        let (rhos, _) = evolve(&spec, &rho0, &[0.0, 30.0], &EvolveOptions::default()).unwrap();
        assert!((rhos[1].mean_number("b").unwrap() - 0.5).abs() < 1e-6);
    }
}
