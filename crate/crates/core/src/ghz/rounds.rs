//! Expected rounds until a GHZ herald when failures restart from freshly
//! heralded single phonons.
//!
//! Retrieval probabilities depend only on how many pairs have clicked, so
//! the time spent in each record is geometric and the chain over records is
//! acyclic. Staying put is diagonal in the occupation basis, which gives the
//! accumulated occupation of a record in closed form:
//! ρ_acc = Σ_t K₀ᵗ ρ_in K₀ᵗ, i.e. (ρ_acc)_ij = (ρ_in)_ij / (1 − μ_i μ_j).

use std::collections::BTreeMap;

use serde::Serialize;

use super::engine::lower;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::multiplex::{expected_max_cycle, ScheduleParams};
use crate::optim::golden_section_min;
use crate::scalar::Real;

/// Largest n for the rounds chain.
pub const MAX_ROUNDS_QUBITS: usize = 4;
/// Distinct retrieval levels; counts at or above the last share it.
pub const MAX_LEVELS: usize = 3;
/// Search interval for each retrieval level.
pub const LEVEL_BOUNDS: (f64, f64) = (0.01, 0.99);
/// Golden-section tolerance on each level.
pub const LEVEL_TOL: f64 = 1e-3;

/// Sparse column: (row index in the target sector, value).
type Column = Vec<(usize, f64)>;

struct Transition {
    target: usize,
    clicks: i32,
    /// Columns of the detector product, indexed by the source sector.
    columns: Vec<Column>,
}

struct Node {
    record: Vec<i8>,
    clicked: usize,
    active: usize,
    complete: bool,
    transitions: Vec<Transition>,
}

/// Record graph for a given n, independent of the retrieval levels.
pub struct RoundsChain {
    layout: Layout,
    nodes: Vec<Node>,
    /// Occupation masks per clicked-pair count.
    sectors: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundsResult<T> {
    pub levels: Vec<T>,
    pub expected_rounds: T,
    /// Success probability of one attempt.
    pub success_per_attempt: T,
    /// Mean retrieval rounds per attempt.
    pub rounds_per_attempt: T,
    /// M̄(2n, p_hsp) paid after each failure.
    pub reset_cost: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundsOptimum<T> {
    pub adaptive: RoundsResult<T>,
    /// One round at p_re = 1/2, restarting whenever it does not herald.
    pub single_shot: RoundsResult<T>,
}

impl RoundsChain {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ROUNDS_QUBITS {
            return Err(Error::ComplexityLimit(format!(
                "rounds chain supports n <= {MAX_ROUNDS_QUBITS}, got {n}"
            )));
        }
        let layout = Layout::new(n)?;
        let modes = layout.modes();
        let sectors: Vec<Vec<usize>> = (0..=n)
            .map(|k| (0..layout.dim()).filter(|m| m.count_ones() as usize == modes - k).collect())
            .collect();
        let mut records: Vec<Vec<i8>> = vec![vec![]];
        for _ in 0..n {
            records = records
                .into_iter()
                .flat_map(|r| [0i8, 1, -1].into_iter().map(move |s| {
                    let mut x = r.clone();
                    x.push(s);
                    x
                }))
                .collect();
        }
        records.sort_by_key(|r| (r.iter().filter(|&&s| s != 0).count(), r.clone()));
        let index: BTreeMap<Vec<i8>, usize> = records.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let mut nodes = Vec::with_capacity(records.len());
        for rec in &records {
            let clicked_v: Vec<bool> = rec.iter().map(|&s| s != 0).collect();
            let clicked = clicked_v.iter().filter(|&&c| c).count();
            let active = layout.active_mask(&clicked_v);
            let complete = clicked == n;
            let mut transitions = Vec::new();
            if !complete {
                let dark: Vec<usize> = (0..n).filter(|&i| rec[i] == 0).collect();
                let m = dark.len();
                let mut choice = vec![0i8; m];
                // every assignment of {dark, +, −} to the unclicked pairs
                for code in 1..3usize.pow(m as u32) {
                    let mut c = code;
                    for x in choice.iter_mut() {
                        *x = [0, 1, -1][c % 3];
                        c /= 3;
                    }
                    let mut target = rec.clone();
                    let mut dets = Vec::new();
                    for (&pair, &s) in dark.iter().zip(&choice) {
                        if s != 0 {
                            target[pair] = s;
                            dets.push(layout.detector(pair, s));
                        }
                    }
                    let tsec = clicked + dets.len();
                    let pos: BTreeMap<usize, usize> = sectors[tsec].iter().enumerate().map(|(i, &m)| (m, i)).collect();
                    let columns = sectors[clicked]
                        .iter()
                        .map(|&mask| {
                            let mut v = vec![0.0f64; layout.dim()];
                            v[mask] = 1.0;
                            for &d in &dets {
                                v = lower(&layout, d, active, &v);
                            }
                            v.iter()
                                .enumerate()
                                .filter(|(_, x)| **x != 0.0)
                                .map(|(m, &x)| (pos[&m], x))
                                .collect()
                        })
                        .collect();
                    transitions.push(Transition {
                        target: index[&target],
                        clicks: dets.len() as i32,
                        columns,
                    });
                }
            }
            nodes.push(Node {
                record: rec.clone(),
                clicked,
                active,
                complete,
                transitions,
            });
        }
        Ok(Self { layout, nodes, sectors })
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }

    fn level<T: Real>(levels: &[T], clicked: usize) -> T {
        levels[clicked.min(levels.len() - 1)]
    }

    /// (success per attempt, rounds per attempt) for a policy.
    pub fn attempt<T: Real>(&self, levels: &[T]) -> Result<(T, T)> {
        if levels.is_empty() || levels.len() > MAX_LEVELS {
            return Err(Error::InvalidParameter(format!(
                "between 1 and {MAX_LEVELS} retrieval levels required"
            )));
        }
        for &p in levels {
            if !(p > T::zero() && p <= T::one()) {
                return Err(Error::InvalidParameter(format!("p_re must lie in (0, 1], got {p}")));
            }
        }
        let mut rho_in: Vec<Option<Vec<T>>> = vec![None; self.nodes.len()];
        let s0 = self.sectors[0].len();
        let mut root = vec![T::zero(); s0 * s0];
        root[0] = T::one();
        rho_in[0] = Some(root);
        let mut success = T::zero();
        let mut rounds = T::zero();
        for (k, node) in self.nodes.iter().enumerate() {
            let Some(rho) = rho_in[k].take() else { continue };
            let dim = self.sectors[node.clicked].len();
            if node.complete {
                success += (0..dim).map(|i| rho[i * dim + i]).fold(T::zero(), |a, b| a + b);
                continue;
            }
            let p = Self::level(levels, node.clicked);
            let q = (T::one() - p).sqrt();
            let mu: Vec<T> = self.sectors[node.clicked]
                .iter()
                .map(|&m| q.powi((m & node.active).count_ones() as i32))
                .collect();
            let mut acc = vec![T::zero(); dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    let g = T::one() - mu[i] * mu[j];
                    // components with no active phonon never click; they stall
                    if g > T::zero() {
                        acc[i * dim + j] = rho[i * dim + j] / g;
                    }
                }
                rounds += acc[i * dim + i];
            }
            for tr in &node.transitions {
                let tnode = &self.nodes[tr.target];
                let tdim = self.sectors[tnode.clicked].len();
                let amp = p.powi(tr.clicks).sqrt();
                let out_mu: Vec<T> = self.sectors[tnode.clicked]
                    .iter()
                    .map(|&m| q.powi((m & node.active).count_ones() as i32))
                    .collect();
                let dst = rho_in[tr.target].get_or_insert_with(|| vec![T::zero(); tdim * tdim]);
                // K ρ Kᵀ with K = amp · diag(out_mu) · columns
                let mut half = vec![T::zero(); tdim * dim];
                for (j, col) in tr.columns.iter().enumerate() {
                    for &(a, x) in col {
                        let ka = amp * out_mu[a] * T::lit(x);
                        for i in 0..dim {
                            // half[a][i] = Σ_j K[a][j] ρ[j][i]
                            half[a * dim + i] += ka * acc[j * dim + i];
                        }
                    }
                }
                for (i, col) in tr.columns.iter().enumerate() {
                    for &(b, x) in col {
                        let kb = amp * out_mu[b] * T::lit(x);
                        for a in 0..tdim {
                            let h = half[a * dim + i];
                            if h != T::zero() {
                                dst[a * tdim + b] += h * kb;
                            }
                        }
                    }
                }
            }
        }
        Ok((success, rounds))
    }

    pub fn evaluate<T: Real>(&self, levels: &[T], p_hsp: T) -> Result<RoundsResult<T>> {
        let (s, t) = self.attempt(levels)?;
        let reset = expected_max_cycle(&ScheduleParams::counting(2 * self.n(), p_hsp)?).m_bar;
        Ok(combine(levels.to_vec(), s, t, reset))
    }

    /// Number of distinct levels worth optimizing.
    pub fn level_count(&self) -> usize {
        self.n().min(MAX_LEVELS)
    }

    /// Records in processing order, as parity bits per pair (0 = dark).
    pub fn records(&self) -> Vec<Vec<i8>> {
        self.nodes.iter().map(|n| n.record.clone()).collect()
    }
}

fn combine<T: Real>(levels: Vec<T>, s: T, t: T, reset: T) -> RoundsResult<T> {
    let expected = if s > T::zero() {
        t / s + (s.recip() - T::one()) * reset
    } else {
        T::infinity()
    };
    RoundsResult {
        levels,
        expected_rounds: expected,
        success_per_attempt: s,
        rounds_per_attempt: t,
        reset_cost: reset,
    }
}

/// Expected rounds for a given policy: `levels[c]` is p_re after c clicked
/// pairs, the last level covering higher counts.
pub fn expected_rounds<T: Real>(n: usize, p_hsp: T, levels: &[T]) -> Result<RoundsResult<T>> {
    RoundsChain::new(n)?.evaluate(levels, p_hsp)
}

/// Single round at p_re = 1/2; anything but a complete herald restarts.
pub fn single_shot_rounds<T: Real>(n: usize, p_hsp: T) -> Result<RoundsResult<T>> {
    Layout::new(n)?;
    let half = T::lit(0.5);
    let s = T::lit(2.0) * (half * half).powi(n as i32);
    let reset = expected_max_cycle(&ScheduleParams::counting(2 * n, p_hsp)?).m_bar;
    Ok(combine(vec![half], s, T::one(), reset))
}

/// Nested golden-section search over the retrieval levels.
pub fn optimize_rounds<T: Real>(chain: &RoundsChain, p_hsp: T) -> Result<RoundsOptimum<T>> {
    let reset = expected_max_cycle(&ScheduleParams::counting(2 * chain.n(), p_hsp)?).m_bar;
    let k = chain.level_count();
    let (lo, hi) = (T::lit(LEVEL_BOUNDS.0), T::lit(LEVEL_BOUNDS.1));
    let tol = T::lit(LEVEL_TOL);
    let mut err: Option<Error> = None;
    let mut cost = |levels: &[T]| -> T {
        match chain.attempt(levels) {
            Ok((s, t)) => combine(levels.to_vec(), s, t, reset).expected_rounds,
            Err(e) => {
                err.get_or_insert(e);
                T::infinity()
            }
        }
    };
    fn nest<T: Real, C: FnMut(&[T]) -> T>(prefix: &mut Vec<T>, k: usize, lo: T, hi: T, tol: T, cost: &mut C) -> (Vec<T>, T) {
        if prefix.len() + 1 == k {
            let (x, f) = golden_section_min(
                |x| {
                    prefix.push(x);
                    let v = cost(prefix);
                    prefix.pop();
                    v
                },
                lo,
                hi,
                tol,
            );
            let mut best = prefix.clone();
            best.push(x);
            return (best, f);
        }
        let mut best_inner: Option<(Vec<T>, T)> = None;
        let (x, _) = golden_section_min(
            |x| {
                prefix.push(x);
                let r = nest(prefix, k, lo, hi, tol, cost);
                prefix.pop();
                let f = r.1;
                if best_inner.as_ref().map_or(true, |b| f < b.1) {
                    best_inner = Some(r);
                }
                f
            },
            lo,
            hi,
            tol,
        );
        let _ = x;
        best_inner.expect("golden section evaluates at least once")
    }
    let (levels, _) = nest(&mut Vec::new(), k, lo, hi, tol, &mut cost);
    if let Some(e) = err {
        return Err(e);
    }
    let (s, t) = chain.attempt(&levels)?;
    Ok(RoundsOptimum {
        adaptive: combine(levels, s, t, reset),
        single_shot: single_shot_rounds(chain.n(), p_hsp)?,
    })
}
