//! Kraus-level simulation of retrieval rounds on the occupation-bitmask
//! basis (at most one phonon per mode).
//!
//! A retrieval round with probability p maps each active phonon to a
//! photon with amplitude √p. Photons pass the splitter network, are lost
//! before it with probability 1−η, and are counted by photon-number
//! resolving detectors with at most one dark count each. Loss and dark
//! counts make the conditional state a mixture, kept as a list of
//! unnormalized pure components.

use std::collections::BTreeMap;

use serde::Serialize;

use super::layout::Layout;
use super::record::{DetectionRecord, RecordClass};
use crate::error::{Error, Result};
use crate::herald::{effective_retrieval, ghz_herald_fidelity, HeraldModel};
use crate::scalar::Real;

/// Cap on mixture components produced by one enumeration.
pub const MAX_COMPONENTS: usize = 1 << 20;

/// Mixed acoustic state over the 2n modes.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticState<T> {
    pub n: usize,
    pub components: Vec<Vec<T>>,
}

impl<T: Real> AcousticState<T> {
    /// Basis state with the modes in `mask` holding one phonon each.
    pub fn basis(n: usize, mask: usize) -> Result<Self> {
        let layout = Layout::new(n)?;
        if mask >= layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: mask + 1,
            });
        }
        let mut v = vec![T::zero(); layout.dim()];
        v[mask] = T::one();
        Ok(Self {
            n,
            components: vec![v],
        })
    }

    /// One phonon in every mode.
    pub fn all_ones(n: usize) -> Result<Self> {
        Self::basis(n, (1 << (2 * n)) - 1)
    }

    pub fn norm_sqr(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |a, &x| a + x * x)
    }

    pub fn normalized(mut self) -> Self {
        let s = self.norm_sqr();
        if s > T::zero() {
            let k = s.sqrt().recip();
            self.components.iter_mut().flatten().for_each(|x| *x *= k);
        }
        self
    }

    /// ⟨φ|ρ|φ⟩ / tr ρ for a pure target.
    pub fn fidelity(&self, target: &[T]) -> T {
        let s = self.norm_sqr();
        if s <= T::zero() {
            return T::zero();
        }
        let f = self
            .components
            .iter()
            .map(|c| {
                let o = c.iter().zip(target).fold(T::zero(), |a, (&x, &y)| a + x * y);
                o * o
            })
            .fold(T::zero(), |a, b| a + b);
        f / s
    }

    pub fn mean_phonons(&self) -> T {
        let s = self.norm_sqr();
        let mut acc = T::zero();
        for c in &self.components {
            for (mask, &x) in c.iter().enumerate() {
                acc += x * x * T::from_usize_lossy(mask.count_ones() as usize);
            }
        }
        if s > T::zero() {
            acc / s
        } else {
            T::zero()
        }
    }

    /// Dense density matrix in the occupation basis.
    pub fn density(&self) -> Vec<Vec<T>> {
        let d = self.components.first().map_or(0, |c| c.len());
        let s = self.norm_sqr();
        let mut rho = vec![vec![T::zero(); d]; d];
        for c in &self.components {
            for i in 0..d {
                if c[i] == T::zero() {
                    continue;
                }
                for j in 0..d {
                    rho[i][j] += c[i] * c[j] / s;
                }
            }
        }
        rho
    }
}

/// `½·(2d̃)` restricted to `active` modes: detector amplitude operator.
pub(crate) fn lower<T: Real>(layout: &Layout, det: usize, active: usize, v: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    let mut out = vec![T::zero(); v.len()];
    for (mask, &x) in v.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        for &(m, c) in &layout.detectors[det] {
            let bit = 1 << m;
            if active & bit != 0 && mask & bit != 0 {
                let y = if c > 0 { x } else { -x };
                out[mask ^ bit] += half * y;
            }
        }
    }
    out
}

fn destroy<T: Real>(m: usize, v: &[T]) -> Vec<T> {
    let bit = 1 << m;
    let mut out = vec![T::zero(); v.len()];
    for (mask, &x) in v.iter().enumerate() {
        if mask & bit != 0 {
            out[mask ^ bit] = x;
        }
    }
    out
}

/// (1−p)^{n̂_active/2}
fn no_click<T: Real>(active: usize, p: T, v: &mut [T]) {
    let s = (T::one() - p).sqrt();
    for (mask, x) in v.iter_mut().enumerate() {
        if *x != T::zero() {
            *x *= s.powi((mask & active).count_ones() as i32);
        }
    }
}

fn is_zero<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.abs() <= T::lit(1e-300))
}

fn norm_sqr<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x)
}

/// Drops components that vanished up to roundoff.
fn prune<T: Real>(v: &mut [T], scale: T) {
    let tiny = T::lit(1e-28) * scale;
    for x in v.iter_mut() {
        if *x * *x < tiny {
            *x = T::zero();
        }
    }
}

/// One retrieval round. Returns unnormalized conditional states keyed by the
/// observed click pattern; their squared norms are the outcome probabilities
/// relative to the input norm.
pub fn retrieval_round<T: Real>(
    layout: &Layout,
    state: &AcousticState<T>,
    active: usize,
    p: T,
    herald: &HeraldModel<T>,
) -> Result<BTreeMap<Vec<u32>, Vec<Vec<T>>>> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::InvalidParameter(format!("p_re must lie in [0, 1], got {p}")));
    }
    herald.validate()?;
    let eta = herald.eta();
    let click_amp = (eta * p).sqrt();
    let loss_amp = ((T::one() - eta) * p).sqrt();
    let nd = layout.modes();
    let mut truth: BTreeMap<Vec<u32>, Vec<Vec<T>>> = BTreeMap::new();
    let mut produced = 0usize;
    for psi in &state.components {
        let scale = norm_sqr(psi);
        if scale <= T::zero() {
            continue;
        }
        // detections, one detector at a time
        let mut frontier: Vec<(Vec<u32>, Vec<T>)> = vec![(vec![0; nd], psi.clone())];
        for det in 0..nd {
            let mut next = Vec::new();
            for (counts, v) in frontier {
                let mut cur = v;
                let mut k = 0u32;
                loop {
                    let mut c = counts.clone();
                    c[det] = k;
                    let done = is_zero(&cur);
                    if !done {
                        next.push((c, cur.clone()));
                    }
                    if done || p == T::zero() || eta == T::zero() {
                        break;
                    }
                    k += 1;
                    let mut nv = lower(layout, det, active, &cur);
                    let f = click_amp / T::from_usize_lossy(k as usize).sqrt();
                    nv.iter_mut().for_each(|x| *x *= f);
                    prune(&mut nv, scale);
                    cur = nv;
                }
            }
            frontier = next;
        }
        // photons lost before the network
        if eta < T::one() && p > T::zero() {
            for m in 0..nd {
                if active & (1 << m) == 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(frontier.len() * 2);
                for (c, v) in frontier {
                    let mut lost = destroy(m, &v);
                    if !is_zero(&lost) {
                        lost.iter_mut().for_each(|x| *x *= loss_amp);
                        next.push((c.clone(), lost));
                    }
                    next.push((c, v));
                }
                frontier = next;
            }
        }
        for (c, mut v) in frontier {
            no_click(active, p, &mut v);
            if is_zero(&v) {
                continue;
            }
            truth.entry(c).or_default().push(v);
            produced += 1;
        }
        if produced > MAX_COMPONENTS {
            return Err(Error::ComplexityLimit(format!(
                "more than {MAX_COMPONENTS} conditional components"
            )));
        }
    }
    let pd = herald.p_d();
    if pd == T::zero() {
        return Ok(truth);
    }
    let mut observed: BTreeMap<Vec<u32>, Vec<Vec<T>>> = BTreeMap::new();
    for (c, vs) in truth {
        for dark in 0usize..(1 << nd) {
            let k = dark.count_ones() as i32;
            let w = (pd.powi(k) * (T::one() - pd).powi(nd as i32 - k)).sqrt();
            let o: Vec<u32> = (0..nd).map(|d| c[d] + ((dark >> d) & 1) as u32).collect();
            let dst = observed.entry(o).or_default();
            for v in &vs {
                dst.push(v.iter().map(|&x| x * w).collect());
            }
        }
        produced += vs.len() << nd;
        if produced > MAX_COMPONENTS {
            return Err(Error::ComplexityLimit(format!(
                "more than {MAX_COMPONENTS} conditional components"
            )));
        }
    }
    Ok(observed)
}

/// Per-iteration retrieval probabilities. Entry `[k][c]` applies in
/// iteration k after c detections; the last entry of a row covers higher
/// counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalSchedule<T> {
    pub rounds: Vec<Vec<T>>,
}

impl<T: Real> RetrievalSchedule<T> {
    pub fn fixed(p: &[T]) -> Self {
        Self {
            rounds: p.iter().map(|&x| vec![x]).collect(),
        }
    }

    pub fn single(p: T) -> Self {
        Self::fixed(&[p])
    }

    pub fn iterations(&self) -> usize {
        self.rounds.len()
    }

    pub fn p(&self, iteration: usize, detections: u32) -> T {
        let row = &self.rounds[iteration];
        row[(detections as usize).min(row.len() - 1)]
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds.is_empty() || self.rounds.iter().any(|r| r.is_empty()) {
            return Err(Error::InvalidParameter("empty retrieval schedule".into()));
        }
        for (k, row) in self.rounds.iter().enumerate() {
            for &p in row {
                if !(p >= T::zero() && p <= T::one()) {
                    return Err(Error::InvalidParameter(format!(
                        "p_re in iteration {k} must lie in [0, 1], got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzConfig<T> {
    pub n: usize,
    pub schedule: RetrievalSchedule<T>,
    pub herald: HeraldModel<T>,
    /// Count n = 2 wrong-basis Bell heralds as successes, rescaled by 2/3.
    pub include_wrong_basis: bool,
}

impl<T: Real> GhzConfig<T> {
    pub fn new(n: usize, schedule: RetrievalSchedule<T>, herald: HeraldModel<T>) -> Result<Self> {
        Layout::new(n)?;
        schedule.validate()?;
        herald.validate()?;
        Ok(Self {
            n,
            schedule,
            herald,
            include_wrong_basis: false,
        })
    }

    pub fn single_shot(n: usize, p_re: T, herald: HeraldModel<T>) -> Result<Self> {
        Self::new(n, RetrievalSchedule::single(p_re), herald)
    }
}

#[derive(Debug, Clone)]
pub struct ShotOutcome<T> {
    pub record: DetectionRecord,
    pub class: RecordClass,
    pub probability: T,
    /// Normalized conditional state.
    pub state: AcousticState<T>,
    /// Fidelity with the GHZ state of the heralded parity.
    pub fidelity: Option<T>,
}

fn outcome<T: Real>(layout: &Layout, record: DetectionRecord, comps: Vec<Vec<T>>, norm0: T) -> ShotOutcome<T> {
    let state = AcousticState {
        n: layout.n,
        components: comps,
    };
    let probability = state.norm_sqr() / norm0;
    let class = record.classify(layout);
    let fidelity = match &class {
        RecordClass::Complete { parity, .. } => Some(state.fidelity(&layout.ghz_state(*parity))),
        _ => None,
    };
    ShotOutcome {
        record,
        class,
        probability,
        state: state.normalized(),
        fidelity,
    }
}

/// All detection outcomes of one retrieval round at the first scheduled p_re,
/// sorted by click pattern.
pub fn single_shot<T: Real>(config: &GhzConfig<T>, initial: &AcousticState<T>) -> Result<Vec<ShotOutcome<T>>> {
    let layout = Layout::new(config.n)?;
    config.schedule.validate()?;
    if initial.n != config.n {
        return Err(Error::DimensionMismatch {
            expected: config.n,
            got: initial.n,
        });
    }
    let norm0 = initial.norm_sqr();
    let p = config.schedule.p(0, 0);
    let map = retrieval_round(&layout, initial, layout.full_mask(), p, &config.herald)?;
    Ok(map
        .into_iter()
        .map(|(counts, comps)| {
            outcome(
                &layout,
                DetectionRecord {
                    n: config.n,
                    counts,
                },
                comps,
                norm0,
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotSummary<T> {
    /// Probability of a complete herald.
    pub herald_probability: T,
    pub wrong_basis_probability: T,
    /// Success probability counted per the configuration's wrong-basis flag.
    pub success_probability: T,
    /// Mean GHZ fidelity over complete heralds.
    pub fidelity: T,
    pub total_probability: T,
}

pub fn summarize<T: Real>(outcomes: &[ShotOutcome<T>], include_wrong_basis: bool) -> ShotSummary<T> {
    let mut ph = T::zero();
    let mut pw = T::zero();
    let mut pf = T::zero();
    let mut total = T::zero();
    for o in outcomes {
        total += o.probability;
        match o.class {
            RecordClass::Complete { .. } => {
                ph += o.probability;
                pf += o.probability * o.fidelity.unwrap_or(T::zero());
            }
            RecordClass::WrongBasis => pw += o.probability,
            _ => {}
        }
    }
    let success = if include_wrong_basis {
        (ph + pw) * T::lit(2.0) / T::lit(3.0)
    } else {
        ph
    };
    ShotSummary {
        herald_probability: ph,
        wrong_basis_probability: pw,
        success_probability: success,
        fidelity: if ph > T::zero() { pf / ph } else { T::zero() },
        total_probability: total,
    }
}

/// Acoustic state between bleeding iterations.
#[derive(Debug, Clone)]
pub struct BleedState<T> {
    /// Normalized.
    pub state: AcousticState<T>,
    pub record: DetectionRecord,
    pub iteration: usize,
    /// Probability of the history leading here.
    pub probability: T,
    pub clicks_per_iteration: Vec<u32>,
    pub p_history: Vec<T>,
}

impl<T: Real> BleedState<T> {
    pub fn start(initial: AcousticState<T>) -> Self {
        let n = initial.n;
        Self {
            state: initial.normalized(),
            record: DetectionRecord::empty(n),
            iteration: 0,
            probability: T::one(),
            clicks_per_iteration: Vec::new(),
            p_history: Vec::new(),
        }
    }
}

/// One bleeding iteration: retrieve the still-active qubits at `p_re`, count,
/// and extend the record. Outcomes are sorted by cumulative record.
pub fn bleed_step<T: Real>(s: &BleedState<T>, p_re: T, herald: &HeraldModel<T>) -> Result<Vec<BleedState<T>>> {
    let layout = Layout::new(s.state.n)?;
    match s.record.classify(&layout) {
        RecordClass::Partial => {}
        c => {
            return Err(Error::InvalidState(format!(
                "cannot continue from a {} record",
                c.name()
            )))
        }
    }
    let active = layout.active_mask(&s.record.clicked_pairs(&layout));
    let map = retrieval_round(&layout, &s.state, active, p_re, herald)?;
    let mut out: Vec<BleedState<T>> = map
        .into_iter()
        .map(|(counts, comps)| {
            let st = AcousticState {
                n: layout.n,
                components: comps,
            };
            let prob = st.norm_sqr();
            let mut clicks = s.clicks_per_iteration.clone();
            clicks.push(counts.iter().sum());
            let mut ph = s.p_history.clone();
            ph.push(p_re);
            BleedState {
                record: s.record.add(&counts),
                state: st.normalized(),
                iteration: s.iteration + 1,
                probability: s.probability * prob,
                clicks_per_iteration: clicks,
                p_history: ph,
            }
        })
        .collect();
    out.sort_by(|a, b| a.record.cmp(&b.record));
    Ok(out)
}

/// Complete heralds sharing the same clicks per iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pathway<T> {
    pub clicks_per_iteration: Vec<u32>,
    pub p_history: Vec<T>,
    pub probability: T,
    /// Share of all complete heralds.
    pub weight: T,
    /// Fidelity of the conditional states with the heralded GHZ state.
    pub fidelity: T,
    /// Closed-form fidelity at the effective retrieval probability.
    pub fidelity_formula: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleedSummary<T> {
    pub success: T,
    pub wrong_basis: T,
    pub failed: T,
    /// Still partial after the last iteration.
    pub unfinished: T,
    pub fidelity: T,
    pub pathways: Vec<Pathway<T>>,
}

/// Enumerates every history over the schedule's iterations.
pub fn bleed_success_probability<T: Real>(config: &GhzConfig<T>, initial: &AcousticState<T>) -> Result<BleedSummary<T>> {
    let layout = Layout::new(config.n)?;
    config.schedule.validate()?;
    let mut live = vec![BleedState::start(initial.clone())];
    let mut done: Vec<(BleedState<T>, RecordClass)> = Vec::new();
    let mut unfinished = T::zero();
    let iters = config.schedule.iterations();
    for k in 0..iters {
        let mut next = Vec::new();
        for s in &live {
            let p = config.schedule.p(k, s.record.total());
            for o in bleed_step(s, p, &config.herald)? {
                let c = o.record.classify(&layout);
                if c.is_terminal() {
                    done.push((o, c));
                } else if k + 1 == iters {
                    unfinished += o.probability;
                } else {
                    next.push(o);
                }
            }
        }
        live = next;
    }
    let mut success = T::zero();
    let mut wrong = T::zero();
    let mut failed = T::zero();
    let mut groups: BTreeMap<Vec<u32>, (Vec<T>, T, T)> = BTreeMap::new();
    for (s, c) in &done {
        match c {
            RecordClass::Complete { parity, .. } => {
                success += s.probability;
                let f = s.state.fidelity(&layout.ghz_state(*parity));
                let g = groups
                    .entry(s.clicks_per_iteration.clone())
                    .or_insert_with(|| (s.p_history.clone(), T::zero(), T::zero()));
                g.1 += s.probability;
                g.2 += s.probability * f;
            }
            RecordClass::WrongBasis => wrong += s.probability,
            _ => failed += s.probability,
        }
    }
    let mut pathways = Vec::new();
    let mut fsum = T::zero();
    for (clicks, (ph, prob, pf)) in groups {
        let p_eff = effective_retrieval(&ph)?;
        let h = config.herald.over_windows(ph.len());
        pathways.push(Pathway {
            weight: if success > T::zero() { prob / success } else { T::zero() },
            fidelity: if prob > T::zero() { pf / prob } else { T::zero() },
            fidelity_formula: ghz_herald_fidelity(config.n, p_eff, &h)?,
            clicks_per_iteration: clicks,
            p_history: ph,
            probability: prob,
        });
        fsum += pf;
    }
    // longest-first order: earliest completion first
    pathways.sort_by(|a, b| a.clicks_per_iteration.len().cmp(&b.clicks_per_iteration.len()).then(b.clicks_per_iteration.cmp(&a.clicks_per_iteration)));
    let success_counted = if config.include_wrong_basis {
        (success + wrong) * T::lit(2.0) / T::lit(3.0)
    } else {
        success
    };
    Ok(BleedSummary {
        success: success_counted,
        wrong_basis: wrong,
        failed,
        unfinished,
        fidelity: if success > T::zero() { fsum / success } else { T::zero() },
        pathways,
    })
}

/// Coordinate sweeps of golden-section searches over a schedule that
/// depends on the iteration and the detections so far, maximizing the
/// complete-herald probability within `iterations` rounds.
pub fn optimize_bleed_schedule<T: Real>(
    n: usize,
    iterations: usize,
    herald: &HeraldModel<T>,
    initial: &AcousticState<T>,
) -> Result<(RetrievalSchedule<T>, BleedSummary<T>)> {
    if iterations == 0 {
        return Err(Error::InvalidParameter("at least one iteration required".into()));
    }
    let mut sched = RetrievalSchedule {
        rounds: (0..iterations)
            .map(|k| vec![T::lit(0.5); if k == 0 { 1 } else { n }])
            .collect(),
    };
    let eval = |s: &RetrievalSchedule<T>| -> Result<T> {
        let cfg = GhzConfig::new(n, s.clone(), *herald)?;
        Ok(bleed_success_probability(&cfg, initial)?.success)
    };
    let mut best = eval(&sched)?;
    for _ in 0..BLEED_SWEEPS {
        let before = best;
        for k in 0..iterations {
            for c in 0..sched.rounds[k].len() {
                let mut err = None;
                let (x, f) = crate::optim::golden_section_min(
                    |x| {
                        let mut s = sched.clone();
                        s.rounds[k][c] = x;
                        match eval(&s) {
                            Ok(v) => -v,
                            Err(e) => {
                                err.get_or_insert(e);
                                T::infinity()
                            }
                        }
                    },
                    T::zero(),
                    T::one(),
                    T::lit(BLEED_TOL),
                );
                if let Some(e) = err {
                    return Err(e);
                }
                if -f > best {
                    best = -f;
                    sched.rounds[k][c] = x;
                }
            }
        }
        if best - before <= T::lit(1e-12) {
            break;
        }
    }
    let cfg = GhzConfig::new(n, sched.clone(), *herald)?;
    let summary = bleed_success_probability(&cfg, initial)?;
    Ok((sched, summary))
}

/// Golden-section tolerance and sweep cap of [`optimize_bleed_schedule`].
pub const BLEED_TOL: f64 = 1e-7;
pub const BLEED_SWEEPS: usize = 20;
