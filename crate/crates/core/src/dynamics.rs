//! The switch-walk-switch walk on a lamplighter group or graph.
//!
//! Each step right-multiplies the lamp at the current position by `U`, moves the
//! base walk, and right-multiplies the lamp at the new position by `V`, where
//! `U, V` are independent draws from the switch measure. With the uniform measure
//! on a finite group this is equal in law to overwriting both lamps with fresh
//! uniform values, so only the multiplicative form is implemented.

use rand::Rng;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lamp::{sample_switch, LampElement, LampGroup, SwitchMeasure};
use crate::walk::BaseWalk;

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000_000;

/// Finitely supported lamp configuration. Identity lamps are never stored, so
/// the map length is the number of lit lamps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LampConfig<V: std::hash::Hash + Eq> {
    group: LampGroup,
    lamps: FxHashMap<V, LampElement>,
}

impl<V: Copy + std::hash::Hash + Eq> LampConfig<V> {
    pub fn new(group: LampGroup) -> Self {
        LampConfig {
            group,
            lamps: FxHashMap::default(),
        }
    }

    pub fn group(&self) -> LampGroup {
        self.group
    }

    pub fn get(&self, v: V) -> LampElement {
        self.lamps.get(&v).copied().unwrap_or(self.group.identity())
    }

    /// `L(v) <- L(v) * h`.
    #[inline]
    pub fn multiply_at(&mut self, v: V, h: LampElement) {
        let id = self.group.identity();
        if h == id {
            return;
        }
        let next = self.group.compose(self.get(v), h);
        if next == id {
            self.lamps.remove(&v);
        } else {
            self.lamps.insert(v, next);
        }
    }

    pub fn lit_count(&self) -> usize {
        self.lamps.len()
    }

    pub fn is_identity(&self) -> bool {
        self.lamps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (V, LampElement)> + '_ {
        self.lamps.iter().map(|(&v, &h)| (v, h))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkerState<V: std::hash::Hash + Eq> {
    pub lamps: LampConfig<V>,
    pub position: V,
    pub steps: u64,
}

impl<V: Copy + std::hash::Hash + Eq> WalkerState<V> {
    /// The lamplighter identity: all lamps off, walker at `root`.
    pub fn identity(group: LampGroup, root: V) -> Self {
        WalkerState {
            lamps: LampConfig::new(group),
            position: root,
            steps: 0,
        }
    }

    /// O(1): lit-lamp count is the map length.
    pub fn is_identity(&self, root: V) -> bool {
        self.position == root && self.lamps.is_identity()
    }

    /// Applies one step with the given draws: switch `u` at the current
    /// position, move to `to`, switch `v` at `to`.
    pub fn apply_step(&mut self, u: LampElement, to: V, v: LampElement) {
        self.lamps.multiply_at(self.position, u);
        self.lamps.multiply_at(to, v);
        self.position = to;
        self.steps += 1;
    }
}

/// One switch-walk-switch step. Draw order is `U`, base move, `V`.
#[inline]
pub fn ssw_step<W: BaseWalk, R: Rng + ?Sized>(
    state: &mut WalkerState<W::Vertex>,
    walk: &W,
    measure: &SwitchMeasure,
    rng: &mut R,
) -> Result<()> {
    let u = sample_switch(measure, rng);
    let to = walk.step(state.position, rng)?;
    let v = sample_switch(measure, rng);
    state.apply_step(u, to, v);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

/// One excursion of the base walk away from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionRecord<V: std::hash::Hash + Eq> {
    pub length: u64,
    pub max_distance: u32,
    /// Extremes of the integer projection, when the walk has one.
    pub proj_max: Option<i64>,
    pub proj_min: Option<i64>,
    /// Sign of the projection after the first step.
    pub sign: Option<Sign>,
    /// Visits per vertex at times in `[start, end)`.
    pub visits: FxHashMap<V, u64>,
}

/// Runs the walk from the root until its base position returns to the root.
/// `budget` caps the walker's total step count.
pub fn run_excursion<W: BaseWalk, R: Rng + ?Sized>(
    state: &mut WalkerState<W::Vertex>,
    walk: &W,
    measure: &SwitchMeasure,
    rng: &mut R,
    budget: u64,
) -> Result<ExcursionRecord<W::Vertex>> {
    let root = walk.root();
    if state.position != root {
        return Err(Error::param("excursions must start at the root"));
    }
    let start = state.steps;
    let mut visits: FxHashMap<W::Vertex, u64> = FxHashMap::default();
    let mut max_distance = 0;
    let mut proj_max = walk.projection(root);
    let mut proj_min = proj_max;
    let mut sign = None;
    loop {
        if state.steps >= budget {
            return Err(Error::StepBudget { budget });
        }
        *visits.entry(state.position).or_insert(0) += 1;
        ssw_step(state, walk, measure, rng)?;
        let pos = state.position;
        if pos == root {
            break;
        }
        max_distance = max_distance.max(walk.distance(pos));
        if let Some(x) = walk.projection(pos) {
            proj_max = proj_max.map(|m| m.max(x));
            proj_min = proj_min.map(|m| m.min(x));
            if sign.is_none() {
                sign = Some(if x > 0 { Sign::Positive } else { Sign::Negative });
            }
        }
    }
    Ok(ExcursionRecord {
        length: state.steps - start,
        max_distance,
        proj_max,
        proj_min,
        sign,
        visits,
    })
}

/// Statistics folded over the first `k` excursions of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionStats<V: std::hash::Hash + Eq> {
    pub k: usize,
    /// Return times `ρ_1 < ... < ρ_k`.
    pub rho: Vec<u64>,
    pub max_distance: u32,
    pub m_plus: Option<i64>,
    pub m_minus: Option<i64>,
    pub n_plus: usize,
    pub n_minus: usize,
    /// Lengths of the individual excursions.
    pub excursion_lengths: Vec<u64>,
    /// Maximum distance reached in each excursion.
    pub excursion_max_distance: Vec<u32>,
    /// Visits per vertex at times `0..=ρ_k` (the final return included).
    pub local_times: FxHashMap<V, u64>,
    /// Whether the full state was the identity at each `ρ_j`.
    pub identity_at_return: Vec<bool>,
    /// Lamps lit at `ρ_k`.
    pub final_lamps: Vec<(V, LampElement)>,
}

impl<V: Copy + std::hash::Hash + Eq> ExcursionStats<V> {
    pub fn rho_k(&self) -> u64 {
        self.rho.last().copied().unwrap_or(0)
    }

    pub fn range_size(&self) -> usize {
        self.local_times.len()
    }

    pub fn identity_returns(&self) -> usize {
        self.identity_at_return.iter().filter(|&&b| b).count()
    }

    /// Visit counts over `0 <= t < ρ_k`: each such visit to `g` contributes two
    /// switch increments to the lamp at `g`. Differs from `local_times` only at
    /// the root.
    pub fn switch_visits(&self, root: V) -> FxHashMap<V, u64> {
        let mut out = self.local_times.clone();
        if let Some(c) = out.get_mut(&root) {
            *c -= 1;
            if *c == 0 {
                out.remove(&root);
            }
        }
        out
    }
}

/// Runs `k >= 1` excursions from the identity and records their statistics.
pub fn simulate_returns<W: BaseWalk, R: Rng + ?Sized>(
    k: usize,
    walk: &W,
    measure: &SwitchMeasure,
    rng: &mut R,
    budget: u64,
) -> Result<ExcursionStats<W::Vertex>> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    let root = walk.root();
    let mut state = WalkerState::identity(measure.group(), root);
    let mut stats = ExcursionStats {
        k,
        rho: Vec::with_capacity(k),
        max_distance: 0,
        m_plus: walk.projection(root),
        m_minus: walk.projection(root),
        n_plus: 0,
        n_minus: 0,
        excursion_lengths: Vec::with_capacity(k),
        excursion_max_distance: Vec::with_capacity(k),
        local_times: FxHashMap::default(),
        identity_at_return: Vec::with_capacity(k),
        final_lamps: Vec::new(),
    };
    for _ in 0..k {
        let rec = run_excursion(&mut state, walk, measure, rng, budget)?;
        stats.rho.push(state.steps);
        stats.max_distance = stats.max_distance.max(rec.max_distance);
        stats.m_plus = match (stats.m_plus, rec.proj_max) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        stats.m_minus = match (stats.m_minus, rec.proj_min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            _ => None,
        };
        match rec.sign {
            Some(Sign::Positive) => stats.n_plus += 1,
            Some(Sign::Negative) => stats.n_minus += 1,
            None => {}
        }
        stats.excursion_lengths.push(rec.length);
        stats.excursion_max_distance.push(rec.max_distance);
        for (v, c) in rec.visits {
            *stats.local_times.entry(v).or_insert(0) += c;
        }
        stats.identity_at_return.push(state.is_identity(root));
    }
    *stats.local_times.entry(root).or_insert(0) += 1;
    stats.final_lamps = state.lamps.iter().collect();
    Ok(stats)
}

/// Outcome of a fixed-horizon run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTimeSummary {
    /// Horizons, ascending.
    pub horizons: Vec<u64>,
    /// `ξ(id, n)` at each horizon, counting time 0.
    pub identity_visits: Vec<u64>,
    /// Visits of the base walk to the root at times `1..=n_max`.
    pub base_returns: u64,
    pub max_distance: u32,
    pub range_size: usize,
    pub lit_lamps: usize,
}

/// Counts visits of the full walk to the identity during steps `0..=n` for each
/// horizon `n` (ascending) in one run.
pub fn local_time_profile<W: BaseWalk, R: Rng + ?Sized>(
    horizons: &[u64],
    walk: &W,
    measure: &SwitchMeasure,
    rng: &mut R,
    budget: u64,
) -> Result<LocalTimeSummary> {
    if horizons.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("horizons must be ascending"));
    }
    let n_max = horizons.last().copied().unwrap_or(0);
    if n_max > budget {
        return Err(Error::StepBudget { budget });
    }
    let root = walk.root();
    let mut state = WalkerState::identity(measure.group(), root);
    let mut visited: rustc_hash::FxHashSet<W::Vertex> = Default::default();
    visited.insert(root);
    let mut xi = 1u64;
    let mut base_returns = 0;
    let mut max_distance = 0;
    let mut identity_visits = Vec::with_capacity(horizons.len());
    let mut next = horizons.iter().peekable();
    while next.peek().is_some_and(|&&h| h == 0) {
        identity_visits.push(xi);
        next.next();
    }
    while let Some(&&h) = next.peek() {
        ssw_step(&mut state, walk, measure, rng)?;
        let pos = state.position;
        if pos == root {
            base_returns += 1;
            if state.lamps.is_identity() {
                xi += 1;
            }
        } else {
            max_distance = max_distance.max(walk.distance(pos));
            visited.insert(pos);
        }
        if state.steps == h {
            while next.peek().is_some_and(|&&h2| h2 == h) {
                identity_visits.push(xi);
                next.next();
            }
        }
    }
    Ok(LocalTimeSummary {
        horizons: horizons.to_vec(),
        identity_visits,
        base_returns,
        max_distance,
        range_size: visited.len(),
        lit_lamps: state.lamps.lit_count(),
    })
}

/// `ξ(id, n)` and trajectory summaries for a single horizon.
pub fn local_time_run<W: BaseWalk, R: Rng + ?Sized>(
    n: u64,
    walk: &W,
    measure: &SwitchMeasure,
    rng: &mut R,
    budget: u64,
) -> Result<LocalTimeSummary> {
    local_time_profile(&[n], walk, measure, rng, budget)
}
