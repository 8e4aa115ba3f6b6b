//! Replica-parallel estimators, goodness-of-fit tests, exponent regression and
//! phase scans.
//!
//! Replica `i` under master seed `s` draws from ChaCha8 seeded with `s` on
//! stream `i`. Replicas are folded in fixed-size chunks and the chunk results
//! are merged in index order, so every estimate is bit-identical for any
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dynamics::{local_time_profile, simulate_returns};
use crate::error::{Error, Result};
use crate::graph::RootedGraph;
use crate::lamp::{make_uniform_measure, LampGroup, SwitchMeasure};
use crate::walk::{BaseWalk, HomesickParams, HomesickWalk};

/// Fewer observed successes than this marks a rare-event estimate inconclusive.
pub const MIN_SUCCESSES: u64 = 30;

const CHUNK: u64 = 1024;

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Folds `body` over replicas `0..replicas` and merges chunk accumulators in
/// index order.
pub fn fold_replicas<A, I, F, M>(replicas: u64, seed: u64, init: I, body: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64, &mut ChaCha8Rng) + Sync,
    M: Fn(A, A) -> A,
{
    let chunks = replicas.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for i in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                let mut rng = replica_rng(seed, i);
                body(&mut acc, i, &mut rng);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Point estimate with its standard error and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub std_error: f64,
    /// Replicas requested.
    pub replicas: u64,
    pub seed: u64,
    /// Successes, for proportion estimates.
    pub successes: Option<u64>,
    /// `(Σw)² / Σw²`, for weighted estimates.
    pub effective_samples: Option<f64>,
    pub aborted_truncation: u64,
    pub aborted_budget: u64,
    pub inconclusive: bool,
}

impl EstimateWithCI {
    pub fn completed(&self) -> u64 {
        self.replicas - self.aborted_truncation - self.aborted_budget
    }

    pub fn aborted(&self) -> u64 {
        self.aborted_truncation + self.aborted_budget
    }

    /// `|estimate - target| <= z * std_error`.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.estimate - target).abs() <= z * self.std_error
    }
}

#[derive(Debug, Clone, Default)]
struct Aborts {
    truncation: u64,
    budget: u64,
}

impl Aborts {
    fn record(&mut self, err: Error) -> Result<()> {
        match err {
            Error::Truncation { .. } => self.truncation += 1,
            Error::StepBudget { .. } => self.budget += 1,
            other => return Err(other),
        }
        Ok(())
    }

    fn merge(&mut self, other: &Aborts) {
        self.truncation += other.truncation;
        self.budget += other.budget;
    }
}

/// Per-index success counts plus aborts.
#[derive(Debug, Clone)]
struct CountAcc {
    successes: Vec<u64>,
    aborts: Aborts,
    error: Option<Error>,
}

impl CountAcc {
    fn new(len: usize) -> Self {
        CountAcc {
            successes: vec![0; len],
            aborts: Aborts::default(),
            error: None,
        }
    }

    fn merge(mut self, other: CountAcc) -> CountAcc {
        for (a, b) in self.successes.iter_mut().zip(&other.successes) {
            *a += b;
        }
        self.aborts.merge(&other.aborts);
        if self.error.is_none() {
            self.error = other.error;
        }
        self
    }

    fn fail(&mut self, err: Error) {
        if let Err(e) = self.aborts.record(err) {
            self.error.get_or_insert(e);
        }
    }
}

fn proportion(successes: u64, replicas: u64, seed: u64, aborts: &Aborts) -> EstimateWithCI {
    let n = replicas - aborts.truncation - aborts.budget;
    let (estimate, std_error) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let p = successes as f64 / n as f64;
        (p, (p * (1.0 - p) / n as f64).sqrt())
    };
    EstimateWithCI {
        estimate,
        std_error,
        replicas,
        seed,
        successes: Some(successes),
        effective_samples: None,
        aborted_truncation: aborts.truncation,
        aborted_budget: aborts.budget,
        inconclusive: successes < MIN_SUCCESSES,
    }
}

fn check_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        return Err(Error::param("replicas must be >= 1"));
    }
    Ok(())
}

/// Fraction of replicas with `R_{ρ_k} = id`, for each `k` in `ks`, all read off
/// the same runs of `max(ks)` excursions.
pub fn estimate_return_profile<W: BaseWalk>(
    ks: &[u64],
    walk: &W,
    measure: &SwitchMeasure,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<EstimateWithCI>> {
    check_replicas(replicas)?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::param("need at least one k, all >= 1"));
    }
    let k_max = *ks.iter().max().unwrap() as usize;
    let acc = fold_replicas(
        replicas,
        seed,
        || CountAcc::new(ks.len()),
        |acc, _, rng| match simulate_returns(k_max, walk, measure, rng, budget) {
            Ok(stats) => {
                for (slot, &k) in acc.successes.iter_mut().zip(ks) {
                    *slot += stats.identity_at_return[k as usize - 1] as u64;
                }
            }
            Err(e) => acc.fail(e),
        },
        CountAcc::merge,
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    Ok(acc
        .successes
        .iter()
        .map(|&s| proportion(s, replicas, seed, &acc.aborts))
        .collect())
}

pub fn estimate_return_prob<W: BaseWalk>(
    k: u64,
    walk: &W,
    measure: &SwitchMeasure,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<EstimateWithCI> {
    Ok(estimate_return_profile(&[k], walk, measure, replicas, seed, budget)?.remove(0))
}

/// How `P(R_{ρ_k} = id)` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnEstimator {
    /// Fraction of full lamplighter runs that are at the identity.
    Direct,
    /// Mean over base paths of the exact conditional probability
    /// `Π_g μ^{*(2 n_g)}(id)`, where `n_g` counts visits before `ρ_k`.
    Conditional,
}

/// `ln μ^{*n}(id)` for even `n` up to a cap.
struct IdentityLogWeights {
    /// Uniform measure on a finite group: every positive power is uniform.
    uniform: Option<f64>,
    table: Vec<f64>,
}

impl IdentityLogWeights {
    fn new(measure: &SwitchMeasure, max_visits: u64) -> Self {
        if measure.is_uniform() {
            let order = measure.group().order().unwrap() as f64;
            return IdentityLogWeights {
                uniform: Some(-order.ln()),
                table: Vec::new(),
            };
        }
        let table = measure
            .convolution_powers_at_identity(2 * max_visits)
            .into_iter()
            .map(f64::ln)
            .collect();
        IdentityLogWeights { uniform: None, table }
    }

    fn total<'a>(&self, counts: impl Iterator<Item = &'a u64>) -> Option<f64> {
        match self.uniform {
            Some(lw) => Some(lw * counts.count() as f64),
            None => counts
                .map(|&n| self.table.get(2 * n as usize).copied())
                .sum::<Option<f64>>(),
        }
    }
}

/// Weighted estimate of `P(R_{ρ_k} = id)` for each `k`, from base-walk runs
/// alone. Points with fewer than `MIN_SUCCESSES` effective samples are
/// inconclusive. Non-uniform measures tabulate convolution powers up to
/// `2 * max_visits`; a vertex visited more often aborts the replica as over
/// budget.
pub fn estimate_return_profile_conditional<W: BaseWalk>(
    ks: &[u64],
    walk: &W,
    measure: &SwitchMeasure,
    replicas: u64,
    seed: u64,
    budget: u64,
    max_visits: u64,
) -> Result<Vec<EstimateWithCI>> {
    check_replicas(replicas)?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::param("need at least one k, all >= 1"));
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by_key(|&i| ks[i]);
    let weights = IdentityLogWeights::new(measure, max_visits);
    let root = walk.root();
    let acc = fold_replicas(
        replicas,
        seed,
        || MomentAcc::new(ks.len()),
        |acc, _, rng| {
            let mut counts: rustc_hash::FxHashMap<W::Vertex, u64> = Default::default();
            counts.insert(root, 1);
            let mut logw = vec![0.0; ks.len()];
            let mut next = 0;
            let mut returns = 0u64;
            let mut pos = root;
            let mut steps = 0u64;
            let outcome = loop {
                if next == order.len() {
                    break Ok(());
                }
                if steps >= budget {
                    break Err(Error::StepBudget { budget });
                }
                pos = match walk.step(pos, rng) {
                    Ok(v) => v,
                    Err(e) => break Err(e),
                };
                steps += 1;
                if pos == root {
                    returns += 1;
                    while next < order.len() && ks[order[next]] == returns {
                        match weights.total(counts.values()) {
                            Some(lw) => logw[order[next]] = lw,
                            None => return acc.fail(Error::StepBudget { budget }),
                        }
                        next += 1;
                    }
                }
                *counts.entry(pos).or_insert(0) += 1;
            };
            match outcome {
                Ok(()) => {
                    for (i, lw) in logw.iter().enumerate() {
                        let w = lw.exp();
                        acc.sum[i] += w;
                        acc.sum_sq[i] += w * w;
                    }
                }
                Err(e) => acc.fail(e),
            }
        },
        MomentAcc::merge,
    );
    let mut out = acc.clone().finish(replicas, seed)?;
    for (i, e) in out.iter_mut().enumerate() {
        let ess = if acc.sum_sq[i] > 0.0 { acc.sum[i] * acc.sum[i] / acc.sum_sq[i] } else { 0.0 };
        e.effective_samples = Some(ess);
        e.inconclusive = ess < MIN_SUCCESSES as f64;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct MomentAcc {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    aborts: Aborts,
    error: Option<Error>,
}

impl MomentAcc {
    fn new(len: usize) -> Self {
        MomentAcc {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
            aborts: Aborts::default(),
            error: None,
        }
    }

    fn merge(mut self, other: MomentAcc) -> MomentAcc {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self.aborts.merge(&other.aborts);
        if self.error.is_none() {
            self.error = other.error;
        }
        self
    }

    fn fail(&mut self, err: Error) {
        if let Err(e) = self.aborts.record(err) {
            self.error.get_or_insert(e);
        }
    }

    fn finish(self, replicas: u64, seed: u64) -> Result<Vec<EstimateWithCI>> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let n = (replicas - self.aborts.truncation - self.aborts.budget) as f64;
        Ok(self
            .sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(&s, &ss)| {
                let mean = s / n;
                let var = if n > 1.0 { ((ss - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                EstimateWithCI {
                    estimate: mean,
                    std_error: (var / n).sqrt(),
                    replicas,
                    seed,
                    successes: None,
                    effective_samples: None,
                    aborted_truncation: self.aborts.truncation,
                    aborted_budget: self.aborts.budget,
                    inconclusive: false,
                }
            })
            .collect())
    }
}

/// Mean of `ξ(id, n)` at each horizon (ascending), from shared runs.
pub fn estimate_local_time_profile<W: BaseWalk>(
    horizons: &[u64],
    walk: &W,
    measure: &SwitchMeasure,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<EstimateWithCI>> {
    check_replicas(replicas)?;
    if horizons.is_empty() || horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("horizons must be nonempty and strictly ascending"));
    }
    let acc = fold_replicas(
        replicas,
        seed,
        || MomentAcc::new(horizons.len()),
        |acc, _, rng| match local_time_profile(horizons, walk, measure, rng, budget) {
            Ok(summary) => {
                for (i, &xi) in summary.identity_visits.iter().enumerate() {
                    acc.sum[i] += xi as f64;
                    acc.sum_sq[i] += (xi * xi) as f64;
                }
            }
            Err(e) => acc.fail(e),
        },
        MomentAcc::merge,
    );
    acc.finish(replicas, seed)
}

pub fn estimate_local_time<W: BaseWalk>(
    n: u64,
    walk: &W,
    measure: &SwitchMeasure,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<EstimateWithCI> {
    Ok(estimate_local_time_profile(&[n], walk, measure, replicas, seed, budget)?.remove(0))
}

/// Runs the base walk from the root until it returns or reaches distance `r`.
fn reaches_distance<W: BaseWalk, R: Rng + ?Sized>(walk: &W, r: u32, rng: &mut R, budget: u64) -> Result<bool> {
    let root = walk.root();
    let mut pos = root;
    let mut steps = 0u64;
    loop {
        if steps >= budget {
            return Err(Error::StepBudget { budget });
        }
        pos = walk.step(pos, rng)?;
        steps += 1;
        if walk.distance(pos) >= r {
            return Ok(true);
        }
        if pos == root {
            return Ok(false);
        }
    }
}

/// Fraction of excursions from the root that reach distance `r`.
pub fn estimate_escape_prob<W: BaseWalk>(
    walk: &W,
    r: u32,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<EstimateWithCI> {
    check_replicas(replicas)?;
    if r == 0 {
        return Err(Error::param("r must be >= 1"));
    }
    let acc = fold_replicas(
        replicas,
        seed,
        || CountAcc::new(1),
        |acc, _, rng| match reaches_distance(walk, r, rng, budget) {
            Ok(hit) => acc.successes[0] += hit as u64,
            Err(e) => acc.fail(e),
        },
        CountAcc::merge,
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    Ok(proportion(acc.successes[0], replicas, seed, &acc.aborts))
}

/// `|range(Z_{ρ_k})|` of the base walk alone.
pub fn base_range_at_return<W: BaseWalk, R: Rng + ?Sized>(
    k: u64,
    walk: &W,
    rng: &mut R,
    budget: u64,
) -> Result<usize> {
    let root = walk.root();
    let mut visited: FxHashSet<W::Vertex> = FxHashSet::default();
    visited.insert(root);
    let mut pos = root;
    let mut returns = 0;
    let mut steps = 0u64;
    while returns < k {
        if steps >= budget {
            return Err(Error::StepBudget { budget });
        }
        pos = walk.step(pos, rng)?;
        steps += 1;
        if pos == root {
            returns += 1;
        } else {
            visited.insert(pos);
        }
    }
    Ok(visited.len())
}

/// Fraction of replicas with `|range(Z_{ρ_k})| <= threshold`.
pub fn estimate_range_tail<W: BaseWalk>(
    k: u64,
    threshold: f64,
    walk: &W,
    replicas: u64,
    seed: u64,
    budget: u64,
) -> Result<EstimateWithCI> {
    check_replicas(replicas)?;
    let acc = fold_replicas(
        replicas,
        seed,
        || CountAcc::new(1),
        |acc, _, rng| match base_range_at_return(k, walk, rng, budget) {
            Ok(size) => acc.successes[0] += (size as f64 <= threshold) as u64,
            Err(e) => acc.fail(e),
        },
        CountAcc::merge,
    );
    if let Some(e) = acc.error {
        return Err(e);
    }
    Ok(proportion(acc.successes[0], replicas, seed, &acc.aborts))
}

/// Least-squares fit of `log y = intercept + slope · log x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
}

pub fn fit_power_exponent(points: &[(f64, f64)]) -> Result<PowerFit> {
    if points.len() < 3 {
        return Err(Error::param("need at least 3 points"));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::param("x must be strictly increasing"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0) || !y.is_finite()) {
        return Err(Error::param("x and y must be positive"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let std_error = (rss / (n - 2.0) / sxx).sqrt();
    Ok(PowerFit { slope, std_error, intercept })
}

/// Kolmogorov–Smirnov distance between the sample's empirical CDF and `cdf`.
pub fn empirical_cdf_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("need at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Sup distance for integer-valued samples, evaluated on every integer between
/// `min - 1` and `max`.
pub fn discrete_cdf_distance(samples: &[i64], cdf: impl Fn(i64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("need at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let (lo, hi) = (sorted[0], *sorted.last().unwrap());
    let mut d: f64 = 0.0;
    let mut idx = 0usize;
    for x in (lo - 1)..=hi {
        while idx < sorted.len() && sorted[idx] <= x {
            idx += 1;
        }
        d = d.max((idx as f64 / n - cdf(x)).abs());
    }
    Ok(d)
}

/// Asymptotic KS critical value `sqrt(-ln(α/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub passed: bool,
}

/// Pearson goodness of fit. Adjacent bins are pooled until each expects at
/// least 5 observations; `probs` must cover all outcomes.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], alpha: f64) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::param("observed and probs must have equal nonzero length"));
    }
    let total_p: f64 = probs.iter().sum();
    if (total_p - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("probabilities sum to {total_p}")));
    }
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &p) in observed.iter().zip(probs) {
        o += obs as f64;
        e += p * nf;
        if e >= 5.0 {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::param("too few pooled bins"));
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::param(e.to_string()))?;
    let p_value = dist.sf(statistic);
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
        passed: p_value >= alpha,
    })
}

/// Ten log-spaced integers per decade from `lo` to `hi` inclusive.
pub fn log_spaced_ks(lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo == 0 || hi < 10 * lo {
        return Err(Error::param("k window must start at >= 1 and span at least a decade"));
    }
    let decades = (hi as f64 / lo as f64).log10();
    let steps = (decades * 10.0).round() as u64;
    let mut ks: Vec<u64> = (0..=steps)
        .map(|i| (lo as f64 * 10f64.powf(i as f64 / 10.0)).round() as u64)
        .map(|k| k.min(hi))
        .collect();
    ks.dedup();
    Ok(ks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub lambda: f64,
    pub ks: Vec<u64>,
    pub estimates: Vec<EstimateWithCI>,
    /// Fitted over the `k` with at least one success; `None` if fewer than 3.
    pub exponent: Option<PowerFit>,
    /// Too few identity returns (or effective samples) at some `k`, aborted
    /// replicas, or an exponent within two standard errors of `-1`.
    pub inconclusive: bool,
}

impl PhasePoint {
    /// Conclusive and summable: exponent `<= -1`.
    pub fn transient_side(&self) -> Option<bool> {
        if self.inconclusive {
            return None;
        }
        self.exponent.map(|f| f.slope <= -1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScanResult {
    pub grid: Vec<f64>,
    pub estimator: ReturnEstimator,
    pub points: Vec<PhasePoint>,
    /// Adjacent conclusive grid points where the exponent crosses `-1` upward.
    pub bracket: Option<(f64, f64)>,
}

/// Estimates the decay exponent of `k ↦ P(R_{ρ_k} = id)` at each `λ` of a sorted
/// grid, for the homesick walk on `graph` with uniform lamps on `Z/lamp_order`.
/// Grid point `i` uses master seed `seed + i`.
pub fn phase_scan(
    grid: &[f64],
    graph: &RootedGraph,
    lamp_order: u64,
    k_window: (u64, u64),
    replicas: u64,
    seed: u64,
    budget: u64,
    estimator: ReturnEstimator,
) -> Result<PhaseScanResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("grid must be nonempty and strictly increasing"));
    }
    let ks = log_spaced_ks(k_window.0, k_window.1)?;
    let measure = make_uniform_measure(LampGroup::cyclic(lamp_order)?)?;
    let mut points = Vec::with_capacity(grid.len());
    for (i, &lambda) in grid.iter().enumerate() {
        let walk = HomesickWalk::new(graph, HomesickParams::new(lambda)?);
        let point_seed = seed.wrapping_add(i as u64);
        let estimates = match estimator {
            ReturnEstimator::Direct => estimate_return_profile(&ks, &walk, &measure, replicas, point_seed, budget)?,
            ReturnEstimator::Conditional => {
                estimate_return_profile_conditional(&ks, &walk, &measure, replicas, point_seed, budget, 0)?
            }
        };
        let pts: Vec<(f64, f64)> = ks
            .iter()
            .zip(&estimates)
            .filter(|(_, e)| e.estimate > 0.0)
            .map(|(&k, e)| (k as f64, e.estimate))
            .collect();
        let exponent = if pts.len() >= 3 { Some(fit_power_exponent(&pts)?) } else { None };
        let inconclusive = estimates.iter().any(|e| e.inconclusive || e.aborted() > 0)
            || exponent.is_none_or(|f| (f.slope + 1.0).abs() <= 2.0 * f.std_error);
        points.push(PhasePoint {
            lambda,
            ks: ks.clone(),
            estimates,
            exponent,
            inconclusive,
        });
    }
    let conclusive: Vec<&PhasePoint> = points.iter().filter(|p| p.transient_side().is_some()).collect();
    let bracket = conclusive
        .windows(2)
        .find(|w| w[0].transient_side() == Some(true) && w[1].transient_side() == Some(false))
        .map(|w| (w[0].lambda, w[1].lambda));
    Ok(PhaseScanResult {
        grid: grid.to_vec(),
        estimator,
        points,
        bracket,
    })
}
