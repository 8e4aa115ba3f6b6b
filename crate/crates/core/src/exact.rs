//! Closed forms and error-controlled series for the walk on `F ≀ Z`, plus the
//! electrical-network bounds for homesick walks on rooted graphs.
//!
//! Series are truncated with a geometric tail bound relative to the partial sum;
//! `(1 - q)^m` is evaluated as `exp(m * ln_1p(-q))`, and binomial / Catalan
//! weights go through log-gamma.

use std::collections::HashMap;
use std::hash::Hash;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::RootedGraph;
use crate::lamp::SwitchMeasure;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Derived constants of the walk on `F ≀ Z` with drift `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub p: f64,
    pub lamp_order: u64,
    /// `p / (1 - p)`.
    pub lambda: f64,
    /// `log|F| / log λ`.
    pub alpha: f64,
    /// `|F|² / (|F|² + 1)`.
    pub p_critical: f64,
    /// Mean excursion length `2p / (2p - 1)`.
    pub mean_excursion: f64,
    /// Radius of convergence of the return-time MGF, `½ log(1 / (4p(1-p)))`.
    pub mgf_abscissa: f64,
}

impl PhaseParams {
    pub fn is_recurrent(&self) -> bool {
        2.0 * self.alpha <= 1.0
    }
}

pub fn phase_params(p: f64, lamp_order: u64) -> Result<PhaseParams> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::param(format!("p = {p} must lie in (1/2, 1)")));
    }
    if lamp_order < 2 {
        return Err(Error::param("lamp order must be >= 2"));
    }
    let f = lamp_order as f64;
    let lambda = p / (1.0 - p);
    Ok(PhaseParams {
        p,
        lamp_order,
        lambda,
        alpha: f.ln() / lambda.ln(),
        p_critical: f * f / (f * f + 1.0),
        mean_excursion: 2.0 * p / (2.0 * p - 1.0),
        mgf_abscissa: 0.5 * (1.0 / (4.0 * p * (1.0 - p))).ln(),
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::param(format!("lambda = {lambda} must be > 1")));
    }
    Ok(())
}

fn check_order(lamp_order: u64) -> Result<()> {
    if lamp_order < 2 {
        return Err(Error::param("lamp order must be >= 2"));
    }
    Ok(())
}

/// `|F|^{-(M⁺ - M⁻ + 1)}`: probability that every lamp on `[M⁻, M⁺]` is off.
pub fn ret_prob_given_extremes(m_plus: i64, m_minus: i64, lamp_order: u64) -> Result<f64> {
    if m_plus < 0 || m_minus > 0 {
        return Err(Error::param("need m_plus >= 0 >= m_minus"));
    }
    check_order(lamp_order)?;
    let sites = m_plus - m_minus + 1;
    let f = lamp_order as f64;
    Ok(match i32::try_from(sites) {
        Ok(n) => f.powi(-n),
        Err(_) => 0.0,
    })
}

/// `P(M₁⁺ <= x | S₁ = 1) = 1 - (λ - 1)/(λ^{x+1} - 1)`.
pub fn max_excursion_cdf(x: u64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(1.0 - escape_rate(lambda, x + 1))
}

/// `(λ - 1)/(λ^a - 1)`, the chance a positive excursion reaches height `a`.
fn escape_rate(lambda: f64, a: u64) -> f64 {
    if a == 1 {
        return 1.0;
    }
    let ln_l = lambda.ln();
    (lambda - 1.0) / (a as f64 * ln_l).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Last index `a` included.
    pub terms: u64,
}

/// `S(m) = Σ_{a>=1} |F|^{-a} (1 - (λ-1)/(λ^a - 1))^m`, with `0^0 = 1`.
///
/// Stops at the first `A` with `Σ_{a>A} |F|^{-a} < tol * S_A`.
pub fn excursion_series(m: u64, lambda: f64, lamp_order: u64, tol: f64) -> Result<SeriesValue> {
    check_lambda(lambda)?;
    check_order(lamp_order)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol must be > 0"));
    }
    let table = SeriesTerms::new(lambda, lamp_order);
    Ok(table.sum(m, tol))
}

/// Per-`a` constants of the excursion series, shared across many `m`.
#[derive(Debug, Clone)]
struct SeriesTerms {
    ln_f: f64,
    f: f64,
    /// `ln(1 - q_a)` for `a = 1, 2, ...`, grown on demand.
    log_keep: Vec<f64>,
    lambda: f64,
}

impl SeriesTerms {
    fn new(lambda: f64, lamp_order: u64) -> Self {
        let f = lamp_order as f64;
        SeriesTerms {
            ln_f: f.ln(),
            f,
            log_keep: Vec::new(),
            lambda,
        }
    }

    fn log_keep(&self, a: u64) -> f64 {
        if a == 1 {
            f64::NEG_INFINITY
        } else {
            (-escape_rate(self.lambda, a)).ln_1p()
        }
    }

    fn sum(&self, m: u64, tol: f64) -> SeriesValue {
        let mut total = 0.0;
        let mut a = 0u64;
        loop {
            a += 1;
            let term = if a == 1 {
                if m == 0 {
                    1.0 / self.f
                } else {
                    0.0
                }
            } else {
                let lk = self.log_keep.get(a as usize - 1).copied().unwrap_or_else(|| self.log_keep(a));
                (-(a as f64) * self.ln_f + m as f64 * lk).exp()
            };
            total += term;
            let tail = (-(a as f64) * self.ln_f).exp() / (self.f - 1.0);
            if a >= 2 && tail < tol * total {
                return SeriesValue { value: total, terms: a };
            }
            // no representable mass left
            if a > 2 && tail == 0.0 {
                return SeriesValue { value: total, terms: a };
            }
        }
    }

    fn with_cache(mut self, max_a: usize) -> Self {
        self.log_keep = (1..=max_a as u64).map(|a| self.log_keep(a)).collect();
        self
    }
}

/// `S(m)` for all `m` in `0..=max_m`, as used by the return-probability sums.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    values: Vec<f64>,
    max_terms: u64,
}

impl SeriesTable {
    pub fn new(max_m: u64, lambda: f64, lamp_order: u64, tol: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_order(lamp_order)?;
        if !(tol > 0.0) {
            return Err(Error::param("tol must be > 0"));
        }
        let terms = SeriesTerms::new(lambda, lamp_order).with_cache(4096);
        let mut values = Vec::with_capacity(max_m as usize + 1);
        let mut max_terms = 0;
        for m in 0..=max_m {
            let s = terms.sum(m, tol);
            max_terms = max_terms.max(s.terms);
            values.push(s.value);
        }
        Ok(SeriesTable { values, max_terms })
    }

    pub fn get(&self, m: u64) -> f64 {
        self.values[m as usize]
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }

    pub fn max_m(&self) -> u64 {
        self.values.len() as u64 - 1
    }
}

/// Return probability at `ρ_k` given `m_pos` positive excursions:
/// `((|F|-1)²/|F|) S(m_pos) S(k - m_pos)`.
pub fn ret_prob_given_nplus(
    k: u64,
    m_pos: u64,
    lambda: f64,
    lamp_order: u64,
    tol: f64,
) -> Result<f64> {
    if m_pos > k {
        return Err(Error::param("need 0 <= m_pos <= k"));
    }
    let a = excursion_series(m_pos, lambda, lamp_order, tol)?.value;
    let b = excursion_series(k - m_pos, lambda, lamp_order, tol)?.value;
    Ok(nplus_prefactor(lamp_order) * a * b)
}

fn nplus_prefactor(lamp_order: u64) -> f64 {
    let f = lamp_order as f64;
    (f - 1.0) * (f - 1.0) / f
}

fn ln_binomial_half(k: u64, m: u64) -> f64 {
    ln_gamma(k as f64 + 1.0) - ln_gamma(m as f64 + 1.0) - ln_gamma((k - m) as f64 + 1.0)
        - k as f64 * std::f64::consts::LN_2
}

fn ret_prob_from_table(k: u64, table: &SeriesTable, prefactor: f64) -> f64 {
    let mut total = 0.0;
    for m in 0..=k {
        let lw = ln_binomial_half(k, m);
        if lw < -745.0 {
            continue;
        }
        total += lw.exp() * table.get(m) * table.get(k - m);
    }
    (prefactor * total).min(1.0)
}

/// `P(R_{ρ_k} = id)`, averaging the conditional law over `N_k⁺ ~ Bin(k, 1/2)`.
pub fn ret_prob_at_rho_k(k: u64, lambda: f64, lamp_order: u64, tol: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    let table = SeriesTable::new(k, lambda, lamp_order, tol)?;
    Ok(ret_prob_from_table(k, &table, nplus_prefactor(lamp_order)))
}

/// `P(R_{ρ_k} = id)` for each `k` in `ks`, sharing one series table.
pub fn ret_prob_curve(ks: &[u64], lambda: f64, lamp_order: u64, tol: f64) -> Result<Vec<f64>> {
    if ks.contains(&0) {
        return Err(Error::param("k must be >= 1"));
    }
    let max_k = ks.iter().copied().max().unwrap_or(1);
    let table = SeriesTable::new(max_k, lambda, lamp_order, tol)?;
    let pre = nplus_prefactor(lamp_order);
    Ok(ks.iter().map(|&k| ret_prob_from_table(k, &table, pre)).collect())
}

/// `E[ξ(id, ρ_k)] = 1 + Σ_{j<=k} P(R_{ρ_j} = id)`.
pub fn local_time_partial_sum(k: u64, lambda: f64, lamp_order: u64, tol: f64) -> Result<f64> {
    Ok(*local_time_partial_sums(k, lambda, lamp_order, tol)?.last().unwrap())
}

/// The partial sums for every `j` in `0..=k`.
pub fn local_time_partial_sums(k: u64, lambda: f64, lamp_order: u64, tol: f64) -> Result<Vec<f64>> {
    let table = SeriesTable::new(k.max(1), lambda, lamp_order, tol)?;
    let pre = nplus_prefactor(lamp_order);
    let mut sums = Vec::with_capacity(k as usize + 1);
    let mut acc = 1.0;
    sums.push(acc);
    for j in 1..=k {
        acc += ret_prob_from_table(j, &table, pre);
        sums.push(acc);
    }
    Ok(sums)
}

/// `P(ρ₁ = 2t) = C_{t-1} p^t (1-p)^{t-1}`.
pub fn rho1_pmf(t: u64, p: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::param("t must be >= 1"));
    }
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::param(format!("p = {p} must lie in (1/2, 1)")));
    }
    let n = (t - 1) as f64;
    // C_n = (2n)! / (n! (n+1)!)
    let ln_catalan = ln_gamma(2.0 * n + 1.0) - ln_gamma(n + 1.0) - ln_gamma(n + 2.0);
    Ok((ln_catalan + t as f64 * p.ln() + n * (1.0 - p).ln()).exp())
}

/// `E[e^{s ρ₁}] = (1 - sqrt(1 - 4p(1-p)e^{2s})) / (2(1-p))`, for `s < s₀`.
pub fn mgf_rho1(s: f64, p: f64) -> Result<f64> {
    let params = phase_params(p, 2)?;
    if !(s < params.mgf_abscissa) {
        return Err(Error::param(format!(
            "s = {s} is outside the domain s < {}",
            params.mgf_abscissa
        )));
    }
    let x = 4.0 * p * (1.0 - p) * (2.0 * s).exp();
    Ok((1.0 - (1.0 - x).sqrt()) / (2.0 * (1.0 - p)))
}

/// `E[ρ_k] = k · 2p/(2p - 1)`.
pub fn expected_rho(k: u64, p: f64) -> Result<f64> {
    Ok(k as f64 * phase_params(p, 2)?.mean_excursion)
}

/// Upper bound on the probability that an excursion reaches distance `r`:
/// `(1/deg o) (Σ_{i<r} |∂_E B_i|^{-1} λ^i)^{-1}`.
pub fn escape_prob_bound(graph: &RootedGraph, lambda: f64, r: u32) -> Result<f64> {
    if r < 1 {
        return Err(Error::param("r must be >= 1"));
    }
    if !(lambda >= 1.0) {
        return Err(Error::param("lambda must be >= 1"));
    }
    let mut resistance = 0.0;
    for i in 0..r {
        let boundary = graph.edge_boundary(i)?;
        if boundary == 0 {
            return Ok(0.0);
        }
        resistance += lambda.powi(i as i32) / boundary as f64;
    }
    Ok(1.0 / (graph.degree(graph.root()) as f64 * resistance))
}

/// `N` and the bound `e^{-N/8}` on `P(|range(Z_{ρ_k})| <= N/4)`, where
/// `N = min(|B_{c log k / log λ}|, ⌊(λ-1)/deg o · k^{1-c}⌋)`.
pub fn range_lower_tail_bound(
    k: u64,
    lambda: f64,
    deg_root: usize,
    ball_size: impl Fn(u32) -> Result<usize>,
    c: f64,
) -> Result<(u64, f64)> {
    check_lambda(lambda)?;
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::param("c must lie in (0, 1)"));
    }
    if deg_root == 0 {
        return Err(Error::param("root degree must be positive"));
    }
    let deg = deg_root as f64;
    let kf = k as f64;
    let threshold = (5.0 * (lambda - 1.0) / deg).powf(1.0 / c);
    if kf < threshold {
        return Err(Error::param(format!(
            "k = {k} is below the validity threshold {threshold}"
        )));
    }
    // radii are floored; nudge so exact integers survive rounding
    let radius = (c * kf.ln() / lambda.ln() * (1.0 + 1e-12)).floor() as u32;
    let ball = ball_size(radius)? as u64;
    let linear = ((lambda - 1.0) / deg * kf.powf(1.0 - c) * (1.0 + 1e-12)).floor() as u64;
    let n = ball.min(linear);
    Ok((n, (-(n as f64) / 8.0).exp()))
}

/// `Π_g μ^{*(2 n_g)}(id)` over the given per-vertex counts.
///
/// `switch_visits` must count visits at times `0 <= t < ρ_k`; the lamp at `g`
/// is then a product of exactly `2 n_g` independent switch increments. (Counting
/// the final return as well would add two spurious increments at the root.)
pub fn ret_prob_given_local_times<V: Eq + Hash>(
    switch_visits: &HashMap<V, u64, impl std::hash::BuildHasher>,
    measure: &SwitchMeasure,
) -> f64 {
    let max = switch_visits.values().copied().max().unwrap_or(0);
    let powers = measure.convolution_powers_at_identity(2 * max);
    switch_visits
        .values()
        .map(|&n| powers[2 * n as usize])
        .product()
}
