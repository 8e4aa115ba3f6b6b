//! Lamp groups, switch measures and their convolution powers.
//!
//! Lamp groups are abelian here (cyclic `Z/mZ` or `Z`), so elements are plain
//! integers: residues in `0..m` for the cyclic case.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{Error, Result};

pub type LampElement = i64;

/// Relative tolerance for probability comparisons.
pub const PROB_RTOL: f64 = 1e-12;

/// Entries below this are dropped from the edges of integer-lamp convolutions.
const UNDERFLOW_CUTOFF: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LampGroup {
    /// `Z/mZ`. Order 1 (the trivial group) is accepted for degenerate checks.
    Cyclic(u64),
    Integers,
}

impl LampGroup {
    pub fn cyclic(order: u64) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("cyclic lamp group order must be >= 1"));
        }
        Ok(LampGroup::Cyclic(order))
    }

    pub fn order(&self) -> Option<u64> {
        match *self {
            LampGroup::Cyclic(m) => Some(m),
            LampGroup::Integers => None,
        }
    }

    #[inline]
    pub fn identity(&self) -> LampElement {
        0
    }

    #[inline]
    pub fn compose(&self, a: LampElement, b: LampElement) -> LampElement {
        match *self {
            LampGroup::Cyclic(m) => (a + b).rem_euclid(m as i64),
            LampGroup::Integers => a + b,
        }
    }

    #[inline]
    pub fn inverse(&self, a: LampElement) -> LampElement {
        match *self {
            LampGroup::Cyclic(m) => (-a).rem_euclid(m as i64),
            LampGroup::Integers => -a,
        }
    }

    /// Canonical representative of `a` in this group.
    pub fn reduce(&self, a: LampElement) -> LampElement {
        match *self {
            LampGroup::Cyclic(m) => a.rem_euclid(m as i64),
            LampGroup::Integers => a,
        }
    }

    pub fn elements(&self) -> Option<impl Iterator<Item = LampElement>> {
        self.order().map(|m| 0..m as i64)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= PROB_RTOL * a.abs().max(b.abs())
}

/// A finitely supported, symmetric, non-degenerate probability measure on a lamp group.
#[derive(Debug, Clone)]
pub struct SwitchMeasure {
    group: LampGroup,
    support: Vec<(LampElement, f64)>,
    sampler: WeightedIndex<f64>,
}

impl SwitchMeasure {
    /// Validates and canonicalizes a support table. Duplicate elements are merged.
    pub fn new(group: LampGroup, support: &[(LampElement, f64)]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let mut entries: Vec<(LampElement, f64)> = Vec::with_capacity(support.len());
        for &(h, p) in support {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidMeasure(format!(
                    "probability {p} of element {h} is outside (0, 1]"
                )));
            }
            let h = group.reduce(h);
            match entries.iter_mut().find(|(e, _)| *e == h) {
                Some(entry) => entry.1 += p,
                None => entries.push((h, p)),
            }
        }
        entries.sort_by_key(|&(h, _)| h);

        let total: f64 = entries.iter().map(|&(_, p)| p).sum();
        if !approx_eq(total, 1.0) {
            return Err(Error::InvalidMeasure(format!(
                "probabilities sum to {total}, not 1"
            )));
        }

        let prob_of = |h: LampElement| {
            entries
                .iter()
                .find(|&&(e, _)| e == h)
                .map_or(0.0, |&(_, p)| p)
        };
        for &(h, p) in &entries {
            let inv = group.inverse(h);
            if !approx_eq(p, prob_of(inv)) {
                return Err(Error::InvalidMeasure(format!(
                    "not symmetric: mu({h}) = {p} but mu({inv}) = {}",
                    prob_of(inv)
                )));
            }
        }

        let g = entries
            .iter()
            .fold(0u64, |acc, &(h, _)| gcd(acc, h.unsigned_abs()));
        let generates = match group {
            LampGroup::Cyclic(m) => gcd(g, m) == 1,
            LampGroup::Integers => g == 1,
        };
        if !generates {
            return Err(Error::InvalidMeasure(
                "support does not generate the lamp group".into(),
            ));
        }

        let sampler = WeightedIndex::new(entries.iter().map(|&(_, p)| p))
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Ok(SwitchMeasure {
            group,
            support: entries,
            sampler,
        })
    }

    pub fn group(&self) -> LampGroup {
        self.group
    }

    /// Support entries sorted by element.
    pub fn support(&self) -> &[(LampElement, f64)] {
        &self.support
    }

    pub fn prob(&self, h: LampElement) -> f64 {
        let h = self.group.reduce(h);
        self.support
            .iter()
            .find(|&&(e, _)| e == h)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn is_uniform(&self) -> bool {
        match self.group.order() {
            Some(m) => {
                self.support.len() as u64 == m
                    && self.support.iter().all(|&(_, p)| approx_eq(p, 1.0 / m as f64))
            }
            None => false,
        }
    }

    /// Distribution of a product of `n` independent increments.
    pub fn convolution_power(&self, n: u64) -> LampDistribution {
        let mut dist = LampDistribution::point_mass(self.group);
        for _ in 0..n {
            dist = dist.convolve(self);
        }
        dist
    }

    /// `mu^{*n}(id)` for every `n` in `0..=max_n`, from a single convolution sweep.
    pub fn convolution_powers_at_identity(&self, max_n: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(max_n as usize + 1);
        let mut dist = LampDistribution::point_mass(self.group);
        out.push(1.0);
        for _ in 0..max_n {
            dist = dist.convolve(self);
            out.push(dist.prob(self.group.identity()));
        }
        out
    }
}

/// The uniform switch measure on a finite cyclic lamp group.
pub fn make_uniform_measure(group: LampGroup) -> Result<SwitchMeasure> {
    match group {
        LampGroup::Cyclic(m) => {
            let p = 1.0 / m as f64;
            let support: Vec<_> = (0..m as i64).map(|h| (h, p)).collect();
            SwitchMeasure::new(group, &support)
        }
        LampGroup::Integers => Err(Error::NoUniformMeasure),
    }
}

pub fn convolution_power_at_identity(measure: &SwitchMeasure, n: u64) -> f64 {
    measure.convolution_power(n).prob(measure.group().identity())
}

#[inline]
pub fn sample_switch<R: Rng + ?Sized>(measure: &SwitchMeasure, rng: &mut R) -> LampElement {
    measure.support[measure.sampler.sample(rng)].0
}

/// A finitely supported distribution on a lamp group, stored densely over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct LampDistribution {
    group: LampGroup,
    /// Element represented by `probs[0]` (always 0 for cyclic groups).
    offset: LampElement,
    probs: Vec<f64>,
}

impl LampDistribution {
    pub fn point_mass(group: LampGroup) -> Self {
        let probs = match group {
            LampGroup::Cyclic(m) => {
                let mut v = vec![0.0; m as usize];
                v[0] = 1.0;
                v
            }
            LampGroup::Integers => vec![1.0],
        };
        LampDistribution {
            group,
            offset: 0,
            probs,
        }
    }

    pub fn prob(&self, h: LampElement) -> f64 {
        let h = self.group.reduce(h);
        let idx = h - self.offset;
        if idx < 0 {
            return 0.0;
        }
        self.probs.get(idx as usize).copied().unwrap_or(0.0)
    }

    /// Nonzero entries as `(element, probability)`.
    pub fn entries(&self) -> impl Iterator<Item = (LampElement, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn convolve(&self, measure: &SwitchMeasure) -> Self {
        match self.group {
            LampGroup::Cyclic(m) => {
                let m = m as usize;
                let mut out = vec![0.0; m];
                for (i, &p) in self.probs.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for &(h, q) in &measure.support {
                        out[(i + h as usize) % m] += p * q;
                    }
                }
                LampDistribution {
                    group: self.group,
                    offset: 0,
                    probs: out,
                }
            }
            LampGroup::Integers => {
                let lo = measure.support.first().map_or(0, |e| e.0);
                let hi = measure.support.last().map_or(0, |e| e.0);
                let width = (hi - lo) as usize;
                let mut out = vec![0.0; self.probs.len() + width];
                for (i, &p) in self.probs.iter().enumerate() {
                    for &(h, q) in &measure.support {
                        out[i + (h - lo) as usize] += p * q;
                    }
                }
                let mut offset = self.offset + lo;
                let start = out
                    .iter()
                    .position(|&p| p >= UNDERFLOW_CUTOFF)
                    .unwrap_or(0);
                let end = out
                    .iter()
                    .rposition(|&p| p >= UNDERFLOW_CUTOFF)
                    .map_or(out.len(), |e| e + 1);
                offset += start as i64;
                let probs = out[start..end].to_vec();
                LampDistribution {
                    group: self.group,
                    offset,
                    probs,
                }
            }
        }
    }
}
