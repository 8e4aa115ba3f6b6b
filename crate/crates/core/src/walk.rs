//! Base walks: the biased walk on `Z` and the λ-homesick walk on rooted graphs.

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::RootedGraph;

/// Drift parameter `p in (1/2, 1)` of the biased walk on `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasParams {
    p: f64,
}

impl BiasParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.5 && p < 1.0) {
            return Err(Error::param(format!("drift p = {p} must lie in (1/2, 1)")));
        }
        Ok(BiasParams { p })
    }

    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda = {lambda} must be > 1")));
        }
        Self::new(lambda / (lambda + 1.0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `λ = p / (1 - p)`.
    pub fn lambda(&self) -> f64 {
        self.p / (1.0 - self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomesickParams {
    lambda: f64,
}

impl HomesickParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::param(format!("lambda = {lambda} must be >= 1")));
        }
        Ok(HomesickParams { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// One-step law of the biased walk from `x`: `[(x - 1, P), (x + 1, P)]`.
pub fn biased_step_distribution(x: i64, params: BiasParams) -> [(i64, f64); 2] {
    let p = params.p;
    let down = match x.signum() {
        1 => p,
        -1 => 1.0 - p,
        _ => 0.5,
    };
    [(x - 1, down), (x + 1, 1.0 - down)]
}

/// One-step law of the λ-homesick walk from `v`: each of the `j` closer
/// neighbors gets `λ/(λj + k)`, each of the `k` others `1/(λj + k)`.
pub fn homesick_transition(
    graph: &RootedGraph,
    v: usize,
    params: HomesickParams,
) -> Result<Vec<(usize, f64)>> {
    graph.check_interior(v)?;
    let j = graph.closer_count(v) as f64;
    let nbrs = graph.neighbors(v);
    let k = nbrs.len() as f64 - j;
    let lambda = params.lambda;
    let closer_each = lambda / (lambda * j + k);
    // 1/(λj + k), written as the complement so that on Z it is bit-identical to 1 - p
    let other_each = (1.0 - closer_each * j) / k;
    Ok(nbrs
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, if (i as f64) < j { closer_each } else { other_each }))
        .collect())
}

/// A recurrent-by-assumption base walk with a distinguished root.
pub trait BaseWalk: Sync {
    type Vertex: Copy + Eq + Hash + Debug + Send + Sync;

    fn root(&self) -> Self::Vertex;

    fn step<R: Rng + ?Sized>(&self, v: Self::Vertex, rng: &mut R) -> Result<Self::Vertex>;

    fn distance(&self, v: Self::Vertex) -> u32;

    /// Signed integer coordinate, for walks that project onto `Z`.
    fn projection(&self, v: Self::Vertex) -> Option<i64>;

    /// Drift parameter λ.
    fn lambda(&self) -> f64;
}

/// The biased walk on `Z` with constant drift toward 0. Untruncated.
#[derive(Debug, Clone, Copy)]
pub struct BiasedWalk {
    params: BiasParams,
}

impl BiasedWalk {
    pub fn new(params: BiasParams) -> Self {
        BiasedWalk { params }
    }

    pub fn params(&self) -> BiasParams {
        self.params
    }
}

impl BaseWalk for BiasedWalk {
    type Vertex = i64;

    fn root(&self) -> i64 {
        0
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, x: i64, rng: &mut R) -> Result<i64> {
        if x == 0 {
            return Ok(if rng.gen::<bool>() { 1 } else { -1 });
        }
        let toward = rng.gen::<f64>() < self.params.p;
        Ok(if toward { x - x.signum() } else { x + x.signum() })
    }

    fn distance(&self, x: i64) -> u32 {
        x.unsigned_abs() as u32
    }

    fn projection(&self, x: i64) -> Option<i64> {
        Some(x)
    }

    fn lambda(&self) -> f64 {
        self.params.lambda()
    }
}

/// The λ-homesick walk on a (possibly truncated) rooted graph.
#[derive(Debug, Clone)]
pub struct HomesickWalk<'g> {
    graph: &'g RootedGraph,
    params: HomesickParams,
    /// Per-vertex probability of moving to a closer neighbor.
    closer_prob: Vec<f64>,
}

impl<'g> HomesickWalk<'g> {
    pub fn new(graph: &'g RootedGraph, params: HomesickParams) -> Self {
        let closer_prob = (0..graph.num_vertices())
            .map(|v| {
                let j = graph.closer_count(v) as f64;
                let k = graph.degree(v) as f64 - j;
                params.lambda * j / (params.lambda * j + k)
            })
            .collect();
        HomesickWalk {
            graph,
            params,
            closer_prob,
        }
    }

    pub fn graph(&self) -> &'g RootedGraph {
        self.graph
    }

    pub fn params(&self) -> HomesickParams {
        self.params
    }
}

impl BaseWalk for HomesickWalk<'_> {
    type Vertex = usize;

    fn root(&self) -> usize {
        self.graph.root()
    }

    #[inline]
    fn step<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> Result<usize> {
        self.graph.check_interior(v)?;
        let nbrs = self.graph.neighbors(v);
        let j = self.graph.closer_count(v);
        let pick = if rng.gen::<f64>() < self.closer_prob[v] {
            rng.gen_range(0..j)
        } else {
            j + rng.gen_range(0..nbrs.len() - j)
        };
        Ok(nbrs[pick])
    }

    fn distance(&self, v: usize) -> u32 {
        self.graph.distance(v)
    }

    fn projection(&self, v: usize) -> Option<i64> {
        self.graph.projection(v)
    }

    fn lambda(&self) -> f64 {
        self.params.lambda
    }
}

/// Radius that makes boundary hits negligible for `total_steps` steps of a
/// recurrent walk with drift λ: `40 log(total_steps) / log λ`, at least 2.
pub fn safe_truncation_radius(lambda: f64, total_steps: u64) -> u32 {
    let steps = (total_steps.max(2)) as f64;
    let r = (40.0 * steps.ln() / lambda.ln()).ceil();
    r.clamp(2.0, 1e6) as u32
}
