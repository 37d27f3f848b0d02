//! Disorder instances for every Hamiltonian variant.
//!
//! An instance is a weighted edge list on `n_sites` vertices. Sites are
//! 0-based in memory (`i <= j < n_sites`) and 1-based in the text format.
//! Weights are stored raw; the energy scale `norm_size^(-1/alpha)` is only
//! applied when energies are evaluated, so one edge list can serve models
//! that differ in normalization.

mod io;
mod pairs;

use std::collections::HashMap;

use rand::seq::index;
use rand::Rng;

use crate::dist::{ConditionedSpec, TailLaw};
use crate::error::{invalid, Result};
use crate::exact::SpinConfig;

pub use io::{parse_instance, write_instance, INSTANCE_MAGIC};
pub use pairs::PairSpace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub w: f64,
}

impl Edge {
    pub fn new(a: u32, b: u32, w: f64) -> Self {
        Self { i: a.min(b), j: a.max(b), w }
    }

    pub fn is_loop(&self) -> bool {
        self.i == self.j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelInstance {
    n_sites: usize,
    edges: Vec<Edge>,
    norm_size: usize,
    alpha: f64,
    beta: f64,
}

impl ModelInstance {
    pub fn new(
        n_sites: usize,
        edges: Vec<Edge>,
        norm_size: usize,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        if n_sites == 0 {
            return invalid("an instance needs at least one site");
        }
        if norm_size == 0 {
            return invalid("norm_size must be >= 1");
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return invalid(format!("beta must be finite and positive, got {beta}"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return invalid(format!("alpha must be finite and positive, got {alpha}"));
        }
        for (k, e) in edges.iter().enumerate() {
            if e.i > e.j || e.j as usize >= n_sites {
                return invalid(format!(
                    "edge {k} = ({}, {}) is not a canonical pair on {n_sites} sites",
                    e.i, e.j
                ));
            }
            if !e.w.is_finite() {
                return invalid(format!("edge {k} has non-finite weight {}", e.w));
            }
        }
        Ok(Self { n_sites, edges, norm_size, alpha, beta })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn norm_size(&self) -> usize {
        self.norm_size
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Energy scale `norm_size^(-1/alpha)`.
    pub fn scale(&self) -> f64 {
        (self.norm_size as f64).powf(-1.0 / self.alpha)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.n_sites, self.edges.clone(), self.norm_size, self.alpha, beta)
    }

    /// `sum_a |w_a| * scale`.
    pub fn scaled_weight_sum(&self) -> f64 {
        self.scale() * crate::stats::compensated_sum(self.edges.iter().map(|e| e.w.abs()))
    }

    /// `H(sigma) = scale * sum_a w_a sigma_i sigma_j`.
    pub fn hamiltonian(&self, sigma: &SpinConfig) -> Result<f64> {
        if sigma.n() != self.n_sites {
            return invalid(format!(
                "configuration has {} spins, instance has {} sites",
                sigma.n(),
                self.n_sites
            ));
        }
        let sum = crate::stats::compensated_sum(
            self.edges.iter().map(|e| e.w * sigma.product(e.i as usize, e.j as usize)),
        );
        Ok(self.scale() * sum)
    }

    /// Removes the edge at position `index`.
    pub fn drop_edge(&self, index: usize) -> Result<Self> {
        if index >= self.edges.len() {
            return invalid(format!(
                "edge index {index} out of range for {} edges",
                self.edges.len()
            ));
        }
        let mut out = self.clone();
        out.edges.remove(index);
        Ok(out)
    }

    /// Appends one edge.
    pub fn with_edge(&self, edge: Edge) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push(Edge::new(edge.i, edge.j, edge.w));
        Self::new(self.n_sites, edges, self.norm_size, self.alpha, self.beta)
    }

    /// Partitions the edges by scaled magnitude `|w| * scale >= threshold`.
    pub fn split_by_threshold(&self, threshold: f64) -> Result<SplitInstance> {
        if threshold.is_nan() || threshold < 0.0 {
            return invalid(format!("split threshold must be >= 0, got {threshold}"));
        }
        let scale = self.scale();
        let (kept, dropped): (Vec<Edge>, Vec<Edge>) =
            self.edges.iter().partition(|e| e.w.abs() * scale >= threshold);
        Ok(SplitInstance {
            kept: Self { edges: kept, ..self.clone_shape() },
            dropped: Self { edges: dropped, ..self.clone_shape() },
            threshold,
        })
    }

    fn clone_shape(&self) -> Self {
        Self { edges: Vec::new(), ..*self }
    }

    /// Number of loop edges plus, for every non-loop pair present more than
    /// once, its multiplicity minus one.
    pub fn duplicate_count(&self) -> usize {
        duplicate_count(self.edges.iter().map(|e| (e.i, e.j)))
    }

    /// True when every edge is a non-loop pair and no pair repeats.
    pub fn is_simple(&self) -> bool {
        self.duplicate_count() == 0
    }

    /// Deletes or adds edges uniformly at random until exactly `target`
    /// distinct non-loop edges remain. Added edges get fresh weights drawn
    /// above `norm_size^(1/alpha - epsilon)`.
    pub fn rewire_to_count<R: Rng + ?Sized>(
        &self,
        target: usize,
        law: &TailLaw,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !self.is_simple() {
            return invalid("rewire_to_count needs distinct non-loop edges");
        }
        let space = PairSpace::without_loops(self.n_sites);
        if target > space.len() {
            return invalid(format!(
                "target {target} exceeds the {} available pairs",
                space.len()
            ));
        }
        let current = self.edges.len();
        let mut out = self.clone();
        if current > target {
            let mut doomed = vec![false; current];
            for k in index::sample(rng, current, current - target) {
                doomed[k] = true;
            }
            out.edges = self
                .edges
                .iter()
                .zip(doomed)
                .filter(|(_, d)| !d)
                .map(|(e, _)| *e)
                .collect();
        } else if current < target {
            let spec = ConditionedSpec::Rescaled {
                norm_size: self.norm_size as f64,
                epsilon,
            };
            spec.validate(law.alpha())?;
            let mut present = vec![false; space.len()];
            for e in &self.edges {
                present[space.index(e.i as usize, e.j as usize)] = true;
            }
            let absent: Vec<usize> = (0..space.len()).filter(|&k| !present[k]).collect();
            for k in index::sample(rng, absent.len(), target - current) {
                let (i, j) = space.pair(absent[k]);
                let w = law.sample_conditioned_unchecked(&spec, rng);
                out.edges.push(Edge::new(i as u32, j as u32, w));
            }
        }
        Ok(out)
    }
}

/// Kept and dropped parts of an instance cut at a scaled-magnitude threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitInstance {
    pub kept: ModelInstance,
    pub dropped: ModelInstance,
    pub threshold: f64,
}

impl SplitInstance {
    /// Kept edges followed by dropped edges.
    pub fn recombine(&self) -> ModelInstance {
        let mut out = self.kept.clone();
        out.edges.extend_from_slice(&self.dropped.edges);
        out
    }
}

/// Bookkeeping for one realization of the interpolating multigraph.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationState {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    /// The first `r` edges, uniform over all pairs `i <= j`.
    pub shared_edges: Vec<Edge>,
    /// The remaining edges, each confined to one block.
    pub block_edges: Vec<Edge>,
}

impl InterpolationState {
    pub fn total_edges(&self) -> usize {
        self.shared_edges.len() + self.block_edges.len()
    }
}

/// Edge count of the fixed-edge model, `floor(c0/2 * n^(1 + alpha epsilon))`.
pub fn s_n(n: usize, alpha: f64, epsilon: f64, c0: f64) -> usize {
    (c0 / 2.0 * (n as f64).powf(1.0 + alpha * epsilon)).floor() as usize
}

/// One coupling per pair `i < j`, i.i.d. from `law`, normalized by `n`.
pub fn build_full<R: Rng + ?Sized>(
    n: usize,
    law: &TailLaw,
    beta: f64,
    rng: &mut R,
) -> Result<ModelInstance> {
    if n == 0 {
        return invalid("build_full needs n >= 1");
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push(Edge::new(i as u32, j as u32, law.sample(rng)));
        }
    }
    ModelInstance::new(n, edges, n, law.alpha(), beta)
}

/// Exactly `s` distinct non-loop edges, uniform over all `s`-subsets, with
/// weights drawn above `n^(1/alpha - epsilon)`.
pub fn build_fixed_edge<R: Rng + ?Sized>(
    n: usize,
    s: usize,
    law: &TailLaw,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<ModelInstance> {
    if n == 0 {
        return invalid("build_fixed_edge needs n >= 1");
    }
    let space = PairSpace::without_loops(n);
    if s > space.len() {
        return invalid(format!("{s} edges requested but only {} pairs exist", space.len()));
    }
    let spec = ConditionedSpec::Rescaled { norm_size: n as f64, epsilon };
    spec.validate(law.alpha())?;
    let mut edges = Vec::with_capacity(s);
    for k in index::sample(rng, space.len(), s) {
        let (i, j) = space.pair(k);
        let w = law.sample_conditioned_unchecked(&spec, rng);
        edges.push(Edge::new(i as u32, j as u32, w));
    }
    ModelInstance::new(n, edges, n, law.alpha(), beta)
}

/// `u` edges drawn with replacement from the pairs `i <= j` on `v` sites,
/// weights drawn above `m^(1/alpha - epsilon)`, energy scale `m^(-1/alpha)`.
pub fn build_multiedge<R: Rng + ?Sized>(
    u: usize,
    v: usize,
    m: usize,
    law: &TailLaw,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<ModelInstance> {
    if v == 0 || m == 0 {
        return invalid(format!("build_multiedge needs v >= 1 and m >= 1, got v={v}, m={m}"));
    }
    let spec = ConditionedSpec::Rescaled { norm_size: m as f64, epsilon };
    spec.validate(law.alpha())?;
    let space = PairSpace::with_loops(v);
    let edges = (0..u)
        .map(|_| {
            let (i, j) = space.sample(rng);
            let w = law.sample_conditioned_unchecked(&spec, rng);
            Edge::new(i as u32, j as u32, w)
        })
        .collect();
    ModelInstance::new(v, edges, m, law.alpha(), beta)
}

/// The `r`-th interpolating multigraph between one `n`-site multi-edge model
/// and two independent blocks `[0, n1)` and `[n1, n)`.
///
/// The first `r` of the `S = s_n(n)` edges are uniform over all pairs; each
/// later edge first picks block A with probability `n1/n` (block B
/// otherwise) and then a uniform pair inside that block.
pub fn build_interpolated<R: Rng + ?Sized>(
    n: usize,
    n1: usize,
    r: usize,
    law: &TailLaw,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<(ModelInstance, InterpolationState)> {
    if n < 2 || n1 == 0 || n1 >= n {
        return invalid(format!("block split needs 1 <= n1 <= n - 1, got n={n}, n1={n1}"));
    }
    let total = s_n(n, law.alpha(), epsilon, law.c0());
    if r > total {
        return invalid(format!("interpolation index {r} exceeds S = {total}"));
    }
    let spec = ConditionedSpec::Rescaled { norm_size: n as f64, epsilon };
    spec.validate(law.alpha())?;
    let full = PairSpace::with_loops(n);
    let block_a = PairSpace::with_loops(n1);
    let block_b = PairSpace::with_loops(n - n1);
    let p_a = n1 as f64 / n as f64;

    let mut shared = Vec::with_capacity(r);
    for _ in 0..r {
        let (i, j) = full.sample(rng);
        let w = law.sample_conditioned_unchecked(&spec, rng);
        shared.push(Edge::new(i as u32, j as u32, w));
    }
    let mut block = Vec::with_capacity(total - r);
    for _ in r..total {
        let (i, j) = if rng.gen::<f64>() < p_a {
            block_a.sample(rng)
        } else {
            let (i, j) = block_b.sample(rng);
            (i + n1, j + n1)
        };
        let w = law.sample_conditioned_unchecked(&spec, rng);
        block.push(Edge::new(i as u32, j as u32, w));
    }
    let mut edges = shared.clone();
    edges.extend_from_slice(&block);
    let inst = ModelInstance::new(n, edges, n, law.alpha(), beta)?;
    let state = InterpolationState {
        n1,
        n2: n - n1,
        r,
        shared_edges: shared,
        block_edges: block,
    };
    Ok((inst, state))
}

pub(crate) fn duplicate_count(pairs: impl Iterator<Item = (u32, u32)>) -> usize {
    let mut loops = 0;
    let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
    for (i, j) in pairs {
        if i == j {
            loops += 1;
        } else {
            *counts.entry((i, j)).or_default() += 1;
        }
    }
    loops + counts.values().map(|&c| c - 1).sum::<usize>()
}
