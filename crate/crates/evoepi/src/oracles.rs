//! Independent reference computations used to validate the engine and the
//! analytics: percolation component extraction (two implementations),
//! exhaustive small-graph enumeration, exploration-process random walks, and
//! branching-process Monte Carlo.

use crate::dist::DegreeDistribution;
use crate::graph::HalfEdgeGraph;
use crate::rng::{rng_from, uniform_index};
use crate::{Error, Result};
use rand::Rng;
use std::collections::BTreeMap;

/// Which edges survive percolation.
pub enum Retain<'a> {
    /// Explicit per-edge mask (index = edge record id).
    Mask(&'a [bool]),
    /// Retain each edge independently with probability p.
    Probability { p: f64, seed: u64 },
}

fn resolve_mask(graph: &HalfEdgeGraph, retain: &Retain<'_>) -> Vec<bool> {
    match retain {
        Retain::Mask(m) => {
            assert_eq!(m.len(), graph.edge_count());
            m.to_vec()
        }
        Retain::Probability { p, seed } => {
            let mut rng = rng_from(*seed, 0);
            (0..graph.edge_count())
                .map(|_| rng.gen::<f64>() < *p)
                .collect()
        }
    }
}

/// Connected component of `seed_vertex` in the retained graph, by the
/// active/unexplored/removed exploration scheme. Returns a membership mask.
pub fn percolate_component(
    graph: &HalfEdgeGraph,
    retain: &Retain<'_>,
    seed_vertex: u32,
) -> Vec<bool> {
    let mask = resolve_mask(graph, retain);
    let mut member = vec![false; graph.n()];
    let mut active = vec![seed_vertex];
    member[seed_vertex as usize] = true;
    while let Some(v) = active.pop() {
        for &h in graph.half_edges_of(v) {
            let e = graph.edge_of(h);
            if e == crate::graph::UNPAIRED || !mask[e as usize] {
                continue;
            }
            let u = graph.owner(graph.partner(h));
            if !member[u as usize] {
                member[u as usize] = true;
                active.push(u);
            }
        }
    }
    member
}

/// Same component via union-find; kept as an independent second
/// implementation for cross-checks.
pub fn percolate_component_union_find(
    graph: &HalfEdgeGraph,
    retain: &Retain<'_>,
    seed_vertex: u32,
) -> Vec<bool> {
    let mask = resolve_mask(graph, retain);
    let mut dsu = DisjointSet::new(graph.n());
    for e in 0..graph.edge_count() as u32 {
        if mask[e as usize] {
            let (u, v) = graph.edge_endpoints(e);
            dsu.unite(u as usize, v as usize);
        }
    }
    let root = dsu.find(seed_vertex as usize);
    (0..graph.n()).map(|v| dsu.find(v) == root).collect()
}

pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(size: usize) -> Self {
        DisjointSet {
            parent: (0..size).collect(),
            rank: vec![0; size],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn unite(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return;
        }
        if self.rank[rx] < self.rank[ry] {
            self.parent[rx] = ry;
        } else if self.rank[rx] > self.rank[ry] {
            self.parent[ry] = rx;
        } else {
            self.parent[ry] = rx;
            self.rank[rx] += 1;
        }
    }
}

/// Exact distribution of the size of the seed's component when every edge is
/// kept independently with probability p, by enumerating all 2^|E| subsets.
/// Limited to 24 edges.
pub fn exact_delsi_distribution(
    graph: &HalfEdgeGraph,
    p: f64,
    seed_vertex: u32,
) -> Result<BTreeMap<usize, f64>> {
    let m = graph.edge_count();
    if m > 24 {
        return Err(Error::InvalidArgument(format!(
            "{m} edges exceeds the enumeration limit of 24"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument("p must be in [0,1]".into()));
    }
    let endpoints: Vec<(u32, u32)> = (0..m as u32).map(|e| graph.edge_endpoints(e)).collect();
    // weight by retained-edge count
    let mut weight = vec![1.0f64; m + 1];
    for c in 0..=m {
        weight[c] = p.powi(c as i32) * (1.0 - p).powi((m - c) as i32);
    }
    let mut dist: BTreeMap<usize, f64> = BTreeMap::new();
    let n = graph.n();
    for mask in 0u32..(1u32 << m) {
        let kept = mask.count_ones() as usize;
        // component of the seed under this subset
        let mut member = vec![false; n];
        member[seed_vertex as usize] = true;
        let mut size = 1usize;
        let mut grew = true;
        while grew {
            grew = false;
            for (i, &(u, v)) in endpoints.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let (mu, mv) = (member[u as usize], member[v as usize]);
                    if mu != mv {
                        member[u as usize] = true;
                        member[v as usize] = true;
                        size += 1;
                        grew = true;
                    }
                }
            }
        }
        *dist.entry(size).or_insert(0.0) += weight[kept];
    }
    Ok(dist)
}

/// Mode of the exploration walk.
#[derive(Clone, Copy, Debug)]
pub enum WalkMode {
    /// Neighborhood exploration of the bare graph: first step D, later
    /// steps (D* - 1) - 1.
    Graph,
    /// Percolated exploration: first step Binomial(D, tau), later steps
    /// Binomial(D* - 1, tau) - 1.
    Percolated { tau: f64 },
}

/// One exploration-walk path: starts at the first-generation value, adds
/// (offspring - 1) per step, stops on hitting zero or after `steps` steps.
/// The returned vector includes the starting value.
pub fn exploration_walk(
    dist: &DegreeDistribution,
    mode: WalkMode,
    steps: usize,
    seed: u64,
) -> Vec<i64> {
    assert!(steps >= 1);
    let mut rng = rng_from(seed, 0);
    let sized = SizeBiasedSampler::new(dist);
    let first = match mode {
        WalkMode::Graph => dist.sample(&mut rng) as i64,
        WalkMode::Percolated { tau } => thin(dist.sample(&mut rng), tau, &mut rng) as i64,
    };
    let mut path = vec![first];
    let mut cur = first;
    for _ in 0..steps {
        if cur <= 0 {
            break;
        }
        let offspring = match mode {
            WalkMode::Graph => sized.sample_minus_one(&mut rng) as i64,
            WalkMode::Percolated { tau } => {
                thin(sized.sample_minus_one(&mut rng), tau, &mut rng) as i64
            }
        };
        cur += offspring - 1;
        path.push(cur);
    }
    path
}

fn thin<R: Rng>(count: u32, tau: f64, rng: &mut R) -> u32 {
    let mut kept = 0;
    for _ in 0..count {
        if rng.gen::<f64>() < tau {
            kept += 1;
        }
    }
    kept
}

/// Samples D* - 1 where D* is the size-biased degree.
pub struct SizeBiasedSampler {
    cdf: Vec<f64>,
}

impl SizeBiasedSampler {
    pub fn new(dist: &DegreeDistribution) -> Self {
        let pmf = dist.size_biased_pmf();
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        SizeBiasedSampler { cdf }
    }

    pub fn sample_minus_one<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        let j = match self.cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(i) | Err(i) => i.min(self.cdf.len() - 1),
        };
        (j as u32).saturating_sub(1)
    }
}

/// Monte Carlo survival estimate of the two-phase branching process:
/// generation 1 offspring Binomial(D, tau), later generations
/// Binomial(D* - 1, tau), tau = lambda / (lambda + rho). Survival is
/// declared on reaching `max_generations` alive or a population above 10^4.
pub fn bp_survival_mc(
    dist: &DegreeDistribution,
    lambda: f64,
    rho: f64,
    trials: usize,
    max_generations: usize,
    seed: u64,
) -> (f64, f64) {
    assert!(trials >= 1);
    let tau = if lambda <= 0.0 {
        0.0
    } else {
        lambda / (lambda + rho)
    };
    const POP_CAP: u64 = 10_000;
    let sized = SizeBiasedSampler::new(dist);
    let mut rng = rng_from(seed, 0);
    let mut survived = 0u64;
    for _ in 0..trials {
        let mut pop: u64 = thin(dist.sample(&mut rng), tau, &mut rng) as u64;
        let mut gen = 1usize;
        while pop > 0 && gen < max_generations && pop <= POP_CAP {
            let mut next = 0u64;
            for _ in 0..pop {
                next += thin(sized.sample_minus_one(&mut rng), tau, &mut rng) as u64;
            }
            pop = next;
            gen += 1;
        }
        if pop > 0 {
            survived += 1;
        }
    }
    let p = survived as f64 / trials as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (p, se)
}

/// Uniform random graph with the given number of vertices and edges
/// (small test instances for oracle cross-checks).
pub fn random_multigraph(n: usize, edges: usize, seed: u64) -> HalfEdgeGraph {
    let mut rng = rng_from(seed, 0);
    let list: Vec<(u32, u32)> = (0..edges)
        .map(|_| {
            (
                uniform_index(rng.gen::<u64>(), n) as u32,
                uniform_index(rng.gen::<u64>(), n) as u32,
            )
        })
        .collect();
    HalfEdgeGraph::from_edges(n, &list)
}
