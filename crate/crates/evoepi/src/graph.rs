//! Mutable multigraph with explicit half-edge identity.
//!
//! Half-edge ids are stable for the lifetime of a graph; rewiring moves a
//! half-edge's vertex ownership but never its identity, so per-half-edge
//! bookkeeping (infection/rewiring indices, coupled clocks keyed by edge id)
//! survives arbitrary rewiring. Self-loops and multi-edges are kept.

use crate::dist::DegreeDistribution;
use crate::rng::{rng_from, SimRng};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use std::io::{BufRead, Write};

pub const UNPAIRED: u32 = u32::MAX;

/// Which half-edge of an edge record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeEnd {
    A,
    B,
}

#[derive(Clone, Debug)]
pub struct HalfEdgeGraph {
    n: usize,
    /// half-edge id -> owning vertex (changes under rewiring)
    owner: Vec<u32>,
    /// half-edge id -> paired half-edge id, UNPAIRED if free
    partner: Vec<u32>,
    /// half-edge id -> edge record id, UNPAIRED if free
    edge_of: Vec<u32>,
    /// edge record id -> (half-edge a, half-edge b)
    edges: Vec<(u32, u32)>,
    /// edge record id -> activation counter, advanced by the simulation layer
    activation: Vec<u32>,
    /// vertex -> half-edges currently owned
    by_vertex: Vec<Vec<u32>>,
    /// half-edge id -> position inside its owner's list
    pos: Vec<u32>,
}

impl HalfEdgeGraph {
    /// Unpaired half-edge skeleton with the given degree sequence.
    pub fn with_degrees(degrees: &[u32]) -> Self {
        let n = degrees.len();
        let total: usize = degrees.iter().map(|&d| d as usize).sum();
        let mut owner = Vec::with_capacity(total);
        let mut by_vertex = vec![Vec::new(); n];
        let mut pos = Vec::with_capacity(total);
        for (v, &d) in degrees.iter().enumerate() {
            for _ in 0..d {
                let h = owner.len() as u32;
                owner.push(v as u32);
                pos.push(by_vertex[v].len() as u32);
                by_vertex[v].push(h);
            }
        }
        HalfEdgeGraph {
            n,
            partner: vec![UNPAIRED; total],
            edge_of: vec![UNPAIRED; total],
            owner,
            edges: Vec::new(),
            activation: Vec::new(),
            by_vertex,
            pos,
        }
    }

    /// Pair two free half-edges into a new edge record.
    pub fn pair(&mut self, a: u32, b: u32) -> Result<u32> {
        if a == b || self.partner[a as usize] != UNPAIRED || self.partner[b as usize] != UNPAIRED {
            return Err(Error::InvalidArgument("half-edges not free".into()));
        }
        let e = self.edges.len() as u32;
        self.partner[a as usize] = b;
        self.partner[b as usize] = a;
        self.edge_of[a as usize] = e;
        self.edge_of[b as usize] = e;
        self.edges.push((a, b));
        self.activation.push(0);
        Ok(e)
    }

    /// Configuration model: i.i.d. degrees conditioned on an even sum (the
    /// last vertex is resampled until parity works out), then a uniform
    /// perfect matching of the half-edges. Self-loops and multi-edges stay.
    pub fn config_model(n: usize, dist: &DegreeDistribution, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let mut rng = rng_from(seed, 0);
        let mut degrees: Vec<u32> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let mut total: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        let mut attempts = 0;
        while total % 2 == 1 {
            attempts += 1;
            if attempts > 64 {
                return Err(Error::InvalidArgument(
                    "degree sum cannot be made even (all support of one parity with odd n?)"
                        .into(),
                ));
            }
            let last = degrees[n - 1];
            let fresh = dist.sample(&mut rng);
            degrees[n - 1] = fresh;
            total = total - u64::from(last) + u64::from(fresh);
        }
        let mut g = Self::with_degrees(&degrees);
        g.pair_uniform(&mut rng);
        Ok(g)
    }

    /// Erdős–Rényi(n, mu/n) in half-edge form, sampled pair-by-pair with
    /// geometric skips.
    pub fn erdos_renyi(n: usize, mu: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let p = mu / n as f64;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "edge probability mu/n = {p} outside [0,1]"
            )));
        }
        let mut rng = rng_from(seed, 0);
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        if p >= 1.0 {
            for i in 0..n {
                for j in (i + 1)..n {
                    pairs.push((i as u32, j as u32));
                }
            }
        } else if p > 0.0 {
            // skip-sampling over the lexicographic enumeration of pairs
            let lnq = (1.0f64 - p).ln();
            let (mut i, mut j) = (0usize, 0usize);
            loop {
                let u: f64 = rng.gen::<f64>();
                let skip = ((1.0 - u).ln() / lnq).floor() as usize + 1;
                j += skip;
                while j > i {
                    i += 1;
                    j -= i;
                    if i >= n {
                        break;
                    }
                }
                if i >= n {
                    break;
                }
                pairs.push((j as u32, i as u32));
            }
        }
        let mut degrees = vec![0u32; n];
        for &(u, v) in &pairs {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut g = Self::with_degrees(&degrees);
        let mut cursor = vec![0u32; n];
        for &(u, v) in &pairs {
            let ha = g.by_vertex[u as usize][cursor[u as usize] as usize];
            cursor[u as usize] += 1;
            let hb = g.by_vertex[v as usize][cursor[v as usize] as usize];
            cursor[v as usize] += 1;
            g.pair(ha, hb)?;
        }
        Ok(g)
    }

    /// Build from an explicit list of vertex pairs (tests and oracles).
    pub fn from_edges(n: usize, list: &[(u32, u32)]) -> Self {
        let mut degrees = vec![0u32; n];
        for &(u, v) in list {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut g = Self::with_degrees(&degrees);
        let mut cursor = vec![0usize; n];
        for &(u, v) in list {
            let ha = g.by_vertex[u as usize][cursor[u as usize]];
            cursor[u as usize] += 1;
            let hb = g.by_vertex[v as usize][cursor[v as usize]];
            cursor[v as usize] += 1;
            g.pair(ha, hb).unwrap();
        }
        g
    }

    fn pair_uniform(&mut self, rng: &mut SimRng) {
        let mut ids: Vec<u32> = (0..self.owner.len() as u32).collect();
        ids.shuffle(rng);
        for chunk in ids.chunks_exact(2) {
            self.pair(chunk[0], chunk[1]).expect("fresh half-edges");
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_edge_count(&self) -> usize {
        self.owner.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn owner(&self, h: u32) -> u32 {
        self.owner[h as usize]
    }

    #[inline]
    pub fn partner(&self, h: u32) -> u32 {
        self.partner[h as usize]
    }

    #[inline]
    pub fn edge_of(&self, h: u32) -> u32 {
        self.edge_of[h as usize]
    }

    /// The two half-edges of an edge record.
    #[inline]
    pub fn edge_halves(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize]
    }

    /// Current endpoint vertices of an edge record.
    #[inline]
    pub fn edge_endpoints(&self, e: u32) -> (u32, u32) {
        let (a, b) = self.edges[e as usize];
        (self.owner[a as usize], self.owner[b as usize])
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        self.by_vertex[v as usize].len()
    }

    #[inline]
    pub fn half_edges_of(&self, v: u32) -> &[u32] {
        &self.by_vertex[v as usize]
    }

    #[inline]
    pub fn activation(&self, e: u32) -> u32 {
        self.activation[e as usize]
    }

    /// Advance an edge's activation counter, returning the new value. Called
    /// by the simulation layer whenever the edge re-enters an active state.
    #[inline]
    pub fn bump_activation(&mut self, e: u32) -> u32 {
        self.activation[e as usize] += 1;
        self.activation[e as usize]
    }

    /// Move ownership of one half-edge to `target`, keeping its identity.
    pub fn rewire_half(&mut self, h: u32, target: u32) {
        debug_assert!((target as usize) < self.n);
        let old = self.owner[h as usize] as usize;
        let p = self.pos[h as usize] as usize;
        let last = *self.by_vertex[old].last().unwrap();
        self.by_vertex[old][p] = last;
        self.pos[last as usize] = p as u32;
        self.by_vertex[old].pop();
        self.owner[h as usize] = target;
        self.pos[h as usize] = self.by_vertex[target as usize].len() as u32;
        self.by_vertex[target as usize].push(h);
        debug_assert!(self.partner[h as usize] == UNPAIRED || {
            let q = self.partner[h as usize] as usize;
            self.partner[q] == h
        });
    }

    /// Rewire the selected end of an edge to `target`. Total half-edge count
    /// is invariant; rewiring onto the currently attached vertex is a no-op
    /// on topology but still a valid event.
    pub fn rewire(&mut self, e: u32, end: EdgeEnd, target: u32) -> Result<()> {
        if e as usize >= self.edges.len() {
            return Err(Error::StaleEdge(e));
        }
        if target as usize >= self.n {
            return Err(Error::InvalidArgument(format!(
                "rewire target {target} out of range"
            )));
        }
        let (a, b) = self.edges[e as usize];
        let h = match end {
            EdgeEnd::A => a,
            EdgeEnd::B => b,
        };
        self.rewire_half(h, target);
        Ok(())
    }

    /// Full invariant scan: pairing is a fixed-point-free involution,
    /// ownership lists and position maps agree, and the half-edge count
    /// decomposes into paired plus unpaired.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::GraphInvariant(m));
        let mut paired = 0usize;
        for h in 0..self.owner.len() {
            let p = self.partner[h];
            if p != UNPAIRED {
                if p as usize == h {
                    return bad(format!("half-edge {h} paired with itself"));
                }
                if self.partner[p as usize] as usize != h {
                    return bad(format!("pairing not an involution at {h}"));
                }
                paired += 1;
                let e = self.edge_of[h];
                if e == UNPAIRED {
                    return bad(format!("paired half-edge {h} has no edge record"));
                }
                let (a, b) = self.edges[e as usize];
                if a as usize != h && b as usize != h {
                    return bad(format!("edge record {e} does not list half-edge {h}"));
                }
            } else if self.edge_of[h] != UNPAIRED {
                return bad(format!("free half-edge {h} has an edge record"));
            }
            let v = self.owner[h] as usize;
            if v >= self.n {
                return bad(format!("half-edge {h} owned by out-of-range vertex"));
            }
            let p_in_list = self.pos[h] as usize;
            if self.by_vertex[v].get(p_in_list) != Some(&(h as u32)) {
                return bad(format!("position map broken for half-edge {h}"));
            }
        }
        if paired != 2 * self.edges.len() {
            return bad("paired half-edge count does not match edge records".into());
        }
        let owned: usize = self.by_vertex.iter().map(|l| l.len()).sum();
        if owned != self.owner.len() {
            return bad("ownership lists do not cover all half-edges".into());
        }
        Ok(())
    }

    pub fn unpaired_halves(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.owner.len() as u32).filter(|&h| self.partner[h as usize] == UNPAIRED)
    }

    /// Edge-list text format: a `n=<n>` header, one `u v` line per paired
    /// edge, then an `unpaired` section listing the owners of free
    /// half-edges (present so mid-run dynamic states can be serialized).
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n={}", self.n)?;
        for e in 0..self.edges.len() {
            let (u, v) = self.edge_endpoints(e as u32);
            writeln!(out, "{u} {v}")?;
        }
        writeln!(out, "unpaired")?;
        for h in self.unpaired_halves() {
            writeln!(out, "{}", self.owner(h))?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::GraphFormat("empty file".into()))??;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::GraphFormat(format!("bad header {header:?}")))?;
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut unpaired: Vec<u32> = Vec::new();
        let mut in_unpaired = false;
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t == "unpaired" {
                in_unpaired = true;
                continue;
            }
            if in_unpaired {
                let v: u32 = t
                    .parse()
                    .map_err(|_| Error::GraphFormat(format!("bad unpaired line {t:?}")))?;
                if v as usize >= n {
                    return Err(Error::GraphFormat(format!("vertex {v} out of range")));
                }
                unpaired.push(v);
            } else {
                let mut it = t.split_whitespace();
                let (u, v) = (it.next(), it.next());
                match (u.and_then(|s| s.parse().ok()), v.and_then(|s| s.parse().ok())) {
                    (Some(u), Some(v)) if (u as usize) < n && (v as usize) < n => {
                        pairs.push((u, v))
                    }
                    _ => return Err(Error::GraphFormat(format!("bad edge line {t:?}"))),
                }
            }
        }
        let mut degrees = vec![0u32; n];
        for &(u, v) in &pairs {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        for &v in &unpaired {
            degrees[v as usize] += 1;
        }
        let mut g = Self::with_degrees(&degrees);
        // paired half-edges come first in each vertex list because we count
        // them first; walk a cursor per vertex exactly as in from_edges
        let mut cursor = vec![0usize; n];
        for &(u, v) in &pairs {
            let ha = g.by_vertex[u as usize][cursor[u as usize]];
            cursor[u as usize] += 1;
            let hb = g.by_vertex[v as usize][cursor[v as usize]];
            cursor[v as usize] += 1;
            g.pair(ha, hb)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DegreeDistribution;

    #[test]
    fn two_vertices_degree_one_single_edge() {
        let d = DegreeDistribution::regular(1).unwrap();
        for seed in 0..20 {
            let g = HalfEdgeGraph::config_model(2, &d, seed).unwrap();
            assert_eq!(g.edge_count(), 1);
            let (u, v) = g.edge_endpoints(0);
            assert!((u, v) == (0, 1) || (u, v) == (1, 0));
        }
    }

    #[test]
    fn config_model_rejects_unfixable_parity() {
        let d = DegreeDistribution::regular(3).unwrap();
        // odd n with an all-odd degree law can never have an even sum
        assert!(HalfEdgeGraph::config_model(5, &d, 1).is_err());
        assert!(HalfEdgeGraph::config_model(4, &d, 1).is_ok());
    }

    #[test]
    fn config_model_degree_histogram_close_to_pmf() {
        let d = DegreeDistribution::poisson(5.0).unwrap();
        let n = 100_000;
        for seed in 0..5 {
            let g = HalfEdgeGraph::config_model(n, &d, seed).unwrap();
            let mut counts = vec![0f64; d.pmf().len() + 1];
            for v in 0..n {
                let deg = g.degree(v as u32).min(d.pmf().len());
                counts[deg] += 1.0;
            }
            let tv: f64 = d
                .pmf()
                .iter()
                .enumerate()
                .map(|(k, &p)| (counts[k] / n as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            assert!(tv < 0.01, "seed {seed}: TV distance {tv}");
        }
    }

    /// Exhaustively enumerate the perfect matchings on the half-edges of a
    /// tiny degree sequence and count those whose multigraph is simple.
    fn enumerate_simple_fraction(degrees: &[u32]) -> (u64, u64) {
        let owners: Vec<u32> = degrees
            .iter()
            .enumerate()
            .flat_map(|(v, &d)| std::iter::repeat(v as u32).take(d as usize))
            .collect();
        let m = owners.len();
        assert!(m % 2 == 0 && m <= 16);
        fn rec(used: &mut Vec<bool>, owners: &[u32], pairs: &mut Vec<(u32, u32)>, acc: &mut (u64, u64)) {
            let first = match used.iter().position(|&u| !u) {
                None => {
                    acc.1 += 1;
                    // simple iff no self-loop and no repeated vertex pair
                    let mut seen = std::collections::HashSet::new();
                    let simple = pairs.iter().all(|&(a, b)| {
                        a != b && seen.insert((a.min(b), a.max(b)))
                    });
                    if simple {
                        acc.0 += 1;
                    }
                    return;
                }
                Some(i) => i,
            };
            used[first] = true;
            for j in (first + 1)..owners.len() {
                if used[j] {
                    continue;
                }
                used[j] = true;
                pairs.push((owners[first], owners[j]));
                rec(used, owners, pairs, acc);
                pairs.pop();
                used[j] = false;
            }
            used[first] = false;
        }
        let mut acc = (0, 0);
        rec(&mut vec![false; m], &owners, &mut Vec::new(), &mut acc);
        acc
    }

    #[test]
    fn tiny_config_model_matches_matching_enumeration() {
        // 4 vertices of degree 3: uniform matchings on 12 half-edges
        let (simple, total) = enumerate_simple_fraction(&[3, 3, 3, 3]);
        assert_eq!(total, 10395); // 11!!
        let p = simple as f64 / total as f64;
        let d = DegreeDistribution::regular(3).unwrap();
        let trials = 100_000;
        let mut hits = 0u32;
        for seed in 0..trials {
            let g = HalfEdgeGraph::config_model(4, &d, seed as u64).unwrap();
            let mut seen = std::collections::HashSet::new();
            let simple = (0..g.edge_count() as u32).all(|e| {
                let (a, b) = g.edge_endpoints(e);
                a != b && seen.insert((a.min(b), a.max(b)))
            });
            if simple {
                hits += 1;
            }
        }
        let phat = hits as f64 / trials as f64;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (phat - p).abs() < 3.0 * se,
            "phat={phat} p={p} se={se}"
        );
    }

    #[test]
    fn er_edge_cases_and_concentration() {
        let g = HalfEdgeGraph::erdos_renyi(50, 0.0, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = HalfEdgeGraph::erdos_renyi(2, 2.0, 3).unwrap(); // p = 1
        assert_eq!(g.edge_count(), 1);
        assert!(HalfEdgeGraph::erdos_renyi(4, 8.0, 3).is_err()); // p > 1
        let n = 100_000;
        for seed in 0..5 {
            let g = HalfEdgeGraph::erdos_renyi(n, 5.0, seed).unwrap();
            let mean = g.half_edge_count() as f64 / n as f64;
            assert!((mean - 5.0).abs() < 0.05, "seed {seed}: mean degree {mean}");
        }
    }

    #[test]
    fn rewire_round_trip_restores_ownership() {
        let mut g = HalfEdgeGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let (ha, _) = g.edge_halves(1);
        let home = g.owner(ha);
        g.rewire(1, EdgeEnd::A, 3).unwrap();
        g.bump_activation(1);
        assert_eq!(g.owner(ha), 3);
        g.rewire(1, EdgeEnd::A, home).unwrap();
        g.bump_activation(1);
        assert_eq!(g.owner(ha), home);
        assert_eq!(g.activation(1), 2);
        g.validate().unwrap();
    }

    #[test]
    fn rewire_to_current_vertex_is_topological_noop() {
        let mut g = HalfEdgeGraph::from_edges(3, &[(0, 1)]);
        let before = g.edge_endpoints(0);
        let (ha, _) = g.edge_halves(0);
        let cur = g.owner(ha);
        g.rewire(0, EdgeEnd::A, cur).unwrap();
        assert_eq!(g.edge_endpoints(0), before);
        g.validate().unwrap();
    }

    #[test]
    fn rewire_conserves_half_edges() {
        let d = DegreeDistribution::poisson(3.0).unwrap();
        let mut g = HalfEdgeGraph::config_model(200, &d, 9).unwrap();
        let total = g.half_edge_count();
        let mut rng = crate::rng::rng_from(4, 0);
        for i in 0..500 {
            let e = (i * 7) as u32 % g.edge_count() as u32;
            let end = if i % 2 == 0 { EdgeEnd::A } else { EdgeEnd::B };
            let target = rng.gen_range(0..200u32);
            g.rewire(e, end, target).unwrap();
        }
        assert_eq!(g.half_edge_count(), total);
        let sum: usize = (0..200).map(|v| g.degree(v)).sum();
        assert_eq!(sum, total);
        g.validate().unwrap();
    }

    #[test]
    fn stale_edge_handle_is_an_error() {
        let mut g = HalfEdgeGraph::from_edges(2, &[(0, 1)]);
        assert!(matches!(
            g.rewire(5, EdgeEnd::A, 0),
            Err(Error::StaleEdge(5))
        ));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let d = DegreeDistribution::poisson(4.0).unwrap();
        let a = HalfEdgeGraph::config_model(500, &d, 42).unwrap();
        let b = HalfEdgeGraph::config_model(500, &d, 42).unwrap();
        assert_eq!(a.edges, b.edges);
        assert_eq!(a.owner, b.owner);
    }

    #[test]
    fn edge_list_round_trip() {
        let mut g = HalfEdgeGraph::with_degrees(&[2, 3, 1, 2]);
        g.pair(0, 2).unwrap();
        g.pair(3, 5).unwrap();
        g.pair(1, 6).unwrap();
        // two half-edges stay free
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = HalfEdgeGraph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(h.n(), 4);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(h.half_edge_count(), g.half_edge_count());
        let mut want: Vec<(u32, u32)> = (0..3)
            .map(|e| {
                let (u, v) = g.edge_endpoints(e);
                (u.min(v), u.max(v))
            })
            .collect();
        let mut got: Vec<(u32, u32)> = (0..3)
            .map(|e| {
                let (u, v) = h.edge_endpoints(e);
                (u.min(v), u.max(v))
            })
            .collect();
        want.sort_unstable();
        got.sort_unstable();
        assert_eq!(want, got);
        let mut free_want: Vec<u32> = g.unpaired_halves().map(|x| g.owner(x)).collect();
        let mut free_got: Vec<u32> = h.unpaired_halves().map(|x| h.owner(x)).collect();
        free_want.sort_unstable();
        free_got.sort_unstable();
        assert_eq!(free_want, free_got);
        h.validate().unwrap();
    }
}
