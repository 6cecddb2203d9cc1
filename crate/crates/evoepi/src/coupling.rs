//! Deterministic shared randomness for coupled runs.
//!
//! Every model variant consumes the same per-(edge, activation) clock
//! variables: an infection clock T ~ Exp(lambda), a rewiring clock
//! R ~ Exp(rho), a uniform rewiring target U, and a fair coin V' choosing
//! which end of an unstable infected-infected edge detaches. Values are pure
//! functions of (root seed, edge, activation, slot) through a counter-based
//! keyed generator, so reads are identical no matter which variant asks
//! first or in what order.

use crate::engine::{clockwork, Variant};
use crate::graph::HalfEdgeGraph;
use crate::rng::{mix64, mix_into, u64_to_open01, uniform_index};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct EdgeClocks {
    /// Time from activation to infection across the edge, Exp(lambda).
    pub infection: f64,
    /// Time from activation to rewiring of the edge, Exp(rho).
    pub rewire: f64,
    /// Uniform rewiring target over all n vertices.
    pub target: u32,
    /// Fair coin: true means the edge-record A side detaches on an
    /// infected-infected rewiring.
    pub end_coin: bool,
}

#[derive(Clone, Debug)]
pub struct CouplingBundle {
    root_seed: u64,
    n: usize,
    lambda: f64,
    rho: f64,
}

const SLOT_T: u64 = 0;
const SLOT_R: u64 = 1;
const SLOT_U: u64 = 2;
const SLOT_V: u64 = 3;
const SLOT_SEED_VERTEX: u64 = 4;

impl CouplingBundle {
    pub fn new(root_seed: u64, n: usize, lambda: f64, rho: f64) -> Result<Self> {
        if lambda < 0.0 || rho < 0.0 {
            return Err(Error::InvalidArgument("rates must be nonnegative".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(CouplingBundle {
            root_seed,
            n,
            lambda,
            rho,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    #[inline]
    fn raw(&self, edge: u64, activation: u64, slot: u64) -> u64 {
        let h = mix_into(mix64(self.root_seed), edge);
        let h = mix_into(h, activation);
        mix_into(h, slot)
    }

    #[inline]
    fn exp_slot(&self, edge: u32, activation: u32, slot: u64, rate: f64) -> f64 {
        if rate <= 0.0 {
            return f64::INFINITY;
        }
        let u = u64_to_open01(self.raw(edge as u64, activation as u64, slot));
        -u.ln() / rate
    }

    /// The clock tuple for activation `activation >= 1` of `edge`.
    /// Deterministic: the same key always yields the same tuple.
    pub fn clocks(&self, edge: u32, activation: u32) -> EdgeClocks {
        assert!(activation >= 1, "activation indices start at 1");
        EdgeClocks {
            infection: self.exp_slot(edge, activation, SLOT_T, self.lambda),
            rewire: self.exp_slot(edge, activation, SLOT_R, self.rho),
            target: uniform_index(self.raw(edge as u64, activation as u64, SLOT_U), self.n)
                as u32,
            end_coin: self.raw(edge as u64, activation as u64, SLOT_V) >> 63 == 1,
        }
    }

    /// Uniform initial infected vertex derived from the root seed.
    pub fn seed_vertex(&self) -> u32 {
        uniform_index(self.raw(u64::MAX, 0, SLOT_SEED_VERTEX), self.n) as u32
    }

    /// Retained-edge mask of first-activation clocks: edge kept iff
    /// T_{e,1} < R_{e,1}. The deletion-variant infected set equals the
    /// percolation component of the seed under exactly this mask.
    pub fn retained_edges(&self, edge_count: usize) -> Vec<bool> {
        (0..edge_count as u32)
            .map(|e| {
                let c = self.clocks(e, 1);
                c.infection < c.rewire
            })
            .collect()
    }
}

/// Residual clocks of an edge whose second endpoint became infected at
/// relative time `w`: both remaining clocks are halved because each end now
/// acts at the full rate. Conditional on survival past `w` the results are
/// Exp(2 lambda) and Exp(2 rho), and the order of T and R is preserved.
pub fn halved_residual(t: f64, r: f64, w: f64) -> Result<(f64, f64)> {
    if !(t > w && r > w) {
        return Err(Error::InvalidArgument(format!(
            "clock already fired: T={t}, R={r}, w={w}"
        )));
    }
    Ok(((t - w) / 2.0, (r - w) / 2.0))
}

/// Final infected sets of the four coupled SI variants run on the same graph
/// with the same bundle.
#[derive(Clone, Debug)]
pub struct CoupledRuns {
    pub del: Vec<bool>,
    pub ab: Vec<bool>,
    pub evo: Vec<bool>,
    pub avo: Vec<bool>,
    pub seed_vertex: u32,
}

impl CoupledRuns {
    /// The pathwise domination chain del ⊆ ab ⊆ evo ⊆ avo.
    pub fn chain_holds(&self) -> bool {
        is_subset(&self.del, &self.ab) && is_subset(&self.ab, &self.evo) && is_subset(&self.evo, &self.avo)
    }

    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        let count = |v: &Vec<bool>| v.iter().filter(|&&x| x).count();
        (
            count(&self.del),
            count(&self.ab),
            count(&self.evo),
            count(&self.avo),
        )
    }
}

pub fn is_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Run the deletion, AB-gated, evolving, and upper-bounding SI variants on
/// `graph`, all consuming `bundle`, starting from the same seed vertex.
pub fn run_coupled_suite(
    graph: &HalfEdgeGraph,
    bundle: &CouplingBundle,
    seed_vertex: Option<u32>,
) -> Result<CoupledRuns> {
    if bundle.n() != graph.n() {
        return Err(Error::InvalidArgument(
            "bundle vertex count does not match graph".into(),
        ));
    }
    let seed = seed_vertex.unwrap_or_else(|| bundle.seed_vertex());
    let del = clockwork::run_coupled(graph, Variant::DelSi, bundle, seed)?;
    let ab = clockwork::run_coupled(graph, Variant::AbAvoSi, bundle, seed)?;
    let evo = clockwork::run_coupled(graph, Variant::EvoSi, bundle, seed)?;
    let avo = clockwork::run_coupled(graph, Variant::AvoSi, bundle, seed)?;
    Ok(CoupledRuns {
        del: del.infected,
        ab: ab.infected,
        evo: evo.infected,
        avo: avo.infected,
        seed_vertex: seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clocks_are_deterministic_and_order_free() {
        let b = CouplingBundle::new(99, 1000, 1.3, 0.7).unwrap();
        let keys: Vec<(u32, u32)> = (0..200).map(|i| (i % 37, 1 + i / 37)).collect();
        let forward: Vec<_> = keys.iter().map(|&(e, l)| b.clocks(e, l)).collect();
        let mut reversed: Vec<_> = keys.iter().rev().map(|&(e, l)| b.clocks(e, l)).collect();
        reversed.reverse();
        for (a, c) in forward.iter().zip(&reversed) {
            assert_eq!(a.infection.to_bits(), c.infection.to_bits());
            assert_eq!(a.rewire.to_bits(), c.rewire.to_bits());
            assert_eq!(a.target, c.target);
            assert_eq!(a.end_coin, c.end_coin);
        }
    }

    #[test]
    fn clock_marginals() {
        let lambda = 1.7;
        let rho = 0.9;
        let b = CouplingBundle::new(7, 50, lambda, rho).unwrap();
        let n = 1_000_000u32;
        let mut sum_t = 0.0;
        let mut sum_r = 0.0;
        let mut t_before_r = 0u32;
        let mut coins = 0u32;
        let mut cross = 0.0; // for T-R independence
        for i in 0..n {
            let c = b.clocks(i % 4096, 1 + i / 4096);
            sum_t += c.infection;
            sum_r += c.rewire;
            if c.infection < c.rewire {
                t_before_r += 1;
            }
            if c.end_coin {
                coins += 1;
            }
            cross += (c.infection - 1.0 / lambda) * (c.rewire - 1.0 / rho);
        }
        let nf = n as f64;
        // mean of Exp(rate) is 1/rate with sd 1/rate
        let mean_t = sum_t / nf;
        assert!((mean_t - 1.0 / lambda).abs() < 3.0 / (lambda * nf.sqrt()));
        let mean_r = sum_r / nf;
        assert!((mean_r - 1.0 / rho).abs() < 3.0 / (rho * nf.sqrt()));
        // P(T < R) = lambda / (lambda + rho)
        let p = lambda / (lambda + rho);
        let se = (p * (1.0 - p) / nf).sqrt();
        assert!((t_before_r as f64 / nf - p).abs() < 3.0 * se);
        // fair coin
        let se_c = 0.5 / nf.sqrt();
        assert!((coins as f64 / nf - 0.5).abs() < 3.0 * se_c);
        // sample correlation of T and R ~ 0
        let corr = cross / nf * lambda * rho;
        assert!(corr.abs() < 3.0 / nf.sqrt(), "corr={corr}");
    }

    #[test]
    fn rate_zero_clock_never_fires() {
        let b = CouplingBundle::new(1, 10, 1.0, 0.0).unwrap();
        let c = b.clocks(0, 1);
        assert!(c.rewire.is_infinite());
        assert!(c.infection.is_finite());
    }

    #[test]
    fn halved_residual_basics() {
        let (t2, r2) = halved_residual(3.0, 5.0, 0.0).unwrap();
        assert_eq!((t2, r2), (1.5, 2.5));
        assert!(halved_residual(1.0, 5.0, 2.0).is_err());
        // ordering is preserved
        let b = CouplingBundle::new(21, 10, 0.8, 1.1).unwrap();
        for e in 0..2000u32 {
            let c = b.clocks(e, 1);
            let w = 0.3 * c.infection.min(c.rewire);
            let (t2, r2) = halved_residual(c.infection, c.rewire, w).unwrap();
            assert_eq!(c.infection > c.rewire, t2 > r2);
        }
    }

    #[test]
    fn halved_residual_is_exp_twice_rate() {
        // Kolmogorov-Smirnov against Exp(2 lambda) for T' given T > w
        let lambda = 1.3;
        let b = CouplingBundle::new(5, 10, lambda, 1.0).unwrap();
        let w = 0.4;
        let mut vals: Vec<f64> = Vec::new();
        let mut e = 0u32;
        while vals.len() < 100_000 {
            let c = b.clocks(e, 1);
            if c.infection > w {
                vals.push((c.infection - w) / 2.0);
            }
            e += 1;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = vals.len() as f64;
        let mut ks = 0.0f64;
        for (i, &x) in vals.iter().enumerate() {
            let cdf = 1.0 - (-2.0 * lambda * x).exp();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            ks = ks.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn retained_edges_match_clock_comparison() {
        let b = CouplingBundle::new(3, 20, 1.0, 1.0).unwrap();
        let mask = b.retained_edges(100);
        for e in 0..100u32 {
            let c = b.clocks(e, 1);
            assert_eq!(mask[e as usize], c.infection < c.rewire);
        }
    }
}
