//! Replicated outbreak estimation: independent replicas on fresh graphs,
//! classified by the large-outbreak threshold. Replicas run in parallel with
//! seeds derived from (root seed, replica index), so results are identical
//! for any worker count.

use super::{EpidemicConfig, Randomness, Trajectory};
use crate::dist::DegreeDistribution;
use crate::graph::HalfEdgeGraph;
use crate::rng::derive_seed;
use crate::Result;
use rayon::prelude::*;

#[derive(Clone, Copy)]
pub enum GraphSource<'a> {
    ConfigModel {
        dist: &'a DegreeDistribution,
        n: usize,
    },
    ErdosRenyi {
        mu: f64,
        n: usize,
    },
    /// One shared pre-built graph (tests on fixed topologies).
    Shared(&'a HalfEdgeGraph),
}

impl GraphSource<'_> {
    pub fn n(&self) -> usize {
        match self {
            GraphSource::ConfigModel { n, .. } | GraphSource::ErdosRenyi { n, .. } => *n,
            GraphSource::Shared(g) => g.n(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OutbreakEstimate {
    pub trials: usize,
    pub n: usize,
    pub eta: f64,
    /// Fraction of runs with final size above eta * n, with standard error.
    pub p_large: f64,
    pub p_large_se: f64,
    pub n_large: usize,
    /// Mean final-size fraction over large runs (absent when none).
    pub cond_mean: Option<f64>,
    pub cond_se: Option<f64>,
    /// Final sizes by replica index.
    pub sizes: Vec<u64>,
}

pub fn estimate_outbreak(
    source: GraphSource<'_>,
    cfg: &EpidemicConfig,
    trials: usize,
    eta: f64,
    root_seed: u64,
) -> Result<OutbreakEstimate> {
    if trials == 0 {
        return Err(crate::Error::InvalidArgument("trials must be >= 1".into()));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(crate::Error::InvalidArgument(
            "eta must be in (0,1)".into(),
        ));
    }
    cfg.validate()?;
    let runs: Result<Vec<Trajectory>> = (0..trials)
        .into_par_iter()
        .map(|i| run_replica(source, cfg, root_seed, i as u64))
        .collect();
    let sizes: Vec<u64> = runs?.into_iter().map(|t| t.final_size).collect();
    Ok(summarize(source.n(), eta, sizes, trials))
}

fn run_replica(
    source: GraphSource<'_>,
    cfg: &EpidemicConfig,
    root_seed: u64,
    index: u64,
) -> Result<Trajectory> {
    let graph_seed = derive_seed(root_seed, 2 * index);
    let run_seed = derive_seed(root_seed, 2 * index + 1);
    match source {
        GraphSource::ConfigModel { dist, n } => {
            let g = HalfEdgeGraph::config_model(n, dist, graph_seed)?;
            super::run_static(&g, cfg, Randomness::Seed(run_seed))
        }
        GraphSource::ErdosRenyi { mu, n } => {
            let g = HalfEdgeGraph::erdos_renyi(n, mu, graph_seed)?;
            super::run_static(&g, cfg, Randomness::Seed(run_seed))
        }
        GraphSource::Shared(g) => super::run_static(g, cfg, Randomness::Seed(run_seed)),
    }
}

fn summarize(n: usize, eta: f64, sizes: Vec<u64>, trials: usize) -> OutbreakEstimate {
    let cut = eta * n as f64;
    let large: Vec<f64> = sizes
        .iter()
        .filter(|&&s| s as f64 > cut)
        .map(|&s| s as f64 / n as f64)
        .collect();
    let n_large = large.len();
    let p = n_large as f64 / trials as f64;
    let p_se = (p * (1.0 - p) / trials as f64).sqrt();
    let (cond_mean, cond_se) = if n_large == 0 {
        (None, None)
    } else {
        let mean = large.iter().sum::<f64>() / n_large as f64;
        let se = if n_large >= 2 {
            let var =
                large.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n_large - 1) as f64;
            Some((var / n_large as f64).sqrt())
        } else {
            None
        };
        (Some(mean), se)
    };
    OutbreakEstimate {
        trials,
        n,
        eta,
        p_large: p,
        p_large_se: p_se,
        n_large,
        cond_mean,
        cond_se,
        sizes,
    }
}
