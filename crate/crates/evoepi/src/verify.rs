//! Property suites cross-validating the engine, the coupling layer, the
//! oracles, and the analytics against each other. Surfaced through the CLI
//! `verify` subcommand and reused by the acceptance tests.

use crate::coupling::{run_coupled_suite, CouplingBundle};
use crate::dist::DegreeDistribution;
use crate::engine::{
    run_dynamic, DegreeSource, EpidemicConfig, Randomness, RecordPolicy, SeedChoice, Variant,
};
use crate::graph::HalfEdgeGraph;
use crate::oracles;
use crate::rng::derive_seed;
use crate::Result;

#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            checks: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            label: label.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Pathwise domination chain and the deletion/percolation equivalence on
/// coupled runs.
pub fn coupling_suite(n: usize, runs: usize, root_seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("coupling");
    let dist = DegreeDistribution::poisson(5.0)?;
    let params = [(1.5, 4.0), (0.5, 4.0), (1.0, 1.0), (3.0, 2.0)];
    let mut chain_ok = 0usize;
    let mut perc_ok = 0usize;
    for i in 0..runs {
        let (lambda, rho) = params[i % params.len()];
        let graph = HalfEdgeGraph::config_model(n, &dist, derive_seed(root_seed, 3 * i as u64))?;
        let bundle = CouplingBundle::new(derive_seed(root_seed, 3 * i as u64 + 1), n, lambda, rho)?;
        let coupled = run_coupled_suite(&graph, &bundle, None)?;
        if coupled.chain_holds() {
            chain_ok += 1;
        }
        let mask = bundle.retained_edges(graph.edge_count());
        let component = oracles::percolate_component(
            &graph,
            &oracles::Retain::Mask(&mask),
            coupled.seed_vertex,
        );
        if component == coupled.del {
            perc_ok += 1;
        }
    }
    report.push(
        "pathwise inclusion chain del ⊆ ab ⊆ evo ⊆ avo",
        chain_ok == runs,
        format!("{chain_ok}/{runs} runs"),
    );
    report.push(
        "deletion run equals percolation component exactly",
        perc_ok == runs,
        format!("{perc_ok}/{runs} runs"),
    );
    Ok(report)
}

/// Exhaustive enumeration vs Monte Carlo deletion runs on small graphs, and
/// the two percolation implementations against each other.
pub fn percolation_suite(root_seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("percolation");

    // two independent component implementations on random instances
    let mut agree = true;
    for i in 0..1000u64 {
        let n = 3 + (i % 16) as usize;
        let g = oracles::random_multigraph(n, (i % 24) as usize, derive_seed(root_seed, i));
        let member = oracles::percolate_component(
            &g,
            &oracles::Retain::Probability {
                p: 0.5,
                seed: derive_seed(root_seed, 10_000 + i),
            },
            0,
        );
        let member_uf = oracles::percolate_component_union_find(
            &g,
            &oracles::Retain::Probability {
                p: 0.5,
                seed: derive_seed(root_seed, 10_000 + i),
            },
            0,
        );
        agree &= member == member_uf;
    }
    report.push(
        "exploration and union-find components agree",
        agree,
        "1000 random instances",
    );

    // exact enumeration vs deletion-variant Monte Carlo, triangle graph
    let g = HalfEdgeGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
    let p = 0.5;
    let exact = oracles::exact_delsi_distribution(&g, p, 0)?;
    let trials = 100_000usize;
    let mut counts = std::collections::BTreeMap::new();
    // lambda/(lambda+rho) = p
    let cfg = EpidemicConfig {
        seed_vertex: SeedChoice::Index(0),
        ..EpidemicConfig::si(Variant::DelSi, p, 1.0 - p)
    };
    for i in 0..trials {
        let t = crate::engine::run_static(&g, &cfg, Randomness::Seed(derive_seed(root_seed, i as u64)))?;
        *counts.entry(t.final_size as usize).or_insert(0usize) += 1;
    }
    let mut worst_z: f64 = 0.0;
    for (&size, &prob) in &exact {
        let observed = *counts.get(&size).unwrap_or(&0) as f64;
        let expected = prob * trials as f64;
        let sd = (trials as f64 * prob * (1.0 - prob)).sqrt();
        worst_z = worst_z.max((observed - expected).abs() / sd);
    }
    report.push(
        "deletion-variant Monte Carlo matches exact enumeration (triangle)",
        worst_z < 3.0,
        format!("worst |z| = {worst_z:.2} over {} size buckets", exact.len()),
    );
    Ok(report)
}

/// Time-changed dynamic runs against the deterministic limit curves.
pub fn limits_suite(
    n: usize,
    dist_spec: &str,
    runs: usize,
    root_seed: u64,
    tolerance: f64,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("limits");
    let dist = DegreeDistribution::parse(dist_spec)?;
    let alpha = dist.alpha_c() / 2.0;
    let m1 = dist.moment(1);
    let lambda = 1.0;
    let rho = alpha * lambda / m1;
    let cfg = EpidemicConfig {
        record: RecordPolicy::Adaptive { k_max: 0 },
        time_changed: true,
        ..EpidemicConfig::si(Variant::AvoSi, lambda, rho)
    };
    let mut collected = 0usize;
    let mut attempts = 0u64;
    let mut worst_x: f64 = 0.0;
    let mut worst_s: f64 = 0.0;
    let mut worst_xs: f64 = 0.0;
    while collected < runs && attempts < 40 * runs as u64 {
        let t = run_dynamic(
            DegreeSource::Sampled { dist: &dist, n },
            &cfg,
            derive_seed(root_seed, attempts),
        )?;
        attempts += 1;
        if t.end_time < 1.0 {
            continue; // early extinction; limits are conditional on survival
        }
        collected += 1;
        for s in t.samples.iter().filter(|s| s.t <= 1.0) {
            let w = (-s.t).exp();
            let dx = (s.x as f64 / n as f64 - m1 * w * w).abs();
            let curves = dist.limit_curves(alpha, s.t, 0);
            let ds = (s.s as f64 / n as f64 - curves.s).abs();
            let dxs = (s.x_s as f64 / n as f64 - curves.x_s).abs();
            worst_x = worst_x.max(dx);
            worst_s = worst_s.max(ds);
            worst_xs = worst_xs.max(dxs);
        }
    }
    report.push(
        "collected surviving runs",
        collected == runs,
        format!("{collected}/{runs} in {attempts} attempts"),
    );
    report.push(
        "total half-edges track m1 w^2",
        worst_x < tolerance,
        format!("sup deviation {worst_x:.4} (tolerance {tolerance})"),
    );
    report.push(
        "susceptible count tracks F0(w)",
        worst_s < tolerance,
        format!("sup deviation {worst_s:.4} (tolerance {tolerance})"),
    );
    report.push(
        "susceptible half-edges track F1(w)",
        worst_xs < tolerance,
        format!("sup deviation {worst_xs:.4} (tolerance {tolerance})"),
    );
    Ok(report)
}

/// Fixed-point survival probabilities against branching-process Monte Carlo.
pub fn survival_suite(trials: usize, root_seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("survival");
    let cases: [(&str, f64, f64); 10] = [
        ("poisson:5", 1.2, 4.0),
        ("poisson:5", 1.5, 4.0),
        ("poisson:5", 2.0, 4.0),
        ("poisson:2", 1.0, 0.5),
        ("poisson:3", 1.0, 1.9),
        ("geometric:0.5", 1.0, 1.0),
        ("geometric:0.3", 0.8, 2.0),
        ("regular:3", 1.0, 1.0),
        ("regular:4", 0.7, 1.0),
        ("pmf:0.2,0.2,0.2,0.2,0.2", 1.5, 1.0),
    ];
    let mut worst_z: f64 = 0.0;
    let mut all_ok = true;
    for (i, (spec, lambda, rho)) in cases.iter().enumerate() {
        let d = DegreeDistribution::parse(spec)?;
        let q = d.bp_survival(*lambda, *rho)?;
        let (p, se) = oracles::bp_survival_mc(
            &d,
            *lambda,
            *rho,
            trials,
            200,
            derive_seed(root_seed, i as u64),
        );
        let z = (p - q).abs() / se.max(1e-4);
        worst_z = worst_z.max(z);
        all_ok &= z < 3.0;
    }
    report.push(
        "solver vs Monte Carlo on 10 parameter points",
        all_ok,
        format!("worst |z| = {worst_z:.2}"),
    );
    // Poisson cross-check between the two fixed-point routes
    let d = DegreeDistribution::poisson(5.0)?;
    let mut max_gap: f64 = 0.0;
    for lambda in [1.2, 1.5, 2.0, 3.0] {
        let tau = lambda / (lambda + 4.0);
        let gap =
            (d.bp_survival(lambda, 4.0)? - (1.0 - crate::dist::er_fixed_point(5.0, tau))).abs();
        max_gap = max_gap.max(gap);
    }
    report.push(
        "branching-process and exponential fixed points agree (Poisson)",
        max_gap < 1e-9,
        format!("max gap {max_gap:.2e}"),
    );
    Ok(report)
}
