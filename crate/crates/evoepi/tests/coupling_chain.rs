//! Fast versions of the pathwise coupling checks (the acceptance suite runs
//! the full-size ones).

use evoepi::coupling::{is_subset, run_coupled_suite, CouplingBundle};
use evoepi::dist::DegreeDistribution;
use evoepi::graph::HalfEdgeGraph;
use evoepi::oracles::{percolate_component, Retain};
use evoepi::rng::derive_seed;

#[test]
fn inclusion_chain_holds_on_small_graphs() {
    let params = [(1.5, 4.0), (0.4, 2.0), (1.0, 1.0), (2.5, 0.7), (0.8, 8.0)];
    for (spec, n) in [("poisson:5", 100usize), ("geometric:0.5", 120), ("regular:3", 100)] {
        let dist = DegreeDistribution::parse(spec).unwrap();
        for i in 0..30u64 {
            let (lambda, rho) = params[i as usize % params.len()];
            let g = match HalfEdgeGraph::config_model(n, &dist, derive_seed(1000, i)) {
                Ok(g) => g,
                Err(_) => continue, // odd parity rejection for regular:3
            };
            let bundle =
                CouplingBundle::new(derive_seed(2000, i), n, lambda, rho).unwrap();
            let runs = run_coupled_suite(&g, &bundle, None).unwrap();
            assert!(
                runs.chain_holds(),
                "{spec} run {i} ({lambda},{rho}): sizes {:?}",
                runs.sizes()
            );
        }
    }
}

#[test]
fn deletion_run_is_the_percolation_component() {
    let dist = DegreeDistribution::poisson(5.0).unwrap();
    for i in 0..30u64 {
        let n = 200;
        let g = HalfEdgeGraph::config_model(n, &dist, derive_seed(3000, i)).unwrap();
        let bundle = CouplingBundle::new(derive_seed(4000, i), n, 1.0, 1.5).unwrap();
        let runs = run_coupled_suite(&g, &bundle, None).unwrap();
        let mask = bundle.retained_edges(g.edge_count());
        let comp = percolate_component(&g, &Retain::Mask(&mask), runs.seed_vertex);
        assert_eq!(comp, runs.del, "run {i}");
    }
}

#[test]
fn degenerate_rates_collapse_the_chain() {
    let dist = DegreeDistribution::poisson(3.0).unwrap();
    let n = 150;
    let g = HalfEdgeGraph::config_model(n, &dist, 5).unwrap();

    // no rewiring: all four variants infect exactly the seed's component
    let bundle = CouplingBundle::new(11, n, 1.0, 0.0).unwrap();
    let runs = run_coupled_suite(&g, &bundle, Some(3)).unwrap();
    let comp = percolate_component(&g, &Retain::Probability { p: 1.0, seed: 0 }, 3);
    for (name, set) in [
        ("del", &runs.del),
        ("ab", &runs.ab),
        ("evo", &runs.evo),
        ("avo", &runs.avo),
    ] {
        assert_eq!(set, &comp, "{name}");
    }

    // no infection: everyone stays put except the seed
    let bundle = CouplingBundle::new(12, n, 0.0, 2.0).unwrap();
    let runs = run_coupled_suite(&g, &bundle, Some(3)).unwrap();
    for set in [&runs.del, &runs.ab, &runs.evo, &runs.avo] {
        assert_eq!(set.iter().filter(|&&x| x).count(), 1);
        assert!(set[3]);
    }
}

#[test]
fn subset_helper() {
    assert!(is_subset(&[true, false], &[true, true]));
    assert!(!is_subset(&[true, false], &[false, true]));
}
