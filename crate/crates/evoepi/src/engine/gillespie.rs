//! Seed-driven simulation: aggregate-rate sampling over event categories
//! (infection, rewire-or-drop, infected-infected crossing and rewiring,
//! recovery), with uniform member selection from indexed sets. Fixed
//! infection durations are held in a monotone time queue merged with the
//! exponential race.

use super::core::{Change, Class, SimCore, TransmitOutcome};
use super::{
    DurationMode, EpidemicConfig, Outcome, Randomness, RecordPolicy, Recorder, SeedChoice,
    Trajectory,
};
use crate::graph::HalfEdgeGraph;
use crate::indexed::IndexedSet;
use crate::rng::{exp_rate, rng_from, uniform_index};
use crate::Result;
use rand::Rng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn run(graph: &HalfEdgeGraph, cfg: &EpidemicConfig, seed: u64) -> Result<Trajectory> {
    let started = std::time::Instant::now();
    let n = graph.n();
    let mut rng = rng_from(seed, 0);
    let mut core = SimCore::new(
        graph.clone(),
        cfg.variant.unstable_ii(),
        cfg.variant.ab_gated(),
    );
    let rewire_prob = cfg.variant.rewire_prob(cfg.rewire_prob);
    let is_sir = !cfg.variant.is_si();
    let budget = cfg.budget_for(n, graph.half_edge_count());
    let k_max = cfg.record.k_max();

    let seed_vertex = match cfg.seed_vertex {
        SeedChoice::UniformRandom => uniform_index(rng.gen::<u64>(), n) as u32,
        SeedChoice::Index(v) => {
            if v as usize >= n {
                return Err(crate::Error::InvalidConfig(format!(
                    "seed vertex {v} out of range"
                )));
            }
            v
        }
    };

    let edge_univ = graph.edge_count();
    let mut si = IndexedSet::new(edge_univ);
    let mut ii = IndexedSet::new(edge_univ);
    let mut infected = IndexedSet::new(n);
    let mut fixed_queue: BinaryHeap<Reverse<(OrdF64, u32)>> = BinaryHeap::new();
    let mut changes: Vec<Change> = Vec::new();
    let mut recorder = Recorder::new(cfg.record);

    let markov_recovery = is_sir && cfg.duration == DurationMode::Exponential;
    let rate_of = |si: &IndexedSet, ii: &IndexedSet, infected: &IndexedSet| {
        cfg.lambda * si.len() as f64
            + cfg.rho * si.len() as f64
            + 2.0 * cfg.lambda * ii.len() as f64
            + 2.0 * cfg.rho * ii.len() as f64
            + if markov_recovery {
                cfg.gamma * infected.len() as f64
            } else {
                0.0
            }
    };

    let mut t = 0.0f64;
    core.infect_vertex(seed_vertex, t, &mut changes);
    sync_sets(&core, &mut si, &mut ii, &changes);
    changes.clear();
    if is_sir {
        match cfg.duration {
            DurationMode::Exponential => infected.insert(seed_vertex),
            DurationMode::FixedUnit => fixed_queue.push(Reverse((OrdF64(t + 1.0), seed_vertex))),
        }
    }
    recorder.force(core.sample_now(t, k_max, rate_of(&si, &ii, &infected)));

    let mut events: u64 = 0;
    let mut outcome = Outcome::Completed;

    // SI with a zero infection rate: the infected set can never grow, but
    // rewiring clocks would tick forever. Absorb immediately.
    let si_dead_rates = cfg.variant.is_si() && cfg.lambda == 0.0;

    if !si_dead_rates {
        loop {
            let r_inf = cfg.lambda * si.len() as f64;
            let r_rw = cfg.rho * si.len() as f64;
            let r_cross = 2.0 * cfg.lambda * ii.len() as f64;
            let r_rwii = 2.0 * cfg.rho * ii.len() as f64;
            let r_rec = if markov_recovery {
                cfg.gamma * infected.len() as f64
            } else {
                0.0
            };
            let total = r_inf + r_rw + r_cross + r_rwii + r_rec;

            if total == 0.0 && fixed_queue.is_empty() {
                break;
            }
            if events >= budget {
                outcome = Outcome::BudgetExceeded;
                break;
            }
            events += 1;

            let exp_next = if total > 0.0 {
                t + exp_rate(&mut rng, total)
            } else {
                f64::INFINITY
            };
            if let Some(&Reverse((OrdF64(rt), v))) = fixed_queue.peek() {
                if rt <= exp_next {
                    fixed_queue.pop();
                    t = rt;
                    core.recover_vertex(v, &mut changes);
                    sync_sets(&core, &mut si, &mut ii, &changes);
                    changes.clear();
                    recorder.maybe(|| core.sample_now(t, k_max, rate_of(&si, &ii, &infected)));
                    continue;
                }
            }
            t = exp_next;

            let mut pick = rng.gen::<f64>() * total;
            if pick < r_inf {
                let e = si.sample(&mut rng);
                if let TransmitOutcome::Infected(v) = core.transmit_over(e, t, &mut changes) {
                    if is_sir {
                        match cfg.duration {
                            DurationMode::Exponential => infected.insert(v),
                            DurationMode::FixedUnit => {
                                fixed_queue.push(Reverse((OrdF64(t + 1.0), v)))
                            }
                        }
                    }
                }
            } else if {
                pick -= r_inf;
                pick < r_rw
            } {
                let e = si.sample(&mut rng);
                if rng.gen::<f64>() < rewire_prob {
                    let target = uniform_index(rng.gen::<u64>(), n) as u32;
                    core.rewire_si(e, target, t, &mut changes);
                } else {
                    core.drop_si(e, &mut changes);
                }
            } else if {
                pick -= r_rw;
                pick < r_cross
            } {
                let e = ii.sample(&mut rng);
                core.cross_ii(e, &mut changes);
            } else if {
                pick -= r_cross;
                pick < r_rwii
            } {
                let e = ii.sample(&mut rng);
                let move_a = rng.gen::<bool>();
                let target = uniform_index(rng.gen::<u64>(), n) as u32;
                core.rewire_ii(e, move_a, target, t, &mut changes);
            } else {
                let v = infected.sample(&mut rng);
                core.recover_vertex(v, &mut changes);
                infected.remove(v);
            }

            sync_sets(&core, &mut si, &mut ii, &changes);
            changes.clear();
            recorder.maybe(|| core.sample_now(t, k_max, rate_of(&si, &ii, &infected)));
        }
    }

    core.g.validate()?;
    if cfg.record != RecordPolicy::None {
        recorder.force(core.sample_now(t, k_max, 0.0));
    }

    Ok(Trajectory {
        variant: cfg.variant,
        n,
        seed_vertex,
        final_size: core.infected_total,
        infected: core.infected_mask(),
        events: core.counts,
        outcome,
        end_time: t,
        samples: recorder.into_samples(),
        wallclock_ms: started.elapsed().as_millis() as u64,
    })
}

fn sync_sets(core: &SimCore, si: &mut IndexedSet, ii: &mut IndexedSet, changes: &[Change]) {
    for &c in changes {
        let e = match c {
            Change::NowSi(e)
            | Change::NowIi { edge: e, .. }
            | Change::NowIdle(e)
            | Change::NowDead(e) => e,
        };
        match core.class[e as usize] {
            Class::ActiveSi => {
                ii.remove(e);
                si.insert(e);
            }
            Class::ActiveIi => {
                si.remove(e);
                ii.insert(e);
            }
            Class::Idle | Class::Dead => {
                si.remove(e);
                ii.remove(e);
            }
        }
    }
}

/// Convenience wrapper used by tests: run with a plain seed.
pub fn run_seeded(graph: &HalfEdgeGraph, cfg: &EpidemicConfig, seed: u64) -> Result<Trajectory> {
    super::run_static(graph, cfg, Randomness::Seed(seed))
}
