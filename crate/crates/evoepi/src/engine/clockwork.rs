//! Clock-replay driver for coupled runs.
//!
//! Each edge activation draws its clock tuple (T, R, U, V') from the bundle
//! at (edge id, activation index); activation indices advance once per
//! activation epoch in every variant, so all four SI variants see identical
//! clock values at identical indices. When the susceptible end of a running
//! S-I activation is infected through another edge at relative time w, the
//! remaining clocks become the halved residuals (T-w)/2, (R-w)/2 — the law
//! of an unstable infected-infected edge whose two ends each act at the
//! original rates — preserving the order of T and R.

use super::core::{Change, Class, SimCore};
use super::{EpidemicConfig, EventCounts, Outcome, Trajectory, Variant};
use crate::coupling::CouplingBundle;
use crate::graph::HalfEdgeGraph;
use crate::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug)]
struct Entry {
    time: f64,
    edge: u32,
    seq: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.edge.cmp(&other.edge))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Outcome of one coupled run.
#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub infected: Vec<bool>,
    pub final_size: u64,
    pub counts: EventCounts,
    pub outcome: Outcome,
    pub end_time: f64,
    pub seed_vertex: u32,
}

struct ClockState {
    /// epoch start time per edge
    start: Vec<f64>,
    /// full-rate clock values of the current activation
    t_clk: Vec<f64>,
    r_clk: Vec<f64>,
    /// relative time at which the edge turned unstable I-I (NaN while S-I)
    w_rel: Vec<f64>,
    /// bumped on every (re)schedule; stale heap entries are skipped
    seq: Vec<u32>,
    heap: BinaryHeap<Reverse<Entry>>,
}

impl ClockState {
    fn new(edges: usize) -> Self {
        ClockState {
            start: vec![0.0; edges],
            t_clk: vec![f64::INFINITY; edges],
            r_clk: vec![f64::INFINITY; edges],
            w_rel: vec![f64::NAN; edges],
            seq: vec![0; edges],
            heap: BinaryHeap::new(),
        }
    }

    fn fire_time(&self, e: usize) -> f64 {
        let m = self.t_clk[e].min(self.r_clk[e]);
        let w = self.w_rel[e];
        if w.is_nan() {
            self.start[e] + m
        } else {
            self.start[e] + (w + m) / 2.0
        }
    }

    fn schedule(&mut self, e: u32) {
        self.seq[e as usize] += 1;
        let fire = self.fire_time(e as usize);
        if fire.is_finite() {
            self.heap.push(Reverse(Entry {
                time: fire,
                edge: e,
                seq: self.seq[e as usize],
            }));
        }
    }

    fn invalidate(&mut self, e: u32) {
        self.seq[e as usize] += 1;
    }
}

pub fn run_coupled(
    graph: &HalfEdgeGraph,
    variant: Variant,
    bundle: &CouplingBundle,
    seed_vertex: u32,
) -> Result<CoupledRun> {
    if !variant.is_si() {
        return Err(Error::InvalidConfig(
            "coupled clock runs are defined for the SI variants only".into(),
        ));
    }
    if seed_vertex as usize >= graph.n() {
        return Err(Error::InvalidConfig(format!(
            "seed vertex {seed_vertex} out of range"
        )));
    }
    let n = graph.n();
    let mut core = SimCore::new(graph.clone(), variant.unstable_ii(), variant.ab_gated());
    let mut clocks = ClockState::new(graph.edge_count());
    let budget = 50 * (n as u64 + graph.half_edge_count() as u64);
    let mut changes: Vec<Change> = Vec::new();
    let mut t = 0.0f64;
    let mut events = 0u64;
    let mut outcome = Outcome::Completed;

    core.infect_vertex(seed_vertex, t, &mut changes);
    apply_changes(&mut core, &mut clocks, bundle, variant, t, &mut changes);

    // a zero infection rate can never grow the infected set; rewiring-only
    // dynamics would churn forever
    let run_events = bundle.lambda() > 0.0;

    while run_events {
        let Reverse(entry) = match clocks.heap.pop() {
            Some(x) => x,
            None => break,
        };
        let e = entry.edge;
        if entry.seq != clocks.seq[e as usize] {
            continue;
        }
        if events >= budget {
            outcome = Outcome::BudgetExceeded;
            break;
        }
        events += 1;
        t = entry.time;
        let eu = e as usize;
        let infection_first = clocks.t_clk[eu] <= clocks.r_clk[eu];
        match core.class[eu] {
            Class::ActiveSi => {
                if infection_first {
                    core.transmit_over(e, t, &mut changes);
                } else if variant == Variant::DelSi {
                    core.drop_si(e, &mut changes);
                } else {
                    let c = bundle.clocks(e, core.g.activation(e));
                    core.rewire_si(e, c.target, t, &mut changes);
                }
            }
            Class::ActiveIi => {
                if infection_first {
                    core.cross_ii(e, &mut changes);
                } else {
                    let c = bundle.clocks(e, core.g.activation(e));
                    core.rewire_ii(e, c.end_coin, c.target, t, &mut changes);
                }
            }
            Class::Idle | Class::Dead => unreachable!("stale entries are sequence-filtered"),
        }
        apply_changes(&mut core, &mut clocks, bundle, variant, t, &mut changes);
    }

    core.g.validate()?;
    Ok(CoupledRun {
        infected: core.infected_mask(),
        final_size: core.infected_total,
        counts: core.counts,
        outcome,
        end_time: t,
        seed_vertex,
    })
}

fn apply_changes(
    core: &mut SimCore,
    clocks: &mut ClockState,
    bundle: &CouplingBundle,
    variant: Variant,
    now: f64,
    changes: &mut Vec<Change>,
) {
    for c in changes.drain(..) {
        match c {
            Change::NowSi(e) => activate(core, clocks, bundle, variant, e, now, false),
            Change::NowIi { edge: e, fresh: true } => {
                activate(core, clocks, bundle, variant, e, now, true)
            }
            Change::NowIi { edge: e, fresh: false } => {
                // the running S-I activation turns unstable I-I in place:
                // same activation index, residual clocks halved
                let eu = e as usize;
                let w = now - clocks.start[eu];
                debug_assert!(
                    clocks.t_clk[eu].min(clocks.r_clk[eu]) >= w,
                    "conversion after the edge's own event"
                );
                clocks.w_rel[eu] = w;
                clocks.schedule(e);
            }
            Change::NowIdle(e) | Change::NowDead(e) => clocks.invalidate(e),
        }
    }
}

/// Start a fresh activation epoch: advance the activation counter and pull
/// this epoch's clock tuple from the bundle.
fn activate(
    core: &mut SimCore,
    clocks: &mut ClockState,
    bundle: &CouplingBundle,
    variant: Variant,
    e: u32,
    now: f64,
    as_ii: bool,
) {
    let l = core.g.bump_activation(e);
    debug_assert!(
        variant != Variant::DelSi || l == 1,
        "deletion variant edges activate at most once"
    );
    let c = bundle.clocks(e, l);
    let eu = e as usize;
    clocks.start[eu] = now;
    clocks.t_clk[eu] = c.infection;
    clocks.r_clk[eu] = c.rewire;
    clocks.w_rel[eu] = if as_ii { 0.0 } else { f64::NAN };
    clocks.schedule(e);
}

/// Wrap a coupled run in the common trajectory shape.
pub(crate) fn run_coupled_trajectory(
    graph: &HalfEdgeGraph,
    cfg: &EpidemicConfig,
    bundle: &CouplingBundle,
    seed_vertex: u32,
) -> Result<Trajectory> {
    let started = std::time::Instant::now();
    let run = run_coupled(graph, cfg.variant, bundle, seed_vertex)?;
    Ok(Trajectory {
        variant: cfg.variant,
        n: graph.n(),
        seed_vertex: run.seed_vertex,
        final_size: run.final_size,
        infected: run.infected,
        events: run.counts,
        outcome: run.outcome,
        end_time: run.end_time,
        samples: Vec::new(),
        wallclock_ms: started.elapsed().as_millis() as u64,
    })
}
