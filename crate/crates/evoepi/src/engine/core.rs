//! Transition core shared by the Gillespie and clock drivers.
//!
//! Both drivers mutate the same state through the same functions; they differ
//! only in how the next (time, edge, kind) triple is chosen. This keeps the
//! variant semantics identical across the fast sampling path and the coupled
//! replay path.

use crate::engine::EventCounts;
use crate::graph::{HalfEdgeGraph, UNPAIRED};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Health {
    Susceptible,
    Infected,
    Removed,
}

/// Edge classification.
///
/// `Idle` both ends susceptible; `ActiveSi` one infected and one susceptible
/// end; `ActiveIi` both ends infected but no infection has crossed and the
/// edge still rewires (avoidance variants only); `Dead` permanently inert
/// (crossed, dropped, blocked, both-infected in the plain variants, or
/// touching a removed vertex).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Idle,
    ActiveSi,
    ActiveIi,
    Dead,
}

/// Class-change notifications the drivers translate into set updates or
/// clock scheduling. `fresh` distinguishes a new activation (fresh clocks)
/// from an in-place conversion of a still-running S-I activation into an
/// unstable I-I one (residual clocks, halved).
#[derive(Clone, Copy, Debug)]
pub enum Change {
    NowSi(u32),
    NowIi { edge: u32, fresh: bool },
    NowIdle(u32),
    NowDead(u32),
}

/// Per-half-edge infection (A) and rewiring (B) indices for the gated
/// variant. A is the first time the half-edge sat on an infected vertex and
/// is never overwritten; B is the last time the half-edge itself was moved.
pub struct AbIndices {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

pub const A_UNSET: f64 = -1.0;

impl AbIndices {
    fn new(half_edges: usize) -> Self {
        AbIndices {
            a: vec![A_UNSET; half_edges],
            b: vec![0.0; half_edges],
        }
    }

    /// Transmission rule: an attempt from infected-side half-edge `i` to
    /// susceptible-side half-edge `j` passes iff A(i) >= B(j). Equality can
    /// only occur when both are still at their time-zero values (the initial
    /// seed attacking over a never-rewired edge), where transmission must
    /// proceed; all later A and B assignments happen at distinct positive
    /// event times.
    #[inline]
    pub fn passes(&self, attacker: u32, receiver: u32) -> bool {
        self.a[attacker as usize] >= self.b[receiver as usize]
    }
}

pub struct SimCore {
    pub g: HalfEdgeGraph,
    pub health: Vec<Health>,
    pub class: Vec<Class>,
    pub crossed: Vec<bool>,
    pub ab: Option<AbIndices>,
    /// Unstable infected-infected edges enabled (avoidance variants).
    pub ii_enabled: bool,
    pub counts: EventCounts,
    /// Vertices ever infected (includes the seed).
    pub infected_total: u64,
    pub susceptible: u64,
    pub removed_total: u64,
    /// Half-edges on not-yet-dropped edges.
    pub halfedges_alive: u64,
    /// Half-edges owned by susceptible vertices.
    pub x_s: u64,
    /// Half-edges owned by currently infected vertices.
    pub x_i: u64,
    /// s_bucket[k] = susceptible vertices currently owning k half-edges.
    pub s_bucket: Vec<u64>,
}

pub enum TransmitOutcome {
    Infected(u32),
    Blocked,
}

impl SimCore {
    pub fn new(graph: HalfEdgeGraph, ii_enabled: bool, ab_gated: bool) -> Self {
        let n = graph.n();
        let half = graph.half_edge_count();
        let mut s_bucket = Vec::new();
        for v in 0..n {
            let d = graph.degree(v as u32);
            if d >= s_bucket.len() {
                s_bucket.resize(d + 1, 0);
            }
            s_bucket[d] += 1;
        }
        SimCore {
            health: vec![Health::Susceptible; n],
            class: vec![Class::Idle; graph.edge_count()],
            crossed: vec![false; graph.edge_count()],
            ab: ab_gated.then(|| AbIndices::new(half)),
            ii_enabled,
            counts: EventCounts::default(),
            infected_total: 0,
            susceptible: n as u64,
            removed_total: 0,
            halfedges_alive: half as u64,
            x_s: half as u64,
            x_i: 0,
            s_bucket,
            g: graph,
        }
    }

    #[inline]
    pub fn infected_now(&self) -> u64 {
        self.infected_total - self.removed_total
    }

    fn bucket_dec(&mut self, k: usize) {
        debug_assert!(self.s_bucket[k] > 0);
        self.s_bucket[k] -= 1;
    }

    fn bucket_inc(&mut self, k: usize) {
        if k >= self.s_bucket.len() {
            self.s_bucket.resize(k + 1, 0);
        }
        self.s_bucket[k] += 1;
    }

    /// Turn `v` infected and reclassify its incident edges. Does not count an
    /// infection event (the initial seed also passes through here).
    pub fn infect_vertex(&mut self, v: u32, now: f64, out: &mut Vec<Change>) {
        debug_assert_eq!(self.health[v as usize], Health::Susceptible);
        self.health[v as usize] = Health::Infected;
        self.infected_total += 1;
        self.susceptible -= 1;
        let deg = self.g.degree(v);
        self.bucket_dec(deg);
        self.x_s -= deg as u64;
        self.x_i += deg as u64;
        if let Some(ab) = self.ab.as_mut() {
            for &h in self.g.half_edges_of(v) {
                if ab.a[h as usize] == A_UNSET {
                    ab.a[h as usize] = now;
                }
            }
        }
        let halves: Vec<u32> = self.g.half_edges_of(v).to_vec();
        for h in halves {
            let e = self.g.edge_of(h);
            if e == UNPAIRED {
                continue;
            }
            match self.class[e as usize] {
                Class::Dead | Class::ActiveIi => {} // ActiveIi: self-loop second half
                Class::Idle => {
                    let other = self.g.owner(self.g.partner(h));
                    if other == v {
                        // self-loop at a newly infected vertex: unstable in
                        // the avoidance variants, inert otherwise
                        if self.ii_enabled {
                            self.class[e as usize] = Class::ActiveIi;
                            out.push(Change::NowIi { edge: e, fresh: true });
                        } else {
                            self.class[e as usize] = Class::Dead;
                            out.push(Change::NowDead(e));
                        }
                    } else {
                        debug_assert_eq!(self.health[other as usize], Health::Susceptible);
                        self.class[e as usize] = Class::ActiveSi;
                        out.push(Change::NowSi(e));
                    }
                }
                Class::ActiveSi => {
                    // v was the susceptible end; the edge now joins two
                    // infecteds without the infection having crossed it
                    if self.ii_enabled {
                        self.class[e as usize] = Class::ActiveIi;
                        out.push(Change::NowIi { edge: e, fresh: false });
                    } else {
                        self.class[e as usize] = Class::Dead;
                        out.push(Change::NowDead(e));
                    }
                }
            }
        }
    }

    /// Orient an active S-I edge: (infected-side half, susceptible-side half,
    /// susceptible vertex).
    fn orient_si(&self, e: u32) -> (u32, u32, u32) {
        let (ha, hb) = self.g.edge_halves(e);
        let va = self.g.owner(ha);
        let vb = self.g.owner(hb);
        match (self.health[va as usize], self.health[vb as usize]) {
            (Health::Infected, Health::Susceptible) => (ha, hb, vb),
            (Health::Susceptible, Health::Infected) => (hb, ha, va),
            other => unreachable!("edge {e} classified S-I but endpoints are {other:?}"),
        }
    }

    /// Infection clock fired on an active S-I edge. For the gated variant the
    /// attempt may be blocked; either way the edge is finished.
    pub fn transmit_over(&mut self, e: u32, now: f64, out: &mut Vec<Change>) -> TransmitOutcome {
        debug_assert_eq!(self.class[e as usize], Class::ActiveSi);
        let (attacker, receiver, target) = self.orient_si(e);
        if let Some(ab) = self.ab.as_ref() {
            if !ab.passes(attacker, receiver) {
                // attempt made: the edge is deemed stable and never fires again
                self.counts.blocked += 1;
                self.class[e as usize] = Class::Dead;
                out.push(Change::NowDead(e));
                return TransmitOutcome::Blocked;
            }
            debug_assert!(ab.a[attacker as usize] >= ab.b[receiver as usize]);
        }
        self.crossed[e as usize] = true;
        self.class[e as usize] = Class::Dead;
        out.push(Change::NowDead(e));
        self.counts.infection += 1;
        self.infect_vertex(target, now, out);
        TransmitOutcome::Infected(target)
    }

    /// Infection clock fired on an unstable infected-infected edge: the edge
    /// stabilizes, nobody new is infected.
    pub fn cross_ii(&mut self, e: u32, out: &mut Vec<Change>) {
        debug_assert_eq!(self.class[e as usize], Class::ActiveIi);
        self.crossed[e as usize] = true;
        self.class[e as usize] = Class::Dead;
        self.counts.ii_stabilized += 1;
        out.push(Change::NowDead(e));
    }

    /// Rewiring clock fired on an active S-I edge: the infected-side
    /// half-edge moves to `target` (which may be any vertex, including the
    /// susceptible end or the infected end itself).
    pub fn rewire_si(&mut self, e: u32, target: u32, now: f64, out: &mut Vec<Change>) {
        debug_assert_eq!(self.class[e as usize], Class::ActiveSi);
        let (attacker, _receiver, s_end) = self.orient_si(e);
        self.move_half(attacker, target, now);
        self.counts.rewiring += 1;
        match self.health[target as usize] {
            Health::Susceptible => {
                // both ends susceptible now (target may equal the S end,
                // making a susceptible self-loop)
                debug_assert_eq!(self.health[s_end as usize], Health::Susceptible);
                self.class[e as usize] = Class::Idle;
                out.push(Change::NowIdle(e));
            }
            Health::Infected => {
                self.class[e as usize] = Class::ActiveSi;
                out.push(Change::NowSi(e));
            }
            Health::Removed => {
                self.class[e as usize] = Class::Dead;
                out.push(Change::NowDead(e));
            }
        }
    }

    /// Rewiring clock fired on an unstable infected-infected edge; the coin
    /// picks which half-edge moves (true = the edge record's A side).
    pub fn rewire_ii(
        &mut self,
        e: u32,
        move_a_side: bool,
        target: u32,
        now: f64,
        out: &mut Vec<Change>,
    ) {
        debug_assert_eq!(self.class[e as usize], Class::ActiveIi);
        let (ha, hb) = self.g.edge_halves(e);
        let h = if move_a_side { ha } else { hb };
        self.move_half(h, target, now);
        self.counts.rewiring += 1;
        match self.health[target as usize] {
            Health::Susceptible => {
                self.class[e as usize] = Class::ActiveSi;
                out.push(Change::NowSi(e));
            }
            Health::Infected => {
                self.class[e as usize] = Class::ActiveIi;
                out.push(Change::NowIi { edge: e, fresh: true });
            }
            Health::Removed => unreachable!("avoidance variants are SI-only"),
        }
    }

    /// Move one half-edge, maintaining the susceptible-side accounting and
    /// the rewiring index.
    fn move_half(&mut self, h: u32, target: u32, now: f64) {
        debug_assert_eq!(self.health[self.g.owner(h) as usize], Health::Infected);
        self.g.rewire_half(h, target);
        self.x_i -= 1;
        if let Some(ab) = self.ab.as_mut() {
            ab.b[h as usize] = now;
            if self.health[target as usize] == Health::Infected
                && ab.a[h as usize] == A_UNSET
            {
                ab.a[h as usize] = now;
            }
        }
        match self.health[target as usize] {
            Health::Susceptible => {
                let d = self.g.degree(target);
                self.bucket_dec(d - 1);
                self.bucket_inc(d);
                self.x_s += 1;
            }
            Health::Infected => self.x_i += 1,
            Health::Removed => {}
        }
    }

    /// Drop (delete) an active S-I edge.
    pub fn drop_si(&mut self, e: u32, out: &mut Vec<Change>) {
        debug_assert_eq!(self.class[e as usize], Class::ActiveSi);
        self.class[e as usize] = Class::Dead;
        self.counts.drop += 1;
        self.halfedges_alive -= 2;
        out.push(Change::NowDead(e));
    }

    /// Recovery of an infected vertex (SIR variants).
    pub fn recover_vertex(&mut self, v: u32, out: &mut Vec<Change>) {
        debug_assert_eq!(self.health[v as usize], Health::Infected);
        self.health[v as usize] = Health::Removed;
        self.removed_total += 1;
        self.counts.recovery += 1;
        self.x_i -= self.g.degree(v) as u64;
        let halves: Vec<u32> = self.g.half_edges_of(v).to_vec();
        for h in halves {
            let e = self.g.edge_of(h);
            if e == UNPAIRED {
                continue;
            }
            if self.class[e as usize] == Class::ActiveSi {
                self.class[e as usize] = Class::Dead;
                out.push(Change::NowDead(e));
            }
        }
    }

    pub fn infected_mask(&self) -> Vec<bool> {
        self.health
            .iter()
            .map(|&h| h != Health::Susceptible)
            .collect()
    }

    pub fn sample_now(&self, t: f64, k_max: usize, total_rate: f64) -> crate::engine::Sample {
        let mut s_k = vec![0u64; k_max + 1];
        for (k, &c) in self.s_bucket.iter().enumerate().take(k_max + 1) {
            s_k[k] = c;
        }
        crate::engine::Sample {
            t,
            s: self.susceptible,
            i: self.infected_now(),
            r: self.removed_total,
            x: self.halfedges_alive,
            x_i: self.x_i,
            x_s: self.x_s,
            s_k,
            total_rate,
        }
    }
}
