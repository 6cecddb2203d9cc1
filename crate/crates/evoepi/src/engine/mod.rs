//! Event-driven simulation of the model variants.
//!
//! Two drivers share one transition core: a Gillespie driver samples
//! aggregate category rates with O(1) indexed-set selection (seed-driven,
//! fast), and a clock driver replays per-edge clock variables from a
//! [`crate::coupling::CouplingBundle`] (used for exact pathwise
//! comparisons). A third driver runs the dynamic reveal-as-you-go half-edge
//! construction, optionally under the time change that makes pairings occur
//! at rate X_t - 1.

pub(crate) mod core;
pub mod clockwork;
pub mod dynamic;
pub mod gillespie;
pub mod outbreak;

pub use dynamic::{run_dynamic, DegreeSource};
pub use outbreak::{estimate_outbreak, GraphSource, OutbreakEstimate};

use crate::coupling::CouplingBundle;
use crate::graph::HalfEdgeGraph;
use crate::{Error, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    DelSi,
    EvoSi,
    AvoSi,
    AbAvoSi,
    DelSir,
    EvoSir,
    SirOmega,
}

impl Variant {
    pub fn is_si(self) -> bool {
        matches!(
            self,
            Variant::DelSi | Variant::EvoSi | Variant::AvoSi | Variant::AbAvoSi
        )
    }

    /// Probability that a rate-rho event on an active edge rewires rather
    /// than drops. The deletion variants are the rewiring models with this
    /// probability pinned to 0, the evolving ones pin it to 1.
    pub(crate) fn rewire_prob(self, configured: Option<f64>) -> f64 {
        match self {
            Variant::DelSi | Variant::DelSir => 0.0,
            Variant::SirOmega => configured.unwrap_or(f64::NAN),
            _ => 1.0,
        }
    }

    /// Whether unstable infected-infected edges rewire (the upper- and
    /// lower-bounding avoidance variants).
    pub(crate) fn unstable_ii(self) -> bool {
        matches!(self, Variant::AvoSi | Variant::AbAvoSi)
    }

    /// Whether transmission is gated on the infection/rewiring indices.
    pub(crate) fn ab_gated(self) -> bool {
        self == Variant::AbAvoSi
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::DelSi => "delsi",
            Variant::EvoSi => "evosi",
            Variant::AvoSi => "avosi",
            Variant::AbAvoSi => "ab-avosi",
            Variant::DelSir => "delsir",
            Variant::EvoSir => "evosir",
            Variant::SirOmega => "sir-omega",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "delsi" => Ok(Variant::DelSi),
            "evosi" => Ok(Variant::EvoSi),
            "avosi" => Ok(Variant::AvoSi),
            "abavosi" => Ok(Variant::AbAvoSi),
            "delsir" => Ok(Variant::DelSir),
            "evosir" => Ok(Variant::EvoSir),
            "siromega" => Ok(Variant::SirOmega),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DurationMode {
    /// Markovian recovery at rate gamma.
    Exponential,
    /// Every infection lasts exactly time 1.
    FixedUnit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedChoice {
    UniformRandom,
    Index(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordPolicy {
    None,
    /// Keep every event until 10^4 samples accumulate, then repeatedly thin
    /// by two (doubling the event stride), bounding memory for large runs.
    Adaptive { k_max: usize },
    /// Record every event unconditionally (diagnostics on small runs).
    EveryEvent { k_max: usize },
}

impl RecordPolicy {
    pub(crate) fn k_max(self) -> usize {
        match self {
            RecordPolicy::None => 0,
            RecordPolicy::Adaptive { k_max } | RecordPolicy::EveryEvent { k_max } => k_max,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpidemicConfig {
    pub variant: Variant,
    pub lambda: f64,
    pub rho: f64,
    pub gamma: f64,
    /// Rewire-vs-drop probability, SIR-omega only.
    pub rewire_prob: Option<f64>,
    pub duration: DurationMode,
    pub seed_vertex: SeedChoice,
    /// Large-outbreak threshold as a fraction of n.
    pub outbreak_threshold: f64,
    pub record: RecordPolicy,
    /// Dynamic construction only: run under the time change.
    pub time_changed: bool,
    /// Maximum number of events; default 50 (n + total half-edges).
    pub event_budget: Option<u64>,
}

impl EpidemicConfig {
    pub fn si(variant: Variant, lambda: f64, rho: f64) -> Self {
        EpidemicConfig {
            variant,
            lambda,
            rho,
            gamma: 0.0,
            rewire_prob: None,
            duration: DurationMode::Exponential,
            seed_vertex: SeedChoice::UniformRandom,
            outbreak_threshold: 0.01,
            record: RecordPolicy::None,
            time_changed: false,
            event_budget: None,
        }
    }

    pub fn sir(variant: Variant, lambda: f64, rho: f64, gamma: f64) -> Self {
        EpidemicConfig {
            variant,
            gamma,
            ..EpidemicConfig::si(variant, lambda, rho)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.lambda >= 0.0 && self.rho >= 0.0 && self.gamma >= 0.0)
            || !self.lambda.is_finite()
            || !self.rho.is_finite()
            || !self.gamma.is_finite()
        {
            return bad("rates must be finite and nonnegative".into());
        }
        if self.variant.is_si() {
            if self.gamma != 0.0 {
                return bad(format!("{} has no recovery; gamma must be 0", self.variant));
            }
            if self.duration == DurationMode::FixedUnit {
                return bad(format!(
                    "{} never recovers; fixed infection duration is meaningless",
                    self.variant
                ));
            }
        }
        if self.variant == Variant::SirOmega {
            match self.rewire_prob {
                Some(a) if (0.0..=1.0).contains(&a) => {}
                _ => return bad("sir-omega requires rewire_prob in [0,1]".into()),
            }
        }
        if !(self.outbreak_threshold > 0.0 && self.outbreak_threshold < 1.0) {
            return bad("outbreak threshold must be in (0,1)".into());
        }
        if self.time_changed && !matches!(self.variant, Variant::AvoSi | Variant::AbAvoSi) {
            return bad("time change applies to the dynamic construction only".into());
        }
        Ok(())
    }

    pub(crate) fn budget_for(&self, n: usize, half_edges: usize) -> u64 {
        self.event_budget
            .unwrap_or_else(|| 50 * (n as u64 + half_edges as u64))
    }
}

/// Event tallies by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub infection: u64,
    pub rewiring: u64,
    pub drop: u64,
    pub recovery: u64,
    pub blocked: u64,
    /// Infected-infected edges stabilized by an internal crossing (avoidance
    /// variants) or infected-infected pairings (dynamic construction).
    pub ii_stabilized: u64,
}

/// One recorded state snapshot.
#[derive(Clone, Debug)]
pub struct Sample {
    pub t: f64,
    pub s: u64,
    pub i: u64,
    pub r: u64,
    /// Static runs: half-edges not yet dropped. Dynamic runs: free half-edges.
    pub x: u64,
    /// Half-edges attached to infected vertices (dynamic: free ones).
    pub x_i: u64,
    /// Half-edges attached to susceptible vertices (dynamic: free ones).
    pub x_s: u64,
    /// Susceptible vertices holding k (free) half-edges, k = 0..=k_max.
    pub s_k: Vec<u64>,
    /// Total event rate after this event (0 when not meaningful).
    pub total_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Completed,
    BudgetExceeded,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub variant: Variant,
    pub n: usize,
    pub seed_vertex: u32,
    pub final_size: u64,
    pub infected: Vec<bool>,
    pub events: EventCounts,
    pub outcome: Outcome,
    /// Absorption time (dynamic runs: the time the last infected half-edge
    /// disappeared, in the active clock).
    pub end_time: f64,
    pub samples: Vec<Sample>,
    pub wallclock_ms: u64,
}

impl Trajectory {
    pub fn final_fraction(&self) -> f64 {
        self.final_size as f64 / self.n as f64
    }

    /// Run record for JSON-lines output.
    pub fn run_record(&self, cfg: &EpidemicConfig, seed: u64) -> serde_json::Value {
        serde_json::json!({
            "variant": self.variant.name(),
            "n": self.n,
            "lambda": cfg.lambda,
            "rho": cfg.rho,
            "gamma": cfg.gamma,
            "seed": seed,
            "final_size": self.final_size,
            "events": self.events,
            "wallclock_ms": self.wallclock_ms,
        })
    }

    /// Trajectory samples as CSV: t, S, I, R, X, X_I, S_0..S_kmax.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let k_max = self.samples.first().map_or(0, |s| s.s_k.len());
        write!(out, "t,S,I,R,X,X_I")?;
        for k in 0..k_max {
            write!(out, ",S_{k}")?;
        }
        writeln!(out)?;
        for s in &self.samples {
            write!(out, "{},{},{},{},{},{}", s.t, s.s, s.i, s.r, s.x, s.x_i)?;
            for v in &s.s_k {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Randomness source for a static run: a seed for independent sampling, or a
/// coupling bundle for clock-replay runs.
#[derive(Clone, Copy, Debug)]
pub enum Randomness<'a> {
    Seed(u64),
    Bundle(&'a CouplingBundle),
}

/// Simulate one epidemic to absorption on a pre-built graph.
pub fn run_static(
    graph: &HalfEdgeGraph,
    cfg: &EpidemicConfig,
    randomness: Randomness<'_>,
) -> Result<Trajectory> {
    cfg.validate()?;
    match randomness {
        Randomness::Seed(seed) => gillespie::run(graph, cfg, seed),
        Randomness::Bundle(bundle) => {
            if !cfg.variant.is_si() {
                return Err(Error::InvalidConfig(
                    "coupled clock runs are defined for the SI variants only".into(),
                ));
            }
            if bundle.lambda() != cfg.lambda || bundle.rho() != cfg.rho {
                return Err(Error::InvalidConfig(
                    "bundle rates differ from the configured rates".into(),
                ));
            }
            if bundle.n() != graph.n() {
                return Err(Error::InvalidConfig(
                    "bundle vertex count differs from the graph".into(),
                ));
            }
            let seed_vertex = match cfg.seed_vertex {
                SeedChoice::Index(v) => v,
                SeedChoice::UniformRandom => bundle.seed_vertex(),
            };
            clockwork::run_coupled_trajectory(graph, cfg, bundle, seed_vertex)
        }
    }
}

/// Adaptive sample recorder shared by the drivers.
pub(crate) struct Recorder {
    policy: RecordPolicy,
    stride: u64,
    pending: u64,
    samples: Vec<Sample>,
}

const THIN_AT: usize = 10_000;

impl Recorder {
    pub fn new(policy: RecordPolicy) -> Self {
        Recorder {
            policy,
            stride: 1,
            pending: 0,
            samples: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        !matches!(self.policy, RecordPolicy::None)
    }

    /// Record unconditionally (initial and final states).
    pub fn force(&mut self, sample: Sample) {
        if self.enabled() {
            self.samples.push(sample);
        }
    }

    pub fn maybe(&mut self, make: impl FnOnce() -> Sample) {
        match self.policy {
            RecordPolicy::None => {}
            RecordPolicy::EveryEvent { .. } => self.samples.push(make()),
            RecordPolicy::Adaptive { .. } => {
                self.pending += 1;
                if self.pending >= self.stride {
                    self.pending = 0;
                    self.samples.push(make());
                    if self.samples.len() >= THIN_AT {
                        let mut keep = Vec::with_capacity(THIN_AT / 2);
                        for (i, s) in self.samples.drain(..).enumerate() {
                            if i % 2 == 0 {
                                keep.push(s);
                            }
                        }
                        self.samples = keep;
                        self.stride *= 2;
                    }
                }
            }
        }
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}
