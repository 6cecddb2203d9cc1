//! Command-line front end: graph generation, single runs, replicated
//! parameter scans with analytic overlays, closed-form reports, and the
//! verification suites.

mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use evoepi::dist::DegreeDistribution;
use evoepi::engine::{
    estimate_outbreak, run_dynamic, run_static, DegreeSource, DurationMode, EpidemicConfig,
    GraphSource, Randomness, RecordPolicy, SeedChoice, Variant,
};
use evoepi::graph::HalfEdgeGraph;
use evoepi::rng::derive_seed;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "evoepi",
    about = "Epidemics on evolving random graphs: simulation and analytics",
    version
)]
struct Cli {
    /// Flat key=value file mirroring the long flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph and write it in edge-list form
    Generate(GenerateArgs),
    /// Run a single replica and emit a run record or trajectory
    Simulate(SimulateArgs),
    /// Sweep one parameter with replication, writing one row per grid point
    Scan(ScanArgs),
    /// Closed-form report: moments, discriminant, critical values, outbreak
    /// probabilities and final-size limits
    Analytic(AnalyticArgs),
    /// Run a named verification suite; nonzero exit on any failure
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Degree distribution: poisson:M | geometric:P | regular:R | pmf:p0,p1,...
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use a true Erdős–Rényi graph with the distribution's mean degree
    #[arg(long)]
    er: bool,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Rewire-vs-drop probability (sir-omega only)
    #[arg(long)]
    rewire_prob: Option<f64>,
    /// exp | fixed
    #[arg(long)]
    duration: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Load a graph from an edge-list file instead of generating one
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    er: bool,
    /// Run the dynamic half-edge construction (avoidance variants)
    #[arg(long)]
    dynamic: bool,
    /// Apply the time change in dynamic mode
    #[arg(long)]
    time_changed: bool,
    /// csv (trajectory samples) | jsonl (run record)
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    variant: Option<String>,
    /// Value or sweep min:max:step (exactly one of lambda/rho/gamma sweeps)
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    rewire_prob: Option<f64>,
    #[arg(long)]
    duration: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    er: bool,
    /// csv | jsonl
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Single value or min:max:step grid of infection rates
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// coupling | percolation | limits | survival
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Coupled runs / Monte Carlo trials, suite-dependent
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = config::Overrides::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a, &file),
        Cmd::Simulate(a) => cmd_simulate(a, &file),
        Cmd::Scan(a) => cmd_scan(a, &file),
        Cmd::Analytic(a) => cmd_analytic(a, &file),
        Cmd::Verify(a) => cmd_verify(a, &file),
    }
}

fn parse_duration(s: &str) -> Result<DurationMode> {
    match s {
        "exp" | "exponential" => Ok(DurationMode::Exponential),
        "fixed" => Ok(DurationMode::FixedUnit),
        other => bail!("unknown duration {other:?} (expected exp|fixed)"),
    }
}

fn build_graph(dist: &DegreeDistribution, n: usize, er: bool, seed: u64) -> Result<HalfEdgeGraph> {
    Ok(if er {
        HalfEdgeGraph::erdos_renyi(n, dist.mean(), seed)?
    } else {
        HalfEdgeGraph::config_model(n, dist, seed)?
    })
}

fn cmd_generate(a: GenerateArgs, file: &config::Overrides) -> Result<()> {
    let dist_spec = file.string("dist", a.dist)?;
    let dist = DegreeDistribution::parse(&dist_spec)?;
    let n = file.parsed("n", a.n, Some(1000))?;
    let seed = file.parsed("seed", a.seed, Some(1))?;
    let er = a.er || file.flag("er");
    let g = build_graph(&dist, n, er, seed)?;
    let mut out = output::sink(a.out.as_deref())?;
    g.write_edge_list(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs, file: &config::Overrides) -> Result<()> {
    let variant = Variant::from_str(&file.string("variant", a.variant)?)?;
    let lambda = file.parsed("lambda", a.lambda, Some(1.0))?;
    let rho = file.parsed("rho", a.rho, Some(0.0))?;
    let gamma = file.parsed("gamma", a.gamma, Some(0.0))?;
    let seed = file.parsed("seed", a.seed, Some(1))?;
    let format = file.string_or("format", a.format, "jsonl");
    let duration = parse_duration(&file.string_or("duration", a.duration, "exp"))?;
    let record = if format == "csv" {
        RecordPolicy::Adaptive { k_max: 10 }
    } else {
        RecordPolicy::None
    };
    let cfg = EpidemicConfig {
        variant,
        lambda,
        rho,
        gamma,
        rewire_prob: a.rewire_prob.or(file.parsed_opt("rewire_prob")?),
        duration,
        seed_vertex: SeedChoice::UniformRandom,
        outbreak_threshold: 0.01,
        record,
        time_changed: a.time_changed || file.flag("time_changed"),
        event_budget: None,
    };
    let trajectory = if a.dynamic || file.flag("dynamic") {
        let dist = DegreeDistribution::parse(&file.string("dist", a.dist)?)?;
        let n = file.parsed("n", a.n, Some(1000))?;
        run_dynamic(DegreeSource::Sampled { dist: &dist, n }, &cfg, seed)?
    } else {
        let g = match &a.graph {
            Some(path) => {
                let reader = std::io::BufReader::new(
                    std::fs::File::open(path).with_context(|| format!("open {path:?}"))?,
                );
                HalfEdgeGraph::read_edge_list(reader)?
            }
            None => {
                let dist = DegreeDistribution::parse(&file.string("dist", a.dist)?)?;
                let n = file.parsed("n", a.n, Some(1000))?;
                build_graph(&dist, n, a.er || file.flag("er"), derive_seed(seed, 0))?
            }
        };
        run_static(&g, &cfg, Randomness::Seed(derive_seed(seed, 1)))?
    };
    let mut out = output::sink(a.out.as_deref())?;
    match format.as_str() {
        "csv" => trajectory.write_csv(&mut out)?,
        "jsonl" => writeln!(out, "{}", trajectory.run_record(&cfg, seed))?,
        other => bail!("unknown format {other:?}"),
    }
    out.flush()?;
    Ok(())
}

/// Value-or-range grammar for swept parameters.
#[derive(Clone, Copy, Debug)]
enum Sweep {
    Fixed(f64),
    Range { min: f64, max: f64, step: f64 },
}

impl Sweep {
    fn parse(s: &str) -> Result<Sweep> {
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Sweep::Fixed(v));
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("expected a number or min:max:step, got {s:?}");
        }
        let min: f64 = parts[0].parse().context("sweep min")?;
        let max: f64 = parts[1].parse().context("sweep max")?;
        let step: f64 = parts[2].parse().context("sweep step")?;
        if !(step > 0.0) || max < min {
            bail!("sweep needs step > 0 and max >= min");
        }
        Ok(Sweep::Range { min, max, step })
    }

    fn grid(self) -> Vec<f64> {
        match self {
            Sweep::Fixed(v) => vec![v],
            Sweep::Range { min, max, step } => {
                let mut out = Vec::new();
                let mut i = 0u32;
                loop {
                    let v = min + step * i as f64;
                    if v > max + 1e-12 * step {
                        break;
                    }
                    out.push(v);
                    i += 1;
                }
                out
            }
        }
    }
}

/// Basic reproduction number of the two-phase branching process for the
/// given rates and infection-duration mode.
fn r_nought(dist: &DegreeDistribution, lambda: f64, rho: f64, gamma: f64, d: DurationMode) -> f64 {
    let tau = transmission_probability(lambda, rho, gamma, d);
    let m1 = dist.moment(1);
    tau * (dist.moment(2) - m1) / m1
}

fn transmission_probability(lambda: f64, rho: f64, gamma: f64, d: DurationMode) -> f64 {
    match d {
        DurationMode::Exponential => {
            if lambda <= 0.0 {
                0.0
            } else {
                lambda / (lambda + rho + gamma)
            }
        }
        DurationMode::FixedUnit => {
            if lambda <= 0.0 {
                0.0
            } else {
                let s = lambda + rho;
                lambda / s * (1.0 - (-s).exp())
            }
        }
    }
}

fn cmd_scan(a: ScanArgs, file: &config::Overrides) -> Result<()> {
    if let Some(w) = a.workers.or(file.parsed_opt("workers")?) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }
    let dist = DegreeDistribution::parse(&file.string("dist", a.dist)?)?;
    let n = file.parsed("n", a.n, None)?;
    let variant = Variant::from_str(&file.string("variant", a.variant)?)?;
    let duration = parse_duration(&file.string_or("duration", a.duration, "exp"))?;
    let trials = file.parsed("trials", a.trials, Some(100))?;
    let eta = file.parsed("eta", a.eta, Some(0.01))?;
    let root_seed: u64 = file.parsed("seed", a.seed, Some(1))?;
    let er = a.er || file.flag("er");
    let format = file.string_or("format", a.format, "csv");
    let rewire_prob = a.rewire_prob.or(file.parsed_opt("rewire_prob")?);

    let lambda = Sweep::parse(&file.string_or("lambda", a.lambda, "1.0"))?;
    let rho = Sweep::parse(&file.string_or("rho", a.rho, "0.0"))?;
    let gamma = Sweep::parse(&file.string_or("gamma", a.gamma, "0.0"))?;
    let ranges = [
        matches!(lambda, Sweep::Range { .. }),
        matches!(rho, Sweep::Range { .. }),
        matches!(gamma, Sweep::Range { .. }),
    ];
    if ranges.iter().filter(|&&r| r).count() > 1 {
        bail!("only one of lambda/rho/gamma may sweep");
    }
    // a single fixed point is a one-row scan
    let (grid, which): (Vec<f64>, usize) = if ranges[1] {
        (rho.grid(), 1)
    } else if ranges[2] {
        (gamma.grid(), 2)
    } else {
        (lambda.grid(), 0)
    };
    let fixed = |s: Sweep| match s {
        Sweep::Fixed(v) => v,
        Sweep::Range { min, .. } => min,
    };

    let mut out = output::sink(a.out.as_deref())?;
    if format == "csv" {
        writeln!(
            out,
            "param,p_large,p_large_se,cond_size,cond_size_se,n_large,q_analytic,nu_analytic,notes"
        )?;
    }
    let mut prev_r0: Option<f64> = None;
    for (gi, &value) in grid.iter().enumerate() {
        let (l, r, g) = match which {
            0 => (value, fixed(rho), fixed(gamma)),
            1 => (fixed(lambda), value, fixed(gamma)),
            _ => (fixed(lambda), fixed(rho), value),
        };
        let cfg = EpidemicConfig {
            variant,
            lambda: l,
            rho: r,
            gamma: g,
            rewire_prob,
            duration,
            seed_vertex: SeedChoice::UniformRandom,
            outbreak_threshold: eta,
            record: RecordPolicy::None,
            time_changed: false,
            event_budget: None,
        };
        let source = if er {
            GraphSource::ErdosRenyi { mu: dist.mean(), n }
        } else {
            GraphSource::ConfigModel { dist: &dist, n }
        };
        let est = estimate_outbreak(source, &cfg, trials, eta, derive_seed(root_seed, gi as u64))?;

        let q = dist.bp_survival_tau(transmission_probability(l, r, g, duration));
        let alpha = if l > 0.0 { r * dist.moment(1) / l } else { f64::INFINITY };
        let nu = if matches!(variant, Variant::AvoSi | Variant::AbAvoSi)
            && alpha < dist.alpha_c()
        {
            dist.final_size_limit(alpha).ok().map(|fs| fs.nu)
        } else {
            None
        };
        let r0 = r_nought(&dist, l, r, g, duration);
        let mut notes = String::new();
        if let Some(prev) = prev_r0 {
            if (prev - 1.0) * (r0 - 1.0) < 0.0 {
                notes = format!("crosses critical value (R0 passes 1 before param={value})");
            }
        }
        prev_r0 = Some(r0);

        let cond = est.cond_mean.map(|v| v.to_string()).unwrap_or_default();
        let cond_se = est.cond_se.map(|v| v.to_string()).unwrap_or_default();
        let nu_str = nu.map(|v| v.to_string()).unwrap_or_default();
        match format.as_str() {
            "csv" => writeln!(
                out,
                "{value},{},{},{cond},{cond_se},{},{q},{nu_str},{notes}",
                est.p_large, est.p_large_se, est.n_large
            )?,
            "jsonl" => writeln!(
                out,
                "{}",
                serde_json::json!({
                    "param": value,
                    "p_large": est.p_large,
                    "p_large_se": est.p_large_se,
                    "cond_size": est.cond_mean,
                    "cond_size_se": est.cond_se,
                    "n_large": est.n_large,
                    "q_analytic": q,
                    "nu_analytic": nu,
                    "notes": notes,
                })
            )?,
            other => bail!("unknown format {other:?}"),
        }
        out.flush()?; // partial results survive interruption
    }
    Ok(())
}

fn cmd_analytic(a: AnalyticArgs, file: &config::Overrides) -> Result<()> {
    let dist = DegreeDistribution::parse(&file.string("dist", a.dist)?)?;
    let rho = file.parsed("rho", a.rho, Some(0.0))?;
    let gamma = file.parsed("gamma", a.gamma, Some(0.0))?;
    let summary = dist.critical_values(rho, gamma)?;
    let mut rows = Vec::new();
    if let Some(spec) = a.lambda.or_else(|| file.raw("lambda")) {
        for l in Sweep::parse(&spec)?.grid() {
            let alpha = if l > 0.0 { rho * summary.m1 / l } else { f64::INFINITY };
            let q = dist.bp_survival(l, rho)?;
            let fs = if alpha < summary.alpha_c {
                dist.final_size_limit(alpha).ok()
            } else {
                None
            };
            rows.push(serde_json::json!({
                "lambda": l,
                "alpha": if alpha.is_finite() { Some(alpha) } else { None },
                "q": q,
                "sigma": fs.map(|f| f.sigma),
                "nu": fs.map(|f| f.nu),
                "star_holds": fs.map(|f| f.star_holds),
            }));
        }
    }
    let report = serde_json::json!({
        "dist": dist.spec_string(),
        "m1": summary.m1,
        "m2": summary.m2,
        "m3": summary.m3,
        "mu1": summary.mu1,
        "mu2": summary.mu2,
        "mu3": summary.mu3,
        "delta": summary.delta,
        "alpha_c": summary.alpha_c,
        "lambda_c": summary.lambda_c,
        "regime": if summary.alpha_c > 0.0 { "supercritical regime exists" } else { "no supercritical regime" },
        "rho": rho,
        "gamma": gamma,
        "rows": rows,
    });
    let mut out = output::sink(a.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs, file: &config::Overrides) -> Result<()> {
    if let Some(w) = a.workers.or(file.parsed_opt("workers")?) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }
    let suite = file.string("suite", a.suite)?;
    let seed = file.parsed("seed", a.seed, Some(1))?;
    let report = match suite.as_str() {
        "coupling" => {
            let n = file.parsed("n", a.n, Some(1000))?;
            let runs = file.parsed("trials", a.trials, Some(100))?;
            evoepi::verify::coupling_suite(n, runs, seed)?
        }
        "percolation" => evoepi::verify::percolation_suite(seed)?,
        "limits" => {
            let n = file.parsed("n", a.n, Some(100_000))?;
            let runs = file.parsed("trials", a.trials, Some(5))?;
            evoepi::verify::limits_suite(n, "poisson:5", runs, seed, 0.02)?
        }
        "survival" => {
            let trials = file.parsed("trials", a.trials, Some(20_000))?;
            evoepi::verify::survival_suite(trials, seed)?
        }
        other => bail!("unknown suite {other:?} (coupling|percolation|limits|survival)"),
    };
    let mut failed = false;
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {} ({})", report.suite, c.label, c.detail);
        failed |= !c.passed;
    }
    if failed {
        bail!("suite {} had failures", report.suite);
    }
    Ok(())
}
