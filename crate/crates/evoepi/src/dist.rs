//! Degree distributions, their moments and generating functions, and the
//! closed-form epidemic quantities built on them: critical values, the
//! phase-transition discriminant, outbreak probabilities via branching-process
//! fixed points, and the limiting final-size curves of the upper-bounding
//! rewiring process.

use crate::{Error, Result};
use rand::Rng;
use serde::Serialize;

/// Tolerance used by all fixed-point and root-finding iterations.
const FIXED_POINT_TOL: f64 = 1e-12;

/// Named degree families supported by the CLI grammar.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Poisson(f64),
    Geometric(f64),
    Regular(u32),
    Explicit,
}

/// A finitely supported degree distribution `p_0..p_K`.
///
/// Named families are truncated so the discarded fifth-moment tail
/// `sum_{k>K} k^5 p_k` is below ~1e-12 and then renormalized; this keeps every
/// moment up to order five accurate to well under 1e-9, which the closed-form
/// checks require. (A plain probability-mass cutoff at 1e-12 would leave
/// third-moment errors near 1e-5 for long-tailed families.)
#[derive(Clone, Debug)]
pub struct DegreeDistribution {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
    family: Family,
    truncation_tail_mass: f64,
}

/// Moments, factorial moments and critical quantities of one distribution at
/// given rewiring/recovery rates.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalSummary {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub alpha_c: f64,
    pub delta: f64,
    /// `None` when the graph has no supercritical regime (alpha_c <= 0).
    pub lambda_c: Option<f64>,
}

/// Output of [`DegreeDistribution::final_size_limit`]: the largest root
/// `sigma` of the half-edge log-ratio in (0,1) (0 when there is none), the
/// limiting infected fraction `nu`, and a numerical check of the
/// negative-left-neighborhood hypothesis the limit theorem assumes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FinalSizeLimit {
    pub sigma: f64,
    pub nu: f64,
    pub star_holds: bool,
    /// Minimum of the sampled log-ratio values just left of sigma
    /// (`None` when sigma = 0).
    pub star_sample_min: Option<f64>,
}

/// Deterministic limit curves of the time-changed dynamic construction at
/// one time point.
#[derive(Clone, Debug)]
pub struct LimitCurves {
    /// Scaled total half-edge count `m1 w^2`.
    pub x: f64,
    /// Scaled susceptible-vertex count `F0(w)`.
    pub s: f64,
    /// Scaled susceptible half-edge count `F1(w)`.
    pub x_s: f64,
    /// Scaled susceptible vertices holding k half-edges, k = 0..=k_max.
    pub s_k: Vec<f64>,
}

impl DegreeDistribution {
    pub fn poisson(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "poisson mean must be positive, got {mu}"
            )));
        }
        let mut pmf = vec![(-mu).exp()];
        let mut k = 0usize;
        loop {
            let next = pmf[k] * mu / (k + 1) as f64;
            pmf.push(next);
            k += 1;
            if fifth_moment_tail_negligible(&pmf, k, mu / (k as f64 + 2.0)) {
                break;
            }
        }
        Self::finish_named(pmf, Family::Poisson(mu))
    }

    /// Geometric on {1, 2, ...}: p_k = p (1-p)^(k-1).
    pub fn geometric(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "geometric parameter must be in (0,1), got {p}"
            )));
        }
        let mut pmf = vec![0.0, p];
        let mut k = 1usize;
        loop {
            let next = pmf[k] * (1.0 - p);
            pmf.push(next);
            k += 1;
            if fifth_moment_tail_negligible(&pmf, k, 1.0 - p) {
                break;
            }
        }
        Self::finish_named(pmf, Family::Geometric(p))
    }

    pub fn regular(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidDistribution(
                "regular degree must be at least 1".into(),
            ));
        }
        let mut pmf = vec![0.0; r as usize + 1];
        pmf[r as usize] = 1.0;
        Ok(DegreeDistribution {
            cdf: cumulative(&pmf),
            pmf,
            family: Family::Regular(r),
            truncation_tail_mass: 0.0,
        })
    }

    /// Explicit pmf `p_0..p_K`. Must be nonnegative, sum to 1 within 1e-9,
    /// and put positive mass on some degree >= 1.
    pub fn from_pmf(p: &[f64]) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty pmf".into()));
        }
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidDistribution(
                "pmf entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "pmf sums to {total}, expected 1"
            )));
        }
        let pmf: Vec<f64> = p.iter().map(|&x| x / total).collect();
        if pmf.iter().enumerate().skip(1).all(|(_, &x)| x == 0.0) {
            return Err(Error::InvalidDistribution(
                "distribution must put mass on some degree >= 1".into(),
            ));
        }
        Ok(DegreeDistribution {
            cdf: cumulative(&pmf),
            pmf,
            family: Family::Explicit,
            truncation_tail_mass: 0.0,
        })
    }

    fn finish_named(mut pmf: Vec<f64>, family: Family) -> Result<Self> {
        let total: f64 = pmf.iter().sum();
        let tail = (1.0 - total).max(0.0);
        for x in pmf.iter_mut() {
            *x /= total;
        }
        Ok(DegreeDistribution {
            cdf: cumulative(&pmf),
            pmf,
            family,
            truncation_tail_mass: tail,
        })
    }

    /// Parse the CLI grammar: `poisson:5.0`, `geometric:0.5`, `regular:3`,
    /// `pmf:p0,p1,...,pK`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidDistribution(m);
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| bad(format!("expected family:params, got {spec:?}")))?;
        match kind {
            "poisson" => Self::poisson(
                arg.parse()
                    .map_err(|_| bad(format!("bad poisson mean {arg:?}")))?,
            ),
            "geometric" => Self::geometric(
                arg.parse()
                    .map_err(|_| bad(format!("bad geometric parameter {arg:?}")))?,
            ),
            "regular" => Self::regular(
                arg.parse()
                    .map_err(|_| bad(format!("bad regular degree {arg:?}")))?,
            ),
            "pmf" => {
                let vals: std::result::Result<Vec<f64>, _> =
                    arg.split(',').map(|s| s.trim().parse::<f64>()).collect();
                Self::from_pmf(&vals.map_err(|_| bad(format!("bad pmf list {arg:?}")))?)
            }
            other => Err(bad(format!("unknown family {other:?}"))),
        }
    }

    pub fn spec_string(&self) -> String {
        match self.family {
            Family::Poisson(mu) => format!("poisson:{mu}"),
            Family::Geometric(p) => format!("geometric:{p}"),
            Family::Regular(r) => format!("regular:{r}"),
            Family::Explicit => {
                let parts: Vec<String> = self.pmf.iter().map(|p| p.to_string()).collect();
                format!("pmf:{}", parts.join(","))
            }
        }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn truncation_tail_mass(&self) -> f64 {
        self.truncation_tail_mass
    }

    pub fn max_degree(&self) -> u32 {
        self.pmf.len() as u32 - 1
    }

    /// Raw moment `E[D^i]` for i = 1..=5.
    pub fn moment(&self, i: u32) -> f64 {
        assert!((1..=5).contains(&i), "moment order must be in 1..=5");
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as f64).powi(i as i32) * p)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Factorial moment `E[D (D-1) ... (D-k+1)]` for k = 1..=3.
    pub fn factorial_moment(&self, k: u32) -> f64 {
        assert!((1..=3).contains(&k), "factorial moment order must be in 1..=3");
        self.pmf
            .iter()
            .enumerate()
            .map(|(d, &p)| falling(d as f64, k) * p)
            .sum()
    }

    /// Discriminant of the phase transition: `-mu3/mu1 + 3 (mu2 - mu1)`.
    /// Positive means the evolving-SI transition is discontinuous, negative
    /// continuous.
    pub fn phase_discriminant(&self) -> f64 {
        let mu1 = self.factorial_moment(1);
        let mu2 = self.factorial_moment(2);
        let mu3 = self.factorial_moment(3);
        -mu3 / mu1 + 3.0 * (mu2 - mu1)
    }

    /// Critical rewiring threshold `alpha_c = m2 - 2 m1`.
    pub fn alpha_c(&self) -> f64 {
        self.moment(2) - 2.0 * self.moment(1)
    }

    /// Moments plus critical values at the given rewiring and recovery rates.
    /// `lambda_c = (gamma + rho) m1 / (m2 - 2 m1)` when `alpha_c > 0`;
    /// otherwise the graph has no giant component for any infection rate and
    /// `lambda_c` is reported as `None`.
    pub fn critical_values(&self, rho: f64, gamma: f64) -> Result<CriticalSummary> {
        if rho < 0.0 || gamma < 0.0 {
            return Err(Error::InvalidArgument(
                "rates must be nonnegative".into(),
            ));
        }
        let (m1, m2, m3) = (self.moment(1), self.moment(2), self.moment(3));
        let alpha_c = m2 - 2.0 * m1;
        Ok(CriticalSummary {
            m1,
            m2,
            m3,
            mu1: self.factorial_moment(1),
            mu2: self.factorial_moment(2),
            mu3: self.factorial_moment(3),
            alpha_c,
            delta: self.phase_discriminant(),
            lambda_c: (alpha_c > 0.0).then(|| (gamma + rho) * m1 / alpha_c),
        })
    }

    /// Critical rewiring rate at fixed infection rate:
    /// `rho_c = lambda (m2 - 2 m1) / m1 - gamma` (None if not positive or no
    /// supercritical regime exists).
    pub fn critical_rho(&self, lambda: f64, gamma: f64) -> Option<f64> {
        let alpha_c = self.alpha_c();
        if alpha_c <= 0.0 {
            return None;
        }
        let rho_c = lambda * alpha_c / self.moment(1) - gamma;
        (rho_c > 0.0).then_some(rho_c)
    }

    /// Generating function `G` and its derivatives: order 0..=3 gives
    /// G(w), G'(w), G''(w), G'''(w) by direct summation of the truncated pmf.
    pub fn gf(&self, w: f64, order: u32) -> f64 {
        assert!(order <= 3, "generating function order must be 0..=3");
        let d = order as usize;
        let mut acc = 0.0;
        for k in (d..self.pmf.len()).rev() {
            acc = acc * w + falling(k as f64, order) * self.pmf[k];
        }
        acc
    }

    /// The half-edge log-ratio
    /// `f(w) = log(m1 w / (G'(w) + alpha (1-w) G(w))) + (alpha/2)(w-1)^2`,
    /// the logarithm of the limiting ratio of total to susceptible half-edges
    /// in the time-changed process. `f(1) = 0` exactly.
    pub fn halfedge_log_ratio(&self, alpha: f64, w: f64) -> Result<f64> {
        let m1 = self.gf(1.0, 1);
        let denom = self.gf(w, 1) + alpha * (1.0 - w) * self.gf(w, 0);
        if denom <= 0.0 {
            return Err(Error::Domain(format!(
                "nonpositive denominator {denom} at w={w}, alpha={alpha}"
            )));
        }
        Ok((m1 * w / denom).ln() + 0.5 * alpha * (w - 1.0) * (w - 1.0))
    }

    /// Closed form for the slope of the log-ratio at w = 1:
    /// `f'(1) = -((m2 - 2 m1)/m1 - alpha/m1) = (alpha - alpha_c)/m1`.
    pub fn log_ratio_slope_at_one(&self, alpha: f64) -> f64 {
        (alpha - self.alpha_c()) / self.moment(1)
    }

    /// Largest root `sigma` of the log-ratio in (0,1) and the limiting
    /// infected fraction `nu = 1 - exp(-(alpha/2)(sigma-1)^2) G(sigma)` of the
    /// upper-bounding process, for `alpha < alpha_c`.
    ///
    /// The root is located by scanning w downward from 1 - 1e-6 in steps of
    /// 1e-4 and bisecting the first sign change; no sign change anywhere on
    /// (0,1) means the zero set is empty and sigma = 0.
    pub fn final_size_limit(&self, alpha: f64) -> Result<FinalSizeLimit> {
        let alpha_c = self.alpha_c();
        if !(alpha < alpha_c) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {alpha} is not below alpha_c = {alpha_c}"
            )));
        }
        if alpha < 0.0 {
            return Err(Error::InvalidArgument("alpha must be nonnegative".into()));
        }
        let f = |w: f64| self.halfedge_log_ratio(alpha, w);

        const SCAN_START: f64 = 1.0 - 1e-6;
        const SCAN_STEP: f64 = 1e-4;
        let mut sigma = 0.0;
        let mut hi = SCAN_START;
        let mut f_hi = f(hi)?;
        // f > 0 just below 1 in the supercritical regime; find the first
        // crossing from above, which is the supremum of the zero set.
        if f_hi <= 0.0 {
            sigma = hi;
        } else {
            let mut lo = hi - SCAN_STEP;
            while lo > 0.0 {
                let f_lo = f(lo)?;
                if f_lo <= 0.0 {
                    // bisect [lo, hi]
                    let (mut a, mut b) = (lo, hi);
                    let mut f_b = f_hi;
                    for _ in 0..200 {
                        if b - a < 1e-10 {
                            break;
                        }
                        let mid = 0.5 * (a + b);
                        let f_mid = f(mid)?;
                        if f_mid <= 0.0 {
                            a = mid;
                        } else {
                            b = mid;
                            f_b = f_mid;
                        }
                    }
                    let _ = f_b;
                    sigma = 0.5 * (a + b);
                    break;
                }
                hi = lo;
                f_hi = f_lo;
                lo -= SCAN_STEP;
            }
        }

        let (star_holds, star_sample_min) = if sigma == 0.0 {
            (true, None)
        } else {
            // sample the left neighborhood (sigma - delta, sigma)
            let delta = (1e-3f64).min(sigma / 2.0);
            let mut minval = f64::INFINITY;
            let mut all_neg = true;
            const SAMPLES: usize = 32;
            for i in 1..=SAMPLES {
                let w = sigma - delta * i as f64 / (SAMPLES as f64 + 1.0);
                let val = f(w)?;
                minval = minval.min(val);
                if val >= 0.0 {
                    all_neg = false;
                }
            }
            (all_neg, Some(minval))
        };

        let nu = 1.0 - (-0.5 * alpha * (sigma - 1.0) * (sigma - 1.0)).exp() * self.gf(sigma, 0);
        Ok(FinalSizeLimit {
            sigma,
            nu,
            star_holds,
            star_sample_min,
        })
    }

    /// Survival probability of the two-phase branching process in which the
    /// first generation has Binomial(D, tau) offspring and later generations
    /// Binomial(D* - 1, tau), with tau = lambda / (lambda + rho).
    pub fn bp_survival(&self, lambda: f64, rho: f64) -> Result<f64> {
        if lambda < 0.0 || rho < 0.0 {
            return Err(Error::InvalidArgument("rates must be nonnegative".into()));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        Ok(self.bp_survival_tau(lambda / (lambda + rho)))
    }

    /// Same with an explicit per-edge transmission probability `tau` (used
    /// for the fixed-infection-time variants where tau is not lambda/(lambda+rho)).
    pub fn bp_survival_tau(&self, tau: f64) -> f64 {
        assert!((0.0..=1.0).contains(&tau));
        let m1 = self.moment(1);
        let r0 = tau * (self.moment(2) - m1) / m1;
        if r0 <= 1.0 {
            return 0.0;
        }
        // smallest fixed point of xi = Ghat(1 - tau + tau xi), approached
        // monotonically from 0 and polished with Newton steps
        let ghat = |z: f64| self.gf(z, 1) / m1;
        let ghat_prime = |z: f64| self.gf(z, 2) / m1;
        let mut xi = 0.0f64;
        for _ in 0..256 {
            let next = ghat(1.0 - tau + tau * xi);
            if (next - xi).abs() < FIXED_POINT_TOL {
                xi = next;
                break;
            }
            xi = next;
        }
        for _ in 0..64 {
            let z = 1.0 - tau + tau * xi;
            let g = ghat(z) - xi;
            if g.abs() < 1e-14 {
                break;
            }
            let dg = tau * ghat_prime(z) - 1.0;
            let step = g / dg;
            xi = (xi - step).clamp(0.0, 1.0 - 1e-16);
        }
        1.0 - self.gf(1.0 - tau + tau * xi, 0)
    }

    /// Deterministic curves of the time-changed dynamic construction at time
    /// t, with w = exp(-t).
    pub fn limit_curves(&self, alpha: f64, t: f64, k_max: usize) -> LimitCurves {
        assert!(t >= 0.0 && alpha >= 0.0);
        let w = (-t).exp();
        let m1 = self.moment(1);
        let shape = (-0.5 * alpha * (w - 1.0) * (w - 1.0)).exp();
        let x = m1 * w * w;
        let s = shape * self.gf(w, 0);
        let x_s = shape * w * (self.gf(w, 1) + alpha * (1.0 - w) * self.gf(w, 0));
        // s_k = exp(-(alpha/2)(1 - w^2)) w^k sum_{l<=k} p_{k-l} (alpha(1-w))^l / l!
        let front = (-0.5 * alpha * (1.0 - w * w)).exp();
        let a = alpha * (1.0 - w);
        let mut s_k = Vec::with_capacity(k_max + 1);
        let mut wk = 1.0;
        for k in 0..=k_max {
            let mut term = 1.0; // a^l / l!
            let mut acc = 0.0;
            for l in 0..=k {
                if let Some(&p) = self.pmf.get(k - l) {
                    acc += p * term;
                }
                term *= a / (l as f64 + 1.0);
            }
            s_k.push(front * wk * acc);
            wk *= w;
        }
        LimitCurves { x, s, x_s, s_k }
    }

    /// Sample one degree.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.gen();
        match self.cdf.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
            Ok(i) | Err(i) => (i.min(self.pmf.len() - 1)) as u32,
        }
    }

    /// Size-biased pmf `P(D* = j) = j p_j / m1`.
    pub fn size_biased_pmf(&self) -> Vec<f64> {
        let m1 = self.moment(1);
        self.pmf
            .iter()
            .enumerate()
            .map(|(j, &p)| j as f64 * p / m1)
            .collect()
    }
}

fn falling(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= x - i as f64;
    }
    acc
}

fn cumulative(pmf: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    pmf.iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

/// Truncation rule for named families: stop once the fifth-moment weight of
/// the current term is tiny and the geometric decay of the remaining tail
/// keeps its total below ~1e-12. `ratio` bounds p_{k+1}/p_k from above.
fn fifth_moment_tail_negligible(pmf: &[f64], k: usize, ratio: f64) -> bool {
    if pmf.len() > 100_000 {
        return true; // hard cap; unreachable for sane parameters
    }
    let term = pmf[k] * (k as f64).powi(5);
    if term >= 1e-16 {
        return false;
    }
    // ratio of successive k^5 p_k terms, slightly inflated for the k^5 growth
    let growth = ratio * (1.0 + 5.0 / k as f64).powi(5) * 1.05;
    growth < 0.999 && term / (1.0 - growth).max(1e-3) < 1e-13
}

/// Unique positive solution of `mu * (lambda/(lambda+rho)) *
/// (1 - exp(-(lambda+rho))) = 1`, the critical infection rate of the
/// fixed-infection-time models, found by bracketing and bisection to a
/// residual below 1e-10. Needs mu > 1; otherwise every infection rate is
/// subcritical.
pub fn fixed_time_critical_lambda(mu: f64, rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::InvalidArgument("rho must be nonnegative".into()));
    }
    if !(mu > 1.0) {
        return Err(Error::AlwaysSubcritical(format!(
            "mean degree {mu} <= 1: transmission probability can never reach 1/mu"
        )));
    }
    let g = |lambda: f64| {
        let s = lambda + rho;
        mu * (lambda / s) * (1.0 - (-s).exp()) - 1.0
    };
    let mut hi = 1.0;
    let mut grew = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        grew += 1;
        if grew > 200 {
            return Err(Error::AlwaysSubcritical(format!(
                "no critical rate below lambda = {hi}"
            )));
        }
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        let val = g(mid);
        if val.abs() < 1e-10 {
            return Ok(mid);
        }
        if val > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            return Ok(mid);
        }
    }
}

/// Smallest fixed point z0 in [0,1] of `z = exp(-mu tau (1 - z))`, found by
/// monotone iteration from 0 (Newton-polished). `1 - z0` is both the
/// outbreak probability and, for the deletion variant, the outbreak size.
/// Subcritical (`mu tau <= 1`) gives z0 = 1.
pub fn er_fixed_point(mu: f64, tau: f64) -> f64 {
    assert!(mu >= 0.0 && (0.0..=1.0).contains(&tau));
    let a = mu * tau;
    if a <= 1.0 {
        return 1.0;
    }
    let mut z = 0.0f64;
    for _ in 0..256 {
        let next = (-a * (1.0 - z)).exp();
        if (next - z).abs() < FIXED_POINT_TOL {
            return next;
        }
        z = next;
    }
    for _ in 0..64 {
        let e = (-a * (1.0 - z)).exp();
        let g = z - e;
        if g.abs() < 1e-14 {
            break;
        }
        let dg = 1.0 - a * e;
        z = (z - g / dg).clamp(0.0, 1.0 - 1e-16);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn moments_match_named_families() {
        let poi = DegreeDistribution::poisson(5.0).unwrap();
        assert!(close(poi.moment(1), 5.0, 1e-9));
        let reg = DegreeDistribution::regular(3).unwrap();
        assert_eq!(reg.moment(2), 9.0);
        let geo = DegreeDistribution::geometric(0.5).unwrap();
        assert!(close(geo.moment(1), 2.0, 1e-9));
    }

    #[test]
    fn factorial_moments_match_closed_forms() {
        let reg = DegreeDistribution::regular(3).unwrap();
        assert!(close(reg.factorial_moment(3), 6.0, 1e-12));
        let geo = DegreeDistribution::geometric(0.5).unwrap();
        assert!(close(geo.factorial_moment(2), 4.0, 1e-9));
        let poi = DegreeDistribution::poisson(2.0).unwrap();
        assert!(close(poi.factorial_moment(3), 8.0, 1e-9));
    }

    #[test]
    fn factorial_moment_identities() {
        for d in [
            DegreeDistribution::poisson(3.3).unwrap(),
            DegreeDistribution::geometric(0.3).unwrap(),
            DegreeDistribution::from_pmf(&[0.1, 0.2, 0.3, 0.25, 0.15]).unwrap(),
        ] {
            let (m1, m2, m3) = (d.moment(1), d.moment(2), d.moment(3));
            assert!(close(d.factorial_moment(1), m1, 1e-9));
            assert!(close(d.factorial_moment(2), m2 - m1, 1e-9));
            assert!(close(d.factorial_moment(3), m3 - 3.0 * m2 + 2.0 * m1, 1e-9));
        }
    }

    #[test]
    fn discriminant_examples() {
        assert!(close(
            DegreeDistribution::regular(3).unwrap().phase_discriminant(),
            7.0,
            1e-12
        ));
        assert!(close(
            DegreeDistribution::geometric(0.5)
                .unwrap()
                .phase_discriminant(),
            0.0,
            1e-9
        ));
        assert!(close(
            DegreeDistribution::poisson(2.0).unwrap().phase_discriminant(),
            2.0,
            1e-9
        ));
    }

    #[test]
    fn critical_values_examples() {
        let poi = DegreeDistribution::poisson(5.0).unwrap();
        let s = poi.critical_values(4.0, 0.0).unwrap();
        assert!(close(s.lambda_c.unwrap(), 1.0, 1e-9));
        assert!(close(s.alpha_c, 20.0, 1e-9));
        // critical rewiring rate at lambda = 1, gamma = 1
        assert!(close(poi.critical_rho(1.0, 1.0).unwrap(), 3.0, 1e-9));
        // 2-regular graph is a disjoint union of cycles: no supercritical regime
        let r2 = DegreeDistribution::regular(2).unwrap();
        let s2 = r2.critical_values(1.0, 0.0).unwrap();
        assert_eq!(s2.alpha_c, 0.0);
        assert!(s2.lambda_c.is_none());
    }

    #[test]
    fn fixed_time_critical_examples() {
        // rho = 0 reduces to mu (1 - e^-lambda) = 1
        let l = fixed_time_critical_lambda(5.0, 0.0).unwrap();
        assert!(close(l, -(1.0f64 - 0.2).ln(), 1e-9));
        assert!(matches!(
            fixed_time_critical_lambda(1.0, 3.0),
            Err(Error::AlwaysSubcritical(_))
        ));
        // residual really is below 1e-10
        let l54 = fixed_time_critical_lambda(5.0, 4.0).unwrap();
        let g = 5.0 * (l54 / (l54 + 4.0)) * (1.0 - (-(l54 + 4.0f64)).exp()) - 1.0;
        assert!(g.abs() < 1e-10);
    }

    #[test]
    fn gf_basics() {
        let poi = DegreeDistribution::poisson(5.0).unwrap();
        assert_eq!(poi.gf(1.0, 0), 1.0);
        assert!(close(poi.gf(1.0, 1), 5.0, 1e-9));
        let reg = DegreeDistribution::regular(3).unwrap();
        assert!(close(reg.gf(0.5, 0), 0.125, 1e-15));
    }

    #[test]
    fn log_ratio_zero_at_one_exactly() {
        for d in [
            DegreeDistribution::poisson(3.0).unwrap(),
            DegreeDistribution::geometric(0.4).unwrap(),
            DegreeDistribution::regular(4).unwrap(),
        ] {
            for alpha in [0.0, 0.7, 2.0] {
                assert_eq!(d.halfedge_log_ratio(alpha, 1.0).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn log_ratio_positive_near_one_supercritical() {
        // mean 3 with alpha at its critical value: positive on [0.9, 1)
        let poi = DegreeDistribution::poisson(3.0).unwrap();
        for w in [0.90, 0.95, 0.99] {
            assert!(poi.halfedge_log_ratio(6.0, w).unwrap() > 0.0);
        }
    }

    #[test]
    fn log_ratio_slope_matches_finite_difference() {
        let h = 1e-5;
        for (d, alphas) in [
            (DegreeDistribution::poisson(5.0).unwrap(), [3.0, 10.0]),
            (DegreeDistribution::geometric(0.5).unwrap(), [0.5, 1.5]),
            (DegreeDistribution::regular(3).unwrap(), [1.0, 3.0]),
        ] {
            for alpha in alphas {
                let fd = (d.halfedge_log_ratio(alpha, 1.0 + h).unwrap()
                    - d.halfedge_log_ratio(alpha, 1.0 - h).unwrap())
                    / (2.0 * h);
                assert!(
                    close(fd, d.log_ratio_slope_at_one(alpha), 1e-6),
                    "fd={fd} closed={}",
                    d.log_ratio_slope_at_one(alpha)
                );
            }
        }
    }

    #[test]
    fn second_derivative_at_critical_alpha_is_discriminant() {
        let h = 2.5e-4;
        for d in [
            DegreeDistribution::poisson(3.0).unwrap(),
            DegreeDistribution::poisson(1.4).unwrap(),
            DegreeDistribution::geometric(0.4).unwrap(),
            DegreeDistribution::regular(5).unwrap(),
        ] {
            let alpha_c = d.alpha_c();
            let f =
                |w: f64| d.halfedge_log_ratio(alpha_c, w).unwrap();
            let fd2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
            assert!(
                close(fd2, d.phase_discriminant(), 1e-4),
                "fd2={fd2} delta={}",
                d.phase_discriminant()
            );
        }
    }

    #[test]
    fn final_size_limit_regular_has_no_root() {
        // min degree 3: the log-ratio stays positive on (0,1), so sigma = 0
        // and everyone is infected in the limit.
        let reg = DegreeDistribution::regular(3).unwrap();
        let fs = reg.final_size_limit(1.5).unwrap();
        assert_eq!(fs.sigma, 0.0);
        assert!(close(fs.nu, 1.0, 1e-12));
        assert!(fs.star_holds);
    }

    #[test]
    fn final_size_limit_poisson_root_is_consistent() {
        // Distributions with mass at degree 0 or 1 force f -> -inf as w -> 0,
        // so the zero set is nonempty and sigma is its supremum.
        let poi = DegreeDistribution::poisson(3.0).unwrap();
        let fs = poi.final_size_limit(3.0).unwrap();
        assert!(fs.sigma > 0.0 && fs.sigma < 0.1, "sigma={}", fs.sigma);
        assert!(poi.halfedge_log_ratio(3.0, fs.sigma).unwrap().abs() < 1e-6);
        assert!(poi.halfedge_log_ratio(3.0, fs.sigma + 0.01).unwrap() > 0.0);
        assert!(poi.halfedge_log_ratio(3.0, fs.sigma - 0.01).unwrap() < 0.0);
        assert!(fs.star_holds);
        // nu is close to (but slightly below) the value ignoring the tiny root
        let approx = 1.0 - (-1.5f64).exp() * poi.pmf()[0];
        assert!(close(fs.nu, approx, 5e-3));
        assert!(fs.nu < approx);
    }

    #[test]
    fn final_size_limit_near_critical_continuous_family() {
        // mean 1.4 has a negative discriminant: sigma -> 1 and nu -> 0 as
        // alpha approaches alpha_c from below.
        let poi = DegreeDistribution::poisson(1.4).unwrap();
        let alpha_c = poi.alpha_c();
        let fs = poi.final_size_limit(alpha_c - 1e-3).unwrap();
        assert!(fs.sigma > 0.9, "sigma={}", fs.sigma);
        assert!(fs.nu < 0.05, "nu={}", fs.nu);
        assert!(fs.star_holds);
    }

    #[test]
    fn final_size_limit_requires_supercritical_alpha() {
        let poi = DegreeDistribution::poisson(2.0).unwrap();
        assert!(poi.final_size_limit(poi.alpha_c()).is_err());
        assert!(poi.final_size_limit(poi.alpha_c() + 1.0).is_err());
    }

    #[test]
    fn er_fixed_point_examples() {
        assert_eq!(er_fixed_point(5.0, 0.2), 1.0); // mu tau = 1
        assert_eq!(er_fixed_point(5.0, 0.0), 1.0);
        // independent oracle: plain iteration in the test
        let mut z = 0.0f64;
        for _ in 0..2000 {
            z = (-2.0 * (1.0 - z)).exp();
        }
        let z0 = er_fixed_point(4.0, 0.5);
        assert!(close(z0, z, 1e-9));
        assert!(close(1.0 - z0, 0.7968, 2e-4));
    }

    #[test]
    fn bp_survival_poisson_matches_er_fixed_point() {
        // size-biasing a Poisson leaves it unchanged, so the two solvers
        // must agree
        for (mu, lambda, rho) in [(5.0, 1.0, 1.0), (5.0, 1.2, 4.0), (2.0, 3.0, 1.0)] {
            let d = DegreeDistribution::poisson(mu).unwrap();
            let tau = lambda / (lambda + rho);
            let q = d.bp_survival(lambda, rho).unwrap();
            assert!(
                close(q, 1.0 - er_fixed_point(mu, tau), 1e-9),
                "q={q} mu={mu} tau={tau}"
            );
        }
    }

    #[test]
    fn bp_survival_subcritical_is_zero() {
        let d = DegreeDistribution::poisson(5.0).unwrap();
        // tau (m2 - m1)/m1 <= 1  <=>  tau <= 1/5
        assert_eq!(d.bp_survival_tau(0.2), 0.0);
        assert_eq!(d.bp_survival(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn bp_survival_monotone() {
        let d = DegreeDistribution::geometric(0.4).unwrap();
        let mut prev = -1.0;
        for i in 0..20 {
            let lambda = 0.2 + 0.2 * i as f64;
            let q = d.bp_survival(lambda, 2.0).unwrap();
            assert!(q >= prev - 1e-12);
            prev = q;
        }
        let mut prev = 2.0;
        for i in 0..20 {
            let rho = 0.3 * i as f64;
            let q = d.bp_survival(1.5, rho).unwrap();
            assert!(q <= prev + 1e-12);
            prev = q;
        }
    }

    #[test]
    fn limit_curves_initial_condition() {
        let d = DegreeDistribution::poisson(5.0).unwrap();
        let c = d.limit_curves(10.0, 0.0, 12);
        assert!(close(c.x, 5.0, 1e-9));
        assert!(close(c.s, 1.0, 1e-12));
        assert!(close(c.x_s, 5.0, 1e-9));
        for k in 0..=12 {
            assert!(close(c.s_k[k], d.pmf()[k], 1e-12));
        }
    }

    #[test]
    fn limit_curves_sum_identities() {
        let d = DegreeDistribution::poisson(2.0).unwrap();
        let alpha = 1.0;
        for t in [0.1, 0.5, 1.0] {
            // generous k range so the tails are negligible
            let c = d.limit_curves(alpha, t, 220);
            let sum: f64 = c.s_k.iter().sum();
            assert!(close(sum, c.s, 1e-10), "t={t} sum={sum} F0={}", c.s);
            let ksum: f64 = c.s_k.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
            assert!(close(ksum, c.x_s, 1e-8), "t={t} ksum={ksum} F1={}", c.x_s);
        }
    }

    #[test]
    fn limit_curves_log_ratio_identity() {
        let d = DegreeDistribution::poisson(2.0).unwrap();
        let alpha = 1.0;
        for t in [0.1, 0.5] {
            let w = (-t as f64).exp();
            let c = d.limit_curves(alpha, t, 10);
            let f = d.halfedge_log_ratio(alpha, w).unwrap();
            assert!(close(f.exp() * c.x_s, c.x, 1e-9));
        }
    }

    #[test]
    fn parse_grammar() {
        assert!(matches!(
            DegreeDistribution::parse("poisson:5.0").unwrap().family(),
            Family::Poisson(m) if *m == 5.0
        ));
        assert!(matches!(
            DegreeDistribution::parse("geometric:0.5").unwrap().family(),
            Family::Geometric(_)
        ));
        assert!(matches!(
            DegreeDistribution::parse("regular:3").unwrap().family(),
            Family::Regular(3)
        ));
        let d = DegreeDistribution::parse("pmf:0.5,0.25,0.25").unwrap();
        assert_eq!(d.pmf().len(), 3);
        assert!(DegreeDistribution::parse("zipf:2").is_err());
        assert!(DegreeDistribution::parse("poisson").is_err());
        assert!(DegreeDistribution::parse("pmf:1.0").is_err()); // no mass above 0
    }

    #[test]
    fn truncation_keeps_fifth_moment() {
        // exact fifth moments: the truncation rule must not visibly bite
        let poi = DegreeDistribution::poisson(5.0).unwrap();
        // E D^5 for Poisson(5): Bell-polynomial value 52 + ... compute via
        // Touchard: sum_{j} S(5,j) mu^j with Stirling numbers {1,15,25,10,1}
        let mu: f64 = 5.0;
        let exact = mu + 15.0 * mu.powi(2) + 25.0 * mu.powi(3) + 10.0 * mu.powi(4) + mu.powi(5);
        assert!(close(poi.moment(5), exact, 1e-8 * exact));
        let geo = DegreeDistribution::geometric(0.1).unwrap();
        // third factorial moment of geometric on {1,..}: 6 (1-p)^2 / p^3
        assert!(close(geo.factorial_moment(3), 6.0 * 0.81 / 0.001, 1e-6));
    }

    #[test]
    fn sampling_matches_pmf() {
        let d = DegreeDistribution::poisson(3.0).unwrap();
        let mut rng = crate::rng::rng_from(77, 0);
        let n = 200_000;
        let mut counts = vec![0u32; d.pmf().len()];
        for _ in 0..n {
            counts[d.sample(&mut rng) as usize] += 1;
        }
        for k in 0..8 {
            let p = d.pmf()[k];
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (counts[k] as f64 / n as f64 - p).abs() < 4.0 * se + 1e-4,
                "k={k}"
            );
        }
    }
}
