//! Monte Carlo harness that replays the hypothetical repetitions behind
//! every error-probability claim made elsewhere in the crate.
//!
//! Replicate `i` draws only from substream `i` of the plan's seed, and
//! per-replicate outcomes are merged in replicate order, so reports are
//! identical for any thread count.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::{interval_from_summary, Sidedness};
use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::models::{Alternative, Family, Sample, Summary, TestSpec};
use crate::rng::{Stream, StreamFactory};
use crate::selection::{adjust_hunting, fdr_select, FdrInput, HuntingScenario};
use crate::severity::severity_at;
use crate::significance::{run_test_summary, two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NullCalibration,
    HuntingFwer,
    FdrControl,
    SeverityCalibration,
    CoverageCheck,
    SpecSearch,
}

fn default_spec() -> TestSpec<f64> {
    TestSpec { family: Family::NormalKnownSigma { mu0: 0.0, sigma0: 1.0 }, alternative: Alternative::Greater }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub scenario: Scenario,
    #[serde(default = "default_spec")]
    pub spec: TestSpec<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: Scenario,
    pub estimate: f64,
    pub standard_error: f64,
    /// Value the estimate is checked against, where one is defined.
    pub target: Option<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl SimulationReport {
    /// |estimate − target| in standard errors.
    pub fn z_score(&self) -> Option<f64> {
        self.target.map(|t| (self.estimate - t) / self.standard_error.max(f64::MIN_POSITIVE))
    }

    /// True when the target lies within `k` standard errors of the estimate.
    pub fn within(&self, k: f64) -> Option<bool> {
        self.target.map(|t| (self.estimate - t).abs() <= k * self.standard_error)
    }
}

/// Line and column (both 1-based) of a byte offset.
pub(crate) fn line_column(text: &str, offset: usize) -> (u64, u64) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() as u64 + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u64 + 1;
    (line, column)
}

impl SimulationPlan {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let plan: SimulationPlan = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
            Error::Parse { line, column, message: e.message().to_string() }
        })?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::contract(format!("cannot read plan {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("threads must be at least 1"));
        }
        self.spec.validate()
    }

    fn param(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| Error::contract(format!("scenario {:?} requires parameter '{key}'", self.scenario)))
    }

    fn param_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn count_param(&self, key: &str, default: Option<usize>) -> Result<usize> {
        let v = match (self.params.get(key), default) {
            (Some(&v), _) => v,
            (None, Some(d)) => return Ok(d),
            (None, None) => return self.param(key).map(|v| v as usize),
        };
        if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
            Ok(v as usize)
        } else {
            Err(Error::domain(format!("parameter '{key}' must be a nonnegative integer, got {v}")))
        }
    }

    fn probability_param(&self, key: &str) -> Result<f64> {
        let v = self.param(key)?;
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err(Error::domain(format!("parameter '{key}' must lie in (0, 1), got {v}")))
        }
    }
}

/// Draws a sample of size `n` from the spec's family with the location
/// shifted by `shift` from the null value, and returns its summary.
///
/// Normal data use the `sigma` parameter when the family does not fix σ;
/// Poisson data use the mean `lambda`.
pub fn draw_summary<R: Rng + ?Sized>(
    spec: &TestSpec<f64>,
    shift: f64,
    n: usize,
    sigma: f64,
    lambda: f64,
    rng: &mut R,
) -> Result<Summary<f64>> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let summary = match spec.family {
        Family::NormalKnownSigma { mu0, sigma0 } => normal_sample(mu0 + shift, sigma0, n, rng).summarize()?,
        Family::NormalUnknownSigma { mu0 } => normal_sample(mu0 + shift, sigma, n, rng).summarize()?,
        Family::BinomialProportion { p0 } => {
            let p = (p0 + shift).clamp(0.0, 1.0);
            let count = Binomial::new(n as u64, p).map_err(|e| Error::domain(e.to_string()))?.sample(rng);
            Summary { n, mean: count as f64 / n as f64, sd: None }
        }
        Family::PoissonDispersion => {
            let dist = Poisson::new(lambda).map_err(|e| Error::domain(e.to_string()))?;
            Sample::new((0..n).map(|_| dist.sample(&mut *rng)).collect()).summarize()?
        }
    };
    Ok(summary)
}

fn normal_sample<R: Rng + ?Sized>(mu: f64, sigma: f64, n: usize, rng: &mut R) -> Sample<f64> {
    Sample::new(
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut *rng);
                mu + sigma * z
            })
            .collect(),
    )
}

/// Observed statistics from `replicates` samples drawn under the null.
pub fn null_statistics(spec: &TestSpec<f64>, n: usize, replicates: usize, seed: u64, lambda: f64) -> Result<Vec<f64>> {
    let factory = StreamFactory::new(seed);
    (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.stream(i as u64);
            let s = draw_summary(spec, 0.0, n, 1.0, lambda, &mut rng)?;
            run_test_summary(spec, &s).map(|r| r.t_obs)
        })
        .collect()
}

/// Two-sided p-value for the least-squares slope of `y` on `x`.
pub fn slope_pvalue(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::domain("slope test needs matching x and y with at least 3 points"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate { quantity: "variance of x" });
    }
    let slope = sxy / sxx;
    let rss = (syy - slope * sxy).max(0.0);
    if rss == 0.0 {
        return Ok(0.0);
    }
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    let t = slope / se;
    let dist = ContinuousDistribution::student_t((n - 2) as u32)?;
    two_sided(dist.sf(t)?, dist.cdf(t)?)
}

/// Smallest slope p-value over the identity and log-log specifications
/// fitted to the same positive data.
pub fn spec_search_min_p(x: &[f64], y: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Ok(slope_pvalue(x, y)?.min(slope_pvalue(&lx, &ly)?))
}

enum Estimand {
    Proportion,
    Mean,
}

pub fn run_simulation(plan: &SimulationPlan) -> Result<SimulationReport> {
    plan.validate()?;
    match plan.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?
            .install(|| simulate(plan)),
        None => simulate(plan),
    }
}

fn replicate_all<F>(plan: &SimulationPlan, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut Stream) -> Result<f64> + Sync,
{
    let factory = StreamFactory::new(plan.seed);
    (0..plan.replicates)
        .into_par_iter()
        .map(|i| f(&mut factory.stream(i as u64)))
        .collect()
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn simulate(plan: &SimulationPlan) -> Result<SimulationReport> {
    let spec = plan.spec;
    let (outcomes, target, estimand) = match plan.scenario {
        Scenario::NullCalibration => {
            let alpha = plan.probability_param("alpha")?;
            let n = plan.count_param("n", Some(10))?;
            let sigma = plan.param_or("sigma", 1.0);
            let lambda = plan.param_or("lambda", 5.0);
            let out = replicate_all(plan, |rng| {
                let s = draw_summary(&spec, 0.0, n, sigma, lambda, rng)?;
                Ok(indicator(run_test_summary(&spec, &s)?.p_reported <= alpha))
            })?;
            (out, Some(alpha), Estimand::Proportion)
        }
        Scenario::HuntingFwer => {
            let alpha = plan.probability_param("alpha")?;
            let k = plan.count_param("k", None)?;
            let n = plan.count_param("n", Some(1))?;
            let sigma = plan.param_or("sigma", 1.0);
            let lambda = plan.param_or("lambda", 5.0);
            let target = adjust_hunting(&HuntingScenario { k, p_min: alpha })?;
            let out = replicate_all(plan, |rng| {
                let mut min_p = 1.0f64;
                for _ in 0..k {
                    let s = draw_summary(&spec, 0.0, n, sigma, lambda, rng)?;
                    min_p = min_p.min(run_test_summary(&spec, &s)?.p_reported);
                }
                Ok(indicator(min_p <= alpha))
            })?;
            (out, Some(target), Estimand::Proportion)
        }
        Scenario::FdrControl => {
            let m = plan.count_param("m", None)?;
            let m0 = plan.count_param("m0", None)?;
            let q = plan.probability_param("q")?;
            let effect = plan.param_or("effect", 3.0);
            if m == 0 || m0 > m {
                return Err(Error::domain("FDR scenario needs 0 <= m0 <= m and m >= 1"));
            }
            let normal = ContinuousDistribution::StandardNormal;
            let out = replicate_all(plan, |rng| {
                let pvalues = (0..m)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(&mut *rng);
                        let z = if j < m0 { z } else { z + effect };
                        normal.sf(z)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let sel = fdr_select(&FdrInput { pvalues, q })?;
                let false_discoveries = sel.selected.iter().filter(|&&j| j < m0).count();
                Ok(false_discoveries as f64 / sel.selected.len().max(1) as f64)
            })?;
            (out, Some(q * m0 as f64 / m as f64), Estimand::Mean)
        }
        Scenario::SeverityCalibration => {
            let t_obs = plan.param("t_obs")?;
            let n = plan.count_param("n", None)?;
            let delta = plan.param("delta")?;
            let Family::NormalKnownSigma { mu0, sigma0 } = spec.family else {
                return Err(Error::Capability {
                    operation: "severity calibration",
                    family: spec.family.name().to_string(),
                });
            };
            if n == 0 {
                return Err(Error::domain("n must be at least 1"));
            }
            let root_n = (n as f64).sqrt();
            // A result with the requested observed statistic.
            let observed = run_test_summary(&spec, &Summary { n, mean: mu0 + t_obs * sigma0 / root_n, sd: None })?;
            let beta = severity_at(&observed, delta)?;
            let sign = if observed.spec.alternative == Alternative::Less { -1.0 } else { 1.0 };
            let shifted_mean = mu0 + sign * delta;
            let out = replicate_all(plan, |rng| {
                // The sample mean is sufficient; draw it directly.
                let z: f64 = StandardNormal.sample(&mut *rng);
                let mean = shifted_mean + sigma0 / root_n * z;
                let t = root_n * (mean - mu0) / sigma0;
                Ok(indicator(sign * t >= sign * observed.t_obs))
            })?;
            (out, Some(beta), Estimand::Proportion)
        }
        Scenario::CoverageCheck => {
            let level = plan.probability_param("level")?;
            let n = plan.count_param("n", None)?;
            let sigma = plan.param_or("sigma", 1.0);
            let mu0 = spec.family.null_location().unwrap_or(0.0);
            let mu_true = plan.param_or("mu_true", mu0);
            let out = replicate_all(plan, |rng| {
                let s = draw_summary(&spec, mu_true - mu0, n, sigma, 0.0, rng)?;
                Ok(indicator(interval_from_summary(&spec, &s, level, Sidedness::TwoSided)?.contains(mu_true)))
            })?;
            (out, Some(level), Estimand::Proportion)
        }
        Scenario::SpecSearch => {
            let n = plan.count_param("n", Some(30))?;
            let alpha = plan.probability_param("alpha").or_else(|e| match e {
                Error::Contract(_) => Ok(0.05),
                other => Err(other),
            })?;
            let cutoff = plan.param_or("observed_min_p", alpha);
            let spread = plan.param_or("log_sd", 1.0);
            let out = replicate_all(plan, |rng| {
                let mut positive = || {
                    let z: f64 = StandardNormal.sample(&mut *rng);
                    (spread * z).exp()
                };
                let x: Vec<f64> = (0..n).map(|_| positive()).collect();
                let y: Vec<f64> = (0..n).map(|_| positive()).collect();
                Ok(indicator(spec_search_min_p(&x, &y)? <= cutoff))
            })?;
            (out, None, Estimand::Proportion)
        }
    };
    let r = outcomes.len() as f64;
    let estimate = outcomes.iter().sum::<f64>() / r;
    let standard_error = match estimand {
        Estimand::Proportion => (estimate * (1.0 - estimate) / r).sqrt(),
        Estimand::Mean => {
            let var = if outcomes.len() > 1 {
                outcomes.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (r - 1.0)
            } else {
                0.0
            };
            (var / r).sqrt()
        }
    };
    Ok(SimulationReport {
        scenario: plan.scenario,
        estimate,
        standard_error,
        target,
        replicates: plan.replicates,
        seed: plan.seed,
        params: plan.params.clone(),
    })
}
