//! Post-data severity β(δ) = P(T ≥ t_obs; μ = μ₀ + δ): the chance of a
//! statistic at least as large as the observed one when the true
//! discrepancy is δ.
//!
//! For the known-σ normal mean, β(δ) = Φ(δ√n/σ₀ − t_obs). For the unknown-σ
//! mean the statistic is noncentral t; β is estimated by Monte Carlo
//! integration over the chi-squared part, with the normal part integrated
//! analytically and σ replaced by the sample standard deviation.

use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::models::{Alternative, Family, TestSpec};
use crate::rng::StreamFactory;
use crate::scalar::Scalar;
use crate::significance::{Direction, TestResult};

pub const DEFAULT_MC_DRAWS: usize = 1_000_000;
pub const DEFAULT_GRID_POINTS: usize = 101;

const CHUNK: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityOptions {
    /// Monte Carlo draws for families without a closed form.
    pub mc_draws: usize,
    pub seed: u64,
}

impl Default for SeverityOptions {
    fn default() -> Self {
        SeverityOptions { mc_draws: DEFAULT_MC_DRAWS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeverityMethod {
    ClosedForm,
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityEstimate<T> {
    pub beta: T,
    /// Zero for the closed form.
    pub standard_error: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityPoint<T> {
    pub delta: T,
    pub beta: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityCurve<T> {
    pub spec: TestSpec<T>,
    pub t_obs: T,
    pub n: usize,
    pub method: SeverityMethod,
    pub grid: Vec<SeverityPoint<T>>,
}

impl<T: Scalar> SeverityCurve<T> {
    /// Smallest grid discrepancy whose severity reaches `threshold`.
    pub fn smallest_delta_reaching(&self, threshold: T) -> Option<SeverityPoint<T>> {
        self.grid.iter().copied().find(|p| p.beta >= threshold)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,beta\n");
        for p in &self.grid {
            out.push_str(&format!("{},{}\n", p.delta, p.beta));
        }
        out
    }
}

/// +1 when discrepancies are probed above the null, −1 below.
fn orientation<T: Scalar>(result: &TestResult<T>) -> T {
    let below = match result.spec.alternative {
        Alternative::Less => true,
        Alternative::Greater => false,
        Alternative::Dividing => result.direction == Direction::Lower,
    };
    if below {
        -T::one()
    } else {
        T::one()
    }
}

/// Severity evaluator bound to one test result. The Monte Carlo path
/// draws its chi-squared variates once, so every δ shares them and β is
/// exactly monotone in δ.
struct Evaluator<T> {
    oriented_t: T,
    root_n: T,
    scale: T,
    kind: EvaluatorKind<T>,
}

enum EvaluatorKind<T> {
    Closed,
    MonteCarlo { scaled_roots: Vec<T>, draws: usize, seed: u64 },
}

impl<T: Scalar> Evaluator<T> {
    fn new(result: &TestResult<T>, opts: &SeverityOptions) -> Result<Self> {
        let root_n = T::from_count(result.n).sqrt();
        let oriented_t = orientation(result) * result.t_obs;
        match result.spec.family {
            Family::NormalKnownSigma { sigma0, .. } => Ok(Evaluator {
                oriented_t,
                root_n,
                scale: sigma0,
                kind: EvaluatorKind::Closed,
            }),
            Family::NormalUnknownSigma { .. } => {
                if opts.mc_draws < 2 {
                    return Err(Error::domain("Monte Carlo severity needs at least 2 draws"));
                }
                let scale = result
                    .statistic
                    .summary
                    .sd
                    .ok_or_else(|| Error::contract("unknown-sigma severity needs the sample standard deviation"))?;
                let df = result.n - 1;
                let chi = rand_distr::ChiSquared::new(df as f64).map_err(|e| Error::domain(e.to_string()))?;
                let factory = StreamFactory::new(opts.seed);
                let chunks = opts.mc_draws.div_ceil(CHUNK);
                let scaled_roots: Vec<T> = (0..chunks)
                    .into_par_iter()
                    .flat_map_iter(|c| {
                        let mut rng = factory.stream(c as u64);
                        let len = CHUNK.min(opts.mc_draws - c * CHUNK);
                        (0..len)
                            .map(|_| T::lit((chi.sample(&mut rng) / df as f64).sqrt()))
                            .collect::<Vec<_>>()
                    })
                    .collect();
                Ok(Evaluator {
                    oriented_t,
                    root_n,
                    scale,
                    kind: EvaluatorKind::MonteCarlo { scaled_roots, draws: opts.mc_draws, seed: opts.seed },
                })
            }
            _ => Err(Error::Capability {
                operation: "severity",
                family: result.spec.family.name().to_string(),
            }),
        }
    }

    fn method(&self) -> SeverityMethod {
        match self.kind {
            EvaluatorKind::Closed => SeverityMethod::ClosedForm,
            EvaluatorKind::MonteCarlo { draws, seed, .. } => SeverityMethod::MonteCarlo { draws, seed },
        }
    }

    fn noncentrality(&self, delta: T) -> T {
        delta * self.root_n / self.scale
    }

    fn estimate(&self, delta: T) -> SeverityEstimate<T> {
        let lambda = self.noncentrality(delta);
        let normal = ContinuousDistribution::StandardNormal;
        match &self.kind {
            EvaluatorKind::Closed => SeverityEstimate {
                beta: normal.cdf(lambda - self.oriented_t).expect("finite argument"),
                standard_error: T::zero(),
            },
            EvaluatorKind::MonteCarlo { scaled_roots, .. } => {
                // P((Z + λ)/W ≥ t) = E_W[Φ(λ − tW)]
                let t = self.oriented_t;
                let partials: Vec<(T, T)> = scaled_roots
                    .par_chunks(CHUNK)
                    .map(|chunk| {
                        chunk.iter().fold((T::zero(), T::zero()), |(s, s2), &w| {
                            let v = normal.cdf(lambda - t * w).expect("finite argument");
                            (s + v, s2 + v * v)
                        })
                    })
                    .collect();
                let (sum, sum_sq) = partials
                    .into_iter()
                    .fold((T::zero(), T::zero()), |(a, b), (s, s2)| (a + s, b + s2));
                let m = T::from_count(scaled_roots.len());
                let mean = sum / m;
                let var = ((sum_sq / m - mean * mean) * m / (m - T::one())).max(T::zero());
                SeverityEstimate { beta: mean, standard_error: (var / m).sqrt() }
            }
        }
    }
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta >= T::zero() && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("discrepancy must be a finite nonnegative number, got {delta}")))
    }
}

/// β(δ) = P(T ≥ t_obs; μ = μ₀ + δ), with the inequality and the shift
/// mirrored for lower-direction tests.
pub fn severity_at<T: Scalar>(result: &TestResult<T>, delta: T) -> Result<T> {
    severity_estimate(result, delta, &SeverityOptions::default()).map(|e| e.beta)
}

pub fn severity_estimate<T: Scalar>(
    result: &TestResult<T>,
    delta: T,
    opts: &SeverityOptions,
) -> Result<SeverityEstimate<T>> {
    check_delta(delta)?;
    Ok(Evaluator::new(result, opts)?.estimate(delta))
}

/// Severity on a uniform grid of `points` discrepancies over [0, delta_max].
pub fn severity_curve<T: Scalar>(
    result: &TestResult<T>,
    delta_max: T,
    points: usize,
    opts: &SeverityOptions,
) -> Result<SeverityCurve<T>> {
    if points < 2 {
        return Err(Error::domain(format!("a severity curve needs at least 2 points, got {points}")));
    }
    if !(delta_max > T::zero() && delta_max.is_finite()) {
        return Err(Error::domain(format!("delta_max must be positive, got {delta_max}")));
    }
    let eval = Evaluator::new(result, opts)?;
    let last = T::from_count(points - 1);
    let grid = (0..points)
        .map(|i| {
            let delta = delta_max * T::from_count(i) / last;
            SeverityPoint { delta, beta: eval.estimate(delta).beta }
        })
        .collect();
    Ok(SeverityCurve {
        spec: result.spec,
        t_obs: result.t_obs,
        n: result.n,
        method: eval.method(),
        grid,
    })
}

/// Default upper end of the severity grid: the discrepancy where β reaches
/// Φ(4), or one standard error when that is not positive.
pub fn default_delta_max<T: Scalar>(result: &TestResult<T>) -> Result<T> {
    let scale = match result.spec.family {
        Family::NormalKnownSigma { sigma0, .. } => sigma0,
        Family::NormalUnknownSigma { .. } => result
            .statistic
            .summary
            .sd
            .ok_or_else(|| Error::contract("missing sample standard deviation"))?,
        _ => {
            return Err(Error::Capability {
                operation: "severity",
                family: result.spec.family.name().to_string(),
            })
        }
    };
    let span = (T::lit(4.0) + orientation(result) * result.t_obs).max(T::one());
    Ok(span * scale / T::from_count(result.n).sqrt())
}

/// Discrepancy δ at which β(δ) equals `beta_target`.
pub fn discrepancy_for_severity<T: Scalar>(
    result: &TestResult<T>,
    beta_target: T,
    opts: &SeverityOptions,
) -> Result<T> {
    if !(beta_target > T::zero() && beta_target < T::one()) {
        return Err(Error::domain(format!("target severity must lie in (0, 1), got {beta_target}")));
    }
    let eval = Evaluator::new(result, opts)?;
    let at_zero = eval.estimate(T::zero()).beta;
    if beta_target < at_zero {
        return Err(Error::domain(format!(
            "target severity {beta_target} is below β(0) = {at_zero}; no nonnegative discrepancy attains it"
        )));
    }
    if let EvaluatorKind::Closed = eval.kind {
        let z = ContinuousDistribution::StandardNormal.quantile(beta_target)?;
        return Ok((z + eval.oriented_t) * eval.scale / eval.root_n);
    }
    let mut lo = T::zero();
    let mut hi = eval.scale / eval.root_n;
    while eval.estimate(hi).beta < beta_target {
        lo = hi;
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::domain("target severity not attained"));
        }
    }
    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval.estimate(mid).beta < beta_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::lit(1e-12) * hi.abs().max(T::one()) {
            break;
        }
    }
    Ok(lo + (hi - lo) * T::lit(0.5))
}

/// Probability of a result at least as extreme as observed when the
/// discrepancy is only δ. Values near one mean the small p is not evidence
/// of a discrepancy beyond δ.
pub fn oversensitivity_check<T: Scalar>(result: &TestResult<T>, delta: T) -> Result<T> {
    severity_at(result, delta)
}

/// Pre-data power of the level-α test against μ₀ + δ (known σ only).
/// Contrasts with severity: it depends on α, not on the observed result.
pub fn power_at<T: Scalar>(spec: &TestSpec<T>, n: usize, delta: T, alpha: T) -> Result<T> {
    check_delta(delta)?;
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    match spec.family {
        Family::NormalKnownSigma { sigma0, .. } => {
            let normal = ContinuousDistribution::StandardNormal;
            let cutoff = normal.quantile(T::one() - alpha)?;
            normal.cdf(delta * T::from_count(n).sqrt() / sigma0 - cutoff)
        }
        _ => Err(Error::Capability { operation: "power", family: spec.family.name().to_string() }),
    }
}
