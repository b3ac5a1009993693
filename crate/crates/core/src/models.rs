//! Model families and the test statistics they induce.
//!
//! Every statistic is oriented so that larger values are more discordant
//! with the null in the direction of the upper alternative.

use serde::{Deserialize, Serialize};

use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family<T> {
    /// Normal mean with known standard deviation `sigma0`.
    NormalKnownSigma { mu0: T, sigma0: T },
    /// Normal mean with the standard deviation estimated from the sample.
    NormalUnknownSigma { mu0: T },
    /// Bernoulli success probability, tested with the score statistic.
    BinomialProportion { p0: T },
    /// Index of dispersion for Poisson counts.
    PoissonDispersion,
}

impl<T: Scalar> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::NormalKnownSigma { .. } => "normal-known",
            Family::NormalUnknownSigma { .. } => "normal-unknown",
            Family::BinomialProportion { .. } => "binomial",
            Family::PoissonDispersion => "poisson-dispersion",
        }
    }

    /// Null value of the location parameter, where the family has one.
    pub fn null_location(&self) -> Option<T> {
        match *self {
            Family::NormalKnownSigma { mu0, .. } | Family::NormalUnknownSigma { mu0 } => Some(mu0),
            Family::BinomialProportion { p0 } => Some(p0),
            Family::PoissonDispersion => None,
        }
    }

    /// Same family with the null location moved to `mu0`.
    pub fn with_null_location(&self, mu0: T) -> Result<Family<T>> {
        match *self {
            Family::NormalKnownSigma { sigma0, .. } => Ok(Family::NormalKnownSigma { mu0, sigma0 }),
            Family::NormalUnknownSigma { .. } => Ok(Family::NormalUnknownSigma { mu0 }),
            Family::BinomialProportion { .. } => Ok(Family::BinomialProportion { p0: mu0 }),
            Family::PoissonDispersion => Err(Error::Capability {
                operation: "relocating the null",
                family: self.name().to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
    /// Both directions matter; the null divides them.
    Dividing,
}

impl std::str::FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" | "upper" => Ok(Alternative::Greater),
            "less" | "lower" => Ok(Alternative::Less),
            "dividing" | "two-sided" => Ok(Alternative::Dividing),
            other => Err(Error::domain(format!("unknown alternative '{other}'"))),
        }
    }
}

/// A model family, null value and alternative direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec<T> {
    pub family: Family<T>,
    pub alternative: Alternative,
}

impl<T: Scalar> TestSpec<T> {
    pub fn new(family: Family<T>, alternative: Alternative) -> Result<Self> {
        let spec = TestSpec { family, alternative };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::NormalKnownSigma { mu0, sigma0 } => {
                if !mu0.is_finite() {
                    return Err(Error::domain("mu0 must be finite"));
                }
                if !(sigma0 > T::zero() && sigma0.is_finite()) {
                    return Err(Error::domain(format!("sigma0 must be positive, got {sigma0}")));
                }
            }
            Family::NormalUnknownSigma { mu0 } => {
                if !mu0.is_finite() {
                    return Err(Error::domain("mu0 must be finite"));
                }
            }
            Family::BinomialProportion { p0 } => {
                if !(p0 > T::zero() && p0 < T::one()) {
                    return Err(Error::domain(format!("p0 must lie in (0, 1), got {p0}")));
                }
            }
            Family::PoissonDispersion => {
                if self.alternative == Alternative::Less {
                    return Err(Error::domain(
                        "the dispersion test admits only the greater (overdispersion) or dividing alternative",
                    ));
                }
            }
        }
        Ok(())
    }

    fn min_n(&self) -> usize {
        match self.family {
            Family::NormalUnknownSigma { .. } | Family::PoissonDispersion => 2,
            _ => 1,
        }
    }
}

/// Raw observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(values: Vec<T>) -> Self {
        Sample { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Checks the family-specific invariants on the raw values.
    pub fn validate_for(&self, spec: &TestSpec<T>) -> Result<()> {
        let min = spec.min_n();
        if self.n() < min {
            return Err(Error::domain(format!(
                "{} requires at least {min} observations, got {}",
                spec.family.name(),
                self.n()
            )));
        }
        if let Some(bad) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("observation {bad} is not finite")));
        }
        match spec.family {
            Family::BinomialProportion { .. } => {
                if let Some(bad) = self.values.iter().position(|&v| v != T::zero() && v != T::one()) {
                    return Err(Error::domain(format!("binomial observation {bad} is not 0 or 1")));
                }
            }
            Family::PoissonDispersion => {
                if let Some(bad) = self.values.iter().position(|&v| v < T::zero() || v.fract() != T::zero()) {
                    return Err(Error::domain(format!(
                        "Poisson observation {bad} is not a nonnegative integer"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn summarize(&self) -> Result<Summary<T>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::domain("empty sample"));
        }
        let nt = T::from_count(n);
        let mean = self.values.iter().fold(T::zero(), |acc, &v| acc + v) / nt;
        let sd = (n >= 2).then(|| {
            let ss = self
                .values
                .iter()
                .fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean));
            (ss / T::from_count(n - 1)).sqrt()
        });
        Ok(Summary { n, mean, sd })
    }
}

/// Sufficient summaries: size, mean and (n−1)-denominator standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary<T> {
    pub n: usize,
    pub mean: T,
    pub sd: Option<T>,
}

/// Observed statistic together with its distribution under the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Statistic<T> {
    pub t_obs: T,
    pub null_distribution: ContinuousDistribution,
    pub summary: Summary<T>,
}

/// Computes the test statistic from raw data.
pub fn statistic<T: Scalar>(spec: &TestSpec<T>, sample: &Sample<T>) -> Result<Statistic<T>> {
    spec.validate()?;
    sample.validate_for(spec)?;
    statistic_from_summary(spec, &sample.summarize()?)
}

/// Computes the test statistic from summaries alone.
pub fn statistic_from_summary<T: Scalar>(spec: &TestSpec<T>, summary: &Summary<T>) -> Result<Statistic<T>> {
    spec.validate()?;
    let n = summary.n;
    if n < spec.min_n() {
        return Err(Error::domain(format!(
            "{} requires at least {} observations, got {n}",
            spec.family.name(),
            spec.min_n()
        )));
    }
    if !summary.mean.is_finite() {
        return Err(Error::domain("sample mean must be finite"));
    }
    let nt = T::from_count(n);
    let root_n = nt.sqrt();
    let need_sd = || {
        summary
            .sd
            .filter(|s| s.is_finite() && *s >= T::zero())
            .ok_or_else(|| Error::contract(format!("{} needs the sample standard deviation", spec.family.name())))
    };
    let (t_obs, null_distribution) = match spec.family {
        Family::NormalKnownSigma { mu0, sigma0 } => {
            (root_n * (summary.mean - mu0) / sigma0, ContinuousDistribution::StandardNormal)
        }
        Family::NormalUnknownSigma { mu0 } => {
            let sd = need_sd()?;
            if sd == T::zero() {
                return Err(Error::Degenerate { quantity: "sample variance" });
            }
            (
                root_n * (summary.mean - mu0) / sd,
                ContinuousDistribution::student_t(df(n - 1)?)?,
            )
        }
        Family::BinomialProportion { p0 } => {
            if summary.mean < T::zero() || summary.mean > T::one() {
                return Err(Error::domain("binomial sample proportion must lie in [0, 1]"));
            }
            let se = (p0 * (T::one() - p0) / nt).sqrt();
            ((summary.mean - p0) / se, ContinuousDistribution::StandardNormal)
        }
        Family::PoissonDispersion => {
            let sd = need_sd()?;
            if summary.mean < T::zero() {
                return Err(Error::domain("Poisson sample mean must be nonnegative"));
            }
            if summary.mean == T::zero() {
                return Err(Error::Degenerate { quantity: "sample mean" });
            }
            let ss = sd * sd * T::from_count(n - 1);
            (ss / summary.mean, ContinuousDistribution::chi_squared(df(n - 1)?)?)
        }
    };
    Ok(Statistic { t_obs, null_distribution, summary: *summary })
}

fn df(k: usize) -> Result<u32> {
    u32::try_from(k).map_err(|_| Error::domain("sample too large for degrees of freedom"))
}
