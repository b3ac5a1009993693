//! Confidence sets obtained by inverting the significance test: a value μ*
//! belongs to the level-L set when testing μ = μ* does not reach the
//! complementary significance level.

use serde::{Deserialize, Serialize};

use crate::distributions::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::models::{Alternative, Family, Sample, Summary, TestSpec};
use crate::scalar::Scalar;
use crate::significance::run_test_summary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// Level L interval; each tail carries (1 − L)/2.
    TwoSided,
    /// Lower confidence bound at level L; upper end unbounded.
    LowerOnly,
    /// Upper confidence bound at level L; lower end unbounded.
    UpperOnly,
}

impl std::str::FromStr for Sidedness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "two-sided" => Ok(Sidedness::TwoSided),
            "lower" | "lower-only" => Ok(Sidedness::LowerOnly),
            "upper" | "upper-only" => Ok(Sidedness::UpperOnly),
            other => Err(Error::domain(format!("unknown sidedness '{other}'"))),
        }
    }
}

/// Serde helpers writing ±∞ as the strings `"inf"` / `"-inf"`.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Scalar;

    pub fn serialize<S: Serializer, T: Scalar>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        let v = x.as_f64();
        if v == f64::INFINITY {
            s.serialize_str("inf")
        } else if v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Scalar>(d: D) -> Result<T, D::Error> {
        let v = match Repr::deserialize(d)? {
            Repr::Num(v) => v,
            Repr::Text(s) if s == "inf" => f64::INFINITY,
            Repr::Text(s) if s == "-inf" => f64::NEG_INFINITY,
            Repr::Text(s) => return Err(serde::de::Error::custom(format!("not an extended real: {s}"))),
        };
        Ok(T::lit(v))
    }
}

/// A set of parameter values, possibly empty, bounded, half-infinite or
/// the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Region<T> {
    Empty,
    Interval {
        #[serde(with = "extended_real")]
        lower: T,
        #[serde(with = "extended_real")]
        upper: T,
    },
    All,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, x: T) -> bool {
        match *self {
            Region::Empty => false,
            Region::All => true,
            Region::Interval { lower, upper } => lower <= x && x <= upper,
        }
    }

    /// True when `self` contains every point of `other`.
    pub fn contains_region(&self, other: &Region<T>) -> bool {
        match (*self, *other) {
            (_, Region::Empty) | (Region::All, _) => true,
            (Region::Empty, _) | (Region::Interval { .. }, Region::All) => false,
            (Region::Interval { lower, upper }, Region::Interval { lower: l2, upper: u2 }) => {
                lower <= l2 && u2 <= upper
            }
        }
    }

    pub fn bounds(&self) -> Option<(T, T)> {
        match *self {
            Region::Interval { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LevelInterval<T> {
    pub level: T,
    pub region: Region<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ConfidenceSet<T> {
    pub spec: TestSpec<T>,
    pub sidedness: Sidedness,
    /// Sorted ascending by level; each region contains its predecessors.
    pub intervals: Vec<LevelInterval<T>>,
}

fn check_level<T: Scalar>(level: T) -> Result<()> {
    if level > T::zero() && level < T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("confidence level must lie in (0, 1), got {level}")))
    }
}

/// Pivot location, standard error and reference distribution for the
/// normal-mean families.
fn pivot<T: Scalar>(spec: &TestSpec<T>, summary: &Summary<T>) -> Result<(T, T, ContinuousDistribution)> {
    spec.validate()?;
    let root_n = T::from_count(summary.n).sqrt();
    match spec.family {
        Family::NormalKnownSigma { sigma0, .. } => {
            if summary.n == 0 {
                return Err(Error::domain("empty sample"));
            }
            Ok((summary.mean, sigma0 / root_n, ContinuousDistribution::StandardNormal))
        }
        Family::NormalUnknownSigma { .. } => {
            if summary.n < 2 {
                return Err(Error::domain("normal-unknown requires at least 2 observations"));
            }
            let sd = summary
                .sd
                .ok_or_else(|| Error::contract("normal-unknown needs the sample standard deviation"))?;
            if sd == T::zero() {
                return Err(Error::Degenerate { quantity: "sample variance" });
            }
            let df = u32::try_from(summary.n - 1).map_err(|_| Error::domain("sample too large"))?;
            Ok((summary.mean, sd / root_n, ContinuousDistribution::student_t(df)?))
        }
        _ => Err(Error::Capability {
            operation: "closed-form confidence intervals",
            family: spec.family.name().to_string(),
        }),
    }
}

pub fn interval_at_level<T: Scalar>(
    spec: &TestSpec<T>,
    sample: &Sample<T>,
    level: T,
    sidedness: Sidedness,
) -> Result<Region<T>> {
    sample.validate_for(spec)?;
    interval_from_summary(spec, &sample.summarize()?, level, sidedness)
}

pub fn interval_from_summary<T: Scalar>(
    spec: &TestSpec<T>,
    summary: &Summary<T>,
    level: T,
    sidedness: Sidedness,
) -> Result<Region<T>> {
    check_level(level)?;
    let (centre, se, dist) = pivot(spec, summary)?;
    let region = match sidedness {
        Sidedness::TwoSided => {
            let c = dist.quantile((T::one() + level) * T::lit(0.5))?;
            Region::Interval { lower: centre - c * se, upper: centre + c * se }
        }
        Sidedness::LowerOnly => {
            let c = dist.quantile(level)?;
            Region::Interval { lower: centre - c * se, upper: T::infinity() }
        }
        Sidedness::UpperOnly => {
            let c = dist.quantile(level)?;
            Region::Interval { lower: T::neg_infinity(), upper: centre + c * se }
        }
    };
    Ok(region)
}

pub fn confidence_curve<T: Scalar>(
    spec: &TestSpec<T>,
    sample: &Sample<T>,
    levels: &[T],
    sidedness: Sidedness,
) -> Result<ConfidenceSet<T>> {
    sample.validate_for(spec)?;
    confidence_curve_from_summary(spec, &sample.summarize()?, levels, sidedness)
}

pub fn confidence_curve_from_summary<T: Scalar>(
    spec: &TestSpec<T>,
    summary: &Summary<T>,
    levels: &[T],
    sidedness: Sidedness,
) -> Result<ConfidenceSet<T>> {
    if levels.is_empty() {
        return Err(Error::domain("at least one confidence level is required"));
    }
    let mut sorted = levels.to_vec();
    for &l in &sorted {
        check_level(l)?;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("levels are finite"));
    sorted.dedup();
    let intervals = sorted
        .into_iter()
        .map(|level| {
            interval_from_summary(spec, summary, level, sidedness).map(|region| LevelInterval { level, region })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfidenceSet { spec: *spec, sidedness, intervals })
}

/// Two-sided level at which the interval's endpoint lands on `mu`, found by
/// bisection over levels using the quantile route only. Zero when `mu` is
/// the point estimate.
pub fn boundary_level<T: Scalar>(spec: &TestSpec<T>, summary: &Summary<T>, mu: T) -> Result<T> {
    let (centre, scale, dist) = pivot(spec, summary)?;
    if mu == centre {
        return Ok(T::zero());
    }
    let distance = (mu - centre).abs();
    // Bisect on the complement α = 1 − L so that levels near one keep full precision.
    let mut lo = T::zero();
    let mut hi = T::one();
    for _ in 0..1100 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let half_width = -dist.quantile(mid * T::lit(0.5))? * scale;
        if half_width >= distance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::one() - (lo + (hi - lo) * T::lit(0.5)))
}

/// p-value of the test of μ = μ* for each μ* on `grid`, read with the given
/// sidedness (two-sided uses the dividing-null doubling).
pub fn pvalue_profile<T: Scalar>(
    spec: &TestSpec<T>,
    summary: &Summary<T>,
    grid: &[T],
    sidedness: Sidedness,
) -> Result<Vec<(T, T)>> {
    let alternative = match sidedness {
        Sidedness::TwoSided => Alternative::Dividing,
        // A lower bound collects the values not rejected in favour of larger means.
        Sidedness::LowerOnly => Alternative::Greater,
        Sidedness::UpperOnly => Alternative::Less,
    };
    grid.iter()
        .map(|&mu| {
            let shifted = TestSpec::new(spec.family.with_null_location(mu)?, alternative)?;
            run_test_summary(&shifted, summary).map(|r| (mu, r.p_reported))
        })
        .collect()
}

/// Description of the grid values consistent with the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConsistencySet<T> {
    /// No value reaches the threshold: the data are inconsistent with every
    /// parameter value considered.
    Empty,
    /// Every value reaches the threshold.
    All,
    /// Maximal runs of consecutive qualifying grid values, as closed ranges.
    Runs { runs: Vec<(T, T)> },
}

/// Collects {μ* : p(μ*) ≥ threshold} from a sorted p-value profile.
pub fn consistency_set<T: Scalar>(profile: &[(T, T)], threshold: T) -> Result<ConsistencySet<T>> {
    if profile.is_empty() {
        return Err(Error::domain("p-value profile is empty"));
    }
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::domain("threshold must lie in [0, 1]"));
    }
    if !profile.windows(2).all(|w| w[0].0 <= w[1].0) {
        return Err(Error::domain("p-value profile must be sorted by parameter value"));
    }
    if let Some((mu, p)) = profile.iter().find(|(_, p)| !(*p >= T::zero() && *p <= T::one())) {
        return Err(Error::domain(format!("p-value {p} at {mu} is not a probability")));
    }
    let mut runs = Vec::new();
    let mut current: Option<(T, T)> = None;
    for &(mu, p) in profile {
        if p >= threshold {
            current = Some(match current {
                Some((start, _)) => (start, mu),
                None => (mu, mu),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);
    Ok(match runs.as_slice() {
        [] => ConsistencySet::Empty,
        [(a, b)] if *a == profile[0].0 && *b == profile[profile.len() - 1].0 => ConsistencySet::All,
        _ => ConsistencySet::Runs { runs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn known() -> TestSpec<f64> {
        TestSpec::new(Family::NormalKnownSigma { mu0: 0.0, sigma0: 1.0 }, Alternative::Greater).unwrap()
    }

    #[test]
    fn duality_at_two_standard_errors() {
        let s = Summary { n: 100, mean: 0.2, sd: None };
        let p = 0.022_750_131_948_179_2;
        let (lo, hi) = interval_from_summary(&known(), &s, 1.0 - 2.0 * p, Sidedness::TwoSided)
            .unwrap()
            .bounds()
            .unwrap();
        assert!(lo.abs() < 1e-12 && (hi - 0.4).abs() < 1e-12);
        let (lo, hi) = interval_from_summary(&known(), &s, 0.9545, Sidedness::TwoSided).unwrap().bounds().unwrap();
        assert!(lo.abs() < 1e-6 && (hi - 0.4).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_example() {
        let s = Summary { n: 4, mean: 1.0, sd: None };
        let r = interval_from_summary(&known(), &s, 0.95, Sidedness::LowerOnly).unwrap();
        let (lo, hi) = r.bounds().unwrap();
        assert!((lo - 0.177_573_186_524_263_9).abs() < 1e-9);
        assert_eq!(hi, f64::INFINITY);
        let r = interval_from_summary(&known(), &s, 0.95, Sidedness::UpperOnly).unwrap();
        assert_eq!(r.bounds().unwrap().0, f64::NEG_INFINITY);
    }

    #[test]
    fn centred_at_null_when_mean_equals_null() {
        let s = Summary { n: 9, mean: 0.0, sd: None };
        for &l in &[0.5, 0.8, 0.99] {
            let (lo, hi) = interval_from_summary(&known(), &s, l, Sidedness::TwoSided).unwrap().bounds().unwrap();
            assert_eq!(lo, -hi);
        }
    }

    #[test]
    fn curve_is_sorted_and_nested() {
        let s = Summary { n: 10, mean: 0.3, sd: Some(1.2) };
        let spec = TestSpec::new(Family::NormalUnknownSigma { mu0: 0.0 }, Alternative::Greater).unwrap();
        let set = confidence_curve_from_summary(&spec, &s, &[0.99, 0.5, 0.9], Sidedness::TwoSided).unwrap();
        let levels: Vec<f64> = set.intervals.iter().map(|i| i.level).collect();
        assert_eq!(levels, vec![0.5, 0.9, 0.99]);
        assert!(set.intervals.windows(2).all(|w| w[1].region.contains_region(&w[0].region)));
        let single = confidence_curve_from_summary(&spec, &s, &[0.9], Sidedness::TwoSided).unwrap();
        assert_eq!(single.intervals[0].region, interval_from_summary(&spec, &s, 0.9, Sidedness::TwoSided).unwrap());
        assert!(confidence_curve_from_summary(&spec, &s, &[], Sidedness::TwoSided).is_err());
        assert!(confidence_curve_from_summary(&spec, &s, &[1.0], Sidedness::TwoSided).is_err());
    }

    #[test]
    fn unsupported_family_for_closed_form() {
        let spec = TestSpec::new(Family::BinomialProportion { p0: 0.5 }, Alternative::Greater).unwrap();
        let s = Summary { n: 10, mean: 0.3, sd: None };
        assert!(matches!(
            interval_from_summary(&spec, &s, 0.9, Sidedness::TwoSided),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn consistency_set_markers() {
        let low: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.001)).collect();
        assert_eq!(consistency_set(&low, 0.05).unwrap(), ConsistencySet::Empty);
        let high: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.9)).collect();
        assert_eq!(consistency_set(&high, 0.05).unwrap(), ConsistencySet::All);
        let unsorted = vec![(1.0, 0.5), (0.0, 0.5)];
        assert!(consistency_set(&unsorted, 0.05).is_err());
        assert!(consistency_set::<f64>(&[], 0.05).is_err());
    }

    #[test]
    fn profile_inversion_recovers_the_interval() {
        let s = Summary { n: 25, mean: 1.0, sd: None };
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.005).collect();
        let profile = pvalue_profile(&known(), &s, &grid, Sidedness::TwoSided).unwrap();
        let set = consistency_set(&profile, 0.05).unwrap();
        let ConsistencySet::Runs { runs } = set else { panic!("expected one run") };
        assert_eq!(runs.len(), 1);
        let (lo, hi) = interval_from_summary(&known(), &s, 0.95, Sidedness::TwoSided).unwrap().bounds().unwrap();
        assert!((runs[0].0 - lo).abs() <= 0.005 && (runs[0].1 - hi).abs() <= 0.005);
    }

    #[test]
    fn region_serializes_infinities_as_text() {
        let r = Region::Interval { lower: 0.5f64, upper: f64::INFINITY };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"kind":"interval","lower":0.5,"upper":"inf"}"#);
        let back: Region<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
