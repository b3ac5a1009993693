//! Running a significance test: the observed statistic and its tail areas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{self, Alternative, Sample, Statistic, Summary, TestSpec};
use crate::scalar::Scalar;

/// Side of the null on which the observed result lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Upper,
    Lower,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub spec: TestSpec<T>,
    pub n: usize,
    pub t_obs: T,
    /// P(T ≥ t_obs; H₀).
    pub p_upper: T,
    /// P(T ≤ t_obs; H₀).
    pub p_lower: T,
    /// Tail area in the declared direction, or the smaller tail for a
    /// dividing null.
    pub p_one_sided: T,
    /// The p-value to report: one-sided for directional alternatives,
    /// doubled smaller tail for a dividing null.
    pub p_reported: T,
    pub direction: Direction,
    pub statistic: Statistic<T>,
}

pub fn run_test<T: Scalar>(spec: &TestSpec<T>, sample: &Sample<T>) -> Result<TestResult<T>> {
    let stat = models::statistic(spec, sample)?;
    from_statistic(spec, stat)
}

pub fn run_test_summary<T: Scalar>(spec: &TestSpec<T>, summary: &Summary<T>) -> Result<TestResult<T>> {
    let stat = models::statistic_from_summary(spec, summary)?;
    from_statistic(spec, stat)
}

fn from_statistic<T: Scalar>(spec: &TestSpec<T>, stat: Statistic<T>) -> Result<TestResult<T>> {
    let dist = stat.null_distribution;
    // Continuous reference distributions: P(T ≥ t) = P(T > t).
    let p_upper = dist.sf(stat.t_obs)?;
    let p_lower = dist.cdf(stat.t_obs)?;
    let (p_one_sided, p_reported, direction) = match spec.alternative {
        Alternative::Greater => (p_upper, p_upper, Direction::Upper),
        Alternative::Less => (p_lower, p_lower, Direction::Lower),
        Alternative::Dividing => {
            let direction = if p_upper < p_lower {
                Direction::Upper
            } else if p_lower < p_upper {
                Direction::Lower
            } else {
                Direction::None
            };
            (p_upper.min(p_lower), two_sided(p_upper, p_lower)?, direction)
        }
    };
    Ok(TestResult {
        spec: *spec,
        n: stat.summary.n,
        t_obs: stat.t_obs,
        p_upper,
        p_lower,
        p_one_sided,
        p_reported,
        direction,
        statistic: stat,
    })
}

/// Two-sided significance for a dividing null: twice the smaller tail,
/// capped at one.
pub fn two_sided<T: Scalar>(p_upper: T, p_lower: T) -> Result<T> {
    let unit = |p: T| p >= T::zero() && p <= T::one();
    if !unit(p_upper) || !unit(p_lower) {
        return Err(Error::domain(format!(
            "tail probabilities must lie in [0, 1], got ({p_upper}, {p_lower})"
        )));
    }
    let slack = T::lit(1e-9).max(T::lit(8.0) * T::epsilon());
    if ((p_upper + p_lower) - T::one()).abs() > slack {
        return Err(Error::domain(format!(
            "tails of a continuous statistic must sum to 1, got {p_upper} + {p_lower}"
        )));
    }
    Ok((T::lit(2.0) * p_upper.min(p_lower)).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Family;

    fn known(alt: Alternative) -> TestSpec<f64> {
        TestSpec::new(Family::NormalKnownSigma { mu0: 0.0, sigma0: 1.0 }, alt).unwrap()
    }

    #[test]
    fn upper_tail_at_two() {
        let r = run_test_summary(&known(Alternative::Greater), &Summary { n: 100, mean: 0.2, sd: None }).unwrap();
        assert!((r.p_one_sided - 0.022_750_131_948_179_2).abs() < 1e-12);
        assert_eq!(r.p_reported, r.p_one_sided);
        assert_eq!(r.direction, Direction::Upper);
    }

    #[test]
    fn null_mean_gives_half() {
        let r = run_test_summary(&known(Alternative::Greater), &Summary { n: 25, mean: 0.0, sd: None }).unwrap();
        assert_eq!(r.p_one_sided, 0.5);
    }

    #[test]
    fn dividing_null_reports_doubled_smaller_tail() {
        let r = run_test_summary(&known(Alternative::Dividing), &Summary { n: 100, mean: -0.2, sd: None }).unwrap();
        assert_eq!(r.direction, Direction::Lower);
        assert_eq!(r.p_reported, 2.0 * r.p_lower);
        let r = run_test_summary(&known(Alternative::Less), &Summary { n: 100, mean: -0.2, sd: None }).unwrap();
        assert!((r.p_one_sided - 0.022_750_131_948_179_2).abs() < 1e-12);
    }

    #[test]
    fn two_sided_examples() {
        assert!((two_sided(0.97f64, 0.03).unwrap() - 0.06).abs() < 1e-15);
        assert_eq!(two_sided(0.5f64, 0.5).unwrap(), 1.0);
        assert!((two_sided(0.0001f64, 0.9999).unwrap() - 0.0002).abs() < 1e-15);
        assert!(two_sided(1.2f64, -0.2).is_err());
        assert!(two_sided(0.3f64, 0.3).is_err());
    }

    #[test]
    fn degeneracy_propagates() {
        let spec = TestSpec::new(Family::NormalUnknownSigma { mu0: 0.0 }, Alternative::Greater).unwrap();
        assert!(matches!(
            run_test(&spec, &Sample::new(vec![1.0, 1.0, 1.0])),
            Err(Error::Degenerate { .. })
        ));
    }
}
