//! Reference distributions for test statistics: standard normal, Student-t
//! and chi-squared, with CDFs, survival functions, densities, quantiles and
//! seeded samplers.

pub mod special;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use special::{beta_inc, gamma_p, gamma_q, ln_gamma};

/// A null distribution for a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ContinuousDistribution {
    StandardNormal,
    StudentT { df: u32 },
    ChiSquared { df: u32 },
}

impl ContinuousDistribution {
    pub fn student_t(df: u32) -> Result<Self> {
        let d = ContinuousDistribution::StudentT { df };
        d.validate()?;
        Ok(d)
    }

    pub fn chi_squared(df: u32) -> Result<Self> {
        let d = ContinuousDistribution::ChiSquared { df };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ContinuousDistribution::StudentT { df: 0 } | ContinuousDistribution::ChiSquared { df: 0 } => {
                Err(Error::domain("degrees of freedom must be at least 1"))
            }
            _ => Ok(()),
        }
    }

    fn is_symmetric(&self) -> bool {
        !matches!(self, ContinuousDistribution::ChiSquared { .. })
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            ContinuousDistribution::StandardNormal => Some(0.0),
            ContinuousDistribution::StudentT { df } if df > 1 => Some(0.0),
            ContinuousDistribution::StudentT { .. } => None,
            ContinuousDistribution::ChiSquared { df } => Some(f64::from(df)),
        }
    }

    fn check_point<T: Scalar>(&self, x: T) -> Result<()> {
        self.validate()?;
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!("evaluation point must be finite, got {x}")))
        }
    }

    /// P(X ≤ x).
    pub fn cdf<T: Scalar>(&self, x: T) -> Result<T> {
        self.check_point(x)?;
        Ok(self.lower_tail(x))
    }

    /// P(X > x), computed directly rather than as `1 − cdf` so that small
    /// upper tails keep their relative precision.
    pub fn sf<T: Scalar>(&self, x: T) -> Result<T> {
        self.check_point(x)?;
        Ok(self.upper_tail(x))
    }

    pub fn pdf<T: Scalar>(&self, x: T) -> Result<T> {
        self.check_point(x)?;
        Ok(self.density(x))
    }

    /// Tail mass beyond |x| on one side, for the symmetric families.
    fn symmetric_tail<T: Scalar>(&self, x: T) -> T {
        let half = T::lit(0.5);
        match *self {
            ContinuousDistribution::StandardNormal => half * gamma_q(half, half * x * x),
            ContinuousDistribution::StudentT { df } => {
                let nu = T::lit(f64::from(df));
                let x2 = x * x;
                let denom = nu + x2;
                half * beta_inc(half * nu, half, nu / denom, x2 / denom)
            }
            ContinuousDistribution::ChiSquared { .. } => unreachable!("asymmetric family"),
        }
    }

    fn lower_tail<T: Scalar>(&self, x: T) -> T {
        match *self {
            ContinuousDistribution::ChiSquared { df } => {
                gamma_p(T::lit(0.5 * f64::from(df)), T::lit(0.5) * x.max(T::zero()))
            }
            _ => {
                let tail = self.symmetric_tail(x);
                if x < T::zero() {
                    tail
                } else {
                    T::one() - tail
                }
            }
        }
    }

    fn upper_tail<T: Scalar>(&self, x: T) -> T {
        match *self {
            ContinuousDistribution::ChiSquared { df } => {
                gamma_q(T::lit(0.5 * f64::from(df)), T::lit(0.5) * x.max(T::zero()))
            }
            _ => {
                let tail = self.symmetric_tail(x);
                if x > T::zero() {
                    tail
                } else {
                    T::one() - tail
                }
            }
        }
    }

    fn density<T: Scalar>(&self, x: T) -> T {
        let half = T::lit(0.5);
        match *self {
            ContinuousDistribution::StandardNormal => {
                (-half * x * x).exp() / (T::lit(2.0) * T::PI()).sqrt()
            }
            ContinuousDistribution::StudentT { df } => {
                let nu = T::lit(f64::from(df));
                let ln_norm = ln_gamma(half * (nu + T::one()))
                    - ln_gamma(half * nu)
                    - half * (nu * T::PI()).ln();
                (ln_norm - half * (nu + T::one()) * (x * x / nu).ln_1p()).exp()
            }
            ContinuousDistribution::ChiSquared { df } => {
                let k = T::lit(f64::from(df));
                if x < T::zero() {
                    return T::zero();
                }
                if x == T::zero() {
                    return match df {
                        1 => T::infinity(),
                        2 => half,
                        _ => T::zero(),
                    };
                }
                let hk = half * k;
                ((hk - T::one()) * x.ln() - half * x - hk * T::LN_2() - ln_gamma(hk)).exp()
            }
        }
    }

    /// Inverse CDF by bracketing bisection followed by one Newton step.
    pub fn quantile<T: Scalar>(&self, q: T) -> Result<T> {
        self.validate()?;
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        if self.is_symmetric() {
            let half = T::lit(0.5);
            if q == half {
                return Ok(T::zero());
            }
            if q > half {
                return Ok(-self.solve_tail(T::one() - q, false));
            }
        }
        if q > T::lit(0.5) {
            Ok(self.solve_tail(T::one() - q, true))
        } else {
            Ok(self.solve_tail(q, false))
        }
    }

    /// Finds x with lower_tail(x) = target (or upper_tail(x) = target when
    /// `upper` is set). The residual is increasing in x either way.
    fn solve_tail<T: Scalar>(&self, target: T, upper: bool) -> T {
        let residual = |x: T| {
            if upper {
                target - self.upper_tail(x)
            } else {
                self.lower_tail(x) - target
            }
        };
        let two = T::lit(2.0);
        let (mut lo, mut hi) = match *self {
            ContinuousDistribution::ChiSquared { df } => (T::zero(), T::lit(f64::from(df).max(1.0))),
            _ => (-T::one(), T::one()),
        };
        while residual(hi) < T::zero() {
            lo = hi;
            hi = hi * two;
        }
        if self.is_symmetric() {
            while residual(lo) > T::zero() {
                hi = lo;
                lo = lo * two;
            }
        }
        for _ in 0..2_000 {
            let mid = lo + (hi - lo) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if residual(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= T::lit(4.0) * T::tolerance() * lo.abs().max(hi.abs()) {
                break;
            }
        }
        let mid = lo + (hi - lo) * T::lit(0.5);
        let r_mid = residual(mid);
        let slope = self.density(mid);
        if slope > T::zero() && slope.is_finite() {
            let newton = mid - r_mid / slope;
            if newton >= lo && newton <= hi && residual(newton).abs() <= r_mid.abs() {
                return newton;
            }
        }
        mid
    }

    /// Draws `n` variates from `rng`.
    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<T>> {
        self.validate()?;
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        let draws: Vec<f64> = match *self {
            ContinuousDistribution::StandardNormal => {
                rand_distr::StandardNormal.sample_iter(&mut *rng).take(n).collect()
            }
            ContinuousDistribution::StudentT { df } => rand_distr::StudentT::new(f64::from(df))
                .expect("df validated")
                .sample_iter(&mut *rng)
                .take(n)
                .collect(),
            ContinuousDistribution::ChiSquared { df } => rand_distr::ChiSquared::new(f64::from(df))
                .expect("df validated")
                .sample_iter(&mut *rng)
                .take(n)
                .collect(),
        };
        Ok(draws.into_iter().map(T::lit).collect())
    }
}

impl std::fmt::Display for ContinuousDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ContinuousDistribution::StandardNormal => write!(f, "N(0,1)"),
            ContinuousDistribution::StudentT { df } => write!(f, "t({df})"),
            ContinuousDistribution::ChiSquared { df } => write!(f, "chi2({df})"),
        }
    }
}
