//! Frequentist evidential inference: significance tests, post-data
//! severity, confidence sets by test inversion, selection-effect
//! adjustments, and a Monte Carlo harness that checks the error
//! probabilities all of these claim.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod cli;
pub mod confidence;
pub mod distributions;
pub mod error;
pub mod interpret;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod severity;
pub mod significance;
pub mod simulate;

pub use distributions::ContinuousDistribution;
pub use error::{Error, Result};
pub use models::Alternative;
pub use scalar::Scalar;

pub type Family = models::Family<f64>;
pub type TestSpec = models::TestSpec<f64>;
pub type Sample = models::Sample<f64>;
pub type Summary = models::Summary<f64>;
pub type TestResult = significance::TestResult<f64>;
pub type SeverityCurve = severity::SeverityCurve<f64>;
pub type ConfidenceSet = confidence::ConfidenceSet<f64>;
pub type Region = confidence::Region<f64>;
pub type HuntingScenario = selection::HuntingScenario<f64>;
pub type SearchScenario = selection::SearchScenario<f64>;
pub type FdrInput = selection::FdrInput<f64>;

pub type TestSpecF32 = models::TestSpec<f32>;
pub type TestResultF32 = significance::TestResult<f32>;
