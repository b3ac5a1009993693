mod common;

use common::ks_distance;
use fevkit::models::{statistic, statistic_from_summary, Alternative, Family, Sample, TestSpec};
use fevkit::simulate::null_statistics;
use proptest::prelude::*;

fn ks_against_null(spec: &TestSpec<f64>, n: usize, lambda: f64, seed: u64) -> f64 {
    let mut stats = null_statistics(spec, n, 100_000, seed, lambda).unwrap();
    let probe = fevkit::models::Summary { n, mean: 1.0, sd: Some(1.0) };
    let dist = statistic_from_summary(spec, &probe).unwrap().null_distribution;
    ks_distance(&mut stats, |x| dist.cdf(x).unwrap())
}

#[test]
fn exact_families_match_their_null_distribution() {
    let known = TestSpec::new(Family::NormalKnownSigma { mu0: 1.0, sigma0: 2.0 }, Alternative::Greater).unwrap();
    assert!(ks_against_null(&known, 10, 0.0, 1) < 0.01);
    let unknown = TestSpec::new(Family::NormalUnknownSigma { mu0: -0.5 }, Alternative::Greater).unwrap();
    assert!(ks_against_null(&unknown, 8, 0.0, 2) < 0.01);
}

#[test]
fn approximate_families_match_their_reference_distribution() {
    let bin = TestSpec::new(Family::BinomialProportion { p0: 0.3 }, Alternative::Greater).unwrap();
    let d = ks_against_null(&bin, 2_000, 0.0, 3);
    assert!(d < 0.03, "binomial KS {d}");
    let poi = TestSpec::new(Family::PoissonDispersion, Alternative::Greater).unwrap();
    let d = ks_against_null(&poi, 30, 10.0, 4);
    assert!(d < 0.03, "Poisson KS {d}");
}

proptest! {
    #[test]
    fn known_sigma_location_consistency(
        values in prop::collection::vec(-50.0f64..50.0, 1..40),
        shift in -10.0f64..10.0,
        sigma0 in 0.1f64..10.0,
    ) {
        let spec = TestSpec::new(Family::NormalKnownSigma { mu0: 0.5, sigma0 }, Alternative::Greater).unwrap();
        let n = values.len();
        let base = statistic(&spec, &Sample::new(values.clone())).unwrap().t_obs;
        let moved = statistic(&spec, &Sample::new(values.iter().map(|v| v + shift).collect())).unwrap().t_obs;
        let expected = base + shift * (n as f64).sqrt() / sigma0;
        prop_assert!((moved - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}
