//! Hand-written expectations for every branch of the interpretation rule table.

use fevkit::interpret::{NullType, Rule, Verdict};
use fevkit::models::{Alternative, Family, Summary, TestSpec};
use fevkit::severity::{severity_curve, SeverityCurve, SeverityOptions};
use fevkit::significance::{run_test_summary, TestResult};

#[derive(Debug, Clone, Copy)]
pub enum Band {
    Small,
    Borderline,
    Moderate,
}

pub struct Case {
    pub null_type: NullType,
    pub band: Band,
    /// Whether the grid reaches a severe δ.
    pub severe: bool,
    pub certified: bool,
    pub verdict: Verdict,
    pub rule: Rule,
}

/// Known-σ result with n = 100 whose reported p falls in `band`.
pub fn result_in(band: Band, alternative: Alternative) -> TestResult<f64> {
    let mean = match band {
        Band::Small => 0.4,
        Band::Borderline => 0.2,
        Band::Moderate => 0.0,
    };
    let spec = TestSpec::new(Family::NormalKnownSigma { mu0: 0.0, sigma0: 1.0 }, alternative).unwrap();
    run_test_summary(&spec, &Summary { n: 100, mean, sd: None }).unwrap()
}

/// Grid to δ = 1 reaches β ≈ 1; a grid to δ = 0.05 tops out at Φ(0.5).
pub fn curve_for(result: &TestResult<f64>, severe: bool) -> SeverityCurve<f64> {
    let dmax = if severe { 1.0 } else { 0.05 };
    severity_curve(result, dmax, 21, &SeverityOptions::default()).unwrap()
}

pub fn cases() -> Vec<Case> {
    use Band::*;
    use NullType::*;
    use Verdict::*;
    let mut out = Vec::new();
    let mut push = |null_type, band, severe, certified, verdict, rule| {
        out.push(Case { null_type, band, severe, certified, verdict, rule })
    };
    for nt in [EmbeddedFormal, EmbeddedWellFounded, DiscretePossibilities] {
        push(nt, Small, true, false, EvidenceOfDiscrepancy, Rule::D1);
        push(nt, Moderate, true, false, EvidenceOfAbsenceUpToDelta, Rule::D2);
        push(nt, Moderate, false, false, InsensitiveWarning, Rule::D3);
    }
    push(Dividing, Small, true, false, DirectionEstablished, Rule::D4);
    push(Dividing, Moderate, true, false, DirectionNotEstablished, Rule::D4);
    push(AbsenceOfStructure, Small, true, false, GenuineEffectSuggested, Rule::D5);
    push(AbsenceOfStructure, Moderate, true, false, InsensitiveWarning, Rule::D5);
    push(ModelAdequacyFocused, Moderate, true, false, EvidenceOfAbsenceUpToDelta, Rule::D6);
    push(ModelAdequacyFocused, Moderate, false, false, InsensitiveWarning, Rule::D6);
    push(ModelAdequacyOmnibus, Moderate, true, false, AccordanceOnly, Rule::D7);
    push(ModelAdequacyFocused, Small, true, false, DepartureTypeDetected, Rule::D8);
    push(ModelAdequacyOmnibus, Small, true, false, ProvisionalModelHint, Rule::D8);
    for nt in [SubstantiveAnomaly, SubstantiveRivalPrediction] {
        push(nt, Small, true, true, EvidenceOfDiscrepancy, Rule::D9);
        push(nt, Moderate, true, true, SupportsTheoryInRespectTested, Rule::D9);
        push(nt, Moderate, true, false, InsensitiveWarning, Rule::D9);
    }
    for nt in NullType::ALL {
        push(nt, Band::Borderline, true, false, Verdict::Borderline, Rule::Borderline);
    }
    out
}

pub fn alternative_for(null_type: NullType) -> Alternative {
    if null_type == NullType::Dividing {
        Alternative::Dividing
    } else {
        Alternative::Greater
    }
}
