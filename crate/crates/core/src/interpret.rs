//! Evidential interpretation of a test result, keyed by the kind of null
//! hypothesis.
//!
//! The engine is a fixed rule table. Rule identifiers are stable and
//! appear in every report:
//!
//! | id | null kind | p | verdict |
//! |----|-----------|---|---------|
//! | D1 | embedded | small | evidence of discrepancy |
//! | D2 | embedded | moderate, some δ with β(δ) ≥ high | evidence of absence up to δ |
//! | D3 | embedded | moderate, no such δ | insensitivity warning |
//! | D4 | dividing | small / moderate | direction established / not established |
//! | D5 | absence of structure | small / moderate | genuine effect suggested / insensitivity warning |
//! | D6 | focused adequacy | moderate | absence of the probed departure up to δ (or insensitivity warning) |
//! | D7 | omnibus adequacy | moderate | accordance only |
//! | D8 | either adequacy | small | departure detected (focused) / provisional model hint (omnibus) |
//! | D9 | substantive | moderate + certified / otherwise | supports theory in respect tested / warning or discrepancy |
//!
//! An intermediate p (between the small and moderate thresholds) yields the
//! `Borderline` verdict under rule `BORDERLINE` for every null kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::severity::SeverityCurve;
use crate::significance::TestResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullType {
    /// Embedded in a formal parametric family of alternatives.
    EmbeddedFormal,
    /// Embedded in a well-founded family of alternatives.
    EmbeddedWellFounded,
    /// Embedded among a family of discrete possibilities.
    DiscretePossibilities,
    Dividing,
    AbsenceOfStructure,
    ModelAdequacyFocused,
    ModelAdequacyOmnibus,
    SubstantiveAnomaly,
    SubstantiveRivalPrediction,
}

impl NullType {
    pub const ALL: [NullType; 9] = [
        NullType::EmbeddedFormal,
        NullType::EmbeddedWellFounded,
        NullType::DiscretePossibilities,
        NullType::Dividing,
        NullType::AbsenceOfStructure,
        NullType::ModelAdequacyFocused,
        NullType::ModelAdequacyOmnibus,
        NullType::SubstantiveAnomaly,
        NullType::SubstantiveRivalPrediction,
    ];

    fn is_embedded(self) -> bool {
        matches!(
            self,
            NullType::EmbeddedFormal | NullType::EmbeddedWellFounded | NullType::DiscretePossibilities
        )
    }
}

impl std::str::FromStr for NullType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "embedded-formal" => NullType::EmbeddedFormal,
            "embedded-well-founded" => NullType::EmbeddedWellFounded,
            "discrete-possibilities" => NullType::DiscretePossibilities,
            "dividing" => NullType::Dividing,
            "absence-of-structure" => NullType::AbsenceOfStructure,
            "model-adequacy-focused" => NullType::ModelAdequacyFocused,
            "model-adequacy-omnibus" => NullType::ModelAdequacyOmnibus,
            "substantive-anomaly" => NullType::SubstantiveAnomaly,
            "substantive-rival-prediction" => NullType::SubstantiveRivalPrediction,
            other => return Err(Error::domain(format!("unknown null type '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// p at or below this is "small".
    pub p_small: f64,
    /// p at or above this is "moderate" (accordant).
    pub p_moderate: f64,
    /// Severity needed before a discrepancy is ruled out.
    pub beta_high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { p_small: 0.01, p_moderate: 0.1, beta_high: 0.95 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_small > 0.0 && self.p_small < self.p_moderate && self.p_moderate < 1.0) {
            return Err(Error::domain("thresholds need 0 < p_small < p_moderate < 1"));
        }
        if !(self.beta_high > 0.5 && self.beta_high < 1.0) {
            return Err(Error::domain("beta_high must lie in (0.5, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EvidenceOfDiscrepancy,
    EvidenceOfAbsenceUpToDelta,
    AccordanceOnly,
    InsensitiveWarning,
    DirectionEstablished,
    DirectionNotEstablished,
    GenuineEffectSuggested,
    DepartureTypeDetected,
    ProvisionalModelHint,
    SupportsTheoryInRespectTested,
    /// p between the small and moderate thresholds: no verdict is drawn.
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    D1,
    D2,
    D3,
    D4,
    D5,
    D6,
    D7,
    D8,
    D9,
    #[serde(rename = "BORDERLINE")]
    Borderline,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::D1 => "D1",
            Rule::D2 => "D2",
            Rule::D3 => "D3",
            Rule::D4 => "D4",
            Rule::D5 => "D5",
            Rule::D6 => "D6",
            Rule::D7 => "D7",
            Rule::D8 => "D8",
            Rule::D9 => "D9",
            Rule::Borderline => "BORDERLINE",
        }
    }
}

pub const FEV_I: &str = "FEV-I";
pub const FEV_II: &str = "FEV-II";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidentialReport {
    pub null_type: NullType,
    pub verdict: Verdict,
    pub rule: Rule,
    pub citations: Vec<String>,
    pub p_value: f64,
    /// Present exactly when the verdict is `EvidenceOfAbsenceUpToDelta`.
    pub delta_bound: Option<f64>,
    /// Severity at `delta_bound`, or the largest severity on the grid when
    /// no bound could be licensed.
    pub severity_used: Option<f64>,
    pub sensitivity_certified: bool,
    pub thresholds: Thresholds,
    pub narrative: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PBand {
    Small,
    Borderline,
    Moderate,
}

struct Outcome {
    verdict: Verdict,
    rule: Rule,
    fev: Option<&'static str>,
    delta_bound: Option<f64>,
    severity_used: Option<f64>,
    narrative: String,
}

impl Outcome {
    fn new(verdict: Verdict, rule: Rule, fev: Option<&'static str>, narrative: String) -> Self {
        Outcome { verdict, rule, fev, delta_bound: None, severity_used: None, narrative }
    }
}

fn require_curve<'a>(
    curve: Option<&'a SeverityCurve<f64>>,
    result: &TestResult<f64>,
    null_type: NullType,
) -> Result<&'a SeverityCurve<f64>> {
    let curve = curve.ok_or_else(|| {
        Error::contract(format!(
            "a severity curve is required to interpret an accordant result for {null_type:?}"
        ))
    })?;
    if curve.n != result.n || curve.t_obs != result.t_obs {
        return Err(Error::contract("severity curve was computed for a different test result"));
    }
    Ok(curve)
}

/// Applies the FEV(ii) step: the smallest grid δ with β(δ) ≥ threshold, if any.
fn severity_bound(curve: &SeverityCurve<f64>, beta_high: f64) -> (Option<f64>, Option<f64>) {
    match curve.smallest_delta_reaching(beta_high) {
        Some(point) => (Some(point.delta), Some(point.beta)),
        None => (None, curve.grid.iter().map(|p| p.beta).reduce(f64::max)),
    }
}

/// Maps a result and its context to an evidential verdict. Deterministic.
pub fn interpret(
    null_type: NullType,
    result: &TestResult<f64>,
    severity_curve: Option<&SeverityCurve<f64>>,
    sensitivity_certified: bool,
    thresholds: &Thresholds,
) -> Result<EvidentialReport> {
    thresholds.validate()?;
    let p = result.p_reported;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p-value {p} is not a probability")));
    }
    let band = if p <= thresholds.p_small {
        PBand::Small
    } else if p >= thresholds.p_moderate {
        PBand::Moderate
    } else {
        PBand::Borderline
    };

    let outcome = if band == PBand::Borderline {
        Outcome::new(
            Verdict::Borderline,
            Rule::Borderline,
            None,
            format!(
                "p = {p:.4} lies between {} and {}; report p and the severity assessment without drawing a verdict.",
                thresholds.p_small, thresholds.p_moderate
            ),
        )
    } else {
        let small = band == PBand::Small;
        match null_type {
            t if t.is_embedded() => {
                if small {
                    Outcome::new(
                        Verdict::EvidenceOfDiscrepancy,
                        Rule::D1,
                        Some(FEV_I),
                        format!(
                            "p = {p:.4}: a result this far from the null is rare when the null holds, so the data indicate \
                             a discrepancy in the direction tested."
                        ),
                    )
                } else {
                    let curve = require_curve(severity_curve, result, null_type)?;
                    match severity_bound(curve, thresholds.beta_high) {
                        (Some(delta), beta) => Outcome {
                            delta_bound: Some(delta),
                            severity_used: beta,
                            ..Outcome::new(
                                Verdict::EvidenceOfAbsenceUpToDelta,
                                Rule::D2,
                                Some(FEV_II),
                                format!(
                                    "p = {p:.4} accords with the null, and a discrepancy of {delta} would have \
                                     produced a larger statistic with probability {:.4}; the data are evidence that the \
                                     discrepancy is less than {delta}.",
                                    beta.unwrap_or(f64::NAN)
                                ),
                            )
                        },
                        (None, max_beta) => Outcome {
                            severity_used: max_beta,
                            ..Outcome::new(
                                Verdict::InsensitiveWarning,
                                Rule::D3,
                                Some(FEV_II),
                                format!(
                                    "p = {p:.4} accords with the null, but no discrepancy on the grid reaches \
                                     severity {}; the test had too little capacity to detect discrepancies of \
                                     interest, so accordance is not evidence of their absence.",
                                    thresholds.beta_high
                                ),
                            )
                        },
                    }
                }
            }
            NullType::Dividing => {
                if small {
                    Outcome::new(
                        Verdict::DirectionEstablished,
                        Rule::D4,
                        Some(FEV_I),
                        format!(
                            "Two-sided p = {p:.4}: the data establish the direction of the departure ({:?}).",
                            result.direction
                        ),
                    )
                } else {
                    Outcome::new(
                        Verdict::DirectionNotEstablished,
                        Rule::D4,
                        Some(FEV_II),
                        format!(
                            "Two-sided p = {p:.4}: the sign of any difference remains undetermined."
                        ),
                    )
                }
            }
            NullType::AbsenceOfStructure => {
                if small {
                    Outcome::new(
                        Verdict::GenuineEffectSuggested,
                        Rule::D5,
                        Some(FEV_I),
                        format!(
                            "p = {p:.4}: the data show structure that chance alone rarely produces; a substantive \
                             explanation is worth pursuing."
                        ),
                    )
                } else {
                    Outcome::new(
                        Verdict::InsensitiveWarning,
                        Rule::D5,
                        Some(FEV_II),
                        format!(
                            "p = {p:.4}: the data are not sensitive enough to reveal structure; treat this as \
                             a reason for caution, not as evidence that no structure exists."
                        ),
                    )
                }
            }
            NullType::ModelAdequacyFocused | NullType::ModelAdequacyOmnibus if small => {
                if null_type == NullType::ModelAdequacyFocused {
                    Outcome::new(
                        Verdict::DepartureTypeDetected,
                        Rule::D8,
                        Some(FEV_I),
                        format!(
                            "p = {p:.4}: the model departs from the data in the specific respect this focused \
                             test probes."
                        ),
                    )
                } else {
                    Outcome::new(
                        Verdict::ProvisionalModelHint,
                        Rule::D8,
                        Some(FEV_I),
                        format!(
                            "p = {p:.4}: some departure from the model is indicated; since several alternative \
                             models could account for it, treat this only as a pointer toward models to try."
                        ),
                    )
                }
            }
            NullType::ModelAdequacyFocused => {
                let curve = require_curve(severity_curve, result, null_type)?;
                match severity_bound(curve, thresholds.beta_high) {
                    (Some(delta), beta) => Outcome {
                        delta_bound: Some(delta),
                        severity_used: beta,
                        ..Outcome::new(
                            Verdict::EvidenceOfAbsenceUpToDelta,
                            Rule::D6,
                            Some(FEV_II),
                            format!(
                                "p = {p:.4}: for the type of departure this focused test detects, departures of \
                                 size {delta} or more are ruled out with severity {:.4}. Other kinds of \
                                 departure are not addressed.",
                                beta.unwrap_or(f64::NAN)
                            ),
                        )
                    },
                    (None, max_beta) => Outcome {
                        severity_used: max_beta,
                        ..Outcome::new(
                            Verdict::InsensitiveWarning,
                            Rule::D6,
                            Some(FEV_II),
                            format!(
                                "p = {p:.4}: the focused test never reaches severity {} on the grid, so \
                                 accordance does not rule out the probed departure.",
                                thresholds.beta_high
                            ),
                        )
                    },
                }
            }
            NullType::ModelAdequacyOmnibus => Outcome::new(
                Verdict::AccordanceOnly,
                Rule::D7,
                None,
                format!(
                    "p = {p:.4}: the model accords with the data on this omnibus check, which says little about \
                     any particular kind of departure."
                ),
            ),
            NullType::SubstantiveAnomaly | NullType::SubstantiveRivalPrediction => {
                if small {
                    Outcome::new(
                        Verdict::EvidenceOfDiscrepancy,
                        Rule::D9,
                        Some(FEV_I),
                        format!(
                            "p = {p:.4}: the data depart from the theory's prediction in the respect tested."
                        ),
                    )
                } else if sensitivity_certified {
                    let pattern = if null_type == NullType::SubstantiveRivalPrediction {
                        " This follows the rival-prediction pattern of the lunar-ranging Nordtvedt-effect \
                         searches: a sensitive probe that finds nothing bounds the rival's effect."
                    } else {
                        " A real anomaly of the certified size would have been detected with high probability."
                    };
                    Outcome::new(
                        Verdict::SupportsTheoryInRespectTested,
                        Rule::D9,
                        Some(FEV_II),
                        format!(
                            "p = {p:.4} with a test certified sensitive to the rival discrepancy: the result is \
                             evidence for the theory in the respect tested, not for the theory as a whole.{pattern}"
                        ),
                    )
                } else {
                    Outcome::new(
                        Verdict::InsensitiveWarning,
                        Rule::D9,
                        Some(FEV_II),
                        format!(
                            "p = {p:.4}, but the test's sensitivity to the rival discrepancy is not certified; \
                             accordance cannot be counted as support for the theory."
                        ),
                    )
                }
            }
            _ => unreachable!("embedded kinds handled above"),
        }
    };

    let mut citations = vec![outcome.rule.id().to_string()];
    citations.extend(outcome.fev.map(str::to_string));
    let narrative = format!("[{}] {}", citations.join("; "), outcome.narrative);
    Ok(EvidentialReport {
        null_type,
        verdict: outcome.verdict,
        rule: outcome.rule,
        citations,
        p_value: p,
        delta_bound: outcome.delta_bound,
        severity_used: outcome.severity_used,
        sensitivity_certified,
        thresholds: *thresholds,
        narrative,
    })
}
