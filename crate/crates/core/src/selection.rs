//! Selection effects: adjusting reported significance for the way the
//! hypothesis was picked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_probability<T: Scalar>(name: &str, p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// 1 − (1 − p)^k, evaluated without cancellation for small p.
fn at_least_one<T: Scalar>(p: T, k: usize) -> T {
    if k == 1 || p == T::one() {
        return p;
    }
    -(T::from_count(k) * (-p).ln_1p()).exp_m1()
}

/// `k` independent tests of which only the smallest p-value is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuntingScenario<T> {
    pub k: usize,
    pub p_min: T,
}

/// Probability, under the global null, that the smallest of `k`
/// independent p-values is at most `p_min`.
pub fn adjust_hunting<T: Scalar>(scenario: &HuntingScenario<T>) -> Result<T> {
    if scenario.k == 0 {
        return Err(Error::domain("at least one test is required"));
    }
    check_probability("p_min", scenario.p_min)?;
    Ok(at_least_one(scenario.p_min, scenario.k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrInput<T> {
    pub pvalues: Vec<T>,
    /// Target false-discovery rate.
    pub q: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrSelection<T> {
    /// Indices into the input, ascending.
    pub selected: Vec<usize>,
    /// Step-up adjusted p-value for each input, in input order.
    pub adjusted: Vec<T>,
    /// Largest rank meeting the step-up bound (0 when nothing is selected).
    pub cutoff_rank: usize,
}

/// Step-up false-discovery-rate selection under independence.
pub fn fdr_select<T: Scalar>(input: &FdrInput<T>) -> Result<FdrSelection<T>> {
    let m = input.pvalues.len();
    if m == 0 {
        return Err(Error::domain("no p-values supplied"));
    }
    if !(input.q > T::zero() && input.q < T::one()) {
        return Err(Error::domain(format!("q must lie in (0, 1), got {}", input.q)));
    }
    for &p in &input.pvalues {
        check_probability("p-value", p)?;
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| input.pvalues[a].partial_cmp(&input.pvalues[b]).expect("probabilities are comparable"));
    let mt = T::from_count(m);

    let cutoff_rank = (1..=m)
        .rev()
        .find(|&rank| input.pvalues[order[rank - 1]] <= T::from_count(rank) * input.q / mt)
        .unwrap_or(0);

    let mut adjusted = vec![T::zero(); m];
    let mut running = T::one();
    for rank in (1..=m).rev() {
        let idx = order[rank - 1];
        running = running.min(input.pvalues[idx] * (mt / T::from_count(rank)));
        adjusted[idx] = running.min(T::one());
    }

    let mut selected: Vec<usize> = order[..cutoff_rank].to_vec();
    selected.sort_unstable();
    Ok(FdrSelection { selected, adjusted, cutoff_rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchScenario<T> {
    pub database_size: usize,
    /// Probability that one comparison against a non-source declares a match.
    pub false_positive_rate: T,
    /// Probability that a comparison against the true source misses.
    pub false_negative_rate: T,
}

/// Ordinal grade for a database-search match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceGrade {
    Weak,
    Moderate,
    Strong,
}

/// Grade cut points on the chance of any false match in the whole search.
pub const STRONG_BELOW: f64 = 1e-3;
pub const MODERATE_BELOW: f64 = 1e-1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport<T> {
    /// Chance that searching the whole database yields at least one false match.
    pub p_false_match_somewhere: T,
    pub evidence_grade: EvidenceGrade,
    pub nonmatches_before_match: usize,
    /// Whether a hunting-style penalty was applied (never, for this scenario).
    pub hunting_adjustment: bool,
    pub note: String,
}

/// Evidence assessment when a search for a known effect (one source among
/// `database_size` candidates) turns up a single match.
pub fn assess_search_match<T: Scalar>(
    scenario: &SearchScenario<T>,
    nonmatches_before_match: usize,
) -> Result<SearchReport<T>> {
    if scenario.database_size == 0 {
        return Err(Error::domain("database must hold at least one record"));
    }
    for (name, rate) in [
        ("false_positive_rate", scenario.false_positive_rate),
        ("false_negative_rate", scenario.false_negative_rate),
    ] {
        if !(rate >= T::zero() && rate < T::one()) {
            return Err(Error::domain(format!("{name} must lie in [0, 1), got {rate}")));
        }
    }
    if nonmatches_before_match >= scenario.database_size {
        return Err(Error::domain(format!(
            "{nonmatches_before_match} non-matches cannot precede a match in a database of {}",
            scenario.database_size
        )));
    }
    let p = at_least_one(scenario.false_positive_rate, scenario.database_size);
    let grade = if p < T::lit(STRONG_BELOW) {
        EvidenceGrade::Strong
    } else if p < T::lit(MODERATE_BELOW) {
        EvidenceGrade::Moderate
    } else {
        EvidenceGrade::Weak
    };
    let note = format!(
        "The search targets an effect known to be present in exactly one record, so no multiplicity \
         penalty applies. Each of the {nonmatches_before_match} records excluded before the match removes \
         an alternative source, which strengthens the conclusion."
    );
    Ok(SearchReport {
        p_false_match_somewhere: p,
        evidence_grade: grade,
        nonmatches_before_match,
        hunting_adjustment: false,
        note,
    })
}

/// How a reported p-value came to be singled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionContext {
    /// Many nulls tested, only the smallest p reported.
    HuntingMinimum,
    /// All contrasts of a designed study were fixed in advance.
    PrespecifiedFactorial,
    /// A search for an effect known to exist somewhere.
    KnownEffectSearch,
    /// Model specification chosen because it gave the most significant result.
    SpecSearchBySignificance,
    /// Model specification chosen for empirical adequacy.
    SpecSearchByAdequacy,
}

impl std::str::FromStr for SelectionContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hunting-minimum" => Ok(SelectionContext::HuntingMinimum),
            "prespecified-factorial" => Ok(SelectionContext::PrespecifiedFactorial),
            "known-effect-search" => Ok(SelectionContext::KnownEffectSearch),
            "spec-search-by-significance" => Ok(SelectionContext::SpecSearchBySignificance),
            "spec-search-by-adequacy" => Ok(SelectionContext::SpecSearchByAdequacy),
            other => Err(Error::domain(format!("unknown selection context '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustmentMethod {
    None,
    /// Closed-form family-wise adjustment (`adjust_hunting`).
    Analytic,
    /// Adjusted p obtained by simulating the whole selection procedure.
    Simulation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub adjust: bool,
    pub method: AdjustmentMethod,
    pub rationale: String,
}

pub fn classify_selection(context: SelectionContext) -> SelectionPolicy {
    let (adjust, method, rationale) = match context {
        SelectionContext::HuntingMinimum => (
            true,
            AdjustmentMethod::Analytic,
            "The reported p is the minimum over many tests; its error probability is that of finding at \
             least one such result when every null holds.",
        ),
        SelectionContext::PrespecifiedFactorial => (
            false,
            AdjustmentMethod::None,
            "Each contrast answers its own prespecified question; testing several in one study does not \
             change what any single p means.",
        ),
        SelectionContext::KnownEffectSearch => (
            false,
            AdjustmentMethod::None,
            "The effect is known to be present somewhere; finding where does not inflate the chance of a \
             spurious finding the way unconstrained hunting does.",
        ),
        SelectionContext::SpecSearchBySignificance => (
            true,
            AdjustmentMethod::Simulation,
            "The specification was chosen for its significance, so the nominal p no longer describes the \
             procedure; simulate the full search to recover the actual error rate.",
        ),
        SelectionContext::SpecSearchByAdequacy => (
            false,
            AdjustmentMethod::None,
            "Choosing the better-fitting specification does not favour significant results; the selection \
             supports rather than undermines the analysis.",
        ),
    };
    SelectionPolicy { adjust, method, rationale: rationale.to_string() }
}
