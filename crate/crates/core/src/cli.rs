//! Command-line front end. Every subcommand produces an [`OutputEnvelope`]
//! that is either rendered as JSON (`--json`) or as short text.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::confidence::{confidence_curve_from_summary, Sidedness};
use crate::error::{Error, Result};
use crate::interpret::{interpret, NullType, Thresholds};
use crate::models::{Alternative, Family, Sample, Summary, TestSpec};
use crate::selection::{
    adjust_hunting, assess_search_match, classify_selection, fdr_select, FdrInput, HuntingScenario, SearchScenario,
    SelectionContext,
};
use crate::severity::{default_delta_max, severity_curve, SeverityOptions, DEFAULT_GRID_POINTS, DEFAULT_MC_DRAWS};
use crate::significance::{run_test_summary, TestResult};
use crate::simulate::{run_simulation, SimulationPlan};

pub const DISPLAY_ROUNDING: &str = "p-values and probabilities to 4 significant figures";

#[derive(Debug, Parser)]
#[command(name = "fevkit", version, about = "Significance tests, severity and confidence curves, selection adjustments")]
pub struct Cli {
    /// Seed for Monte Carlo paths (overrides a plan's seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit the JSON envelope instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a significance test.
    Test(TestArgs),
    /// Severity curve β(δ) for the test result.
    Severity(SeverityArgs),
    /// Confidence intervals over a ladder of levels.
    Ci(CiArgs),
    /// Selection-effect adjustments.
    #[command(subcommand)]
    Adjust(AdjustCommand),
    /// Evidential interpretation of the test result.
    Interpret(InterpretArgs),
    /// Run a simulation plan from a TOML file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    NormalKnown,
    NormalUnknown,
    Binomial,
    Poisson,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AltArg {
    Greater,
    Less,
    Dividing,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu0: f64,
    /// Known standard deviation (normal-known).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Null success probability (binomial).
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long = "alt", value_enum, default_value = "greater")]
    pub alternative: AltArg,
    /// Single-column CSV with header `y`.
    #[arg(long, conflicts_with_all = ["summary", "values"])]
    pub data: Option<PathBuf>,
    /// `n,mean[,sd]`.
    #[arg(long, conflicts_with = "values", allow_hyphen_values = true)]
    pub summary: Option<String>,
    /// Comma-separated observations.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SeverityArgs {
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub mc_draws: usize,
    /// Also write the curve as CSV (columns delta,beta).
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SidedArg {
    Two,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.8, 0.9, 0.95, 0.99])]
    pub levels: Vec<f64>,
    #[arg(long, value_enum, default_value = "two")]
    pub sided: SidedArg,
}

#[derive(Debug, Subcommand)]
pub enum AdjustCommand {
    /// Adjust the smallest of k independent p-values.
    Hunting {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        pmin: f64,
    },
    /// Step-up false-discovery-rate selection.
    Fdr {
        #[arg(long, value_delimiter = ',', conflicts_with = "data")]
        pvalues: Vec<f64>,
        /// Single-column CSV with header `p`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        q: f64,
    },
    /// Assess a single match found by searching a database.
    Search {
        #[arg(long)]
        database_size: usize,
        #[arg(long = "fp")]
        false_positive_rate: f64,
        #[arg(long = "fn", default_value_t = 0.0)]
        false_negative_rate: f64,
        #[arg(long, default_value_t = 0)]
        nonmatches: usize,
    },
    /// Whether a selection context calls for adjustment.
    Classify {
        #[arg(long)]
        context: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InterpretArgs {
    #[command(flatten)]
    pub test: TestArgs,
    #[arg(long)]
    pub null_type: String,
    #[arg(long)]
    pub sensitivity_certified: bool,
    #[arg(long)]
    pub delta_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
    pub mc_draws: usize,
    #[arg(long, default_value_t = Thresholds::default().p_small)]
    pub p_small: f64,
    #[arg(long, default_value_t = Thresholds::default().p_moderate)]
    pub p_moderate: f64,
    #[arg(long, default_value_t = Thresholds::default().beta_high)]
    pub beta_high: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEnvelope {
    pub command: String,
    pub inputs_echo: BTreeMap<String, Value>,
    /// Full-precision results.
    pub results: Value,
    /// Rounded renderings of the headline numbers.
    pub display: BTreeMap<String, String>,
    pub display_rounding: String,
    pub citations: Vec<String>,
}

impl OutputEnvelope {
    fn new(command: &str) -> Self {
        OutputEnvelope {
            command: command.to_string(),
            inputs_echo: BTreeMap::new(),
            results: Value::Null,
            display: BTreeMap::new(),
            display_rounding: DISPLAY_ROUNDING.to_string(),
            citations: Vec::new(),
        }
    }

    fn echo(&mut self, key: &str, value: impl Serialize) {
        self.inputs_echo.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    fn show(&mut self, key: &str, value: f64) {
        self.display.insert(key.to_string(), round_sig(value, 4));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        for (k, v) in &self.display {
            out.push_str(&format!("  {k}: {v}\n"));
        }
        if let Some(narrative) = self.results.get("narrative").and_then(Value::as_str) {
            out.push_str(&format!("  {narrative}\n"));
        }
        if !self.citations.is_empty() {
            out.push_str(&format!("  rules: {}\n", self.citations.join(", ")));
        }
        out
    }
}

/// Renders `x` to `digits` significant figures.
pub fn round_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=6).contains(&magnitude) {
        return format!("{:.*e}", digits.saturating_sub(1), x);
    }
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn parse_number_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: 1,
                column: text.split(',').take(i).map(|p| p.len() as u64 + 1).sum::<u64>() + 1,
                message: format!("{what}: '{}' is not a number", s.trim()),
            })
        })
        .collect()
}

/// Reads a single-column CSV whose header must be `header`.
pub fn read_column(path: &Path, header: &str) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::contract(format!("cannot open {}: {e}", path.display())))?;
    read_column_from(file, header)
}

pub fn read_column_from<R: std::io::Read>(reader: R, header: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(1, |p| p.line());
        Error::Parse { line, column: 1, message: e.to_string() }
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() != 1 || &headers[0] != header {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected a single column with header '{header}'"),
        });
    }
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = &record[0];
        let v = field.parse::<f64>().map_err(|_| Error::Parse {
            line,
            column: 1,
            message: format!("'{field}' is not a number"),
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::Parse { line: 2, column: 1, message: "no data rows".to_string() });
    }
    Ok(values)
}

impl TestArgs {
    pub fn spec(&self) -> Result<TestSpec<f64>> {
        let family = match self.family {
            FamilyArg::NormalKnown => Family::NormalKnownSigma {
                mu0: self.mu0,
                sigma0: self.sigma.ok_or_else(|| Error::contract("--sigma is required for normal-known"))?,
            },
            FamilyArg::NormalUnknown => Family::NormalUnknownSigma { mu0: self.mu0 },
            FamilyArg::Binomial => Family::BinomialProportion {
                p0: self.p0.ok_or_else(|| Error::contract("--p0 is required for binomial"))?,
            },
            FamilyArg::Poisson => Family::PoissonDispersion,
        };
        let alternative = match self.alternative {
            AltArg::Greater => Alternative::Greater,
            AltArg::Less => Alternative::Less,
            AltArg::Dividing => Alternative::Dividing,
        };
        TestSpec::new(family, alternative)
    }

    pub fn summary(&self, spec: &TestSpec<f64>) -> Result<Summary<f64>> {
        let raw = if let Some(path) = &self.data {
            Some(read_column(path, "y")?)
        } else if let Some(text) = &self.values {
            Some(parse_number_list(text, "--values")?)
        } else {
            None
        };
        if let Some(values) = raw {
            let sample = Sample::new(values);
            sample.validate_for(spec)?;
            return sample.summarize();
        }
        let text = self
            .summary
            .as_deref()
            .ok_or_else(|| Error::contract("supply data with --data, --values or --summary"))?;
        let parts = parse_number_list(text, "--summary")?;
        let (n, mean, sd) = match parts.as_slice() {
            [n, mean] => (*n, *mean, None),
            [n, mean, sd] => (*n, *mean, Some(*sd)),
            _ => return Err(Error::contract("--summary takes n,mean[,sd]")),
        };
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(Error::domain(format!("summary n must be a positive integer, got {n}")));
        }
        if let Some(sd) = sd {
            if sd < 0.0 {
                return Err(Error::domain("summary sd must be nonnegative"));
            }
        }
        Ok(Summary { n: n as usize, mean, sd })
    }

    fn echo_into(&self, env: &mut OutputEnvelope, spec: &TestSpec<f64>, summary: &Summary<f64>) {
        env.echo("spec", spec);
        env.echo("summary", summary);
        if let Some(p) = &self.data {
            env.echo("data", p.display().to_string());
        }
    }

    fn run(&self, env: &mut OutputEnvelope) -> Result<TestResult<f64>> {
        let spec = self.spec()?;
        let summary = self.summary(&spec)?;
        self.echo_into(env, &spec, &summary);
        run_test_summary(&spec, &summary)
    }
}

fn show_test(env: &mut OutputEnvelope, r: &TestResult<f64>) {
    env.show("t_obs", r.t_obs);
    env.show("p", r.p_reported);
    env.show("p_one_sided", r.p_one_sided);
}

/// What a command wants written: the main stream plus side files.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub envelope: OutputEnvelope,
    /// Text to emit instead of the envelope when not in JSON mode.
    pub text_override: Option<String>,
    pub files: Vec<(PathBuf, String)>,
}

pub fn execute(cli: &Cli) -> Result<Rendered> {
    let mut files = Vec::new();
    let mut text_override = None;
    let env = match &cli.command {
        Command::Test(args) => {
            let mut env = OutputEnvelope::new("test");
            let r = args.run(&mut env)?;
            show_test(&mut env, &r);
            env.results = serde_json::to_value(r).expect("serializable");
            env
        }
        Command::Severity(args) => {
            let mut env = OutputEnvelope::new("severity");
            let r = args.test.run(&mut env)?;
            let delta_max = match args.delta_max {
                Some(d) => d,
                None => default_delta_max(&r)?,
            };
            let opts = SeverityOptions { mc_draws: args.mc_draws, seed: cli.seed.unwrap_or(0) };
            env.echo("delta_max", delta_max);
            env.echo("points", args.points);
            let curve = severity_curve(&r, delta_max, args.points, &opts)?;
            show_test(&mut env, &r);
            let csv = curve.to_csv();
            if let Some(path) = &args.curve_csv {
                files.push((path.clone(), csv.clone()));
            }
            text_override = Some(csv);
            env.results = json!({ "test": r, "curve": curve });
            env.citations = vec![crate::interpret::FEV_II.to_string()];
            env
        }
        Command::Ci(args) => {
            let mut env = OutputEnvelope::new("ci");
            let spec = args.test.spec()?;
            let summary = args.test.summary(&spec)?;
            args.test.echo_into(&mut env, &spec, &summary);
            let sidedness = match args.sided {
                SidedArg::Two => Sidedness::TwoSided,
                SidedArg::Lower => Sidedness::LowerOnly,
                SidedArg::Upper => Sidedness::UpperOnly,
            };
            env.echo("levels", &args.levels);
            let set = confidence_curve_from_summary(&spec, &summary, &args.levels, sidedness)?;
            let convention = match sidedness {
                Sidedness::TwoSided => "two-sided level L: each tail carries (1-L)/2; an endpoint tested one-sided has p = (1-L)/2",
                _ => "one-sided level L: the bound tested one-sided has p = 1-L",
            };
            for li in &set.intervals {
                if let Some((lo, hi)) = li.region.bounds() {
                    env.display.insert(
                        format!("level {}", round_sig(li.level, 4)),
                        format!("[{}, {}]", round_sig(lo, 6), round_sig(hi, 6)),
                    );
                }
            }
            env.results = json!({ "confidence_set": set, "convention": convention });
            env
        }
        Command::Adjust(cmd) => adjust(cmd)?,
        Command::Interpret(args) => {
            let mut env = OutputEnvelope::new("interpret");
            let null_type: NullType = args.null_type.parse()?;
            let thresholds = Thresholds { p_small: args.p_small, p_moderate: args.p_moderate, beta_high: args.beta_high };
            thresholds.validate()?;
            let r = args.test.run(&mut env)?;
            env.echo("null_type", null_type);
            env.echo("thresholds", thresholds);
            env.echo("sensitivity_certified", args.sensitivity_certified);
            let opts = SeverityOptions { mc_draws: args.mc_draws, seed: cli.seed.unwrap_or(0) };
            let curve = match args.delta_max {
                Some(d) => Some(severity_curve(&r, d, args.points, &opts)?),
                None => match default_delta_max(&r) {
                    Ok(d) => Some(severity_curve(&r, d, args.points, &opts)?),
                    Err(Error::Capability { .. }) => None,
                    Err(e) => return Err(e),
                },
            };
            let report = interpret(null_type, &r, curve.as_ref(), args.sensitivity_certified, &thresholds)?;
            show_test(&mut env, &r);
            if let Some(d) = report.delta_bound {
                env.show("delta_bound", d);
            }
            if let Some(b) = report.severity_used {
                env.show("severity_used", b);
            }
            env.display.insert("verdict".to_string(), format!("{:?}", report.verdict));
            env.citations = report.citations.clone();
            env.results = serde_json::to_value(&report).expect("serializable");
            env
        }
        Command::Simulate(args) => {
            let mut env = OutputEnvelope::new("simulate");
            let mut plan = SimulationPlan::from_path(&args.config)?;
            if let Some(seed) = cli.seed {
                plan.seed = seed;
            }
            if args.threads.is_some() {
                plan.threads = args.threads;
            }
            env.echo("plan", &plan);
            let report = run_simulation(&plan)?;
            env.show("estimate", report.estimate);
            env.show("standard_error", report.standard_error);
            if let Some(t) = report.target {
                env.show("target", t);
            }
            env.results = serde_json::to_value(report).expect("serializable");
            env
        }
    };
    Ok(Rendered { envelope: env, text_override, files })
}

fn adjust(cmd: &AdjustCommand) -> Result<OutputEnvelope> {
    let env = match cmd {
        AdjustCommand::Hunting { k, pmin } => {
            let mut env = OutputEnvelope::new("adjust hunting");
            env.echo("k", k);
            env.echo("pmin", pmin);
            let adjusted = adjust_hunting(&HuntingScenario { k: *k, p_min: *pmin })?;
            env.show("adjusted_p", adjusted);
            env.results = json!({ "adjusted_p": adjusted, "policy": classify_selection(SelectionContext::HuntingMinimum) });
            env
        }
        AdjustCommand::Fdr { pvalues, data, q } => {
            let mut env = OutputEnvelope::new("adjust fdr");
            let pvalues = match data {
                Some(path) => read_column(path, "p")?,
                None if !pvalues.is_empty() => pvalues.clone(),
                None => return Err(Error::contract("supply --pvalues or --data")),
            };
            env.echo("pvalues", &pvalues);
            env.echo("q", q);
            let sel = fdr_select(&FdrInput { pvalues, q: *q })?;
            env.display.insert("selected".to_string(), format!("{:?}", sel.selected));
            env.results = serde_json::to_value(sel).expect("serializable");
            env
        }
        AdjustCommand::Search { database_size, false_positive_rate, false_negative_rate, nonmatches } => {
            let mut env = OutputEnvelope::new("adjust search");
            let scenario = SearchScenario {
                database_size: *database_size,
                false_positive_rate: *false_positive_rate,
                false_negative_rate: *false_negative_rate,
            };
            env.echo("scenario", scenario);
            env.echo("nonmatches", nonmatches);
            let report = assess_search_match(&scenario, *nonmatches)?;
            env.show("p_false_match_somewhere", report.p_false_match_somewhere);
            env.display.insert("evidence_grade".to_string(), format!("{:?}", report.evidence_grade));
            env.results = json!({ "report": report, "policy": classify_selection(SelectionContext::KnownEffectSearch) });
            env
        }
        AdjustCommand::Classify { context } => {
            let mut env = OutputEnvelope::new("adjust classify");
            env.echo("context", context);
            let policy = classify_selection(context.parse()?);
            env.display.insert("adjust".to_string(), policy.adjust.to_string());
            env.results = serde_json::to_value(policy).expect("serializable");
            env
        }
    };
    Ok(env)
}

/// Single-line machine-parsable error record.
pub fn error_line(err: &Error) -> String {
    let mut v = json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    if let Error::Parse { line, column, .. } = err {
        v["error"]["line"] = json!(line);
        v["error"]["column"] = json!(column);
    }
    v.to_string()
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let rendered = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            return 2;
        }
    };
    for (path, contents) in &rendered.files {
        if let Err(e) = std::fs::write(path, contents) {
            eprintln!("{}", json!({ "error": { "kind": "io", "message": format!("{}: {e}", path.display()) } }));
            return 1;
        }
    }
    let body = if cli.json {
        rendered.envelope.to_json()
    } else {
        rendered.text_override.clone().unwrap_or_else(|| rendered.envelope.to_text())
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, body),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("{}", json!({ "error": { "kind": "io", "message": e.to_string() } }));
        return 1;
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_figures() {
        assert_eq!(round_sig(0.022_750_131_948, 4), "0.02275");
        assert_eq!(round_sig(0.641_514_077_591, 4), "0.6415");
        assert_eq!(round_sig(1.0, 4), "1.000");
        assert_eq!(round_sig(9.995e-4, 4), "0.0009995");
        assert_eq!(round_sig(1.234e-7, 4), "1.234e-7");
    }

    #[test]
    fn csv_column_errors_name_the_line() {
        let err = read_column_from("y\n1.0\n2.0\nabc\n".as_bytes(), "y").unwrap_err();
        assert_eq!(err, Error::Parse { line: 4, column: 1, message: "'abc' is not a number".to_string() });
        let err = read_column_from("x\n1.0\n".as_bytes(), "y").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert_eq!(read_column_from("y\n1\n2.5\n".as_bytes(), "y").unwrap(), vec![1.0, 2.5]);
    }

    #[test]
    fn number_list_error_column() {
        let err = parse_number_list("1,2,x", "--values").unwrap_err();
        assert!(matches!(err, Error::Parse { column: 5, .. }));
    }
}
