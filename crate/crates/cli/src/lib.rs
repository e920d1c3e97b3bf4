//! Command-line front end for the subseries laboratory.
//!
//! Every subcommand runs one experiment and emits a single report in JSON
//! (canonical) or CSV (flattened projection).  Reports embed the full
//! effective configuration and a `schema` version so they can be archived
//! and re-checked.  With the same flags and seed the JSON output is byte
//! identical except for the `timestamp` field.
//!
//! Exit codes: 0 when every pass/holds field is true, 1 on contract errors
//! or decided failures, 2 when the report is dominated by undecided
//! verdicts, 64 on usage errors.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigInt, BigRational, One};
use serde::Serialize;
use serde_json::{json, Value};

use banach_lab::scalar::parse_rational;
use banach_lab::{
    catalog, catalog_names, detect_strong, detect_weak, dichotomy_experiment,
    equidistribution_check, extract_blocks, levy_check_exhaustive, monomial_test_family,
    norming_family, op_experiment, partial_sum, terms_prefix, unconditional_cauchy_scan,
    BlockIdSet, Budget, CoefficientSeq, FormalSeries, Functional, LabError, NormingFamily,
    Outcome, Precision, Result, Scalar, Seed,
};

/// Undecided fraction above which a sampled report exits with code 2
/// instead of 1.
const UNDECIDED_DOMINANT: f64 = 0.2;

const SEED_ENV: &str = "BANACH_LAB_SEED";

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "banach-lab",
    version,
    about = "Random subseries laboratory: exhaustive sign-cube checks, \
             finite-budget convergence detectors, block extraction demos"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,

    /// RNG seed; defaults to $BANACH_LAB_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the series families with their ground-truth summaries.
    Catalog,

    /// Exhaustive maximal-inequality count over a family prefix.
    Levy {
        /// Family name from `catalog`.
        #[arg(long)]
        family: String,
        /// Exponent for families that take one, as a rational string.
        #[arg(long)]
        alpha: Option<String>,
        /// Number of leading terms; the sign cube has 2^n corners.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Norm threshold, as a rational string.
        #[arg(long, default_value = "1")]
        r: String,
    },

    /// Exact sign-flip multiset identity on a family prefix.
    Equidist {
        #[arg(long)]
        family: String,
        #[arg(long)]
        alpha: Option<String>,
        /// Flip horizon: signs at indices 0..=n are negated.
        #[arg(long, default_value_t = 0)]
        n: usize,
        /// Truncation of the partial sums; must satisfy m >= n.
        #[arg(long, default_value_t = 8)]
        m: usize,
    },

    /// Sampled strong/weak zero-one experiment over random signs.
    Dichotomy {
        #[arg(long)]
        family: String,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Detector budget: deepest partial sum inspected.
        #[arg(long, default_value_t = 512)]
        n_max: usize,
        /// Detector budget: functionals drawn from the norming family.
        #[arg(long, default_value_t = 64)]
        k_functionals: usize,
        /// Detector budget: candidate limit truncations.
        #[arg(long, default_value_t = 16)]
        candidates: usize,
    },

    /// Full pipeline: Cauchy-failure scan, block extraction, coarse
    /// random-sign experiment on the restricted series.
    OpDemo {
        #[arg(long)]
        family: String,
        #[arg(long)]
        alpha: Option<String>,
        /// Block-sum norm threshold, as a rational string; when omitted it
        /// is probed from the largest single-term norm past the margin.
        #[arg(long)]
        delta: Option<String>,
        /// Number of blocks to extract.
        #[arg(long, default_value_t = 8)]
        blocks: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Block ids to keep: all, evens, or comma-separated ids.
        #[arg(long, default_value = "all")]
        keep: String,
        #[arg(long, default_value_t = 512)]
        n_max: usize,
        #[arg(long, default_value_t = 64)]
        k_functionals: usize,
        #[arg(long, default_value_t = 16)]
        candidates: usize,
    },

    /// Monomial telescoping table: every pairing shrinks like 1/(N+1)
    /// while the sup norm of each partial sum stays exactly 1.
    Counterexample {
        /// Largest truncation in the table.
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Catalog => "catalog",
            Command::Levy { .. } => "levy",
            Command::Equidist { .. } => "equidist",
            Command::Dichotomy { .. } => "dichotomy",
            Command::OpDemo { .. } => "op-demo",
            Command::Counterexample { .. } => "counterexample",
        }
    }
}

/// One report: the only thing any subcommand prints.
#[derive(Serialize, Debug)]
pub struct Envelope {
    pub schema: u32,
    pub command: String,
    /// Unix seconds; excluded from golden comparisons.
    pub timestamp: u64,
    pub config: Value,
    pub report: Value,
    pub pass: bool,
    pub exit: i32,
}

pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = usage_exit(&e);
            let _ = e.print();
            return code;
        }
    };
    execute(&cli)
}

/// Help and version requests succeed; anything else a parser rejects is a
/// usage error.
pub fn usage_exit(e: &clap::Error) -> i32 {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
        _ => 64,
    }
}

pub fn execute(cli: &Cli) -> i32 {
    let (text, exit) = render(cli);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{text}"),
    }
    exit
}

/// Builds the report and formats it, without touching the filesystem.
pub fn render(cli: &Cli) -> (String, i32) {
    let seed = effective_seed(cli.seed, std::env::var(SEED_ENV).ok().as_deref());
    let envelope = evaluate(&cli.command, seed);
    let exit = envelope.exit;
    let text = match cli.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&envelope).expect("reports serialize");
            t.push('\n');
            t
        }
        Format::Csv => to_csv(&envelope),
    };
    (text, exit)
}

pub fn effective_seed(flag: Option<u64>, env: Option<&str>) -> u64 {
    flag.or_else(|| env.and_then(|v| v.parse().ok())).unwrap_or(0)
}

/// Drops the timestamp line so two runs can be compared byte for byte.
pub fn without_timestamp(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\":"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn evaluate(cmd: &Command, seed: u64) -> Envelope {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_secs();
    match run_command(cmd, seed) {
        Ok((config, report, pass, exit)) => Envelope {
            schema: 1,
            command: cmd.name().into(),
            timestamp: now,
            config,
            report,
            pass,
            exit,
        },
        Err(err) => Envelope {
            schema: 1,
            command: cmd.name().into(),
            timestamp: now,
            config: json!({ "seed": seed }),
            report: json!({ "error": err.to_string(), "error_kind": error_kind(&err) }),
            pass: false,
            exit: 1,
        },
    }
}

fn error_kind(err: &LabError) -> &'static str {
    match err {
        LabError::SpaceMismatch { .. } => "space_mismatch",
        LabError::DimensionExceeded { .. } => "dimension_exceeded",
        LabError::Unsupported(_) => "unsupported",
        LabError::InexactNorm(_) => "inexact_norm",
        LabError::NotNorming(_) => "not_norming",
        LabError::FunctionalOutOfBall(_) => "functional_out_of_ball",
        LabError::InvalidInput(_) => "invalid_input",
        LabError::Precondition(_) => "precondition",
        LabError::BudgetExhausted { .. } => "budget_exhausted",
        LabError::EnumerationTooLarge { .. } => "enumeration_too_large",
        LabError::CoefficientsUnavailable { .. } => "coefficients_unavailable",
        LabError::OracleIncomplete { .. } => "oracle_incomplete",
    }
}

fn run_command(cmd: &Command, seed: u64) -> Result<(Value, Value, bool, i32)> {
    match cmd {
        Command::Catalog => run_catalog(seed),
        Command::Levy { family, alpha, n, r } => run_levy(family, alpha, *n, r, seed),
        Command::Equidist { family, alpha, n, m } => run_equidist(family, alpha, *n, *m, seed),
        Command::Dichotomy {
            family,
            alpha,
            samples,
            n_max,
            k_functionals,
            candidates,
        } => run_dichotomy(
            family,
            alpha,
            *samples,
            budget_from(*n_max, *k_functionals, *candidates),
            seed,
        ),
        Command::OpDemo {
            family,
            alpha,
            delta,
            blocks,
            samples,
            keep,
            n_max,
            k_functionals,
            candidates,
        } => run_op_demo(
            family,
            alpha,
            delta.as_deref(),
            *blocks,
            *samples,
            keep,
            budget_from(*n_max, *k_functionals, *candidates),
            seed,
        ),
        Command::Counterexample { n } => run_counterexample(*n, seed),
    }
}

fn budget_from(n_max: usize, k_functionals: usize, candidates: usize) -> Budget {
    Budget {
        n_max,
        k_functionals,
        candidate_count: candidates,
        ..Budget::default()
    }
}

/// Family plus effective exponent and arithmetic mode.  A fractional
/// exponent forces floating point; integral exponents stay exact.
fn family_setup(
    family: &str,
    alpha: &Option<String>,
) -> Result<(FormalSeries, BigRational, Precision)> {
    let alpha_rat = match alpha {
        Some(a) => parse_rational(a)
            .ok_or_else(|| LabError::InvalidInput(format!("--alpha wants a rational, got {a}")))?,
        None => BigRational::one(),
    };
    let precision = if alpha_rat.is_integer() {
        Precision::Exact
    } else {
        Precision::Float64
    };
    let mut params = BTreeMap::new();
    if alpha.is_some() {
        params.insert("alpha".to_string(), alpha_rat.clone());
    }
    let (series, _spec) = catalog(family, &params, precision)?;
    Ok((series, alpha_rat, precision))
}

fn family_functionals(s: &FormalSeries) -> Result<NormingFamily> {
    match norming_family(s.space()) {
        Ok(fam) => Ok(fam),
        Err(_) => monomial_test_family(s.space()),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn run_catalog(seed: u64) -> Result<(Value, Value, bool, i32)> {
    let mut families = Vec::new();
    for name in catalog_names() {
        let (_s, spec) = catalog(name, &BTreeMap::new(), Precision::Exact)?;
        families.push(to_value(&spec));
    }
    let config = json!({ "seed": seed });
    let report = json!({ "families": families });
    Ok((config, report, true, 0))
}

fn run_levy(
    family: &str,
    alpha: &Option<String>,
    n: usize,
    r: &str,
    seed: u64,
) -> Result<(Value, Value, bool, i32)> {
    if n == 0 {
        return Err(LabError::InvalidInput("--n must be at least 1".into()));
    }
    let (series, alpha_rat, precision) = family_setup(family, alpha)?;
    let r_rat = parse_rational(r)
        .ok_or_else(|| LabError::InvalidInput(format!("--r wants a rational, got {r}")))?;
    let threshold = Scalar::from_rational(precision, &r_rat);
    let terms = terms_prefix(&series, n - 1)?;
    let rep = levy_check_exhaustive(&terms, &threshold)?;
    let config = json!({
        "family": family,
        "alpha": alpha_rat.to_string(),
        "n": n,
        "r": r_rat.to_string(),
        "precision": to_value(&precision),
        "seed": seed,
    });
    let pass = rep.holds;
    Ok((config, to_value(&rep), pass, i32::from(!pass)))
}

fn run_equidist(
    family: &str,
    alpha: &Option<String>,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<(Value, Value, bool, i32)> {
    let (series, alpha_rat, precision) = family_setup(family, alpha)?;
    let terms = terms_prefix(&series, m)?;
    let rep = equidistribution_check(&terms, n, m)?;
    let config = json!({
        "family": family,
        "alpha": alpha_rat.to_string(),
        "n": n,
        "m": m,
        "precision": to_value(&precision),
        "seed": seed,
    });
    let pass = rep.multiset_equal;
    Ok((config, to_value(&rep), pass, i32::from(!pass)))
}

fn run_dichotomy(
    family: &str,
    alpha: &Option<String>,
    samples: usize,
    budget: Budget,
    seed: u64,
) -> Result<(Value, Value, bool, i32)> {
    let (series, alpha_rat, precision) = family_setup(family, alpha)?;
    let fam = family_functionals(&series)?;
    let rep = dichotomy_experiment(&series, samples, &budget, &fam, Seed::new(seed))?;
    let config = json!({
        "family": family,
        "alpha": alpha_rat.to_string(),
        "samples": samples,
        "budget": to_value(&budget),
        "precision": to_value(&precision),
        "seed": seed,
    });
    let pass = rep.dichotomy_pass && !rep.inconclusive;
    let exit = if pass {
        0
    } else if rep.inconclusive {
        2
    } else {
        1
    };
    Ok((config, to_value(&rep), pass, exit))
}

#[allow(clippy::too_many_arguments)]
fn run_op_demo(
    family: &str,
    alpha: &Option<String>,
    delta: Option<&str>,
    blocks: usize,
    samples: usize,
    keep: &str,
    budget: Budget,
    seed: u64,
) -> Result<(Value, Value, bool, i32)> {
    let (series, alpha_rat, precision) = family_setup(family, alpha)?;
    let delta_rat = match delta {
        Some(d) => parse_rational(d)
            .ok_or_else(|| LabError::InvalidInput(format!("--delta wants a rational, got {d}")))?,
        None => probe_delta(&series, &budget)?,
    };
    let threshold = Scalar::from_rational(precision, &delta_rat);
    let keep_set = parse_keep(keep)?;
    let config = json!({
        "family": family,
        "alpha": alpha_rat.to_string(),
        "delta": delta_rat.to_string(),
        "blocks": blocks,
        "samples": samples,
        "keep": keep,
        "budget": to_value(&budget),
        "precision": to_value(&precision),
        "seed": seed,
    });

    let scan = unconditional_cauchy_scan(&series, &threshold, &budget)?;
    let part = match extract_blocks(&series, &threshold, blocks, &budget) {
        Ok(p) => p,
        Err(LabError::BudgetExhausted {
            blocks: partial,
            requested,
            frontier,
        }) => {
            // The extraction gate refusing is itself a reportable outcome:
            // summable tails are exactly the series with no block to find.
            let report = json!({
                "scan": scan,
                "extraction": {
                    "error_kind": "budget_exhausted",
                    "partial_blocks": partial,
                    "requested": requested,
                    "frontier": frontier,
                },
            });
            return Ok((config, report, false, 1));
        }
        Err(e) => return Err(e),
    };
    let part = Arc::new(part);
    let fam = family_functionals(&series)?;
    let rep = op_experiment(&series, &part, &keep_set, samples, &fam, &budget, Seed::new(seed))?;
    let undecided = rep.sigma_undecided.max(rep.s_undecided) as f64 / samples as f64;
    let pass = rep.pass;
    let exit = if pass {
        0
    } else if undecided > UNDECIDED_DOMINANT {
        2
    } else {
        1
    };
    let report = json!({
        "scan": scan,
        "blocks": part.blocks(),
        "experiment": to_value(&rep),
    });
    Ok((config, report, pass, exit))
}

/// Default threshold when --delta is omitted: half the largest single-term
/// norm past the margin, floored to the 1/1024 grid.  Non-Cauchy tails keep
/// clearing such a threshold; summable tails eventually cannot.
fn probe_delta(s: &FormalSeries, b: &Budget) -> Result<BigRational> {
    let mut best = 0.0f64;
    for n in (b.margin() + 1)..=b.n_max {
        best = best.max(s.term(n)?.norm_approx());
    }
    if best <= 0.0 {
        return Err(LabError::Precondition(
            "no term mass past the margin; pass --delta explicitly".into(),
        ));
    }
    let ticks = ((best / 2.0) * 1024.0).floor().max(1.0) as i64;
    Ok(BigRational::new(BigInt::from(ticks), BigInt::from(1024)))
}

fn parse_keep(keep: &str) -> Result<BlockIdSet> {
    match keep {
        "all" => Ok(BlockIdSet::All),
        "evens" => Ok(BlockIdSet::Evens),
        _ => {
            let ids = keep
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<BTreeSet<_>, _>>()
                .map_err(|_| {
                    LabError::InvalidInput(format!(
                        "--keep wants all, evens, or comma-separated ids, got {keep}"
                    ))
                })?;
            Ok(BlockIdSet::Explicit(ids))
        }
    }
}

fn run_counterexample(n: usize, seed: u64) -> Result<(Value, Value, bool, i32)> {
    let (series, _spec) = catalog("linf_monomial", &BTreeMap::new(), Precision::Exact)?;
    let space = *series.space();
    let ones = CoefficientSeq::signs_all_plus();
    let one = Scalar::from_int(space.precision, 1);
    let half = Scalar::ratio(space.precision, 1, 2);

    // Unit-mass test functionals; each pairing against t^N is bounded by
    // 1/(N+1), with equality for the full indicator.
    let columns: Vec<(&str, Functional)> = vec![
        ("pair_unit", Functional::indicator(space, Scalar::zero(space.precision), one.clone())?),
        ("pair_half", Functional::indicator(space, Scalar::zero(space.precision), half)?),
        ("pair_t", Functional::poly_density(space, [(1, one.clone())])?),
        ("pair_t2", Functional::poly_density(space, [(2, one.clone())])?),
    ];

    let mut rows = Vec::new();
    let mut holds = true;
    for k in 0..=n {
        let sum = partial_sum(&series, &ones, k)?;
        let envelope_at_k = Scalar::ratio(space.precision, 1, (k + 1) as i64);
        let mut row = serde_json::Map::new();
        row.insert("n".into(), json!(k));
        for (label, f) in &columns {
            let p = f.pair(&sum)?;
            if p.abs().cmp_same(&envelope_at_k) == std::cmp::Ordering::Greater {
                holds = false;
            }
            row.insert((*label).into(), json!(p.to_string()));
        }
        // The full-interval pairing telescopes to exactly 1/(N+1).
        if row["pair_unit"] != json!(envelope_at_k.to_string()) {
            holds = false;
        }
        let sup = sum.norm()?;
        if sup.cmp_same(&one) != std::cmp::Ordering::Equal {
            holds = false;
        }
        row.insert("sup_norm".into(), json!(sup.to_string()));
        rows.push(Value::Object(row));
    }

    // The same input splits the detectors: pairings vanish, norms do not.
    let budget = budget_from(256, 8, 4);
    let fam = monomial_test_family(&space)?;
    let weak = detect_weak(&series, &ones, &fam, &budget)?;
    let strong = detect_strong(&series, &ones, &budget)?;
    let split = weak.outcome == Outcome::Converged && strong.outcome == Outcome::Diverged;

    let config = json!({
        "n": n,
        "budget": to_value(&budget),
        "seed": seed,
    });
    let report = json!({
        "rows": rows,
        "weak": to_value(&weak),
        "strong": to_value(&strong),
    });
    let pass = holds && split;
    Ok((config, report, pass, i32::from(!pass)))
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, vv) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, vv, out);
            }
        }
        Value::Array(items) => {
            for (i, vv) in items.iter().enumerate() {
                flatten_into(&format!("{prefix}[{i}]"), vv, out);
            }
        }
        leaf => {
            out.push_str(&csv_escape(prefix));
            out.push(',');
            out.push_str(&csv_escape(&csv_scalar(leaf)));
            out.push('\n');
        }
    }
}

/// CSV projection: real tables for the tabular commands, a flattened
/// key,value listing for everything else.
pub fn to_csv(env: &Envelope) -> String {
    match env.command.as_str() {
        "catalog" => {
            let mut out = String::from("name,space,unconditional,strong,weak,bounded\n");
            if let Some(fams) = env.report.get("families").and_then(Value::as_array) {
                for f in fams {
                    let s = &f["summary"];
                    let cells = [
                        csv_scalar(&f["name"]),
                        f["space"].to_string(),
                        csv_scalar(&s["unconditional"]),
                        csv_scalar(&s["strong"]),
                        csv_scalar(&s["weak"]),
                        csv_scalar(&s["bounded"]),
                    ];
                    let row: Vec<String> = cells.iter().map(|c| csv_escape(c)).collect();
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            out
        }
        "counterexample" => {
            let mut out = String::from("n,pair_unit,pair_half,pair_t,pair_t2,sup_norm\n");
            if let Some(rows) = env.report.get("rows").and_then(Value::as_array) {
                for r in rows {
                    let cells = [
                        csv_scalar(&r["n"]),
                        csv_scalar(&r["pair_unit"]),
                        csv_scalar(&r["pair_half"]),
                        csv_scalar(&r["pair_t"]),
                        csv_scalar(&r["pair_t2"]),
                        csv_scalar(&r["sup_norm"]),
                    ];
                    let row: Vec<String> = cells.iter().map(|c| csv_escape(c)).collect();
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            out
        }
        _ => {
            let mut out = String::from("key,value\n");
            flatten_into("", &to_value(env), &mut out);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).expect("args parse")
    }

    fn json_of(text: &str) -> Value {
        serde_json::from_str(text).expect("valid report json")
    }

    #[test]
    fn catalog_lists_all_families() {
        let (text, exit) = render(&parse(&["banach-lab", "catalog"]));
        assert_eq!(exit, 0);
        let v = json_of(&text);
        assert_eq!(v["schema"], json!(1));
        assert_eq!(v["pass"], json!(true));
        assert_eq!(v["report"]["families"].as_array().unwrap().len(), 6);

        let (csv, exit) = render(&parse(&["banach-lab", "catalog", "--format", "csv"]));
        assert_eq!(exit, 0);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("name,space,"));
    }

    #[test]
    fn levy_reports_exact_fractions() {
        let (text, exit) =
            render(&parse(&["banach-lab", "levy", "--family", "c0_basis", "--n", "4", "--r", "1"]));
        assert_eq!(exit, 0);
        let v = json_of(&text);
        assert_eq!(v["report"]["holds"], json!(true));
        assert_eq!(v["config"]["n"], json!(4));
        assert_eq!(v["config"]["precision"], json!("exact"));
    }

    #[test]
    fn levy_rejects_zero_terms_and_bad_rationals() {
        let (text, exit) =
            render(&parse(&["banach-lab", "levy", "--family", "c0_basis", "--n", "0"]));
        assert_eq!(exit, 1);
        let v = json_of(&text);
        assert_eq!(v["pass"], json!(false));
        assert_eq!(v["report"]["error_kind"], json!("invalid_input"));

        let (text, exit) =
            render(&parse(&["banach-lab", "levy", "--family", "c0_basis", "--r", "abc"]));
        assert_eq!(exit, 1);
        assert_eq!(json_of(&text)["report"]["error_kind"], json!("invalid_input"));
    }

    #[test]
    fn equidist_is_exact_only() {
        let (text, exit) = render(&parse(&[
            "banach-lab",
            "equidist",
            "--family",
            "l2_diagonal",
            "--alpha",
            "1/2",
            "--m",
            "3",
        ]));
        assert_eq!(exit, 1);
        let v = json_of(&text);
        assert_eq!(v["report"]["error_kind"], json!("unsupported"));

        let (text, exit) = render(&parse(&[
            "banach-lab",
            "equidist",
            "--family",
            "l2_diagonal",
            "--n",
            "1",
            "--m",
            "3",
        ]));
        assert_eq!(exit, 0);
        assert_eq!(json_of(&text)["report"]["multiset_equal"], json!(true));
    }

    #[test]
    fn counterexample_table_has_closed_forms() {
        let (text, exit) = render(&parse(&["banach-lab", "counterexample", "--n", "8"]));
        assert_eq!(exit, 0);
        let v = json_of(&text);
        assert_eq!(v["pass"], json!(true));
        let rows = v["report"]["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[3]["pair_unit"], json!("1/4"));
        assert_eq!(rows[3]["pair_t"], json!("1/5"));
        assert_eq!(rows[3]["sup_norm"], json!("1"));
        assert_eq!(v["report"]["weak"]["outcome"], json!("converged"));
        assert_eq!(v["report"]["strong"]["outcome"], json!("diverged"));

        let (csv, _) = render(&parse(&[
            "banach-lab",
            "counterexample",
            "--n",
            "2",
            "--format",
            "csv",
        ]));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,pair_unit,pair_half,pair_t,pair_t2,sup_norm");
        assert_eq!(lines[3], "2,1/3,1/24,1/4,1/5,1");
    }

    #[test]
    fn dichotomy_reports_are_reproducible() {
        let args = [
            "banach-lab",
            "dichotomy",
            "--family",
            "l2_diagonal",
            "--alpha",
            "2",
            "--samples",
            "100",
            "--n-max",
            "32",
            "--k-functionals",
            "8",
            "--candidates",
            "4",
            "--seed",
            "7",
        ];
        let (a, exit_a) = render(&parse(&args));
        let (b, exit_b) = render(&parse(&args));
        assert_eq!(exit_a, 0);
        assert_eq!(exit_b, 0);
        assert_eq!(without_timestamp(&a), without_timestamp(&b));
        let v = json_of(&a);
        assert_eq!(v["report"]["frac_strong"], json!(1.0));
        assert_eq!(v["config"]["seed"], json!(7));
    }

    #[test]
    fn op_demo_reports_exhaustion_on_summable_tails() {
        let (text, exit) = render(&parse(&[
            "banach-lab",
            "op-demo",
            "--family",
            "l1_absolute",
            "--delta",
            "1",
            "--blocks",
            "4",
            "--samples",
            "10",
            "--n-max",
            "64",
        ]));
        assert_eq!(exit, 1);
        let v = json_of(&text);
        assert_eq!(v["pass"], json!(false));
        let ext = &v["report"]["extraction"];
        assert_eq!(ext["error_kind"], json!("budget_exhausted"));
        assert_eq!(ext["requested"], json!(4));
        assert_eq!(v["report"]["scan"], Value::Null);
    }

    #[test]
    fn op_demo_runs_the_paired_pipeline() {
        let (text, exit) = render(&parse(&[
            "banach-lab",
            "op-demo",
            "--family",
            "c0_paired",
            "--delta",
            "1",
            "--blocks",
            "3",
            "--samples",
            "20",
            "--n-max",
            "64",
            "--k-functionals",
            "16",
            "--candidates",
            "4",
            "--seed",
            "3",
        ]));
        assert_eq!(exit, 0);
        let v = json_of(&text);
        assert_eq!(v["pass"], json!(true));
        assert_eq!(v["report"]["blocks"].as_array().unwrap().len(), 3);
        assert_eq!(v["report"]["experiment"]["frac_sigma_fail_weak"], json!(1.0));
        assert!(v["report"]["scan"].is_array());
        assert_eq!(v["config"]["delta"], json!("1"));
    }

    #[test]
    fn keep_flag_parses_every_form() {
        assert!(matches!(parse_keep("all"), Ok(BlockIdSet::All)));
        assert!(matches!(parse_keep("evens"), Ok(BlockIdSet::Evens)));
        match parse_keep("0, 2,4") {
            Ok(BlockIdSet::Explicit(ids)) => {
                assert_eq!(ids.into_iter().collect::<Vec<_>>(), vec![0, 2, 4]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_keep("zero").is_err());
        assert!(parse_keep("").is_err());
    }

    #[test]
    fn seed_resolution_prefers_flag_then_env() {
        assert_eq!(effective_seed(Some(9), Some("4")), 9);
        assert_eq!(effective_seed(None, Some("4")), 4);
        assert_eq!(effective_seed(None, Some("not a seed")), 0);
        assert_eq!(effective_seed(None, None), 0);
    }

    #[test]
    fn usage_errors_are_distinguished_from_help() {
        let bad = Cli::try_parse_from(["banach-lab", "bogus"]).unwrap_err();
        assert_eq!(usage_exit(&bad), 64);
        let bad_flag =
            Cli::try_parse_from(["banach-lab", "catalog", "--no-such-flag"]).unwrap_err();
        assert_eq!(usage_exit(&bad_flag), 64);
        let help = Cli::try_parse_from(["banach-lab", "--help"]).unwrap_err();
        assert_eq!(usage_exit(&help), 0);
        let version = Cli::try_parse_from(["banach-lab", "--version"]).unwrap_err();
        assert_eq!(usage_exit(&version), 0);
    }

    #[test]
    fn csv_flattening_escapes_and_recurses() {
        let mut out = String::new();
        flatten_into(
            "",
            &json!({"a": {"b": [1, "x,y"]}, "c": true}),
            &mut out,
        );
        assert_eq!(out, "a.b[0],1\na.b[1],\"x,y\"\nc,true\n");
    }

    #[test]
    fn probe_picks_up_tail_mass() {
        let b = budget_from(64, 8, 4);
        let (s, _) = catalog("c0_basis", &BTreeMap::new(), Precision::Exact).unwrap();
        let d = probe_delta(&s, &b).unwrap();
        assert_eq!(d, BigRational::new(BigInt::from(512), BigInt::from(1024)));

        let zero = FormalSeries::zero(banach_lab::Space::seq_c0(Precision::Exact));
        assert!(probe_delta(&zero, &b).is_err());
    }
}
