//! Command-line surface of the `substream` binary.
//!
//! Exit codes: 0 on success, 1 when a check or experiment reports a
//! mismatch, 2 on usage errors and invalid parameters.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::algs::driver::parse_rational;
use crate::error::{Error, Result};
use crate::hard_card::{self, check_profile_lemmas as card_lemmas, ColorProfile3};
use crate::hard_matroid::{self, MatroidProfile};
use crate::harness::audit::{canonical_audit, halving_trend, CanonicalAudit, TrendCheck};
use crate::harness::experiment::{run_experiment, AlgorithmId, ExperimentConfig};
use crate::harness::instance::{ConstraintKind, InstanceBody, InstanceFile, InstanceKind};
use crate::harness::streams::Distribution;
use crate::harness::tables::{diff_against_golden, emit_table, Table};
use crate::matroid::AxiomReport;
use crate::oracle::{verify_monotone_submodular, Verdict, DEFAULT_EXHAUSTIVE_LIMIT};

#[derive(Parser, Debug)]
#[command(name = "substream", version, about = "Streaming submodular maximization: algorithms, hard instances and experiments")]
pub struct Cli {
    /// Seed for instances and stream orderings.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write an instance file.
    Gen(InstanceArgs),
    /// Check monotonicity, submodularity and closed forms of an instance.
    Verify(VerifyArgs),
    /// Run an algorithm over sampled streams and report ratios.
    Run(RunArgs),
    /// Canonical-process audit of an element-store algorithm.
    Audit(AuditArgs),
    /// Emit a value grid as CSV, optionally diffing against the golden copy.
    Tables(TablesArgs),
    /// Tabulate the cardinality lower-bound ratio over a range of K.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    HardCardinality,
    HardMatroid,
    Coverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Cardinality,
    Matroid,
    Partition,
}

/// An instance, either from a file or from inline parameters.
#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Instance file; inline parameters are ignored when given.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Without --kind, `cardinality` and `matroid` select the hard instances.
    #[arg(long, value_enum)]
    pub constraint: Option<ConstraintArg>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Also enumerate every subset of the ground set.
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgArg {
    Branching,
    Greedy,
    Sieve,
    StoreAll,
}

impl From<AlgArg> for AlgorithmId {
    fn from(a: AlgArg) -> Self {
        match a {
            AlgArg::Branching => AlgorithmId::Branching,
            AlgArg::Greedy => AlgorithmId::Greedy,
            AlgArg::Sieve => AlgorithmId::Sieve,
            AlgArg::StoreAll => AlgorithmId::StoreAll,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    CardD,
    MatroidD,
    Uniform,
}

impl From<DistArg> for Distribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::CardD => Distribution::CardD,
            DistArg::MatroidD => Distribution::MatroidD,
            DistArg::Uniform => Distribution::Uniform,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = AlgArg::Branching)]
    pub alg: AlgArg,
    /// Guess-grid resolution, as a decimal or a fraction `a/b`.
    #[arg(long, default_value = "0.1")]
    pub epsilon: String,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Element budget for the sieve baseline.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Defaults to the lower-bound distribution of hard instances.
    #[arg(long, value_enum)]
    pub distribution: Option<DistArg>,
    /// Re-derive the instance per trial from seed + trial index.
    #[arg(long)]
    pub vary_instance: bool,
    /// Permit matroid branching above rank 4.
    #[arg(long)]
    pub allow_large_rank: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AuditAlgArg {
    Sieve,
    StoreAll,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = AuditAlgArg::Sieve)]
    pub alg: AuditAlgArg,
    #[arg(long, default_value = "0.1")]
    pub epsilon: String,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Repeat a hard-matroid audit with m doubled and compare frequencies.
    #[arg(long)]
    pub trend: bool,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
    pub which: u32,
    /// Compare with the checked-in golden CSV; mismatches exit 1.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub k_from: usize,
    #[arg(long, default_value_t = 200)]
    pub k_to: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(Outcome { body, ok }) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &body).map_err(Error::from),
                None => stdout.write_all(body.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            i32::from(!ok)
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

struct Outcome {
    body: String,
    ok: bool,
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Gen(args) => {
            let file = resolve_instance(args, cli.seed)?;
            file.instantiate()?;
            Ok(Outcome { body: file.to_json(), ok: true })
        }
        Command::Verify(args) => verify(cli, args),
        Command::Run(args) => run(cli, args),
        Command::Audit(args) => audit(cli, args),
        Command::Tables(args) => {
            let table = Table::from_number(args.which)?;
            let csv = emit_table(table);
            if !args.check {
                return Ok(Outcome { body: csv, ok: true });
            }
            let diffs = diff_against_golden(table);
            let mut body = String::new();
            for d in &diffs {
                body.push_str(&format!("line {} column {}: expected {} got {}\n", d.line, d.column, d.expected, d.got));
            }
            body.push_str(&format!(
                "table {}: {}\n",
                table.number(),
                if diffs.is_empty() { "matches golden" } else { "MISMATCH" }
            ));
            Ok(Outcome { body, ok: diffs.is_empty() })
        }
        Command::Sweep(args) => sweep(cli, args),
    }
}

fn resolve_instance(args: &InstanceArgs, seed: u64) -> Result<InstanceFile> {
    if let Some(path) = &args.instance {
        return InstanceFile::load(path);
    }
    let kind = match (args.kind, args.constraint) {
        (Some(KindArg::HardCardinality), _) => InstanceKind::HardCardinality,
        (Some(KindArg::HardMatroid), _) => InstanceKind::HardMatroid,
        (Some(KindArg::Coverage), _) => InstanceKind::Coverage,
        (None, Some(ConstraintArg::Cardinality)) => InstanceKind::HardCardinality,
        (None, Some(ConstraintArg::Matroid)) => InstanceKind::HardMatroid,
        (None, Some(ConstraintArg::Partition)) => InstanceKind::Coverage,
        (None, None) => return Err(Error::InvalidParams("give --instance, --kind or --constraint".into())),
    };
    let k = args.k.ok_or_else(|| Error::InvalidParams("--K is required".into()))?;
    let need_n = || args.n.ok_or_else(|| Error::InvalidParams("--n is required".into()));
    Ok(match kind {
        InstanceKind::HardCardinality => {
            let h = match args.h {
                Some(h) => h,
                None => hard_card::ratio_bound(k)?.h,
            };
            InstanceFile::hard_cardinality(need_n()?, k, h, seed)
        }
        InstanceKind::HardMatroid => {
            let m = args.m.unwrap_or(2 * k.saturating_sub(1));
            InstanceFile::hard_matroid(k, m, seed)
        }
        InstanceKind::Coverage => {
            let c = match args.constraint {
                Some(ConstraintArg::Matroid | ConstraintArg::Partition) => ConstraintKind::Partition,
                _ => ConstraintKind::Cardinality,
            };
            InstanceFile::coverage(need_n()?, k, c, seed)
        }
    })
}

#[derive(Serialize)]
struct Check {
    name: String,
    ok: bool,
    detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), ok, detail: detail.into() }
    }
}

fn render_checks(checks: &[Check], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({ "checks": checks })).expect("serializable") + "\n",
        Format::Csv => {
            let mut s = String::from("check,ok,detail\n");
            for c in checks {
                s.push_str(&format!("{},{},\"{}\"\n", c.name, c.ok, c.detail.replace('"', "'")));
            }
            s
        }
    }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<Outcome> {
    let inst = resolve_instance(&args.instance, cli.seed)?.instantiate()?;
    let mut checks = Vec::new();
    match inst.body() {
        InstanceBody::HardCardinality(h) => {
            let p = h.params();
            let w = card_lemmas(p, p.blues());
            checks.push(Check::new("profile-lemmas", w.is_none(), w.unwrap_or_default()));
            let top = hard_card::profile_value(ColorProfile3::new(0, p.k - 1, 1), p)?;
            let opt = hard_card::optimal_value(p);
            checks.push(Check::new("optimal-value", top == opt, format!("f(0,K-1,1) = {top}, closed form {opt}")));
            let blue = hard_card::profile_value(ColorProfile3::new(p.k, 0, 0), p)?;
            checks.push(Check::new(
                "output-value",
                blue == hard_card::output_value_blue(p),
                format!("f(K,0,0) = {blue}"),
            ));
        }
        InstanceBody::HardMatroid(h) => {
            let k = h.params().k;
            let w = hard_matroid::check_profile_lemmas(k);
            checks.push(Check::new("profile-lemmas", w.is_none(), w.map(|w| w.0).unwrap_or_default()));
            let all_red = MatroidProfile::new(vec![1; k], vec![0; k])?;
            let top = hard_matroid::profile_value(&all_red);
            let opt = hard_matroid::optimal_value(k);
            checks.push(Check::new("optimal-value", top == opt, format!("all reds = {top}, (2K-1)! = {opt}")));
            if h.matroid().ground_size() <= crate::matroid::AXIOM_CHECK_LIMIT {
                let ok = h.matroid().check_axioms()? == AxiomReport::Ok;
                checks.push(Check::new("matroid-axioms", ok, ""));
            }
        }
        InstanceBody::Coverage(_) => {}
    }
    if args.exhaustive {
        let verdict = verify_monotone_submodular(inst.oracle(), DEFAULT_EXHAUSTIVE_LIMIT)?;
        let detail = match &verdict {
            Verdict::Ok => format!("all {} subsets", 1u64 << inst.ground_size()),
            Verdict::Violated(w) => w.to_string(),
        };
        checks.push(Check::new("monotone-submodular", verdict.is_ok(), detail));
    }
    let ok = checks.iter().all(|c| c.ok);
    Ok(Outcome { body: render_checks(&checks, cli.format), ok })
}

fn run(cli: &Cli, args: &RunArgs) -> Result<Outcome> {
    let file = resolve_instance(&args.instance, cli.seed)?;
    let mut config = ExperimentConfig::new(file, args.alg.into(), parse_rational(&args.epsilon)?, args.trials)?;
    config.seed = cli.seed;
    config.budget = args.budget;
    config.vary_instance = args.vary_instance;
    config.allow_large_rank = args.allow_large_rank;
    if let Some(d) = args.distribution {
        config.distribution = d.into();
    }
    let report = run_experiment(&config)?;
    let a = &report.aggregates;
    let ok = a.failed == 0 && a.infeasible == 0 && a.total_violations == 0;
    let body = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    Ok(Outcome { body, ok })
}

#[derive(Serialize)]
struct AuditOutput {
    audit: CanonicalAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    doubled: Option<CanonicalAudit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trend: Option<TrendCheck>,
}

fn audit(cli: &Cli, args: &AuditArgs) -> Result<Outcome> {
    let file = resolve_instance(&args.instance, cli.seed)?;
    let eps = parse_rational(&args.epsilon)?;
    let alg = match args.alg {
        AuditAlgArg::Sieve => AlgorithmId::Sieve,
        AuditAlgArg::StoreAll => AlgorithmId::StoreAll,
    };
    let first = canonical_audit(&file, alg, eps.clone(), args.budget, args.trials, cli.seed)?;
    let (doubled, trend) = if args.trend {
        let m = match file.kind {
            InstanceKind::HardMatroid => file.m.unwrap_or(2 * file.k.saturating_sub(1)),
            _ => return Err(Error::InvalidParams("--trend applies to hard-matroid instances".into())),
        };
        let wide = InstanceFile::hard_matroid(file.k, 2 * m, file.seed);
        let second = canonical_audit(&wide, alg, eps, args.budget, args.trials, cli.seed)?;
        let t = halving_trend(&first.deviation, &second.deviation);
        (Some(second), Some(t))
    } else {
        (None, None)
    };
    let ok = first.canonical_ceiling_breaches == 0 && doubled.as_ref().is_none_or(|d| d.canonical_ceiling_breaches == 0);
    let body = match cli.format {
        Format::Json => {
            serde_json::to_string_pretty(&AuditOutput { audit: first, doubled, trend }).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut s = String::from(
                "n,trials,deviation,deviation_ci_low,deviation_ci_high,x_any,y,above_bound,mean_ratio,max_observed,output_bound\n",
            );
            for a in std::iter::once(&first).chain(doubled.as_ref()) {
                let n = a.instance.n.unwrap_or(0);
                s.push_str(&format!(
                    "{n},{},{},{},{},{},{},{},{},{},{}\n",
                    a.trials,
                    a.deviation.frequency,
                    a.deviation.ci_low,
                    a.deviation.ci_high,
                    a.x_any.frequency,
                    a.y.frequency,
                    a.above_bound.frequency,
                    a.mean_ratio,
                    a.max_observed,
                    a.output_bound
                ));
            }
            s
        }
    };
    Ok(Outcome { body, ok })
}

#[derive(Serialize)]
struct SweepRow {
    #[serde(rename = "K")]
    k: usize,
    h: usize,
    ratio: String,
    ratio_f64: f64,
    gap_to_limit: f64,
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<Outcome> {
    if args.k_from < 2 || args.k_to < args.k_from {
        return Err(Error::InvalidParams(format!("need 2 ≤ k-from ≤ k-to, got {}..{}", args.k_from, args.k_to)));
    }
    let limit = hard_card::limiting_ratio();
    let rows: Vec<SweepRow> = (args.k_from..=args.k_to)
        .map(|k| {
            let b = hard_card::ratio_bound(k)?;
            let f = b.ratio.to_f64().unwrap_or(f64::NAN);
            Ok(SweepRow { k, h: b.h, ratio: b.ratio.to_string(), ratio_f64: f, gap_to_limit: f - limit })
        })
        .collect::<Result<_>>()?;
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("serializable") + "\n",
        Format::Csv => {
            let mut s = String::from("K,h,ratio,ratio_f64,gap_to_limit\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{}\n", r.k, r.h, r.ratio, r.ratio_f64, r.gap_to_limit));
            }
            s
        }
    };
    Ok(Outcome { body, ok: true })
}
