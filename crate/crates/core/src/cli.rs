//! Command line front-end.
//!
//! Every command writes one JSON document (or CSV rows) to stdout or
//! `--out`. Exit codes: 0 success, 2 validation error, 3 numeric failure,
//! 64 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    conjecture_gap, exp_chaos_bound, general_poly_bounds, lower_sum, lower_tail_table, lq_bound, real_moment_twosided,
    resolve_k, special_space_upper, takie_ratio, upper_sum, upper_tail_table, BoundReport, TailExponent, TailTable,
    CSV_HEADER,
};
use crate::error::{Error, Result};
use crate::io::{load_poly, load_tensor};
use crate::monte_carlo::{
    alpha_plus_ratio, decoupling_ratio, empirical_moment, hypercontractivity_ratio, sandwich_check, Chaos, ExpMode,
    MCConfig, MomentEstimate,
};
use crate::norms::{lq_triple_norm, mixed_norm, NormEstimate, OptimizerConfig};
use crate::partitions::{Partition, PartitionPair};
use crate::tensor::CoeffTensor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHAOS_BOUNDS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "chaos-bounds", version, about = "Moment and tail bounds for vector-valued Gaussian chaoses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One mixed norm ||A||_{P'|P}, or its L_q analogue with --lq.
    Norm(NormArgs),
    /// Structural moment sums.
    Bound(BoundArgs),
    /// Tail exponents on a grid of t.
    Tail(TailArgs),
    /// Exponential-chaos bound.
    ExpBound(ExpArgs),
    /// Hermite pipeline and general-polynomial bounds.
    Poly(PolyArgs),
    /// Monte-Carlo moments.
    Empirical(EmpiricalArgs),
    /// Empirical diagnostics.
    Check(CheckArgs),
    /// All bounds and diagnostics for one tensor.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Optimizer restarts.
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit the timestamp and host metadata.
    #[arg(long)]
    no_meta: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// Partition pair "P'|P", e.g. "{1}|{2},{3}".
    #[arg(long)]
    pair: String,
    /// Evaluate the L_q norm: P' singletons are the l_2 axes.
    #[arg(long)]
    lq: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum BoundSide {
    Upper,
    Lower,
    Both,
    Special,
    Lq,
    Real,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    #[arg(long, value_enum, default_value_t = BoundSide::Both)]
    side: BoundSide,
    /// Constant K of the Gaussian comparison; defaults to sqrt(q) on L_q.
    #[arg(long = "K")]
    k: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TailSide {
    Upper,
    Lower,
    Both,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long = "t", value_delimiter = ',', num_args = 1.., required = true)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TailSide::Both)]
    side: TailSide,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ExpArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    /// Sum over the whole covering family instead of the reduced class.
    #[arg(long)]
    full_m: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PolyArgs {
    #[arg(long)]
    poly: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    /// Points at which to evaluate eta_f.
    #[arg(long = "t", value_delimiter = ',', num_args = 1..)]
    t: Vec<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ChaosKind {
    Decoupled,
    Undecoupled,
    Exp,
    ExpGg,
}

#[derive(Args, Debug)]
struct EmpiricalArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ChaosKind::Decoupled)]
    chaos: ChaosKind,
    /// Percentile bootstrap intervals.
    #[arg(long)]
    bootstrap: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Sandwich,
    Decoupling,
    Hypercontractivity,
    AlphaPlus,
    Takie,
    Conjecture,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long, value_enum)]
    what: CheckKind,
    #[arg(long = "p", default_value_t = 2.0)]
    p: f64,
    /// Higher moment order for the hypercontractivity check.
    #[arg(long = "q")]
    q: Option<f64>,
    /// Pair for the takie check.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long = "p", value_delimiter = ',', num_args = 1.., required = true)]
    p: Vec<f64>,
    #[arg(long = "t", value_delimiter = ',', num_args = 1..)]
    t: Vec<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }

    fn mc(&self, p: Vec<f64>) -> MCConfig {
        MCConfig {
            samples: self.samples,
            p_values: p,
            seed: self.seed,
            ..MCConfig::default()
        }
    }

    fn config_json(&self) -> Value {
        json!({"seed": self.seed, "samples": self.samples, "restarts": self.restarts})
    }
}

/// Rows of a CSV table; the first row is the header.
type Table = Vec<Vec<String>>;

struct Output {
    command: &'static str,
    result: Value,
    table: Table,
}

fn ser<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn bound_rows(reports: &[&BoundReport]) -> Table {
    let mut rows = vec![CSV_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        for t in &r.terms {
            rows.push(vec![
                format!("{}@p={}", r.name, r.p),
                t.label.clone(),
                t.power.to_string(),
                t.value.to_string(),
                t.stderr.to_string(),
            ]);
        }
    }
    rows
}

fn moment_rows(est: &[MomentEstimate]) -> Table {
    let mut rows = vec![["p", "value", "ci_low", "ci_high", "samples", "seed"].map(String::from).to_vec()];
    for e in est {
        rows.push(vec![
            e.p.to_string(),
            e.value.to_string(),
            e.ci_low.to_string(),
            e.ci_high.to_string(),
            e.samples.to_string(),
            e.seed.to_string(),
        ]);
    }
    rows
}

fn tail_rows(side: &str, exps: &[TailExponent], rows: &mut Table) {
    if rows.is_empty() {
        rows.push(["side", "t", "exponent", "argmin", "threshold"].map(String::from).to_vec());
    }
    for e in exps {
        rows.push(vec![
            side.to_string(),
            e.t.to_string(),
            e.exponent.to_string(),
            e.argmin.clone().unwrap_or_default(),
            e.threshold.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
}

fn exponents(table: &TailTable, ts: &[f64]) -> Result<Vec<TailExponent>> {
    ts.iter().map(|&t| table.exponent(t)).collect()
}

fn cmd_norm(args: &NormArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let pair: PartitionPair = args.pair.parse()?;
    pair.validate(a.order())?;
    let cfg = args.common.optimizer();
    let est: NormEstimate = if args.lq {
        if !pair.gaussians_are_singletons() {
            return Err(Error::InvalidArgument("--lq needs singleton blocks left of '|'".into()));
        }
        lq_triple_norm(&a, &pair.deterministic_axes(), &Partition::new(pair.p.clone())?, &cfg)?
    } else {
        mixed_norm(&a, &pair, &cfg)?
    };
    let table = vec![
        ["pair", "value", "stderr", "restarts", "saa_samples", "eval_samples"].map(String::from).to_vec(),
        vec![
            pair.to_string(),
            est.value.to_string(),
            est.stderr.to_string(),
            est.restarts_used.to_string(),
            est.saa_samples.to_string(),
            est.eval_samples.to_string(),
        ],
    ];
    Ok(Output {
        command: "norm",
        result: json!({"pair": pair.to_string(), "lq": args.lq, "config": args.common.config_json(), "estimate": ser(&est)?}),
        table,
    })
}

fn cmd_bound(args: &BoundArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let cfg = args.common.optimizer();
    let mut reports = vec![];
    for &p in &args.p {
        match args.side {
            BoundSide::Upper => reports.push(upper_sum(&a, p, &cfg)?),
            BoundSide::Lower => reports.push(lower_sum(&a, p, &cfg)?),
            BoundSide::Both => {
                reports.push(lower_sum(&a, p, &cfg)?);
                reports.push(upper_sum(&a, p, &cfg)?);
            }
            BoundSide::Special => {
                let k = resolve_k(a.space(), args.k, 1.0)?;
                reports.push(special_space_upper(&a, p, k, &cfg)?);
            }
            BoundSide::Lq => {
                let two = lq_bound(&a, p, &cfg)?;
                reports.push(two.lower);
                reports.push(two.upper);
            }
            BoundSide::Real => {
                let two = real_moment_twosided(&a, p, &cfg)?;
                reports.push(two.lower);
                reports.push(two.upper);
            }
        }
    }
    let refs: Vec<&BoundReport> = reports.iter().collect();
    Ok(Output {
        command: "bound",
        table: bound_rows(&refs),
        result: json!({"config": args.common.config_json(), "reports": ser(&reports)?}),
    })
}

fn tail_tables(a: &CoeffTensor, side: TailSide, cfg: &OptimizerConfig) -> Result<Vec<(&'static str, TailTable)>> {
    let mut out = vec![];
    if side != TailSide::Lower {
        out.push(("upper", upper_tail_table(a, cfg)?));
    }
    if side != TailSide::Upper {
        out.push(("lower", lower_tail_table(a, cfg)?));
    }
    Ok(out)
}

fn cmd_tail(args: &TailArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let cfg = args.common.optimizer();
    let mut rows = vec![];
    let mut result = serde_json::Map::new();
    result.insert("config".into(), args.common.config_json());
    for (name, table) in tail_tables(&a, args.side, &cfg)? {
        let exps = exponents(&table, &args.t)?;
        tail_rows(name, &exps, &mut rows);
        result.insert(name.into(), json!({"table": ser(&table)?, "exponents": ser(&exps)?}));
    }
    Ok(Output {
        command: "tail",
        result: Value::Object(result),
        table: rows,
    })
}

fn cmd_exp(args: &ExpArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let cfg = args.common.optimizer();
    let mut reports = vec![];
    for &p in &args.p {
        let two = exp_chaos_bound(&a, p, args.full_m, &cfg)?;
        reports.push(two.lower);
        reports.push(two.upper);
    }
    let refs: Vec<&BoundReport> = reports.iter().collect();
    Ok(Output {
        command: "exp-bound",
        table: bound_rows(&refs),
        result: json!({"config": args.common.config_json(), "full_m": args.full_m, "reports": ser(&reports)?}),
    })
}

fn cmd_poly(args: &PolyArgs) -> Result<Output> {
    let f = load_poly(&args.poly)?;
    let cfg = args.common.optimizer();
    let mc = args.common.mc(vec![1.0]);
    let h = crate::hermite::expand(&f)?;
    let coeffs: Vec<Value> = h
        .coeffs
        .iter()
        .map(|(e, c)| json!({"exps": e, "coeff": c}))
        .collect();
    let mut per_p = vec![];
    let mut reports = vec![];
    for &p in &args.p {
        let b = general_poly_bounds(&f, p, args.k, &mc, &cfg)?;
        let eta: Vec<TailExponent> = args.t.iter().map(|&t| b.eta(t)).collect::<Result<_>>()?;
        reports.push(b.lower.clone());
        if let Some(u) = &b.upper {
            reports.push(u.clone());
        }
        if let Some(lq) = &b.lq {
            reports.push(lq.lower.clone());
            reports.push(lq.upper.clone());
        }
        per_p.push(json!({"p": p, "bounds": ser(&b)?, "eta": ser(&eta)?}));
    }
    let refs: Vec<&BoundReport> = reports.iter().collect();
    Ok(Output {
        command: "poly",
        table: bound_rows(&refs),
        result: json!({"config": args.common.config_json(), "hermite": coeffs, "results": per_p}),
    })
}

fn cmd_empirical(args: &EmpiricalArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let mc = MCConfig {
        bootstrap: args.bootstrap,
        ..args.common.mc(args.p.clone())
    };
    let chaos = match args.chaos {
        ChaosKind::Decoupled => Chaos::Decoupled(&a),
        ChaosKind::Undecoupled => Chaos::Undecoupled(&a),
        ChaosKind::Exp => Chaos::Exponential(&a, ExpMode::Direct),
        ChaosKind::ExpGg => Chaos::Exponential(&a, ExpMode::GaussProduct),
    };
    let est = empirical_moment(&chaos, &mc)?;
    Ok(Output {
        command: "empirical",
        table: moment_rows(&est),
        result: json!({"config": args.common.config_json(), "chaos": format!("{:?}", args.chaos).to_lowercase(), "moments": ser(&est)?}),
    })
}

fn kv_rows(what: &str, v: &Value) -> Table {
    let mut rows = vec![["check", "key", "value"].map(String::from).to_vec()];
    if let Value::Object(map) = v {
        for (k, x) in map {
            if let Value::Number(_) = x {
                rows.push(vec![what.to_string(), k.clone(), x.to_string()]);
            }
        }
    }
    rows
}

fn cmd_check(args: &CheckArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let cfg = args.common.optimizer();
    let mc = args.common.mc(vec![args.p]);
    let (name, value) = match args.what {
        CheckKind::Sandwich => ("sandwich", ser(&sandwich_check(&a, args.p, &mc, &cfg)?)?),
        CheckKind::Decoupling => ("decoupling", ser(&decoupling_ratio(&a, args.p, &mc)?)?),
        CheckKind::Hypercontractivity => {
            let q = args
                .q
                .ok_or_else(|| Error::InvalidArgument("--q is required for hypercontractivity".into()))?;
            ("hypercontractivity", ser(&hypercontractivity_ratio(&a, args.p, q, &mc)?)?)
        }
        CheckKind::AlphaPlus => ("alpha_plus", ser(&alpha_plus_ratio(&a, &mc)?)?),
        CheckKind::Takie => {
            let pair: PartitionPair = args
                .pair
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--pair is required for takie".into()))?
                .parse()?;
            let k = resolve_k(a.space(), args.k, 1.0)?;
            ("takie", ser(&takie_ratio(&a, &pair, k, &cfg)?)?)
        }
        CheckKind::Conjecture => ("conjecture", ser(&conjecture_gap(&a, args.p, &mc, &cfg)?)?),
    };
    let mut flat = value.clone();
    if let Value::Object(map) = &mut flat {
        if let Some(Value::Object(emp)) = map.remove("empirical") {
            for (k, v) in emp {
                map.insert(format!("empirical_{k}"), v);
            }
        }
    }
    Ok(Output {
        command: "check",
        table: kv_rows(name, &flat),
        result: json!({"config": args.common.config_json(), "what": name, "p": args.p, "result": value}),
    })
}

fn cmd_report(args: &ReportArgs) -> Result<Output> {
    let a = load_tensor(&args.tensor)?;
    let cfg = args.common.optimizer();
    let mc = args.common.mc(args.p.clone());
    let mut reports: Vec<BoundReport> = vec![];
    let mut sandwich = vec![];
    for &p in &args.p {
        reports.push(lower_sum(&a, p, &cfg)?);
        reports.push(upper_sum(&a, p, &cfg)?);
        if let Ok(k) = resolve_k(a.space(), args.k, 1.0) {
            reports.push(special_space_upper(&a, p, k, &cfg)?);
        }
        if a.space().q().is_some() {
            let lq = lq_bound(&a, p, &cfg)?;
            reports.push(lq.lower);
            reports.push(lq.upper);
            if a.space().q() >= Some(2.0) {
                let e = exp_chaos_bound(&a, p, false, &cfg)?;
                reports.push(e.lower);
                reports.push(e.upper);
            }
        }
        if a.value_dim() == 1 && p >= 2.0 {
            let r = real_moment_twosided(&a, p, &cfg)?;
            reports.push(r.lower);
        }
        sandwich.push(sandwich_check(&a, p, &mc, &cfg)?);
    }
    let empirical = empirical_moment(&Chaos::Decoupled(&a), &mc)?;
    let mut tails = serde_json::Map::new();
    if !args.t.is_empty() {
        for (name, table) in tail_tables(&a, TailSide::Both, &cfg)? {
            tails.insert(name.into(), json!({"table": ser(&table)?, "exponents": ser(&exponents(&table, &args.t)?)?}));
        }
    }
    let refs: Vec<&BoundReport> = reports.iter().collect();
    Ok(Output {
        command: "report",
        table: bound_rows(&refs),
        result: json!({
            "config": args.common.config_json(),
            "reports": ser(&reports)?,
            "empirical": ser(&empirical)?,
            "sandwich": ser(&sandwich)?,
            "tail": Value::Object(tails),
        }),
    })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Norm(a) => &a.common,
        Command::Bound(a) => &a.common,
        Command::Tail(a) => &a.common,
        Command::ExpBound(a) => &a.common,
        Command::Poly(a) => &a.common,
        Command::Empirical(a) => &a.common,
        Command::Check(a) => &a.common,
        Command::Report(a) => &a.common,
    }
}

fn execute(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Norm(a) => cmd_norm(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Tail(a) => cmd_tail(a),
        Command::ExpBound(a) => cmd_exp(a),
        Command::Poly(a) => cmd_poly(a),
        Command::Empirical(a) => cmd_empirical(a),
        Command::Check(a) => cmd_check(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn render(out: &Output, c: &Common, threads: usize) -> Result<Vec<u8>> {
    match c.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("command".into(), json!(out.command));
            if !c.no_meta {
                let ts = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                doc.insert(
                    "meta".into(),
                    json!({"version": env!("CARGO_PKG_VERSION"), "timestamp": ts, "threads": threads}),
                );
            }
            doc.insert("result".into(), out.result.clone());
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(doc))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(vec![]);
            for row in &out.table {
                w.write_record(row)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_VALIDATION
    }
}

fn thread_count() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {s:?}")),
        },
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code.
pub fn run_with_io<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = if code == EXIT_OK {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_VALIDATION;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let c = common(&cli.command);
    let result = pool.install(|| execute(&cli.command)).and_then(|out| render(&out, c, pool.current_num_threads()));
    let bytes = match result {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &c.out {
        Some(path) => std::fs::write(path, &bytes),
        None => stdout.write_all(&bytes),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_VALIDATION
        }
    }
}

/// Runs with the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}
