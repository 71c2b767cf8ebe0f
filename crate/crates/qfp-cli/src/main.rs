//! `qfp` — command-line surface for the quadratic-form toolkit.
//!
//! One subcommand per module family:
//!
//! * `offdiag-rank` — off-diagonal rank with witness index sets,
//! * `decompose` / `classify` — canonical block forms and case tags,
//! * `singular-series` — truncated series, term table, local densities,
//! * `count` / `bilinear-count` — box-constrained solution counting,
//! * `arcs-report` / `weyl-scan` — arc-family integrals and probes,
//! * `experiment` — growth-exponent ladders and fixture generation,
//! * `verify` — the self-verification suites.
//!
//! Conventions: every JSON output is a single object with a schema fixed by
//! the subcommand (and its `--format`/`--json` switch); every CSV output
//! starts with a header row; exact rationals serialize as reduced `"p/q"`
//! strings (including `"/1"` denominators) and arbitrary-precision integers
//! as decimal strings; complex values as `{re, im}` doubles. Identical
//! invocations produce byte-identical output. Exit codes: 0 success (and
//! `verify` overall pass), 1 domain error (machine-readable JSON on
//! standard error) or `verify` overall fail, 2 usage error.
//!
//! The iteration budget guarding every enumeration resolves as
//! `--budget` flag > `QFP_BUDGET` environment variable > default (10^9).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qfp_core::arcs::{
    build_arcs, major_arc_integral, minor_arc_points, minor_arc_scan, per_q_contributions,
    representation_histogram, representation_histogram_split, WeightMode,
};
use qfp_core::counting::{
    count_bilinear, count_solutions, count_solutions_naive, growth_exponent_fit,
    verify_lemma33_injection, BilinearSystem, BoxKind, GrowthFit,
};
use qfp_core::decomp::{
    classify_rank2, decompose_case11, decompose_case21, decompose_case22, decompose_rank1,
    find_quintuple_case22, find_quintuple_rank1, generate_from_form, FormKind, QuintupleKind,
    QuintupleSelection, Rank1Form, Rank2Form11, Rank2Form21, Rank2Form22,
};
use qfp_core::offdiag::{offdiag_rank, offdiag_rank_oracle};
use qfp_core::singular::{singular_series_truncated, TermNormalization};
use qfp_core::verify::{run_verify, VerifyFault, VerifyScope};
use qfp_core::{
    parse_general_rational, parse_rational, Budget, Error as CoreError, IndexPermutation,
    IntMatrix, ProblemInstance, Rank2Case, Rational, RationalMatrix, SymmetricIntMatrix,
};

fn main() {
    std::process::exit(parse_and_dispatch(std::env::args_os()));
}

/// Parses `argv` and runs the selected subcommand.
///
/// Returns the process exit code: 0 on success, 1 on domain errors (after
/// writing `{"error":{"code","message"}}` to standard error) or a failed
/// verification, 2 on usage errors (clap prints the diagnostics).
fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version go to stdout and exit 0; everything else is a
            // usage error on stderr.
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!(
                "{}",
                json!({ "error": { "code": err.code(), "message": err.message() } })
            );
            1
        }
    }
}

// ---------------------------------------------------------------------------
// Command grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "qfp",
    version,
    about = "Desk-scale toolkit for quadratic forms at prime-power points: \
             off-diagonal rank, block decompositions, local densities, \
             weighted counting, and circle-method arc diagnostics."
)]
struct Cli {
    /// Iteration budget for enumerations (default: QFP_BUDGET or 10^9).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,

    /// Worker threads (default: all available cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Off-diagonal rank: the largest rank of a submatrix A[I,J] with
    /// disjoint row and column index sets, with a witness pair.
    OffdiagRank {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
        /// Use the exhaustive reference search instead of the fast scan.
        #[arg(long)]
        oracle: bool,
    },

    /// Canonical block decomposition for off-diagonal rank <= 2, with the
    /// exact reconstruction parameters and (where defined) a quintuple of
    /// tail indices with nonvanishing coefficients.
    Decompose {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
    },

    /// Case classification (1,1)/(2,1)/(2,2) for off-diagonal rank exactly 2.
    Classify {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
    },

    /// Truncated singular series: term table T(q) for q <= Q, partial sum,
    /// local densities, and the local-product estimate.
    SingularSeries {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
        /// Target value t of the form x^T A x = t.
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        /// Truncation bound: include T(q) for q <= Q.
        #[arg(long = "Q", default_value_t = 24)]
        q: u64,
        /// Primes whose local densities enter the product estimate.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u64, 3, 5])]
        primes: Vec<u64>,
        /// Term normalization: divide each T(q) by phi(q)^n or by phi(q).
        #[arg(long, value_enum, default_value_t = NormArg::PhiPowerN)]
        normalization: NormArg,
    },

    /// Count solutions of x^T A x = t over prime powers in [1, X]^n, with
    /// von Mangoldt, unit, and primes-only weights.
    Count {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
        /// Target value t.
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        /// Box bound X.
        #[arg(long = "X")]
        x: u64,
        /// Use the full-enumeration reference oracle.
        #[arg(long)]
        oracle: bool,
    },

    /// Count integer pairs with x^T C y = 0 (and optionally x^T H = 0) in
    /// a box, with an optional pair-to-difference injection check.
    BilinearCount {
        /// Coefficient matrix C in the general rational format.
        #[arg(long = "C")]
        c: PathBuf,
        /// Linear-constraint matrix H (row count matching C).
        #[arg(long = "H")]
        h: Option<PathBuf>,
        /// Box bound X.
        #[arg(long = "X")]
        x: u64,
        /// Box kind: positive = [1,X], symmetric = [-X,X] (zero included).
        #[arg(long = "box", value_enum, default_value_t = BoxArg::Positive)]
        box_kind: BoxArg,
        /// Also run the equal-values-pairs injection check at this X.
        #[arg(long)]
        injection: bool,
    },

    /// Integrate the histogram transform over the arc family: major and
    /// complement integrals, their identity with r(t), and per-q shares.
    ArcsReport {
        /// Symmetric integer matrix file (text or JSON format).
        matrix: PathBuf,
        /// Target value t.
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        /// Box bound X.
        #[arg(long = "X")]
        x: u64,
        /// Arc exponent: arcs have denominators q <= P = (log X)^K.
        #[arg(long = "K")]
        k: f64,
        /// Histogram weights.
        #[arg(long, value_enum, default_value_t = WeightsArg::Lambda)]
        weights: WeightsArg,
        /// Build the histogram by convolving the spectra of the two
        /// diagonal blocks split at this coordinate (block forms only).
        #[arg(long)]
        split: Option<usize>,
        /// Truncation bound Q for the main-term prediction.
        #[arg(long = "Q", default_value_t = 24)]
        q: u64,
        /// Primes for the prediction's local-density product.
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u64, 3, 5])]
        primes: Vec<u64>,
        /// json: the report object; csv: per-q arc contributions.
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },

    /// Evaluate |sum Lambda(x) e(alpha d x^2)| on minor-arc grid points.
    WeylScan {
        /// Quadratic coefficient d, an integer or fraction like 3/2.
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        /// Summation bound X.
        #[arg(long = "X")]
        x: u64,
        /// Arc exponent defining the excluded major arcs.
        #[arg(long = "K")]
        k: f64,
        /// Number of grid cells across the window [1/X, 1 + 1/X].
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Emit the supremum summary object instead of the per-point CSV.
        #[arg(long)]
        json: bool,
    },

    /// Multi-run experiments.
    Experiment {
        #[command(subcommand)]
        what: ExperimentCmd,
    },

    /// Run verification suites. Scope: "all", a group name (offdiag-rank,
    /// structure-decomp, arithmetic-local, counting, circle-arcs, trends),
    /// or an individual suite name.
    Verify {
        #[arg(default_value = "all")]
        scope: String,
        /// Deliberately corrupt one comparison to demonstrate the harness
        /// catches defects. Value: gauss-crt.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Fit a growth exponent to counts over a ladder of box sizes.
    Growth {
        /// Which counter to ladder.
        #[arg(long, value_enum)]
        op: GrowthOp,
        /// Box sizes, comma separated (at least three, increasing).
        #[arg(long = "Xs", value_delimiter = ',')]
        xs: Vec<u64>,
        /// Coefficient matrix C (required for --op bilinear).
        #[arg(long = "C")]
        c: Option<PathBuf>,
        /// Linear-constraint matrix H (bilinear only).
        #[arg(long = "H")]
        h: Option<PathBuf>,
        /// Box kind (bilinear only).
        #[arg(long = "box", value_enum, default_value_t = BoxArg::Positive)]
        box_kind: BoxArg,
        /// Symmetric matrix file (required for --op count).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Target value t (required for --op count).
        #[arg(long, allow_negative_numbers = true)]
        t: Option<i64>,
        /// Exponent to compare the fitted slope against
        /// (default: n+k-2 for bilinear, n-2 for count).
        #[arg(long, allow_negative_numbers = true)]
        predicted: Option<f64>,
        /// Emit the fit object instead of the sample CSV.
        #[arg(long)]
        json: bool,
    },
    /// Generate a seeded random symmetric matrix with a prescribed block
    /// structure, in the text format the other subcommands read.
    Generate {
        /// Structure of the generated form.
        #[arg(long, value_enum)]
        form: FormArg,
        /// Matrix dimension.
        #[arg(long)]
        n: usize,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoxArg {
    Positive,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightsArg {
    Unit,
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    PhiPowerN,
    PhiPowerOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GrowthOp {
    Bilinear,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Rank1,
    Case11,
    Case21,
    Case22,
}

impl From<BoxArg> for BoxKind {
    fn from(b: BoxArg) -> BoxKind {
        match b {
            BoxArg::Positive => BoxKind::Positive,
            BoxArg::Symmetric => BoxKind::Symmetric,
        }
    }
}

impl From<WeightsArg> for WeightMode {
    fn from(w: WeightsArg) -> WeightMode {
        match w {
            WeightsArg::Unit => WeightMode::Unit,
            WeightsArg::Lambda => WeightMode::Lambda,
        }
    }
}

impl From<NormArg> for TermNormalization {
    fn from(n: NormArg) -> TermNormalization {
        match n {
            NormArg::PhiPowerN => TermNormalization::PhiPowerN,
            NormArg::PhiPowerOne => TermNormalization::PhiPowerOne,
        }
    }
}

impl From<FormArg> for FormKind {
    fn from(f: FormArg) -> FormKind {
        match f {
            FormArg::Rank1 => FormKind::Rank1,
            FormArg::Case11 => FormKind::Case11,
            FormArg::Case21 => FormKind::Case21,
            FormArg::Case22 => FormKind::Case22,
        }
    }
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Shared knobs of a single invocation, resolved from flags, environment,
/// and defaults. Per-subcommand extras stay on the [`Command`] variant.
#[derive(Debug, Clone)]
struct RunConfig {
    command: &'static str,
    matrix_path: Option<PathBuf>,
    t: Option<i64>,
    x: Option<u64>,
    q: Option<u64>,
    k: Option<f64>,
    primes: Vec<u64>,
    box_kind: BoxKind,
    weights: WeightMode,
    budget: Budget,
    threads: usize,
    output_format: OutputFormat,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl RunConfig {
    /// Resolves the configuration and validates its invariants: a positive
    /// budget, at least one thread, and input paths that exist.
    fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
        let budget = resolve_budget(cli.budget)?;
        let threads = match cli.threads {
            Some(t) => t as usize,
            None => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        };
        let mut cfg = RunConfig {
            command: "",
            matrix_path: None,
            t: None,
            x: None,
            q: None,
            k: None,
            primes: Vec::new(),
            box_kind: BoxKind::Positive,
            weights: WeightMode::Lambda,
            budget,
            threads,
            output_format: OutputFormat::Json,
            seed: 0,
        };
        match &cli.command {
            Command::OffdiagRank { matrix, .. } => {
                cfg.command = "offdiag-rank";
                cfg.matrix_path = Some(matrix.clone());
            }
            Command::Decompose { matrix } => {
                cfg.command = "decompose";
                cfg.matrix_path = Some(matrix.clone());
            }
            Command::Classify { matrix } => {
                cfg.command = "classify";
                cfg.matrix_path = Some(matrix.clone());
            }
            Command::SingularSeries {
                matrix, t, q, primes, ..
            } => {
                cfg.command = "singular-series";
                cfg.matrix_path = Some(matrix.clone());
                cfg.t = Some(*t);
                cfg.q = Some(*q);
                cfg.primes = primes.clone();
            }
            Command::Count { matrix, t, x, .. } => {
                cfg.command = "count";
                cfg.matrix_path = Some(matrix.clone());
                cfg.t = Some(*t);
                cfg.x = Some(*x);
            }
            Command::BilinearCount {
                c, h, x, box_kind, ..
            } => {
                cfg.command = "bilinear-count";
                cfg.matrix_path = Some(c.clone());
                cfg.x = Some(*x);
                cfg.box_kind = (*box_kind).into();
                if let Some(h) = h {
                    require_file(h)?;
                }
            }
            Command::ArcsReport {
                matrix,
                t,
                x,
                k,
                weights,
                q,
                primes,
                format,
                ..
            } => {
                cfg.command = "arcs-report";
                cfg.matrix_path = Some(matrix.clone());
                cfg.t = Some(*t);
                cfg.x = Some(*x);
                cfg.k = Some(*k);
                cfg.q = Some(*q);
                cfg.primes = primes.clone();
                cfg.weights = (*weights).into();
                cfg.output_format = match format {
                    FormatArg::Json => OutputFormat::Json,
                    FormatArg::Csv => OutputFormat::Csv,
                };
            }
            Command::WeylScan { x, k, json, .. } => {
                cfg.command = "weyl-scan";
                cfg.x = Some(*x);
                cfg.k = Some(*k);
                cfg.output_format = if *json {
                    OutputFormat::Json
                } else {
                    OutputFormat::Csv
                };
            }
            Command::Experiment { what } => match what {
                ExperimentCmd::Growth {
                    c,
                    h,
                    box_kind,
                    matrix,
                    t,
                    json,
                    ..
                } => {
                    cfg.command = "experiment-growth";
                    cfg.matrix_path = c.clone().or_else(|| matrix.clone());
                    cfg.t = *t;
                    cfg.box_kind = (*box_kind).into();
                    cfg.output_format = if *json {
                        OutputFormat::Json
                    } else {
                        OutputFormat::Csv
                    };
                    if let Some(h) = h {
                        require_file(h)?;
                    }
                }
                ExperimentCmd::Generate { seed, .. } => {
                    cfg.command = "experiment-generate";
                    cfg.seed = *seed;
                    cfg.output_format = OutputFormat::Text;
                }
            },
            Command::Verify { .. } => {
                cfg.command = "verify";
            }
        }
        if let Some(path) = &cfg.matrix_path {
            require_file(path)?;
        }
        Ok(cfg)
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<Budget, CliError> {
    if let Some(b) = flag {
        return Ok(Budget::new(b));
    }
    match std::env::var("QFP_BUDGET") {
        Ok(raw) => {
            let value: u64 = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "QFP_BUDGET must be a positive integer, got {raw:?}"
                ))
            })?;
            if value == 0 {
                return Err(CliError::Config(
                    "QFP_BUDGET must be a positive integer, got \"0\"".into(),
                ));
            }
            Ok(Budget::new(value))
        }
        Err(std::env::VarError::NotPresent) => Ok(Budget::default()),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Config(
            "QFP_BUDGET is not valid unicode".into(),
        )),
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::NotFound(path.to_path_buf()))
    }
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    Core(CoreError),
    NotFound(PathBuf),
    Io(PathBuf, std::io::Error),
    Config(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::NotFound(_) => "file-not-found",
            CliError::Io(..) => "io",
            CliError::Config(_) => "invalid-config",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::NotFound(path) => format!("file not found: {}", path.display()),
            CliError::Io(path, e) => format!("cannot read {}: {e}", path.display()),
            CliError::Config(msg) => msg.clone(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&cli)?;
    if cli.threads.is_some() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::OffdiagRank { oracle, .. } => cmd_offdiag_rank(&cfg, oracle),
        Command::Decompose { .. } => cmd_decompose(&cfg),
        Command::Classify { .. } => cmd_classify(&cfg),
        Command::SingularSeries { normalization, .. } => {
            cmd_singular_series(&cfg, normalization.into())
        }
        Command::Count { oracle, .. } => cmd_count(&cfg, oracle),
        Command::BilinearCount { h, injection, .. } => {
            cmd_bilinear_count(&cfg, h.as_deref(), injection)
        }
        Command::ArcsReport { split, .. } => cmd_arcs_report(&cfg, split),
        Command::WeylScan { d, grid, .. } => cmd_weyl_scan(&cfg, &d, grid),
        Command::Experiment { what } => match what {
            ExperimentCmd::Growth {
                op,
                xs,
                c,
                h,
                predicted,
                ..
            } => cmd_growth(&cfg, op, &xs, c.as_deref(), h.as_deref(), predicted),
            ExperimentCmd::Generate { form, n, .. } => cmd_generate(&cfg, form.into(), n),
        },
        Command::Verify {
            scope,
            inject_fault,
        } => cmd_verify(&cfg, &scope, inject_fault.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// Input/output helpers
// ---------------------------------------------------------------------------

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_symmetric(path: &Path) -> Result<SymmetricIntMatrix, CliError> {
    Ok(SymmetricIntMatrix::parse(&read_input(path)?)?)
}

fn load_rational(path: &Path) -> Result<RationalMatrix, CliError> {
    Ok(parse_general_rational(&read_input(path)?)?)
}

fn cfg_matrix(cfg: &RunConfig) -> &Path {
    cfg.matrix_path
        .as_deref()
        .expect("resolve() set the matrix path for this subcommand")
}

fn emit<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization cannot fail")
    );
}

/// `"p/q"` with the denominator always present, `"3/1"` included, so
/// consumers parse one shape.
fn rational_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn value_rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(rational_str(r))).collect())
}

fn value_int_matrix(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|x| Value::String(x.to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn value_rat_matrix(m: &RationalMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|r| Value::String(rational_str(r)))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn value_perm(p: &IndexPermutation) -> Value {
    Value::Array(
        p.images()
            .iter()
            .map(|&i| Value::Number(i.into()))
            .collect(),
    )
}

fn box_name(b: BoxKind) -> &'static str {
    match b {
        BoxKind::Positive => "positive",
        BoxKind::Symmetric => "symmetric",
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_offdiag_rank(cfg: &RunConfig, oracle: bool) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let report = if oracle {
        offdiag_rank_oracle(&a)?
    } else {
        offdiag_rank(&a)?
    };
    emit(&report);
    Ok(0)
}

fn value_rank1(f: &Rank1Form) -> Value {
    json!({
        "perm": value_perm(&f.perm),
        "a": f.a.to_string(),
        "xi": f.xi.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "d": value_rationals(&f.d),
        "h": rational_str(&f.h),
    })
}

fn value_case11(f: &Rank2Form11) -> Value {
    json!({
        "perm": value_perm(&f.perm),
        "a1": value_int_matrix(&f.a1),
        "b": value_int_matrix(&f.b),
        "a2": value_int_matrix(&f.a2),
        "c": value_int_matrix(&f.c),
        "d": f.d.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    })
}

fn value_case21(f: &Rank2Form21) -> Value {
    json!({
        "perm": value_perm(&f.perm),
        "a1": value_int_matrix(&f.a1),
        "gamma1": f.gamma1.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "gamma2": f.gamma2.iter().map(rational_str).collect::<Vec<_>>(),
        "xi": f.xi.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "a": f.a.to_string(),
        "v": f.v.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "h": rational_str(&f.h),
        "d": value_rationals(&f.d),
    })
}

fn value_case22(f: &Rank2Form22) -> Value {
    json!({
        "perm": value_perm(&f.perm),
        "a1": value_int_matrix(&f.a1),
        "gamma": value_rat_matrix(&f.gamma),
        "c": value_int_matrix(&f.c),
        "h": value_rat_matrix(&f.h),
        "h_underdetermined": f.h_underdetermined,
        "d": value_rationals(&f.d),
    })
}

/// Quintuple search result as a JSON value: the selection object, or null
/// when no admissible quintuple exists (which is a report, not an error).
fn value_quintuple(
    found: Result<QuintupleSelection, CoreError>,
    perm: &IndexPermutation,
) -> Result<Value, CliError> {
    match found {
        Ok(sel) => Ok(json!({
            "kind": match sel.kind {
                QuintupleKind::Rank1Quintuple => "rank-1",
                QuintupleKind::Rank2Quintuple => "rank-2",
            },
            "tail": sel.b.to_vec(),
            "original_indices": sel.original_indices(perm),
        })),
        Err(CoreError::NoQuintuple { .. }) => Ok(Value::Null),
        Err(e) => Err(e.into()),
    }
}

fn cmd_decompose(cfg: &RunConfig) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let rank = offdiag_rank(&a)?;
    let rank_a = a.rank();
    let mut out = json!({
        "offdiag_rank": rank.value,
        "kind": Value::Null,
        "rank1": Value::Null,
        "case11": Value::Null,
        "case21": Value::Null,
        "case22": Value::Null,
        "quintuple": Value::Null,
    });
    match rank.value {
        0 => {
            out["kind"] = "diagonal".into();
        }
        1 => {
            let f = decompose_rank1(&a)?;
            out["quintuple"] = value_quintuple(find_quintuple_rank1(&f, rank_a), &f.perm)?;
            out["rank1"] = value_rank1(&f);
            out["kind"] = "rank-1".into();
        }
        2 => {
            let tag = classify_rank2(&a)?;
            out["kind"] = tag.case.to_string().into();
            match tag.case {
                Rank2Case::Case11 => out["case11"] = value_case11(&decompose_case11(&a, &tag)?),
                Rank2Case::Case21 => out["case21"] = value_case21(&decompose_case21(&a, &tag)?),
                Rank2Case::Case22 => {
                    let f = decompose_case22(&a, &tag)?;
                    out["quintuple"] =
                        value_quintuple(find_quintuple_case22(&f, rank_a), &f.perm)?;
                    out["case22"] = value_case22(&f);
                }
            }
        }
        found => return Err(CoreError::NotOffDiagRank2 { found }.into()),
    }
    emit(&out);
    Ok(0)
}

fn cmd_classify(cfg: &RunConfig) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let tag = classify_rank2(&a)?;
    emit(&json!({
        "case": tag.case.to_string(),
        "perm": value_perm(&tag.perm),
        "rank_b": tag.rank_b,
        "rank_b1": tag.rank_b1,
        "rank_b2": tag.rank_b2,
    }));
    Ok(0)
}

fn cmd_singular_series(
    cfg: &RunConfig,
    normalization: TermNormalization,
) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let inst = ProblemInstance::new(a, cfg.t.expect("resolve() set t"));
    let report = singular_series_truncated(
        &inst,
        cfg.q.expect("resolve() set Q"),
        &cfg.primes,
        normalization,
        &cfg.budget,
    )?;
    emit(&report);
    Ok(0)
}

fn cmd_count(cfg: &RunConfig, oracle: bool) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let inst = ProblemInstance::new(a, cfg.t.expect("resolve() set t"));
    let x = cfg.x.expect("resolve() set X");
    let result = if oracle {
        count_solutions_naive(&inst, x, &cfg.budget)?
    } else {
        count_solutions(&inst, x, &cfg.budget)?
    };
    emit(&result);
    Ok(0)
}

fn cmd_bilinear_count(
    cfg: &RunConfig,
    h_path: Option<&Path>,
    injection: bool,
) -> Result<i32, CliError> {
    let c = load_rational(cfg_matrix(cfg))?;
    let h = h_path.map(load_rational).transpose()?;
    let x = cfg.x.expect("resolve() set X");
    let sys = BilinearSystem::new(c.clone(), h.clone(), cfg.box_kind)?;
    let count = count_bilinear(&sys, x, &cfg.budget)?;
    let injection_value = if injection {
        serde_json::to_value(verify_lemma33_injection(&c, h.as_ref(), x, &cfg.budget)?)
            .expect("report serialization cannot fail")
    } else {
        Value::Null
    };
    emit(&json!({
        "x": x,
        "box": box_name(cfg.box_kind),
        "count": count,
        "injection": injection_value,
    }));
    Ok(0)
}

fn cmd_arcs_report(cfg: &RunConfig, split: Option<usize>) -> Result<i32, CliError> {
    let a = load_symmetric(cfg_matrix(cfg))?;
    let n = a.n() as i32;
    let t = cfg.t.expect("resolve() set t");
    let x = cfg.x.expect("resolve() set X");
    let inst = ProblemInstance::new(a, t);
    let hist = match split {
        Some(boundary) => {
            representation_histogram_split(&inst, x, cfg.weights, boundary, &cfg.budget)?
        }
        None => representation_histogram(&inst, x, cfg.weights, &cfg.budget)?,
    };
    let arcs = build_arcs(x as f64, cfg.k.expect("resolve() set K"))?;
    let series = singular_series_truncated(
        &inst,
        cfg.q.expect("resolve() set Q"),
        &cfg.primes,
        TermNormalization::PhiPowerN,
        &cfg.budget,
    )?;
    let predicted_main = series.product_estimate * (x as f64).powi(n - 2);
    match cfg.output_format {
        OutputFormat::Csv => {
            println!("q,re,im,measure");
            for c in per_q_contributions(&hist, t, &arcs) {
                println!("{},{},{},{}", c.q, c.integral.re, c.integral.im, c.measure);
            }
        }
        _ => emit(&major_arc_integral(&hist, t, &arcs, predicted_main)),
    }
    Ok(0)
}

fn cmd_weyl_scan(cfg: &RunConfig, d_token: &str, grid: usize) -> Result<i32, CliError> {
    let d = parse_rational(d_token)
        .map_err(|msg| CliError::Config(format!("--d must be an integer or p/q: {msg}")))?;
    let x = cfg.x.expect("resolve() set X");
    let k = cfg.k.expect("resolve() set K");
    match cfg.output_format {
        OutputFormat::Json => {
            emit(&minor_arc_scan(&d, x, k, grid, &cfg.budget)?);
        }
        _ => {
            let arcs = build_arcs(x as f64, k)?;
            let (points, _excluded) = minor_arc_points(&d, x, grid, &arcs, &cfg.budget)?;
            println!("alpha,abs");
            for (alpha, abs) in points {
                println!("{alpha},{abs}");
            }
        }
    }
    Ok(0)
}

fn cmd_growth(
    cfg: &RunConfig,
    op: GrowthOp,
    xs: &[u64],
    c_path: Option<&Path>,
    h_path: Option<&Path>,
    predicted: Option<f64>,
) -> Result<i32, CliError> {
    let fit: GrowthFit = match op {
        GrowthOp::Bilinear => {
            let c_path = c_path.ok_or_else(|| {
                CliError::Config("--op bilinear requires --C <matrix-file>".into())
            })?;
            require_file(c_path)?;
            let c = load_rational(c_path)?;
            let h = h_path.map(load_rational).transpose()?;
            let default_predicted = (c.rows() + c.cols()) as f64 - 2.0;
            let sys = BilinearSystem::new(c, h, cfg.box_kind)?;
            let samples = xs
                .iter()
                .map(|&x| Ok((x as f64, count_bilinear(&sys, x, &cfg.budget)? as f64)))
                .collect::<Result<Vec<_>, CliError>>()?;
            growth_exponent_fit(&samples, predicted.unwrap_or(default_predicted))?
        }
        GrowthOp::Count => {
            let t = cfg
                .t
                .ok_or_else(|| CliError::Config("--op count requires --t <int>".into()))?;
            let path = cfg.matrix_path.as_deref().ok_or_else(|| {
                CliError::Config("--op count requires --matrix <matrix-file>".into())
            })?;
            let a = load_symmetric(path)?;
            let default_predicted = a.n() as f64 - 2.0;
            let inst = ProblemInstance::new(a, t);
            let samples = xs
                .iter()
                .map(|&x| {
                    Ok((
                        x as f64,
                        count_solutions(&inst, x, &cfg.budget)?.lambda_weighted,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            growth_exponent_fit(&samples, predicted.unwrap_or(default_predicted))?
        }
    };
    match cfg.output_format {
        OutputFormat::Json => emit(&fit),
        _ => {
            println!("X,count,logX,logCount");
            for s in &fit.samples {
                println!("{},{},{},{}", s.x, s.count, s.log_x, s.log_count);
            }
        }
    }
    Ok(0)
}

fn cmd_generate(cfg: &RunConfig, kind: FormKind, n: usize) -> Result<i32, CliError> {
    let generated = generate_from_form(kind, n, cfg.seed)?;
    print!("{}", generated.matrix.to_text());
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig, scope: &str, inject_fault: Option<&str>) -> Result<i32, CliError> {
    let fault = match inject_fault {
        None => None,
        Some("gauss-crt") => Some(VerifyFault::GaussCrt),
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown fault {other:?} (expected \"gauss-crt\")"
            )))
        }
    };
    let report = run_verify(&VerifyScope::parse(scope), &cfg.budget, fault)?;
    emit(&report);
    Ok(if report.overall_pass { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_serialize_with_explicit_denominator() {
        let r = Rational::new(6.into(), 4.into());
        assert_eq!(rational_str(&r), "3/2");
        assert_eq!(rational_str(&Rational::from_integer(7.into())), "7/1");
        assert_eq!(rational_str(&Rational::new((-1).into(), 3.into())), "-1/3");
    }

    #[test]
    fn grammar_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn budget_flag_beats_environment() {
        // Only the flag path is exercised here; the environment path is
        // covered by the end-to-end CLI tests to avoid env races between
        // parallel unit tests.
        let b = resolve_budget(Some(1234)).unwrap();
        assert_eq!(b.max_iterations(), 1234);
    }
}
