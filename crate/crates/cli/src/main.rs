use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gocoh::channel::is_cq_state;
use gocoh::dqc1::{dqc1_sample, precision_sweep, sweep_to_csv, ProbeSpec};
use gocoh::io::{matrix_to_json, parse_matrix_file, read_state, vector_to_json};
use gocoh::linalg::{self, derive_seed, ComplexMatrix};
use gocoh::measures::{coherence_rel_ent, delta_value};
use gocoh::optimize::{lqicc_lower_bound, min_basis_delta, BoundPayload, BoundResult, OptimizerConfig, Parameterization};
use gocoh::state::{reduce_to_a, DensityMatrix, OrthonormalBasis, StateTolerance};
use gocoh::suites::{run_suite, Suite};
use gocoh::Error;
use serde_json::{json, Value};

mod report;

const EXIT_CHECK: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_CAPACITY: u8 = 4;
const EXIT_UNCONVERGED: u8 = 5;

#[derive(Parser)]
#[command(name = "gocoh", version, about = "Coherence measures, bounds and DQC1 simulation for incoherently controlled systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    tolerance_profile: Profile,
    /// Report format (dqc1 --sweep defaults to csv, everything else to json).
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// Largest total Hilbert-space dimension accepted.
    #[arg(long, global = true, default_value_t = linalg::DEFAULT_MAX_DIM)]
    max_dim: usize,
    /// Add wall time to the manifest (output is then no longer byte-reproducible).
    #[arg(long, global = true)]
    record_time: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Strict,
    Default,
    Loose,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Profile::Strict => "strict",
            Profile::Default => "default",
            Profile::Loose => "loose",
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Δ_𝒵, the A-local coherence and CQ membership of a state.
    Measure {
        state: PathBuf,
        #[command(flatten)]
        basis: BasisArg,
    },
    /// Optimized single-shot lower bound on recoverable coherence.
    LowerBound {
        state: PathBuf,
        #[command(flatten)]
        basis: BasisArg,
        #[command(flatten)]
        opt: OptArgs,
        /// Optimize over rank-one POVMs with up to r² outcomes ("auto": r = rank of Tr_B ρ).
        #[arg(long)]
        povm_rank: Option<String>,
    },
    /// Δ minimized over all orthonormal bases of A.
    MinBasis {
        state: PathBuf,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Simulate one-clean-qubit trace estimation.
    Dqc1(Dqc1Args),
    /// Run a randomized property suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
}

#[derive(Args)]
struct BasisArg {
    /// "computational" or a matrix file whose columns are the basis vectors.
    #[arg(long, default_value = "computational")]
    basis: String,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

#[derive(Args)]
struct Dqc1Args {
    /// "identity" or a unitary matrix file.
    #[arg(long, conflicts_with = "haar_dim")]
    unitary: Option<String>,
    /// Dimension of a Haar-random unitary drawn from --seed.
    #[arg(long)]
    haar_dim: Option<usize>,
    /// Dimension used with --unitary identity.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    #[arg(long, default_value_t = 200_000)]
    runs: usize,
    /// Grid such as `a=0.2:1.0:0.2 m=100,10000` (ranges are start:stop:step).
    #[arg(long, num_args = 1..)]
    sweep: Option<Vec<String>>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::BoundViolation { .. } => EXIT_CHECK,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_PARSE, message: message.into() }
}

struct Outcome {
    report: Value,
    csv: Option<String>,
    code: u8,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, csv: None, code: 0 }
    }
}

fn tolerance(g: &Global) -> StateTolerance {
    StateTolerance::profile(g.tolerance_profile.name()).expect("known profile")
}

fn load_state(path: &Path, g: &Global) -> Result<DensityMatrix, Failure> {
    Ok(read_state(path, tolerance(g))?)
}

fn read_matrix(path: &str) -> Result<ComplexMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{path}: {e}")))?;
    Ok(parse_matrix_file(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{path}: {m}")),
        other => other,
    })?
    .1)
}

fn load_basis(spec: &str, d_a: usize) -> Result<OrthonormalBasis, Failure> {
    if spec == "computational" {
        return Ok(OrthonormalBasis::computational(d_a));
    }
    let basis = OrthonormalBasis::from_unitary(read_matrix(spec)?)?;
    if basis.dim() != d_a {
        return Err(Error::Validation(format!("basis dimension {} does not match d_A = {d_a}", basis.dim())).into());
    }
    Ok(basis)
}

fn optimizer(opt: &OptArgs, g: &Global, parameterization: Parameterization) -> OptimizerConfig {
    OptimizerConfig { restarts: opt.restarts, max_iters: opt.max_iters, seed: g.seed, parameterization, ..OptimizerConfig::default() }
}

fn bound_json(r: &BoundResult) -> Value {
    let payload = match &r.payload {
        BoundPayload::Measurement(ws) => json!({"measurement_vectors": ws.iter().map(vector_to_json).collect::<Vec<_>>()}),
        BoundPayload::Basis(b) => json!({"basis_columns": matrix_to_json(b.matrix())}),
    };
    json!({
        "value_bits": r.value,
        "converged": r.converged,
        "best_restart": r.best_restart,
        "restarts": r.restarts,
        "witness": payload,
    })
}

fn unconverged_code(r: &BoundResult) -> u8 {
    if r.converged {
        0
    } else {
        EXIT_UNCONVERGED
    }
}

fn cmd_measure(state: &Path, basis: &BasisArg, g: &Global) -> Result<Outcome, Failure> {
    let rho = load_state(state, g)?;
    let z = load_basis(&basis.basis, rho.dim_a())?;
    let delta = delta_value(&rho, &z)?;
    let local = coherence_rel_ent(&reduce_to_a(&rho), &z)?;
    Ok(Outcome::ok(json!({
        "dims": rho.dims(),
        "basis_id": basis.basis,
        "delta_bits": delta,
        "coherence_A_bits": local,
        "is_cq": is_cq_state(&rho, &z, gocoh::channel::DEFAULT_CQ_TOL)?,
    })))
}

fn parse_povm_rank(s: &Option<String>) -> Result<Parameterization, Failure> {
    match s.as_deref() {
        None => Ok(Parameterization::Projective),
        Some("auto") => Ok(Parameterization::Povm { rank: None }),
        Some(r) => match r.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Parameterization::Povm { rank: Some(n) }),
            _ => Err(usage(format!("--povm-rank expects a positive integer or 'auto', got '{r}'"))),
        },
    }
}

fn cmd_lower_bound(state: &Path, basis: &BasisArg, opt: &OptArgs, povm_rank: &Option<String>, g: &Global) -> Result<Outcome, Failure> {
    let rho = load_state(state, g)?;
    let z = load_basis(&basis.basis, rho.dim_a())?;
    let cfg = optimizer(opt, g, parse_povm_rank(povm_rank)?);
    let r = lqicc_lower_bound(&rho, &z, &cfg)?;
    let upper = delta_value(&rho, &z)?;
    let mut report = bound_json(&r);
    report["delta_bits"] = json!(upper);
    report["gap_bits"] = json!(upper - r.value);
    report["basis_id"] = json!(basis.basis);
    Ok(Outcome { code: unconverged_code(&r), report, csv: None })
}

fn cmd_min_basis(state: &Path, opt: &OptArgs, g: &Global) -> Result<Outcome, Failure> {
    let rho = load_state(state, g)?;
    let r = min_basis_delta(&rho, &optimizer(opt, g, Parameterization::Projective))?;
    Ok(Outcome { code: unconverged_code(&r), report: bound_json(&r), csv: None })
}

/// `key=start:stop:step` or `key=v1,v2,...`.
fn parse_grid(token: &str) -> Result<(String, Vec<f64>), Failure> {
    let (key, spec) = token.split_once('=').ok_or_else(|| usage(format!("sweep term '{token}' is not key=values")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{s}' in sweep term '{token}'")));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(usage(format!("empty range in sweep term '{token}'")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(usage(format!("sweep term '{token}' must be start:stop:step or a comma list"))),
    };
    Ok((key.to_string(), values))
}

fn dqc1_unitary(args: &Dqc1Args, g: &Global) -> Result<(ComplexMatrix, String), Failure> {
    match (&args.haar_dim, args.unitary.as_deref()) {
        (Some(d), _) => Ok((linalg::haar_unitary(*d, g.seed)?, format!("haar:{d}"))),
        (None, None | Some("identity")) => {
            linalg::check_capacity(args.dim)?;
            Ok((linalg::identity(args.dim), format!("identity:{}", args.dim)))
        }
        (None, Some(path)) => Ok((read_matrix(path)?, path.to_string())),
    }
}

fn cmd_dqc1(args: &Dqc1Args, g: &Global) -> Result<Outcome, Failure> {
    let (u, source) = dqc1_unitary(args, g)?;
    let sample_seed = derive_seed(g.seed, 1);
    if let Some(terms) = &args.sweep {
        let (mut a_values, mut m_values, mut p) = (vec![args.a], vec![args.runs / 2], args.p);
        for t in terms {
            match parse_grid(t)? {
                (k, v) if k == "a" => a_values = v,
                (k, v) if k == "m" => m_values = v.into_iter().map(|x| x.round() as usize).collect(),
                (k, v) if k == "p" && v.len() == 1 => p = v[0],
                (k, _) => return Err(usage(format!("unknown sweep key '{k}' (expected a, m or a single p)"))),
            }
        }
        let rows = precision_sweep(p, &a_values, &m_values, &u, sample_seed)?;
        return Ok(Outcome {
            report: json!({"unitary": source, "dim": u.nrows(), "records": rows}),
            csv: Some(sweep_to_csv(&rows)),
            code: 0,
        });
    }
    let probe = ProbeSpec::new(args.p, args.a, args.phase)?;
    let r = dqc1_sample(&probe, &u, args.runs, sample_seed)?;
    let mut report = serde_json::to_value(&r).expect("report serialization");
    report["unitary"] = json!(source);
    report["abs_error"] = json!(r.error());
    report["within_3_se"] = json!(r.error() <= 3.0 * r.analytic_se);
    Ok(Outcome::ok(report))
}

fn cmd_verify(suite: &str, n: usize, g: &Global) -> Result<Outcome, Failure> {
    let suite: Suite = suite.parse().map_err(|e: Error| usage(e.to_string()))?;
    let r = run_suite(suite, n, g.seed)?;
    let code = if r.pass { 0 } else { EXIT_CHECK };
    Ok(Outcome { report: serde_json::to_value(&r).expect("report serialization"), csv: None, code })
}

fn manifest(cli: &Cli, inputs: Vec<String>, config: Value) -> Value {
    let name = match &cli.command {
        Command::Measure { .. } => "measure",
        Command::LowerBound { .. } => "lower-bound",
        Command::MinBasis { .. } => "min-basis",
        Command::Dqc1(_) => "dqc1",
        Command::Verify { .. } => "verify",
    };
    json!({
        "subcommand": name,
        "inputs": inputs,
        "config": config,
        "seed": cli.global.seed,
        "tolerance_profile": cli.global.tolerance_profile.name(),
        "max_dim": cli.global.max_dim,
        "tool_version": env!("CARGO_PKG_VERSION"),
    })
}

fn run(cli: &Cli) -> Result<(Outcome, Value), Failure> {
    let g = &cli.global;
    let path = |p: &Path| p.display().to_string();
    Ok(match &cli.command {
        Command::Measure { state, basis } => {
            (cmd_measure(state, basis, g)?, manifest(cli, vec![path(state)], json!({"basis": basis.basis})))
        }
        Command::LowerBound { state, basis, opt, povm_rank } => (
            cmd_lower_bound(state, basis, opt, povm_rank, g)?,
            manifest(
                cli,
                vec![path(state)],
                json!({"basis": basis.basis, "restarts": opt.restarts, "max_iters": opt.max_iters, "povm_rank": povm_rank}),
            ),
        ),
        Command::MinBasis { state, opt } => (
            cmd_min_basis(state, opt, g)?,
            manifest(cli, vec![path(state)], json!({"restarts": opt.restarts, "max_iters": opt.max_iters})),
        ),
        Command::Dqc1(args) => (
            cmd_dqc1(args, g)?,
            manifest(
                cli,
                args.unitary.iter().filter(|u| *u != "identity").cloned().collect(),
                json!({
                    "unitary": args.unitary, "haar_dim": args.haar_dim, "dim": args.dim, "a": args.a, "p": args.p,
                    "phase": args.phase, "runs": args.runs, "sweep": args.sweep,
                }),
            ),
        ),
        Command::Verify { suite, n } => (cmd_verify(suite, *n, g)?, manifest(cli, vec![], json!({"suite": suite, "n": n}))),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    linalg::set_max_total_dim(g.max_dim);
    if let Some(t) = g.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    let start = Instant::now();
    match run(&cli) {
        Ok((outcome, mut manifest)) => {
            if g.record_time {
                manifest["wall_time_s"] = json!(start.elapsed().as_secs_f64());
            }
            let format = g.output.unwrap_or(if outcome.csv.is_some() { Format::Csv } else { Format::Json });
            let mut report = outcome.report;
            match format {
                Format::Csv => print!("{}", outcome.csv.unwrap_or_else(|| report::to_csv(&report))),
                Format::Json => {
                    report["manifest"] = manifest;
                    print!("{}", report::to_json(&report));
                }
            }
            if outcome.code == EXIT_UNCONVERGED {
                eprintln!("warning: optimizer did not converge within --max-iters");
            }
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
