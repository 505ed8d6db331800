use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bpdq::experiments::{
    gen_angiogram, gen_sparse_signal, output, run_experiment_1d, run_experiment_tv, ExperimentSpec,
};
use bpdq::quantize::epsilon_p;
use bpdq::sensing::{make_sgr, random_partial_fourier, LinearOperator, OperatorKind, OperatorSpec};
use bpdq::serde_util::parse_moment;
use bpdq::solver::{decode_bpdq, DecoderConfig, Regularizer};
use bpdq::theory;
use bpdq::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "bpdq", version, about = "Basis pursuit dequantizers and their experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 1-D sparse recovery sweep over m/K and p
    Exp1d(ExperimentArgs),
    /// TV-regularized angiogram reconstruction from partial Fourier data
    Exptv(ExperimentArgs),
    /// Decode one set of quantized measurements
    Decode(DecodeArgs),
    /// Fidelity radius for uniform quantization noise
    NoiseBound(NoiseArgs),
    /// Stability constants and measurement bounds
    Constants(ConstantsArgs),
    /// Monte-Carlo (or exhaustive) restricted isometry radius
    RipProbe(RipArgs),
    /// Generate signals, angiograms or operator specs
    Gen(GenArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration; defaults apply to missing fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write the per-trial table
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Operator spec (JSON), as written by `gen matrix`
    #[arg(long)]
    matrix_spec: PathBuf,
    /// Quantized measurements, one value per line
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long, default_value = "2", value_parser = parse_moment)]
    p: f64,
    #[arg(long, conflicts_with = "auto_epsilon")]
    epsilon: Option<f64>,
    /// Set ε from the uniform-noise bound with this κ (needs --alpha)
    #[arg(long, requires = "alpha")]
    auto_epsilon: Option<f64>,
    /// Quantizer bin width
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value = "l1")]
    regularizer: RegArg,
    /// Decoder result as JSON (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recovered signal, one value per line
    #[arg(long)]
    xhat: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    L1,
    Tv,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, value_parser = parse_moment)]
    p: f64,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value = "2", value_parser = parse_moment)]
    p: f64,
    #[arg(long = "K", default_value_t = 16)]
    k: usize,
    #[arg(long = "N", default_value_t = 1024)]
    n: usize,
    #[arg(long)]
    delta_k: Option<f64>,
    #[arg(long)]
    delta_2k: Option<f64>,
    #[arg(long)]
    delta_3k: Option<f64>,
    /// Radius target of the measurement bound
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    /// Unspecified constant of the measurement bound
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Number of measurements for the normalization and noise-error bounds
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
}

#[derive(Args)]
struct RipArgs {
    /// Operator spec (JSON); a Gaussian m × N operator is drawn otherwise
    #[arg(long)]
    matrix_spec: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long = "N", default_value_t = 128)]
    n: usize,
    #[arg(long = "K", default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = "2", value_parser = parse_moment)]
    p: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Normalization override
    #[arg(long)]
    mu: Option<f64>,
    /// Enumerate all supports (p = 2, small N and K only)
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenWhat,
}

#[derive(Subcommand)]
enum GenWhat {
    /// K-sparse Gaussian signal, one value per line
    Signal {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary ellipse phantom, row-major, one value per line
    Angiogram {
        #[arg(long, default_value_t = 64)]
        side: usize,
        #[arg(long, default_value_t = 10)]
        ellipses: usize,
        #[arg(long, default_value_t = 1.0)]
        intensity: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator spec (JSON)
    Matrix {
        #[arg(long, default_value = "dense-gaussian")]
        kind: MatrixKind,
        #[arg(long)]
        m: usize,
        /// Signal length (or `rows*cols` with --dims)
        #[arg(long = "N")]
        n: usize,
        /// Fourier grid, e.g. `64,64`
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Store the explicit entries of a Gaussian draw
        #[arg(long)]
        explicit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    DenseGaussian,
    RestrictedFourier,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Unsupported(_) | Error::Json(_) => EXIT_INVALID,
            Error::ConvergenceFailure { .. } => EXIT_CONVERGENCE,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn emit(value: &impl serde::Serialize, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::from(Error::from(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_column(values: &[f64], out: Option<&Path>) -> CliResult<()> {
    let mut text = String::with_capacity(values.len() * 20);
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::from(Error::from(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One number per line; a non-numeric first line is taken as a header.
fn read_column(path: &Path) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let Some(field) = rec.get(0).map(str::trim).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(invalid(format!("{}: line {}: `{field}` is not a number", path.display(), i + 1))),
        }
    }
    Ok(values)
}

fn load_spec(args: &ExperimentArgs) -> CliResult<ExperimentSpec> {
    let mut spec: ExperimentSpec = match &args.config {
        Some(p) => read_json(p)?,
        None => ExperimentSpec::default(),
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    Ok(spec)
}

fn report_outputs(paths: &[PathBuf], failures: usize, budget: usize) -> CliResult<()> {
    for p in paths {
        println!("{}", p.display());
    }
    if failures > budget {
        return Err(Failure {
            code: EXIT_CONVERGENCE,
            message: format!("{failures} decodes failed or did not converge (budget {budget})"),
        });
    }
    Ok(())
}

fn cmd_exp1d(args: &ExperimentArgs) -> CliResult<()> {
    let spec = load_spec(args)?;
    let res = run_experiment_1d(&spec)?;
    let written = output::write_sweep(&res, &args.out, args.raw)?;
    report_outputs(&written, res.failures, res.failure_budget)
}

fn cmd_exptv(args: &ExperimentArgs) -> CliResult<()> {
    let spec = load_spec(args)?;
    let res = run_experiment_tv(&spec)?;
    let written = output::write_tv(&res, &args.out, args.raw)?;
    report_outputs(&written, res.failures, res.failure_budget)
}

fn cmd_decode(args: &DecodeArgs) -> CliResult<()> {
    let op_spec: OperatorSpec = read_json(&args.matrix_spec)?;
    let op = LinearOperator::from_spec(&op_spec)?;
    let y = read_column(&args.measurements)?;
    if y.len() != op.rows() {
        return Err(invalid(format!("{} measurements for an operator with {} rows", y.len(), op.rows())));
    }
    let epsilon = match (args.epsilon, args.auto_epsilon) {
        (Some(e), _) => e,
        (None, Some(kappa)) => epsilon_p(args.p, op.rows(), args.alpha.unwrap_or(f64::NAN), kappa)?.epsilon,
        (None, None) => 0.0,
    };
    let cfg = DecoderConfig {
        p: args.p,
        epsilon,
        gamma: args.gamma,
        outer_iters: args.iters,
        regularizer: match args.regularizer {
            RegArg::L1 => Regularizer::L1,
            RegArg::Tv => Regularizer::Tv,
        },
        ..Default::default()
    };
    let res = decode_bpdq(&op, &y, &cfg)?;
    if let Some(path) = &args.xhat {
        write_column(&res.x_hat, Some(path))?;
    }
    let mut value = serde_json::to_value(&res).map_err(Error::from)?;
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), serde_json::to_value(&cfg).map_err(Error::from)?);
        if args.xhat.is_some() {
            map.remove("x_hat");
        }
    }
    emit(&value, args.out.as_deref())?;
    if !res.converged {
        return Err(Failure {
            code: EXIT_CONVERGENCE,
            message: "decoder did not reach a feasible, converged solution".into(),
        });
    }
    Ok(())
}

fn cmd_noise_bound(args: &NoiseArgs) -> CliResult<()> {
    let nb = epsilon_p(args.p, args.m, args.alpha, args.kappa)?;
    emit(&nb, None)
}

/// Result as JSON, or `{"error": ...}`.
fn or_error<T: serde::Serialize>(r: bpdq::Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cmd_constants(args: &ConstantsArgs) -> CliResult<()> {
    let p = args.p;
    let mut out = serde_json::Map::new();
    out.insert("p".into(), json!(if p.is_finite() { json!(p) } else { json!("inf") }));
    if p.is_finite() && p >= 1.0 {
        out.insert("nu_p".into(), json!(theory::nu_p(p)));
    }
    if let Some(m) = args.m {
        out.insert(
            "mu_p2_bounds".into(),
            or_error(theory::mu_p2_bounds(p, m).map(|(lower, upper)| json!({ "lower": lower, "upper": upper }))),
        );
        out.insert(
            "noise_error_bound".into(),
            or_error(theory::noise_error_bound_check(p, m, args.alpha, args.kappa)),
        );
    }
    if let Some(d2) = args.delta_2k {
        out.insert(
            "theorem1".into(),
            or_error(theory::theorem1_constants(d2).map(|(a, b)| json!({ "A": a, "B": b }))),
        );
        let dk = args.delta_k.unwrap_or(d2);
        let d3 = args.delta_3k.unwrap_or(d2);
        let profile = theory::RipProfile::assumed(args.k, p, dk, d2, d3);
        out.insert(
            "theorem2".into(),
            or_error(profile.and_then(|prof| theory::theorem2_constants(p, &prof))),
        );
    }
    out.insert(
        "measurement_bound".into(),
        json!({
            "K": args.k,
            "N": args.n,
            "delta": args.delta,
            "eta": args.eta,
            "c": args.c,
            "note": "up to the unspecified constant c",
            "rhs": or_error(theory::theta_rhs(args.k, args.n, args.delta, args.eta, args.c)),
            "m": or_error(theory::theta_bound(p, args.k, args.n, args.delta, args.eta, args.c)),
        }),
    );
    emit(&Value::Object(out), None)
}

fn cmd_rip(args: &RipArgs) -> CliResult<()> {
    let op = match &args.matrix_spec {
        Some(path) => LinearOperator::from_spec(&read_json(path)?)?,
        None => make_sgr(args.m, args.n, args.seed)?,
    };
    if args.exact {
        if args.p != 2.0 {
            return Err(invalid("exhaustive enumeration is available for p = 2 only"));
        }
        return emit(&theory::exact_rip_radius(&op, args.k, args.mu)?, None);
    }
    let profile = theory::estimate_rip_profile(&op, args.k, args.p, args.trials, args.seed, args.mu)?;
    emit(&profile, None)
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    match &args.what {
        GenWhat::Signal { n, k, seed, out } => write_column(&gen_sparse_signal(*n, *k, *seed)?, out.as_deref()),
        GenWhat::Angiogram { side, ellipses, intensity, seed, out } => {
            write_column(&gen_angiogram(*side, *ellipses, *intensity, *seed)?, out.as_deref())
        }
        GenWhat::Matrix { kind, m, n, dims, seed, explicit, out } => {
            let spec = match kind {
                MatrixKind::DenseGaussian => {
                    let op = make_sgr(*m, *n, *seed)?;
                    let mut spec = op.to_spec();
                    if *explicit {
                        spec.kind = OperatorKind::Dense;
                        spec.entries = op.entries().map(<[f64]>::to_vec);
                    }
                    spec
                }
                MatrixKind::RestrictedFourier => {
                    if m % 2 != 0 {
                        return Err(invalid("restricted Fourier m must be even (real and imaginary parts)"));
                    }
                    let dims = dims.clone().unwrap_or_else(|| vec![*n]);
                    if dims.iter().product::<usize>() != *n {
                        return Err(invalid("dims must multiply to N"));
                    }
                    random_partial_fourier(&dims, m / 2, *seed)?.to_spec()
                }
            };
            emit(&spec, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exp1d(a) => cmd_exp1d(a),
        Command::Exptv(a) => cmd_exptv(a),
        Command::Decode(a) => cmd_decode(a),
        Command::NoiseBound(a) => cmd_noise_bound(a),
        Command::Constants(a) => cmd_constants(a),
        Command::RipProbe(a) => cmd_rip(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
