mod complex_arg;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eigcount::matrix::read_matrix_market;
use eigcount::oracle::{experiment_5_1, EXPERIMENT_Q};
use eigcount::quadrature::{emit_filter_profile, write_profile_csv};
use eigcount::{
    count_eigs_with_context, factorize_nodes, refine_eigenpairs, search_with, Complex64, ContourRule, CountConfig,
    DenseMatrix, Disk, EigsConfig, Error, Pencil, ProjectorOptions, SearchConfig, Timings, DEFAULT_DELTA_BAND,
    DEFAULT_DENSE_CAP,
};
use serde::Serialize;

use crate::complex_arg::parse_complex;
use crate::report::{CountJson, EigsJson, ErrorBody, ErrorJson, RunConfigEcho, SearchJson};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_NOT_CONVERGED: u8 = 5;

/// Count (and optionally compute) the eigenvalues of A x = λ B x inside a disk.
#[derive(Debug, Parser)]
#[command(name = "eigcount", version)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact number of eigenvalues inside the disk.
    Count(CountArgs),
    /// Randomized search only: trace estimate s0 and upper bound s1.
    Search(CountArgs),
    /// Eigenpairs inside the disk.
    Eigs(EigsArgs),
    /// CSV samples of Re ψ̃ on a polar grid around the disk center.
    FilterProfile(ProfileArgs),
    /// Filter values versus eigenvalues of M for an 8 x 8 test pencil.
    Experiment51(ExperimentArgs),
}

#[derive(Debug, Args)]
struct PencilArgs {
    /// Matrix Market file for A.
    #[arg(long)]
    a: PathBuf,
    /// Matrix Market file for B; omitted means the identity.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Disk center, e.g. `-6e5+2e5i`.
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long)]
    radius: f64,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    pencil: PencilArgs,
    /// Quadrature nodes.
    #[arg(long, default_value_t = 16)]
    q: usize,
    /// Initial number of sample vectors.
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Block growth factor.
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_rounds: usize,
    /// Relative rank tolerance for the pivoted QR.
    #[arg(long)]
    tau_rank: Option<f64>,
    /// Report eigenvalues of M with |Re - 1/2| at most this.
    #[arg(long, default_value_t = DEFAULT_DELTA_BAND)]
    delta_band: f64,
    /// Worker threads for node work; 0 uses all available cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Solve only half the nodes for real pencils with a real center.
    #[arg(long)]
    conj_symmetry: bool,
    /// Largest order handled with dense factorizations.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EigsArgs {
    #[command(flatten)]
    count: CountArgs,
    /// Residual threshold for accepting a pair.
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    #[arg(long, default_value_t = 20)]
    max_iter: usize,
    /// Largest tolerated condition estimate of the projected B.
    #[arg(long, default_value_t = 1e12)]
    kappa_cap: f64,
    /// Binary file for the eigenvectors: `EIGV`, n and k as little-endian
    /// u64, then the n x k complex matrix column by column as (re, im) f64 pairs.
    #[arg(long)]
    vectors_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long, default_value = "0", value_parser = parse_complex, allow_hyphen_values = true)]
    center: Complex64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 16)]
    q: usize,
    /// Largest sampled distance from the center.
    #[arg(long, default_value_t = 4.0)]
    r_max: f64,
    /// Grid points per direction (radial and angular).
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = EXPERIMENT_Q)]
    q: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError {
            code: EXIT_IO,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io { .. } => (EXIT_IO, "io"),
            Error::Parse { .. } => (EXIT_PARSE, "parse"),
            Error::UnsupportedField(_) => (EXIT_PARSE, "unsupported_field"),
            Error::NonFinite { .. } => (EXIT_PARSE, "non_finite"),
            Error::DimensionMismatch(_) => (EXIT_PARSE, "dimension_mismatch"),
            Error::InvalidArgument(_) => (EXIT_USAGE, "invalid_argument"),
            Error::TooLarge { .. } => (EXIT_USAGE, "too_large"),
            Error::SingularMatrix { .. } => (EXIT_NUMERICAL, "singular_matrix"),
            Error::NodeSingular { .. } => (EXIT_NUMERICAL, "node_singular"),
            Error::AllNodesSingular => (EXIT_NUMERICAL, "all_nodes_singular"),
            Error::NodeCollision { .. } => (EXIT_NUMERICAL, "node_collision"),
            Error::NumericalFailure { .. } => (EXIT_NUMERICAL, "numerical_failure"),
            Error::MaxRoundsExceeded { .. } => (EXIT_NUMERICAL, "max_rounds_exceeded"),
            Error::IllConditionedProjection { .. } => (EXIT_NUMERICAL, "ill_conditioned_projection"),
            Error::DegenerateVector => (EXIT_NUMERICAL, "degenerate_vector"),
        };
        CliError {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Count(args) => cmd_count(&args),
        Command::Search(args) => cmd_search(&args),
        Command::Eigs(args) => cmd_eigs(&args),
        Command::FilterProfile(args) => cmd_filter_profile(&args),
        Command::Experiment51(args) => cmd_experiment51(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let body = ErrorJson {
                error: ErrorBody {
                    kind: e.kind,
                    message: e.message,
                    exit_code: i32::from(e.code),
                },
            };
            eprintln!("{}", serde_json::to_string(&body).expect("error serializes"));
            ExitCode::from(e.code)
        }
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    let mut w = open_output(path)?;
    let io_err = |e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e);
    w.write_all(text.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

fn load_pencil(args: &PencilArgs) -> CliResult<Pencil> {
    let a = read_matrix_market(&args.a)?;
    let b = args.b.as_ref().map(read_matrix_market).transpose()?;
    Ok(Pencil::new(a, b)?)
}

fn disk_of(args: &PencilArgs) -> CliResult<Disk> {
    Ok(Disk::new(args.center, args.radius)?)
}

fn count_config(args: &CountArgs) -> CountConfig {
    CountConfig {
        search: SearchConfig {
            alpha: args.alpha,
            p: args.p,
            q: args.q,
            seed: args.seed,
            tau_rank: args.tau_rank,
            max_rounds: args.max_rounds,
        },
        delta_band: args.delta_band,
    }
}

fn projector_options(args: &CountArgs) -> ProjectorOptions {
    ProjectorOptions {
        threads: args.threads,
        conj_symmetry: args.conj_symmetry,
        dense_cap: args.dense_cap,
    }
}

fn echo(args: &CountArgs) -> RunConfigEcho {
    RunConfigEcho {
        a: args.pencil.a.display().to_string(),
        b: args.pencil.b.as_ref().map(|p| p.display().to_string()),
        center: report::pair(args.pencil.center),
        radius: args.pencil.radius,
        q: args.q,
        p: args.p,
        alpha: args.alpha,
        seed: args.seed,
        max_rounds: args.max_rounds,
        tau_rank: args.tau_rank,
        delta_band: args.delta_band,
        threads: args.threads,
        conj_symmetry: args.conj_symmetry,
        eps: None,
        max_iter: None,
        kappa_cap: None,
    }
}

fn validate_count_args(args: &CountArgs) -> CliResult<()> {
    if args.delta_band.is_nan() || args.delta_band < 0.0 {
        return Err(CliError::usage(format!(
            "--delta-band must be non-negative, got {}",
            args.delta_band
        )));
    }
    Ok(())
}

fn cmd_count(args: &CountArgs) -> CliResult<u8> {
    validate_count_args(args)?;
    let disk = disk_of(&args.pencil)?;
    let pencil = load_pencil(&args.pencil)?;
    let ctx = count_eigs_with_context(&pencil, disk, &count_config(args), &projector_options(args))?;
    let json = CountJson::new(&ctx.report, echo(args), args.timings.then_some(ctx.timings));
    write_json(args.output.as_deref(), &json)?;
    Ok(0)
}

fn cmd_search(args: &CountArgs) -> CliResult<u8> {
    let disk = disk_of(&args.pencil)?;
    let pencil = load_pencil(&args.pencil)?;
    let config = count_config(args).search;
    config.validate(pencil.n())?;
    let start = std::time::Instant::now();
    let rule = ContourRule::new(disk, config.q)?;
    let facts = factorize_nodes(&pencil, &rule, &projector_options(args))?;
    let result = search_with(&facts, &pencil, &config)?;
    let timings = Timings {
        factorize: facts.factorize_time(),
        solve: facts.solve_time(),
        total: start.elapsed(),
    };
    let json = SearchJson::new(&result, echo(args), args.timings.then_some(timings));
    write_json(args.output.as_deref(), &json)?;
    Ok(0)
}

fn cmd_eigs(args: &EigsArgs) -> CliResult<u8> {
    let c = &args.count;
    validate_count_args(c)?;
    let disk = disk_of(&c.pencil)?;
    let pencil = load_pencil(&c.pencil)?;
    let config = EigsConfig {
        count: count_config(c),
        eps: args.eps,
        max_iter: args.max_iter,
        kappa_cap: args.kappa_cap,
    };
    let set = refine_eigenpairs(&pencil, disk, &config, &projector_options(c))?;
    if let Some(path) = &args.vectors_out {
        write_vectors(path, &set.vectors).map_err(|e| CliError::io(path, e))?;
    }
    let mut cfg = echo(c);
    cfg.eps = Some(args.eps);
    cfg.max_iter = Some(args.max_iter);
    cfg.kappa_cap = Some(args.kappa_cap);
    let vectors_file = args.vectors_out.as_ref().map(|p| p.display().to_string());
    let json = EigsJson::new(&set, vectors_file, cfg, c.timings);
    write_json(c.output.as_deref(), &json)?;
    if set.converged {
        Ok(0)
    } else {
        log::warn!(
            "{} of {} eigenpairs accepted after {} iterations",
            set.values.len(),
            set.count.s,
            set.iterations_used
        );
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn write_vectors(path: &Path, v: &DenseMatrix) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"EIGV")?;
    w.write_all(&(v.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(v.n_cols() as u64).to_le_bytes())?;
    for z in v.as_slice() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()
}

fn cmd_filter_profile(args: &ProfileArgs) -> CliResult<u8> {
    let disk = Disk::new(args.center, args.radius)?;
    let rule = ContourRule::new(disk, args.q)?;
    let samples = emit_filter_profile(&rule, args.r_max, args.samples)?;
    let mut buf = Vec::new();
    write_profile_csv(&mut buf, &samples).expect("writing to memory");
    write_text(args.output.as_deref(), &String::from_utf8(buf).expect("CSV is ASCII"))?;
    Ok(0)
}

fn cmd_experiment51(args: &ExperimentArgs) -> CliResult<u8> {
    let e = experiment_5_1(args.seed, args.q)?;
    let text = match args.format {
        TableFormat::Text => e.to_text(),
        TableFormat::Csv => e.to_csv(),
    };
    write_text(args.output.as_deref(), &text)?;
    Ok(0)
}
