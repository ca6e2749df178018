//! `pcsketch` — build, inspect, verify, and benchmark randomized coresets
//! for subspace and projective clustering.
//!
//! Exit codes: 0 success, 2 I/O or file-format error, 3 invalid parameters
//! or precondition violation, 4 verification failure.

mod bench;
mod io;

use clap::{Parser, Subcommand};
use io::{infer_format, load_matrix, FileSource, MatrixFormat};
use pcsketch::coreset::{
    build_projective_coreset_from_source, build_projective_coreset_mode, deserialize_coreset,
    exact_svd_coreset, projective_rank, serialize_coreset, Coreset, CoresetParams, DeltaMode,
};
use pcsketch::matrix::DataMatrix;
use pcsketch::stream::{CountingSource, MatrixSource};
use pcsketch::verify::run_suite;
use pcsketch::Error;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_IO: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "pcsketch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a coreset from a matrix file and serialize it
    Build(BuildArgs),
    /// Print the parameters and shape stored in a coreset file
    Info(InfoArgs),
    /// Run the statistical verification suites against a matrix
    Verify(VerifyArgs),
    /// Time randomized vs. exact construction over a grid of instances
    Bench(bench::BenchArgs),
}

#[derive(clap::Args)]
struct CoresetFlags {
    /// Number of subspaces k in the query family
    #[arg(long, env = "PCSKETCH_K")]
    k: usize,
    /// Maximum subspace dimension j in the query family
    #[arg(long, env = "PCSKETCH_J")]
    j: usize,
    #[arg(long, env = "PCSKETCH_EPSILON")]
    epsilon: f64,
    #[arg(long, env = "PCSKETCH_DELTA", default_value_t = 0.1)]
    delta: f64,
    /// Constant in front of the sketch row-count formula
    #[arg(long, env = "PCSKETCH_CONSTANT_C", default_value_t = 1.0)]
    constant_c: f64,
    /// Use this coreset rank instead of the epsilon-derived one
    #[arg(long, env = "PCSKETCH_RANK_OVERRIDE")]
    rank_override: Option<usize>,
    /// Cover affine (offset) subspace queries as well as linear ones
    #[arg(long, env = "PCSKETCH_AFFINE")]
    affine: bool,
}

impl CoresetFlags {
    fn to_params(&self) -> Result<CoresetParams, Error> {
        Ok(CoresetParams::new(self.k, self.j, self.epsilon, self.delta)?
            .with_affine(self.affine)
            .with_rank_override(self.rank_override)
            .with_sketch_constant(self.constant_c))
    }
}

#[derive(clap::Args)]
struct InputFlags {
    /// Matrix file to read
    #[arg(long, env = "PCSKETCH_INPUT")]
    input: PathBuf,
    /// Input format; inferred from the extension (.mtx/.csv/.bin) if omitted
    #[arg(long, value_enum, env = "PCSKETCH_FORMAT")]
    format: Option<MatrixFormat>,
}

#[derive(clap::Args)]
struct BuildArgs {
    #[command(flatten)]
    input: InputFlags,
    #[command(flatten)]
    params: CoresetFlags,
    /// Where to write the serialized coreset
    #[arg(long, env = "PCSKETCH_OUTPUT")]
    output: PathBuf,
    #[arg(long, env = "PCSKETCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Read the input file twice sequentially instead of loading it
    #[arg(long, env = "PCSKETCH_STREAMING")]
    streaming: bool,
    /// How the tail energy is computed (exact needs the matrix in memory)
    #[arg(long, value_enum, env = "PCSKETCH_DELTA_MODE", default_value = "estimated")]
    delta_mode: DeltaModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum DeltaModeArg {
    Estimated,
    Exact,
}

#[derive(clap::Args)]
struct InfoArgs {
    /// Coreset file written by `build`
    #[arg(long, env = "PCSKETCH_INPUT")]
    input: PathBuf,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputFlags,
    #[command(flatten)]
    params: CoresetFlags,
    /// Closed sets sampled per sketch seed
    #[arg(long, env = "PCSKETCH_CLOSED_SETS", default_value_t = 20)]
    closed_sets: usize,
    /// Sketch seeds per suite
    #[arg(long, env = "PCSKETCH_SEEDS", default_value_t = 20)]
    seeds: usize,
    /// Gaussian scale of sampled affine offsets
    #[arg(long, env = "PCSKETCH_OFFSET_SCALE", default_value_t = 1.0)]
    offset_scale: f64,
    #[arg(long, env = "PCSKETCH_SEED", default_value_t = 0)]
    seed: u64,
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) | Error::Format { .. } => ExitCode::from(EXIT_IO),
        _ => ExitCode::from(EXIT_PRECONDITION),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Info(args) => cmd_info(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => bench::cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_for(&err)
        }
    }
}

fn print_coreset_summary(n: usize, d: usize, nnz: usize, c: &Coreset) {
    println!("n={n} d={d} nnz={nnz}");
    println!(
        "j_star={} m_star={} achieved_rank={} sketch_rows={}",
        c.params.j_star(),
        projective_rank(&c.params, d),
        c.achieved_rank,
        c.sketch_rows
    );
    println!(
        "delta_star={:.17e} delta_mode={}",
        c.tail_energy,
        match c.delta_mode {
            DeltaMode::Estimated => "estimated",
            DeltaMode::Exact => "exact",
        }
    );
    println!(
        "t_sketch_s={:.6} t_orthonormalize_s={:.6} t_small_svd_s={:.6} t_project_s={:.6} t_total_s={:.6}",
        c.timings.sketch.as_secs_f64(),
        c.timings.orthonormalize.as_secs_f64(),
        c.timings.small_svd.as_secs_f64(),
        c.timings.project.as_secs_f64(),
        c.construction_time.as_secs_f64()
    );
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode, Error> {
    let format = infer_format(&args.input.input, args.input.format)?;
    let params = args.params.to_params()?;

    let (coreset, n, d, nnz) = if args.streaming {
        if args.delta_mode == DeltaModeArg::Exact {
            return Err(Error::Precondition(
                "--delta-mode exact needs the matrix in memory; drop --streaming".into(),
            ));
        }
        let src = FileSource::open(&args.input.input, format)?;
        let mut counted = CountingSource::new(src);
        let c = build_projective_coreset_from_source(&mut counted, &params, args.seed)?;
        debug_assert_eq!(counted.passes(), 2);
        let (n, d) = (counted.rows(), counted.cols());
        (c, n, d, 0)
    } else {
        let a = load_matrix(&args.input.input, format)?;
        let mode = match args.delta_mode {
            DeltaModeArg::Estimated => DeltaMode::Estimated,
            DeltaModeArg::Exact => DeltaMode::Exact,
        };
        let c = build_projective_coreset_mode(&a, &params, args.seed, mode)?;
        (c, a.rows(), a.cols(), a.nnz())
    };

    print_coreset_summary(n, d, nnz, &coreset);
    std::fs::write(&args.output, serialize_coreset(&coreset))?;
    println!("output={}", args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_info(args: InfoArgs) -> Result<ExitCode, Error> {
    let bytes = std::fs::read(&args.input)?;
    let c = deserialize_coreset(&bytes)?;
    println!(
        "rows={} d={} m_star={} achieved_rank={}",
        c.rows(),
        c.ambient_dim(),
        projective_rank(&c.params, c.ambient_dim()),
        c.achieved_rank
    );
    println!(
        "k={} j={} j_star={} epsilon={} delta={} affine={} rank_override={} constant_c={}",
        c.params.k,
        c.params.j,
        c.params.j_star(),
        c.params.epsilon,
        c.params.delta,
        c.params.affine,
        c.params
            .rank_override
            .map_or_else(|| "none".into(), |r| r.to_string()),
        c.params.sketch_constant
    );
    println!(
        "seed={} sketch_rows={} delta_star={:.17e} delta_mode={}",
        c.seed,
        c.sketch_rows,
        c.tail_energy,
        match c.delta_mode {
            DeltaMode::Estimated => "estimated",
            DeltaMode::Exact => "exact",
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let format = infer_format(&args.input.input, args.input.format)?;
    let a = load_matrix(&args.input.input, format)?;
    let params = args.params.to_params()?;
    let reports = run_suite(
        &a,
        &params,
        args.closed_sets,
        args.seeds,
        args.seed,
        args.offset_scale,
    )?;
    let mut all_passed = true;
    for r in &reports {
        println!("{}", r.to_kv());
        all_passed &= r.passed;
    }
    if all_passed {
        println!("verification=passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("verification=failed");
        Ok(ExitCode::from(EXIT_VERIFY))
    }
}

/// Used by bench for the baseline comparison; kept here so both build and
/// bench share one definition of "the exact competitor".
pub(crate) fn exact_baseline(a: &DataMatrix, params: &CoresetParams) -> Result<(Coreset, f64), Error> {
    let t0 = Instant::now();
    let c = exact_svd_coreset(a, params)?;
    Ok((c, t0.elapsed().as_secs_f64()))
}
