//! Command-line front end: sweeps, scaling analysis, oracle validation,
//! determinant benchmark and the domain-wall table.
//!
//! Exit codes: 0 success, 1 a validation or benchmark check failed, 2 a
//! numerical or I/O failure, 3 invalid configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isingmacro::GridConvention;

use commands::{BenchOptions, BenchSymbol, ScalingOptions, Status, ValidateOptions};
use config::{config_error, ConfigError, FlagConfig, RangeSpec, RunConfig, CACHE_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "isingmacro", version, about = "Macroscopicity of the transverse-field Ising ground state")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// N_eff(lambda) and its derivative for every size.
    Sweep(RunArgs),
    /// Peak positions and heights, power-law fits, data collapse.
    Scaling(ScalingArgs),
    /// Compare the determinant engine with exact diagonalization.
    Validate(ValidateArgs),
    /// Time pivoted elimination against the fast determinant sweep.
    Bench(BenchArgs),
    /// Effective size of the domain-wall state for every wall position.
    DomainWall(DomainWallArgs),
}

fn parse_grid(s: &str) -> Result<GridConvention, String> {
    s.parse().map_err(|e: isingmacro::Error| e.to_string())
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML file with any of the keys below (flags win).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Chain sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Coarse coupling range `lo:hi:step`.
    #[arg(long)]
    pub lambda_coarse: Option<RangeSpec>,
    /// Fine range `lo:hi:step` replacing the coarse points it covers.
    #[arg(long)]
    pub lambda_fine: Option<RangeSpec>,
    /// Explicit couplings, comma separated; overrides both ranges.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Momentum grid: `ns-even` or `paper-odd`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridConvention>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Correlator cache directory.
    #[arg(long, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = config::load_file(self.config.as_deref())?;
        // clap already folds the environment variable into `cache_dir`, so
        // only the file layer sits underneath it.
        let flags = FlagConfig {
            sizes: self.sizes.clone(),
            lambda_coarse: self.lambda_coarse,
            lambda_fine: self.lambda_fine,
            lambdas: self.lambdas.clone(),
            grid: self.grid,
            workers: self.workers,
            cache_dir: self.cache_dir.clone(),
            out: self.out.clone(),
        };
        RunConfig::resolve(file, None, flags)
    }
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Analyse `refined_N<k>.csv` (and `sweep_N<k>.csv`) from this directory
    /// instead of computing curves.
    #[arg(long)]
    pub from: Option<PathBuf>,
    /// Sizes entering the collapse (default: all).
    #[arg(long, value_delimiter = ',')]
    pub collapse_sizes: Option<Vec<usize>>,
    /// Size for the fit below the critical point (default: the largest).
    #[arg(long)]
    pub asymptotic_size: Option<usize>,
    /// Window `lo:hi` for that fit.
    #[arg(long, default_value = "0.90:0.98")]
    pub asymptotic_window: String,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Largest chain (even sizes from 4 up to this), at most 14.
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
    /// Couplings, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Allowed discrepancy is this over N.
    #[arg(long, default_value_t = 8.0)]
    pub tol_scale: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Determinant orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
    pub sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = BenchSymbol::Tfim)]
    pub symbol: BenchSymbol,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DomainWallArgs {
    /// Chain length N.
    #[arg(long)]
    pub n_sites: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_window(s: &str) -> anyhow::Result<(f64, f64)> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
    match parsed {
        Some((lo, hi)) if lo < hi => Ok((lo, hi)),
        _ => Err(config_error(format!("window must be lo:hi with lo < hi, got '{s}'"))),
    }
}

fn with_pool<T>(workers: usize, f: impl FnOnce() -> anyhow::Result<T> + Send) -> anyhow::Result<T>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| config_error(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}

pub fn execute(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            with_pool(cfg.workers, || commands::cmd_sweep(&cfg))
        }
        Command::Scaling(args) => {
            let cfg = args.run.resolve()?;
            let opts = ScalingOptions {
                from: args.from,
                collapse_sizes: args.collapse_sizes,
                asymptotic_size: args.asymptotic_size,
                asymptotic_window: parse_window(&args.asymptotic_window)?,
            };
            with_pool(cfg.workers, || commands::cmd_scaling(&cfg, &opts))
        }
        Command::Validate(args) => commands::cmd_validate(&ValidateOptions {
            max_n: args.max_n,
            lambdas: args
                .lambdas
                .unwrap_or_else(|| commands::DEFAULT_VALIDATE_LAMBDAS.to_vec()),
            tol_scale: args.tol_scale,
            output_dir: args.out,
        }),
        Command::Bench(args) => commands::cmd_bench(&BenchOptions {
            orders: args.sizes,
            symbol: args.symbol,
            output_dir: args.out,
        }),
        Command::DomainWall(args) => commands::cmd_domain_wall(args.n_sites, &args.out),
    }
}

/// Exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<ConfigError>()) {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Status::Passed) => EXIT_OK,
        Ok(Status::Failed) => EXIT_VALIDATION,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
