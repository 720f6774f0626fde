use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dirichlet_cli::cache::{check_grid_step, CACHE_ENV};
use dirichlet_cli::{commands, write_rows, Envelope, Format, ZeroCache};
use dirichlet_core::lfun::MAX_GRID_STEP;

#[derive(Parser)]
#[command(name = "dirichlet", version, about = "Zeros of primitive Dirichlet L-functions and family statistics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Emit JSON lines instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Scan and store missing moduli instead of failing.
    #[arg(long, global = true)]
    build_cache: bool,
    /// Zero cache directory.
    #[arg(long, global = true, env = CACHE_ENV, default_value = ".zero-cache")]
    cache_dir: PathBuf,
    /// Sign-change grid step for zero scans.
    #[arg(long, global = true, default_value_t = MAX_GRID_STEP)]
    grid_step: f64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan every primitive character mod q for Q < q < 2Q into the cache.
    Zeros {
        #[arg(long = "Q")]
        scale: f64,
        #[arg(long = "Tmax")]
        t_max: f64,
    },
    /// Both sides of the explicit formula for each primitive character mod q.
    ExplicitFormula {
        #[arg(long)]
        q: u64,
        #[arg(long = "X")]
        x: f64,
        #[arg(long = "Tmax", default_value_t = 500.0)]
        t_max: f64,
    },
    /// N_phi and F_phi(Q^alpha) with the predicted main term.
    PairCorrelation {
        #[arg(long = "Q")]
        scale: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long = "Tmax", default_value_t = 200.0)]
        t_max: f64,
    },
    /// S = S_D + S_N from character sums, no zeros needed.
    SDecomposition {
        #[arg(long = "Q")]
        scale: f64,
        #[arg(long = "X")]
        x: f64,
    },
    /// Euler-product constants and the Ozluk proportion.
    Constants,
    /// Empirical and asymptotic simple-zero bounds.
    SimpleZeros {
        #[arg(long = "Q")]
        scale: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "Tmax", default_value_t = 200.0)]
        t_max: f64,
    },
    /// M(x, Q) = sum over q <= Q and (a, q) = 1 of (psi(x; q, a) - x/phi(q))^2.
    Bdh {
        #[arg(long)]
        x: f64,
        #[arg(long = "Q")]
        q_max: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker pool")?;
    }
    let format = if g.json { Format::Json } else { Format::Csv };
    let out: Box<dyn Write> = match &g.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let open_cache = || -> Result<ZeroCache> {
        let step = check_grid_step(g.grid_step)?;
        Ok(ZeroCache::open(&g.cache_dir, Envelope::current(step))?)
    };
    match cli.command {
        Command::Zeros { scale, t_max } => write_rows(out, format, &commands::zeros(&open_cache()?, scale, t_max)?),
        Command::ExplicitFormula { q, x, t_max } => {
            write_rows(out, format, &commands::explicit_formula_rows(&open_cache()?, q, x, t_max)?)
        }
        Command::PairCorrelation { scale, alphas, t_max } => write_rows(
            out,
            format,
            &commands::pair_correlation(&open_cache()?, scale, &alphas, t_max, g.build_cache)?,
        ),
        Command::SDecomposition { scale, x } => write_rows(out, format, &commands::s_decomposition_rows(scale, x)?),
        Command::Constants => write_rows(out, format, &commands::constants()?),
        Command::SimpleZeros { scale, alpha, t_max } => write_rows(
            out,
            format,
            &[commands::simple_zeros(&open_cache()?, scale, alpha, t_max, g.build_cache)?],
        ),
        Command::Bdh { x, q_max } => write_rows(out, format, &[commands::bdh(x, q_max)?]),
    }
}
