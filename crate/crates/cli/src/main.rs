use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fractube_cli::commands::{self, Output};
use fractube_cli::{parse_config, CliError};

/// Complex dimensions, tube formulas and Minkowski contents of self-similar tilings.
///
/// Set FRACTUBE_THREADS to cap the worker thread count.
#[derive(Parser)]
#[command(name = "fractube", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Job configuration file.
    config: PathBuf,
    /// Write output here instead of standard output.
    #[arg(long, alias = "emit")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Kv,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Similarity dimension, lattice verdict and complex dimensions.
    Dims {
        #[command(flatten)]
        common: Common,
        /// Real-part window as `lo,hi`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        strip: Option<(f64, f64)>,
        #[arg(long)]
        im_max: Option<f64>,
    },
    /// Tube formula against the direct oracle; exits 4 if any rel_err exceeds tube_tol.
    Tube {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eps values.
        #[arg(long, value_delimiter = ',', conflicts_with = "eps_decades")]
        eps_list: Option<Vec<f64>>,
        /// Logarithmic grid of this many decades, starting at a tenth of the inradius.
        #[arg(long)]
        eps_decades: Option<u32>,
    },
    /// Measurability verdict and (average) Minkowski content.
    Content {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "kv")]
        format: Format,
    },
    /// Run the invariant checks; exits 4 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// One period of the oscillatory profile of a lattice tiling.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        grid_n: usize,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got `{s}`"))?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FRACTUBE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "FRACTUBE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>), CliError> {
    configure_threads()?;
    let load = |c: &Common| parse_config(&c.config)?.build();
    Ok(match cli.command {
        Command::Dims {
            common,
            strip,
            im_max,
        } => {
            let job = load(&common)?;
            (commands::dims(&job, strip, im_max)?, common.out)
        }
        Command::Tube {
            common,
            eps_list,
            eps_decades,
        } => {
            let job = load(&common)?;
            let eps = match eps_list {
                Some(list) => list,
                None => commands::eps_decades(job.generator.inradius(), eps_decades.unwrap_or(3)),
            };
            (commands::tube(&job, &eps)?, common.out)
        }
        Command::Content { common, format } => {
            let job = load(&common)?;
            (
                commands::content(&job, matches!(format, Format::Csv))?,
                common.out,
            )
        }
        Command::Verify { common } => {
            let job = load(&common)?;
            (commands::verify(&job)?, common.out)
        }
        Command::Profile { common, grid_n } => {
            let job = load(&common)?;
            (commands::profile(&job, grid_n)?, common.out)
        }
    })
}

fn emit(output: &Output, path: Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(&p, &output.text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(output, path)| {
        emit(&output, path)?;
        match output.failure {
            Some(msg) => Err(CliError::OracleMismatch(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fractube: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
