//! natnet: sieving, divisor networks, the stochastic prime model, and
//! prime-gap statistics from one binary. Every run writes CSVs plus a
//! manifest recording parameters, seeds, and output digests, so a repeat
//! with the same arguments reproduces the files byte for byte.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cmds;
mod fmt;
mod manifest;

use cmds::SourceArg;
use natnet::model::Variant;

/// Largest N for which commands build a full smallest-factor sieve
/// (8 bytes per integer; 10^7 keeps the table under 100 MB).
pub const FACTOR_SIEVE_CAP: u64 = 10_000_000;

/// Exit codes: 2 for bad usage, 3 for over-budget requests, 1 otherwise.
pub enum Failure {
    Usage(String),
    Resource(String),
    Other(String),
}

impl Failure {
    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::Other(format!("{}: {e}", path.display()))
    }
}

impl From<natnet::error::Error> for Failure {
    fn from(e: natnet::error::Error) -> Self {
        match e {
            natnet::error::Error::Resource { required, budget } => Failure::Resource(format!(
                "request needs {required} but the budget is {budget}"
            )),
            natnet::error::Error::InvalidArgument(_)
            | natnet::error::Error::OutOfRange { .. }
            | natnet::error::Error::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

/// Accepts plain integers and scientific notation ("1e6").
fn parse_limit(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("{s:?} is not a count"))?;
    if !v.is_finite() || v < 0.0 || v > 9.0e18 || v.fract() != 0.0 {
        return Err(format!("{s:?} is not a whole non-negative count"));
    }
    Ok(v as u64)
}

fn parse_runs(s: &str) -> Result<u32, String> {
    parse_limit(s)?
        .try_into()
        .map_err(|_| format!("{s:?} is too large for a run count"))
}

#[derive(Parser)]
#[command(name = "natnet", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stream the primality of every n ≤ N to a CSV
    Sieve {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        /// Segment span in integers (rounded to whole sieve words)
        #[arg(long, value_parser = parse_limit)]
        segment_size: Option<u64>,
        #[arg(long, default_value = "primes.csv")]
        out: PathBuf,
    },
    /// Prime counts against the two classical approximations
    Pi {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        /// Number of log-spaced sample points (1 = just N)
        #[arg(long, default_value_t = 1)]
        points: usize,
        #[arg(long, default_value = "pi.csv")]
        out: PathBuf,
    },
    /// Factor-count statistics, or the divisor-sum identity check
    Arith {
        #[command(subcommand)]
        sub: Option<ArithSub>,
        #[arg(long, value_parser = parse_limit, default_value_t = 1000)]
        limit: u64,
        #[arg(long, default_value = "arith.csv")]
        out: PathBuf,
    },
    /// Divisor bipartite graph: edge list plus the four tail curves
    Network {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// One-mode prime projection edge list (self-loops included)
    Project {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, default_value = "proj.csv")]
        out: PathBuf,
    },
    /// Projection clustering coefficient grouped by degree
    Clustering {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, default_value = "ck.csv")]
        out: PathBuf,
    },
    /// Stochastic growth model ensembles
    Model {
        #[command(subcommand)]
        sub: ModelSub,
    },
    /// Survival recurrence and its continuum ODE, tabulated per n
    Meanfield {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, default_value = "pn.csv")]
        out: PathBuf,
    },
    /// Distinct-factor histogram of composites against the analytic law
    Erdoskac {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, default_value = "ek.csv")]
        out: PathBuf,
    },
    /// Record prime-gap series per square interval, tails, exceedances
    Gaps {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, value_enum, default_value = "real")]
        source: SourceArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Regenerate the data behind one figure (2, 3, 4, 5, 6, B2, B3)
    Figure {
        #[arg(long)]
        which: String,
        /// Override the figure's default N
        #[arg(long, value_parser = parse_limit)]
        limit: Option<u64>,
        /// Override the figure's default ensemble size
        #[arg(long, value_parser = parse_runs)]
        runs: Option<u32>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum ArithSub {
    /// Print both sides of the factor-sum / divisor-sum identity at N
    Identity {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
    },
}

#[derive(Subcommand)]
enum ModelSub {
    /// Grow an ensemble and tabulate its counting curves
    Run {
        #[arg(long, value_parser = parse_limit)]
        limit: u64,
        #[arg(long, value_parser = parse_runs, default_value_t = 10)]
        runs: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value = "standard")]
        variant: VariantArg,
        /// Also dump each run's edge list (standard variant only)
        #[arg(long)]
        record_edges: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Standard,
    Hardcore,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Standard => Variant::Standard,
            VariantArg::Hardcore => Variant::Hardcore,
        }
    }
}

fn dispatch(cli: Cli) -> cmds::CmdResult {
    match cli.cmd {
        Cmd::Sieve {
            limit,
            segment_size,
            out,
        } => cmds::sieve(limit, segment_size, &out),
        Cmd::Pi { limit, points, out } => cmds::pi_cmd(limit, points, &out),
        Cmd::Arith { sub, limit, out } => match sub {
            Some(ArithSub::Identity { limit }) => cmds::arith_identity(limit),
            None => cmds::arith_dump(limit, &out),
        },
        Cmd::Network { limit, out_dir } => cmds::network(limit, &out_dir),
        Cmd::Project { limit, out } => cmds::project_cmd(limit, &out),
        Cmd::Clustering { limit, out } => cmds::clustering_cmd(limit, &out),
        Cmd::Model { sub } => match sub {
            ModelSub::Run {
                limit,
                runs,
                seed,
                variant,
                record_edges,
                out_dir,
            } => cmds::model_run(limit, runs, seed, variant.into(), record_edges, &out_dir),
        },
        Cmd::Meanfield { limit, out } => cmds::meanfield_cmd(limit, &out),
        Cmd::Erdoskac { limit, out } => cmds::erdoskac_cmd(limit, &out),
        Cmd::Gaps {
            limit,
            source,
            seed,
            out_dir,
        } => cmds::gaps_cmd(limit, source, seed, &out_dir),
        Cmd::Figure {
            which,
            limit,
            runs,
            seed,
            out_dir,
        } => cmds::figure(&which, limit, runs, seed, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("resource limit: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
