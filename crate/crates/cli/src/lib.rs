//! Command-line driver: `simulate`, `exact`, `scan` and `verify`, each writing
//! one CSV table tagged with the hash of its resolved configuration.

pub mod config;
pub mod run;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{load_config_file, ExperimentConfig};
use run::{execute, RunError, EXIT_CONFIG, EXIT_IO, EXIT_OK};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "LAMPLIGHTER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lamplighter", version, about = "Switch-walk-switch random walks on lamplighter graphs")]
pub struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo runs of the lamplighter walk.
    Simulate { mode: SimMode },
    /// Closed forms and series.
    Exact { op: ExactOp },
    /// Exponent scan over a grid of drifts on a rooted graph.
    Scan,
    /// Exhaustive enumeration oracles.
    Verify { suite: Suite },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SimMode {
    Returns,
    LocalTime,
    Trajectories,
    Escape,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExactOp {
    PhaseParams,
    Extremes,
    MaxCdf,
    Series,
    RetProbNplus,
    RetProb,
    PartialSum,
    Rho1Pmf,
    Mgf,
    ExpectedRho,
    EscapeBound,
    RangeBound,
    LocalTimes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    #[value(alias = "prop2.2")]
    UniformLamps,
    #[value(alias = "prop5.2")]
    GeneralMeasure,
}

macro_rules! opts {
    ($($field:ident => $key:literal),* $(,)?) => {
        #[derive(Debug, Default, Args)]
        pub struct Opts {
            $(
                #[arg(long = $key, global = true, allow_hyphen_values = true)]
                pub $field: Option<String>,
            )*
        }

        impl Opts {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(if let Some(v) = &self.$field { out.push(($key, v.as_str())); })*
                out
            }
        }
    };
}

opts! {
    seed => "seed", replicas => "replicas", out => "out", tol => "tol", budget => "budget",
    p => "p", lambda => "lambda", lamp => "lamp", measure => "measure", graph => "graph",
    radius => "radius", k => "k", ks => "ks", m => "m", n => "n", ns => "ns", x => "x", s => "s",
    t => "t", r => "r", c => "c", m_plus => "m-plus", m_minus => "m-minus", visits => "visits",
    grid => "grid", k_lo => "k-lo", k_hi => "k-hi", max_len => "max-len", estimator => "estimator",
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().unwrap().get_name().to_string()
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Simulate { mode } => format!("simulate {}", value_name(mode)),
            Command::Exact { op } => format!("exact {}", value_name(op)),
            Command::Scan => "scan".into(),
            Command::Verify { suite } => format!("verify {}", value_name(suite)),
        }
    }
}

/// Merges the config file and flags into a validated config.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut values = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in cli.opts.pairs() {
        values.insert(k.to_string(), v.to_string());
    }
    Ok(ExperimentConfig::new(&cli.command.name(), values)?)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    configure_threads();
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let table = match execute(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let hash = cfg.hash();
    let written = match cfg.out() {
        Some(path) => std::fs::File::create(&path)
            .map_err(RunError::from)
            .and_then(|f| table.write_to(&hash, std::io::BufWriter::new(f))),
        None => table.write_to(&hash, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_IO;
    }
    for line in &table.trailer {
        eprintln!("{line}");
    }
    table.status.exit_code()
}
