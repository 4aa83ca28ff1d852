use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Debug, Parser)]
#[command(
    name = "selberg-signs",
    version,
    about = "Sign changes of L-function coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report path; written atomically. Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Source {
    /// TOML spec file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Binary coefficient cache, reused when it covers the range and rewritten otherwise.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients A(1..=X).
    Sieve {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Sign changes of A(m) up to X.
    Signs {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        /// Record the positions of each change.
        #[arg(long)]
        positions: bool,
        #[command(flatten)]
        out: Output,
    },
    /// S1/S2 over one window [x, x+H], or over all disjoint windows in [X, 2X] with --sweep.
    Window {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        #[arg(long = "H")]
        h: u64,
        #[arg(long = "M", default_value_t = 10)]
        m: u64,
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Exponents for (θ, κ, ε).
    Exponents {
        /// Defaults to the convexity value d/4 when --degree is given.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        kappa: f64,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long)]
        degree: Option<u32>,
        #[command(flatten)]
        out: Output,
    },
    /// Second moment and mean-value ratio of the block (M, 2M].
    Moment {
        #[command(flatten)]
        source: Source,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "T")]
        t: f64,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Supremum of |K(1/2+it)| over |t| ≤ T against its envelope.
    Profile {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "T")]
        t: f64,
        /// Defaults to the spec's θ.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Window sum through a truncated Perron integral.
    Perron {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        #[arg(long = "H")]
        h: u64,
        #[arg(long = "M")]
        m: u64,
        #[arg(long = "t-cut")]
        t_cut: f64,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Numerical identity checks.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// Observed sign changes against the predicted exponent.
    TheoremCheck {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        x: u64,
        /// Defaults to ⌈√X⌉.
        #[arg(long = "H")]
        h: Option<u64>,
        #[arg(long = "M", default_value_t = 10)]
        m: u64,
        /// Defaults to the spec's θ.
        #[arg(long)]
        theta: Option<f64>,
        /// Defaults to the empirical value at X, capped at 1.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Congruence-restricted series against the Euler-factor formula for squarefree d.
    Identities {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 30)]
        dmax: u64,
        /// Real point s > 1.
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trunc: u64,
        #[command(flatten)]
        out: Output,
    },
    /// |((1+u)^s − 1)/s| ≤ 3·max(u, 1/|Im s|) over a grid with 1/2 ≤ Re s ≤ 2.
    Kernel {
        #[arg(long, default_value_t = 0.01)]
        u: f64,
        #[command(flatten)]
        out: Output,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SELBERG_SIGNS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("SELBERG_SIGNS_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("SELBERG_SIGNS_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(commands::EXIT_USAGE);
    }
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
