use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semiscale::commands;
use semiscale::config::{self, Command, Layer, RunConfig};
use semiscale::Error;

/// Simulate simple fractional Brownian motion and estimate its scale and Hurst indices.
///
/// Settings resolve as defaults < --config file < SEMISCALE_* environment < flags.
#[derive(Parser)]
#[command(name = "semiscale", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write a simulated path (path.csv) and its moving-variance trace (msv.csv).
    Simulate(Flags),
    /// Estimate λ₀, λ*, μ̄* and H − H′ from a path.
    EstimateScale(Flags),
    /// Estimate the Hurst index, optionally after removing the scale factor.
    EstimateHurst(Flags),
    /// Monte Carlo MSE of the Hurst estimators on fBm.
    Bench(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<String>,
    /// Hurst index H (a comma list for bench).
    #[arg(long)]
    hurst: Option<String>,
    #[arg(long = "hurst-prime")]
    hurst_prime: Option<String>,
    /// uniform | geometric
    #[arg(long)]
    grid: Option<String>,
    /// Points per scale interval (geometric grid).
    #[arg(long = "T")]
    t: Option<String>,
    /// Number of scale intervals (geometric grid).
    #[arg(long = "M")]
    m: Option<String>,
    /// Uniform grid end time.
    #[arg(long = "C")]
    c: Option<String>,
    /// Uniform grid steps, or bench path length.
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long = "b-star")]
    b_star: Option<String>,
    #[arg(long = "d-star")]
    d_star: Option<String>,
    #[arg(long = "l-star")]
    l_star: Option<String>,
    #[arg(long = "j-star")]
    j_star: Option<String>,
    #[arg(long = "k-star")]
    k_star: Option<String>,
    #[arg(long)]
    kmax: Option<String>,
    #[arg(long)]
    coverage: Option<String>,
    /// Candidate-grid half-width, or "auto".
    #[arg(long = "grid-width")]
    grid_width: Option<String>,
    #[arg(long = "grid-points")]
    grid_points: Option<String>,
    /// auto | ratio1 | ratio2 | qv (comma list for bench).
    #[arg(long)]
    method: Option<String>,
    /// split | cusum
    #[arg(long)]
    initializer: Option<String>,
    /// trend | level
    #[arg(long)]
    objective: Option<String>,
    /// mean_square | second_difference
    #[arg(long = "variance-mode")]
    variance_mode: Option<String>,
    /// time,value CSV to analyse instead of simulating.
    #[arg(long)]
    input: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Estimate and remove the scale factor before estimating H.
    #[arg(long)]
    rescale: bool,
    #[arg(long = "lambda-star")]
    lambda_star: Option<String>,
    #[arg(long = "h-gap")]
    h_gap: Option<String>,
}

impl Flags {
    fn layer(self) -> semiscale::Result<Layer> {
        let pairs = [
            ("lambda", self.lambda),
            ("hurst", self.hurst),
            ("hurst_prime", self.hurst_prime),
            ("grid", self.grid),
            ("t", self.t),
            ("m", self.m),
            ("c", self.c),
            ("n", self.n),
            ("seed", self.seed),
            ("reps", self.reps),
            ("b_star", self.b_star),
            ("d_star", self.d_star),
            ("l_star", self.l_star),
            ("j_star", self.j_star),
            ("k_star", self.k_star),
            ("kmax", self.kmax),
            ("coverage", self.coverage),
            ("grid_width", self.grid_width),
            ("grid_points", self.grid_points),
            ("method", self.method),
            ("initializer", self.initializer),
            ("objective", self.objective),
            ("variance_mode", self.variance_mode),
            ("input", self.input),
            ("out", self.out),
            ("rescale", self.rescale.then(|| "true".to_string())),
            ("lambda_star", self.lambda_star),
            ("h_gap", self.h_gap),
        ];
        config::pairs_layer(pairs.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))))
    }
}

fn resolve(command: Command, mut flags: Flags) -> semiscale::Result<RunConfig> {
    let mut layers = Vec::new();
    if let Some(path) = flags.config.take() {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        layers.push(config::parse_config_text(&text, &path.display().to_string())?);
    }
    layers.push(config::env_layer(std::env::vars())?);
    layers.push(flags.layer()?);
    RunConfig::resolve(command, &layers)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Simulate(f) => (Command::Simulate, f),
        Sub::EstimateScale(f) => (Command::EstimateScale, f),
        Sub::EstimateHurst(f) => (Command::EstimateHurst, f),
        Sub::Bench(f) => (Command::Bench, f),
    };
    match resolve(command, flags).and_then(|cfg| commands::run(&cfg)) {
        Ok(report) => {
            // a closed pipe downstream is not an error
            let _ = std::io::stdout().write_all(report.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
