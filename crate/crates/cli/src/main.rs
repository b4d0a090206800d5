mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sphere_rigidity::experiments::Problem;

pub const VERSION: &str = concat!("sphere-rigidity ", env!("CARGO_PKG_VERSION"));

/// Exit codes: 0 pass, 1 input/usage error, 2 check failed.
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Parser, Debug)]
#[command(name = "sphere-rigidity", version, about = "Spectral experiments on near-ball convex bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Ambient dimension (2 or 3).
    #[arg(long = "n", default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    band_limit: usize,
    /// Grid resolution (Gauss-Legendre nodes for n = 3, angles for n = 2).
    #[arg(long, default_value_t = 32)]
    resolution: usize,
    #[arg(long)]
    tol: Option<f64>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BP5/BP8 residual of a body file.
    Verify {
        #[arg(long, value_parser = parse_problem)]
        problem: Problem,
        body_file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Residual-versus-t scans of 1 + t Y_m.
    Rigidity {
        /// Both problems when omitted.
        #[arg(long, value_parser = parse_problem)]
        problem: Option<Problem>,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = sphere_rigidity::experiments::DEFAULT_T_VALUES)]
        t_values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fixed-point Monge-Ampère solve for a γ file.
    SolveMa {
        gamma_file: PathBuf,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Radon curve from an arc file.
    Radon {
        arc_file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Multiplier table for the contraction operators.
    Multipliers {
        #[arg(long, value_parser = parse_problem)]
        problem: Problem,
        #[command(flatten)]
        common: Common,
    },
    /// Writes a body file: ball, ellipsoid (--axes) or perturbed ball (--perturb).
    MakeBody {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        axes: Option<Vec<f64>>,
        /// Perturbation m:k:t of the unit ball; repeatable.
        #[arg(long)]
        perturb: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: sphere_rigidity::Error| e.to_string())
}

/// Validated configuration, embedded verbatim in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim_n: usize,
    pub band_limit: usize,
    pub resolution: usize,
    pub problem: Option<Problem>,
    pub degrees: Vec<usize>,
    pub t_values: Vec<f64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    fn new(command: &str, common: &Common) -> Self {
        Self {
            command: command.into(),
            dim_n: common.n,
            band_limit: common.band_limit,
            resolution: common.resolution,
            problem: None,
            degrees: Vec::new(),
            t_values: Vec::new(),
            tol: common.tol,
            out: common.out.clone(),
            seed: common.seed,
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(matches!(self.dim_n, 2 | 3), "--n must be 2 or 3, got {}", self.dim_n);
        anyhow::ensure!(self.resolution >= 4, "--resolution must be at least 4");
        if let Some(t) = self.tol {
            anyhow::ensure!(t > 0.0 && t.is_finite(), "--tol must be positive");
        }
        anyhow::ensure!(self.t_values.iter().all(|t| *t > 0.0 && t.is_finite()), "t values must be positive");
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub version: &'a str,
    pub config: &'a RunConfig,
    pub passed: bool,
    pub result: T,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPHERE_RIGIDITY_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("SPHERE_RIGIDITY_THREADS must be a positive integer"))?;
        anyhow::ensure!(n > 0, "SPHERE_RIGIDITY_THREADS must be a positive integer");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Verify { problem, body_file, common } => {
            let mut cfg = RunConfig::new("verify", &common);
            cfg.problem = Some(problem);
            cfg.validate()?;
            commands::verify(&cfg, &body_file)
        }
        Command::Rigidity { problem, degrees, t_values, common } => {
            let mut cfg = RunConfig::new("rigidity", &common);
            cfg.problem = problem;
            cfg.degrees = degrees;
            cfg.t_values = t_values;
            cfg.validate()?;
            commands::rigidity(&cfg)
        }
        Command::SolveMa { gamma_file, max_iter, common } => {
            let cfg = RunConfig::new("solve-ma", &common);
            cfg.validate()?;
            commands::solve_ma(&cfg, &gamma_file, max_iter)
        }
        Command::Radon { arc_file, common } => {
            let mut cfg = RunConfig::new("radon", &common);
            cfg.dim_n = 2;
            cfg.validate()?;
            commands::radon(&cfg, &arc_file)
        }
        Command::Multipliers { problem, common } => {
            let mut cfg = RunConfig::new("multipliers", &common);
            cfg.problem = Some(problem);
            cfg.validate()?;
            commands::multipliers(&cfg)
        }
        Command::MakeBody { axes, perturb, common } => {
            let cfg = RunConfig::new("make-body", &common);
            cfg.validate()?;
            commands::make_body(&cfg, axes.as_deref(), &perturb)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
