//! Command-line front end: parses flags into a [`cli::RunConfig`] and
//! dispatches. All real work lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plshoot::cli::{self, Command as RunCommand, RunConfig};

#[derive(Parser)]
#[command(
    name = "plshoot",
    version,
    about = "Radial p-Laplace shooting: node counting and compactly supported solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Configuration file of key = value lines (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Space dimension N (> p)
    #[arg(long = "N", visible_alias = "dim")]
    dim: Option<f64>,
    /// Operator exponent p (> 1)
    #[arg(long)]
    p: Option<f64>,
    /// Lower exponent of the built-in power nonlinearity
    #[arg(long)]
    m: Option<f64>,
    /// Upper exponent of the built-in power nonlinearity
    #[arg(long)]
    s: Option<f64>,
    /// Tabulated nonlinearity CSV (u,f with header), overrides m/s
    #[arg(long)]
    table: Option<PathBuf>,
    /// Relative step tolerance
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute step tolerance
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Event radius tolerance
    #[arg(long)]
    event_tol: Option<f64>,
    /// |u| + |u'| threshold for double zeros
    #[arg(long)]
    double_zero_tol: Option<f64>,
    /// Growth split parameter in (0, 1)
    #[arg(long)]
    theta_growth: Option<f64>,
    /// Integration horizon (defaults from the support bound)
    #[arg(long)]
    r_max: Option<f64>,
    /// Output directory (default: $PLSHOOT_OUT or ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into the manifest
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a single shot and emit trajectory.csv + events.json
    Solve {
        #[command(flatten)]
        common: Common,
        /// Shooting amplitude u(0)
        #[arg(long)]
        lambda: f64,
    },
    /// Classify a geometric grid of amplitudes into sweep.csv
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda_lo: f64,
        #[arg(long)]
        lambda_hi: f64,
        #[arg(long, default_value_t = 16)]
        lambda_steps: usize,
    },
    /// Bisect for the k-node compactly supported amplitude
    FindNodes {
        #[command(flatten)]
        common: Common,
        /// Prescribed number of sign changes
        #[arg(long)]
        k: usize,
    },
    /// Emit the angular-velocity certificate (and check one shot)
    CertifyRotation {
        #[command(flatten)]
        common: Common,
        /// Angular velocity bound in (0, 1/8)
        #[arg(long)]
        omega: f64,
        /// Optional amplitude to check against the certificate
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Emit the compact-support barrier profile and crossing times
    Barrier {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form support-size brackets vs the measured crossing
    SizeBounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
    },
    /// Long-run tail diagnostics (limits of u and E)
    Limits {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
    },
}

fn apply_common(cfg: &mut RunConfig, common: &Common) -> plshoot::Result<()> {
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        cfg.apply_text(&text)?;
    }
    if let Some(v) = common.dim {
        cfg.dim = v;
    }
    if let Some(v) = common.p {
        cfg.p = v;
    }
    if let Some(v) = common.m {
        cfg.m = v;
    }
    if let Some(v) = common.s {
        cfg.s = v;
    }
    if let Some(v) = &common.table {
        cfg.table = Some(v.clone());
    }
    if let Some(v) = common.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = common.abs_tol {
        cfg.abs_tol = v;
    }
    if let Some(v) = common.event_tol {
        cfg.event_tol = v;
    }
    if let Some(v) = common.double_zero_tol {
        cfg.double_zero_tol = v;
    }
    if let Some(v) = common.theta_growth {
        cfg.theta_growth = v;
    }
    if let Some(v) = common.r_max {
        cfg.r_max = Some(v);
    }
    if let Some(v) = &common.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    Ok(())
}

fn build_config(cmd: &Cmd) -> plshoot::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    match cmd {
        Cmd::Solve { common, lambda } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::Solve;
            cfg.lambda = Some(*lambda);
        }
        Cmd::Sweep { common, lambda_lo, lambda_hi, lambda_steps } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::Sweep;
            cfg.lambda_grid = Some((*lambda_lo, *lambda_hi, *lambda_steps));
        }
        Cmd::FindNodes { common, k } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::FindNodes;
            cfg.k = Some(*k);
        }
        Cmd::CertifyRotation { common, omega, lambda } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::CertifyRotation;
            cfg.omega = *omega;
            cfg.lambda = *lambda;
        }
        Cmd::Barrier { common } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::Barrier;
        }
        Cmd::SizeBounds { common, lambda } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::SizeBounds;
            cfg.lambda = Some(*lambda);
        }
        Cmd::Limits { common, lambda } => {
            apply_common(&mut cfg, common)?;
            cfg.command = RunCommand::Limits;
            cfg.lambda = Some(*lambda);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match cli::run(&cfg) {
        Ok(artifacts) => {
            for name in artifacts {
                println!("{}", cfg.out_dir.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
