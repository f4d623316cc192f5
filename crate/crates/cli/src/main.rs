use clap::{Args, Parser, Subcommand};
use lane_emden_cli::{parse_config, run, Command, ConfigError, RunConfig, RunError};
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Spectral checks for concentrating solutions of the slightly subcritical
/// Lane-Emden problem. Exit status: 0 all checks pass, 1 a check failed,
/// 2 invalid input or a module error.
#[derive(Parser)]
#[command(name = "lespec", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output directory [default: $LESPEC_OUT_DIR, else ./lespec-out]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integral constants table for dimension n.
    Constants {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Robin identities and derivative checks at the given interior points.
    GreenCheck {
        #[arg(long)]
        n: usize,
        /// JSON array of points, inline or as a file path.
        #[arg(long)]
        points: String,
        /// Sphere quadrature order.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Matrix pipeline for the configuration in a JSON file.
    Reduce {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Radial single-bubble sweep on the unit ball.
    RadialLab {
        #[arg(long)]
        n: usize,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        core_count: Option<usize>,
        #[arg(long)]
        outer_count: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// constants, green-check, reduce and radial-lab with defaults.
    VerifyAll {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Any subcommand, fully described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })
}

fn points_arg(arg: &str) -> Result<Vec<Vec<f64>>, RunError> {
    let text = if arg.trim_start().starts_with('[') {
        arg.to_string()
    } else {
        read(&PathBuf::from(arg))?
    };
    serde_json::from_str(&text).map_err(|e| {
        ConfigError::Invalid {
            key: "points".into(),
            message: e.to_string(),
        }
        .into()
    })
}

fn build(cmd: Cmd) -> Result<RunConfig, RunError> {
    let (mut cfg, common) = match cmd {
        Cmd::Constants { n, common } => (RunConfig::new(Command::Constants, n), common),
        Cmd::GreenCheck {
            n,
            points,
            order,
            common,
        } => {
            let mut cfg = RunConfig::new(Command::GreenCheck, n);
            cfg.points = points_arg(&points)?;
            if let Some(o) = order {
                cfg.tolerances.robin_order = o;
            }
            (cfg, common)
        }
        Cmd::Reduce { config, common } => {
            let cfg = parse_config(&read(&config)?)?;
            if cfg.subcommand != Command::Reduce {
                return Err(ConfigError::Invalid {
                    key: "subcommand".into(),
                    message: format!("expected \"reduce\", found \"{}\"", cfg.subcommand),
                }
                .into());
            }
            (cfg, common)
        }
        Cmd::RadialLab {
            n,
            eps,
            core_count,
            outer_count,
            levels,
            common,
        } => {
            let mut cfg = RunConfig::new(Command::RadialLab, n);
            if let Some(e) = eps {
                cfg.epsilons = e;
            }
            cfg.core_count = core_count.unwrap_or(cfg.core_count);
            cfg.outer_count = outer_count.unwrap_or(cfg.outer_count);
            cfg.levels = levels.unwrap_or(cfg.levels);
            (cfg, common)
        }
        Cmd::VerifyAll { n, common } => (RunConfig::new(Command::VerifyAll, n), common),
        Cmd::Run { config, common } => (parse_config(&read(&config)?)?, common),
    };
    if common.out.is_some() {
        cfg.out = common.out;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli.command).and_then(|cfg| run(&cfg).map(|o| (cfg, o)));
    match result {
        Ok((cfg, outcome)) => {
            // a closed pipe must not turn a finished run into a panic
            let _ = writeln!(io::stdout(), "{}", outcome.summary(cfg.subcommand));
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let _ = write!(io::stderr(), "{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
