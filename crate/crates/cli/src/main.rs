use std::path::PathBuf;
use std::process::ExitCode;

use alia::solver::real_cubic_roots;
use alia_cli::run::{load_config, run_config, RunOverrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alia", version, about = "Run adaptive linearized ADMM experiments from a JSON config")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured solver, writing traces and summary.json.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record descent-inequality slacks.
        #[arg(long)]
        verify: bool,
        /// Run solver entries on this many threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the real roots of a3·t³ + a2·t² + a1·t + a0.
    #[command(allow_negative_numbers = true)]
    Roots { a3: f64, a2: f64, a1: f64, a0: f64 },
    /// Parse and validate a config without running it.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, verify, jobs } => {
            let result = load_config(&config)
                .and_then(|(cfg, base)| run_config(&cfg, &base, &RunOverrides { out_dir: out, verify, jobs }));
            match result {
                Ok(report) => {
                    for s in &report.summary.solvers {
                        let gamma = s.min_gamma.map(|g| g.to_string()).unwrap_or_else(|| "-".into());
                        println!("{}: {} after {} iterations, min gamma {gamma}", s.name, s.status, s.iterations);
                    }
                    println!("wrote {}", report.out_dir.display());
                    ExitCode::from(report.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Roots { a3, a2, a1, a0 } => match real_cubic_roots(a3, a2, a1, a0) {
            Ok(roots) => {
                for r in roots {
                    println!("{r}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Check { config } => match load_config(&config) {
            Ok((cfg, _)) => {
                println!("ok: {} with {} solver(s)", cfg.problem.kind(), cfg.solvers.len());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
