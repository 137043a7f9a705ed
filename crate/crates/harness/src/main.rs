use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slpmm::Execution;
use slpmm_harness::experiment::{load_run, write_json};
use slpmm_harness::rate::rate_from_dirs;
use slpmm_harness::selftest::run_selftest;
use slpmm_harness::validate::{read_point, validate_point};
use slpmm_harness::{
    emit_plotdata, run_experiment, ExperimentConfig, Family, HarnessError, Result, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "slpmm",
    version,
    about = "Stochastic linearized proximal method of multipliers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Single seed, replacing the configured list.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seeds, replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Replace the problem section with this family's defaults if it differs.
    #[arg(long, value_enum)]
    family: Option<Family>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(f) = self.family {
            config.override_family(f);
        }
        if let Some(s) = self.seed {
            config.seeds = vec![s];
        }
        if let Some(s) = &self.seeds {
            config.seeds = s.clone();
        }
        config.check()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Write zero wall times so reruns are byte-identical.
        #[arg(long)]
        deterministic_time: bool,
        /// Run seeds one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Monte-Carlo estimate of f and g at a point.
    Validate {
        #[command(flatten)]
        common: Common,
        /// JSON array, or a run summary whose averaged iterate is used.
        #[arg(long)]
        point: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log slope of median objective gaps across run directories.
    Rate {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit long-format plot tables for a run directory.
    Plotdata {
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            out,
            deterministic_time,
            sequential,
        } => {
            let config = common.load()?;
            let opts = RunOptions {
                deterministic_time,
                execution: exec(sequential),
            };
            let report = run_experiment(&config, Some(&out), opts)?;
            for s in &report.summaries {
                println!(
                    "seed {:>6}  K={}  f̂={:.6} (±{:.1e})  max ĝ={:.3e}{}",
                    s.seed,
                    s.iterations,
                    s.validation.objective,
                    s.validation.objective_stderr,
                    s.max_constraint,
                    s.objective_gap
                        .map_or(String::new(), |g| format!("  gap={g:.3e}")),
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Validate { common, point, out } => {
            let config = common.load()?;
            let point = point.as_deref().map(read_point).transpose()?;
            let seed = common.seed.unwrap_or(config.validation.seed);
            let report = validate_point(&config, point, seed, Execution::Parallel)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(out) = out {
                std::fs::create_dir_all(&out)?;
                write_json(&out.join("validation.json"), &report)?;
            }
        }
        Command::Rate { runs, out } => {
            let fit = rate_from_dirs(&runs)?;
            for (k, e) in &fit.points {
                println!("K={k:<8} median gap={e:.4e}");
            }
            println!("slope {:.4}", fit.slope);
            if let Some(out) = out {
                std::fs::create_dir_all(&out)?;
                write_json(&out.join("rate.json"), &fit)?;
            }
        }
        Command::Plotdata { run, out } => {
            let (meta, traces) = load_run(&run)?;
            let out = out.unwrap_or_else(|| run.clone());
            for path in emit_plotdata(&meta, &traces, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Selftest { seed } => {
            let results = run_selftest(seed);
            let failed = results.iter().filter(|r| !r.passed).count();
            for r in &results {
                println!(
                    "{} {}  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
            }
            if failed > 0 {
                return Err(HarnessError::Solver(format!(
                    "{failed} self-test check(s) failed"
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
