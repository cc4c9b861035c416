use std::path::PathBuf;
use std::process::ExitCode;

use biotstab_cli::commands::sweep_exit_code;
use biotstab_cli::{cmd_run, cmd_sweep, cmd_verify, load_config, CliError, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "biotstab", version, about = "Stabilized finite elements and iterative coupling for Biot poroelasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory; overrides `out` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark and write profiles and an iteration report.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every [[sweep]] table of the config, one CSV per table.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite and print its JSON report.
    Verify {
        /// spectral, schur, oracle, monotone or all.
        #[arg(default_value = "all")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

fn setup(common: &Common) -> Result<(), CliError> {
    if let Some(seed) = common.seed {
        log::debug!("seed {seed} ignored");
    }
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    Ok(())
}

fn output_dir(flag: &Option<PathBuf>, from_config: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| from_config.clone())
        .unwrap_or_else(|| PathBuf::from("biotstab-out"))
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, common } => {
            setup(&common)?;
            let cfg = load_config(&config)?;
            let out = output_dir(&common.out, &cfg.out);
            let outcome = cmd_run(&cfg, &out)?;
            println!("{:?}: wrote {} files to {}", outcome.status, outcome.files.len(), out.display());
            Ok(outcome.exit_code())
        }
        Command::Sweep { config, common } => {
            setup(&common)?;
            let cfg = load_config(&config)?;
            let out = output_dir(&common.out, &cfg.out);
            let results = cmd_sweep(&cfg, &out)?;
            for (path, r) in &results {
                let ok = r.cells.iter().filter(|c| c.converged).count();
                println!("{}: {ok}/{} cells converged", path.display(), r.cells.len());
            }
            Ok(sweep_exit_code(&results))
        }
        Command::Verify { suite, common } => {
            setup(&common)?;
            let (report, json) = cmd_verify(&suite, common.out.as_deref())?;
            println!("{json}");
            Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BIOTSTAB_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("biotstab: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
