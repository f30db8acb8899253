use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracprog::config::ExperimentConfig;
use fracprog::error::CliError;
use fracprog::experiment::{run_experiment, run_sweep, RunOutput};
use fracprog::verify::{run_suite_with, Suite};

#[derive(Parser)]
#[command(name = "fracprog", version, about = "Fractional-programming experiments and property suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured scenario and write trace.csv and summary.toml.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to `output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every point of the config's [sweep] axis and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites: core, matrix, lagrangian, apps or all.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
    },
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<PathBuf, CliError> {
    out.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::config("output_dir: pass --out or set output_dir in the config"))
}

fn report(r: RunOutput) {
    println!("{}", r.headline);
    for f in r.files {
        println!("wrote {}", f.display());
    }
}

fn drive(config: &Path, out: Option<PathBuf>, sweep: bool) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config)?;
    let out = out_dir(&cfg, out)?;
    report(if sweep { run_sweep(&cfg, &out)? } else { run_experiment(&cfg, &out)? });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => drive(&config, out, false),
        Command::Sweep { config, out } => drive(&config, out, true),
        Command::Verify { suite } => {
            let results = run_suite_with(suite, &mut |r| println!("{r}"));
            let failed = results.iter().filter(|r| !r.passed()).count();
            println!("{} passed, {failed} failed", results.len() - failed);
            if failed > 0 {
                Err(CliError::Invariant(format!("{failed} properties failed")))
            } else {
                Ok(())
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
