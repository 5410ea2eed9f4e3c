use std::path::PathBuf;
use std::process::ExitCode;

use arum_cli::{
    exit, run_scenario_file, validate_scenario_file, Arithmetic, RunOptions, EXIT_CODE_HELP, SCENARIO_SCHEMA,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arum", version, about = "Identification and welfare analyses for random utility models with limited consideration", after_help = EXIT_CODE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every analysis in a scenario and write CSV/JSON artifacts.
    #[command(after_help = EXIT_CODE_HELP)]
    Run {
        scenario: PathBuf,
        /// Overrides the scenario's output_dir.
        #[arg(long, short)]
        output_dir: Option<PathBuf>,
        /// Directory used when neither the flag nor the scenario sets one.
        #[arg(long, env = "ARUM_OUTPUT_DIR", hide = true)]
        default_output_dir: Option<PathBuf>,
        #[arg(long)]
        arithmetic: Option<Arithmetic>,
        #[arg(long)]
        seed: Option<u64>,
        /// Do not list written files.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Parse and validate a scenario without running it.
    #[command(after_help = EXIT_CODE_HELP)]
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        arithmetic: Option<Arithmetic>,
    },
    /// Print the scenario JSON schema.
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, output_dir, default_output_dir, arithmetic, seed, quiet } => {
            let opts = RunOptions { output_dir, default_output_dir, arithmetic, seed };
            run_scenario_file(&scenario, &opts).map(|out| {
                if !quiet {
                    for a in &out.artifacts {
                        println!("{}", out.output_dir.join(&a.name).display());
                    }
                }
            })
        }
        Command::Validate { scenario, arithmetic } => {
            let opts = RunOptions { arithmetic, ..RunOptions::default() };
            validate_scenario_file(&scenario, &opts).map(|s| println!("ok: {} ({} analyses)", s.name, s.analyses.len()))
        }
        Command::Schema => {
            print!("{SCENARIO_SCHEMA}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
