use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use segpipe::synth::SynthConfig;
use segpipe::Exec;
use segpipe_cli::commands;
use segpipe_cli::config::RunConfig;
use segpipe_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "segpipe",
    version,
    about = "Sliding-window sequence learning pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split, fit and score the pipeline described by a config file.
    FitEval {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic classification dataset as NDJSON.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 140)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        t: usize,
        #[arg(long, default_value_t = 6)]
        d: usize,
        #[arg(long, default_value_t = 7)]
        classes: usize,
        #[arg(long, default_value_t = 0.3)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time repeated fit/score rounds, excluding data loading.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Run every data-parallel loop on the calling thread.
        #[arg(long)]
        sequential: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Summarise an NDJSON dataset.
    Inspect { dataset: PathBuf },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::FitEval { config, output } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(out) = output {
                config.output = Some(std::path::absolute(&out).unwrap_or(out));
            }
            let report = commands::fit_eval(&config)?;
            println!("{}", report.summary());
        }
        Command::Generate {
            out,
            n,
            t,
            d,
            classes,
            noise,
            seed,
        } => {
            let config = SynthConfig {
                instances: n,
                length: t,
                channels: d,
                classes,
                noise,
                seed,
            };
            let written = commands::generate_file(&config, &out)?;
            println!("wrote {written} series to {}", out.display());
        }
        Command::Bench {
            config,
            repeats,
            sequential,
            output,
        } => {
            let config = RunConfig::load(&config)?;
            let exec = if sequential || config.sequential {
                Exec::Sequential
            } else {
                Exec::default()
            };
            let report = commands::bench(&config, repeats, exec)?;
            if let Some(out) = output {
                commands::write_json(&out, &report)?;
            }
            println!("{}", report.summary());
        }
        Command::Inspect { dataset } => print!("{}", commands::inspect(&dataset)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return CliError::Config(String::new()).exit_code();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
