use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use relu_regress::harness::{self, ExperimentConfig, ModelRef};
use relu_regress::Result;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Gen,
    Train,
    Ptas,
    Eval,
    Probe,
    Bench,
}

/// Agnostic ReLU regression experiments.
///
/// Set RELU_REGRESS_THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "relu-regress", version)]
struct Cli {
    command: Command,
    /// Experiment config, or the suite file for `bench`.
    #[arg(long)]
    config: PathBuf,
    /// Dotted `key=value` assignment applied to the config before parsing.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// `zero` or a model/hypothesis JSON path. Used by `eval`, and by `ptas` as the
    /// starting model.
    #[arg(long)]
    model: Option<String>,
}

fn run(cli: &Cli) -> Result<String> {
    if let Command::Bench = cli.command {
        let (path, rows) = harness::cmd_bench(&cli.config, &cli.overrides)?;
        let failed = rows.iter().filter(|r| r.status != "ok").count();
        return Ok(format!("{} rows ({failed} failed) written to {}", rows.len(), path.display()));
    }
    let mut cfg = ExperimentConfig::load(&cli.config, &cli.overrides)?;
    let report = match cli.command {
        Command::Gen => harness::cmd_gen(&cfg)?,
        Command::Train => harness::cmd_train(&cfg)?,
        Command::Ptas => {
            if let Some(m) = &cli.model {
                cfg.data.model = Some(m.into());
            }
            harness::cmd_ptas(&cfg)?
        }
        Command::Eval => {
            let model = match &cli.model {
                Some(m) => ModelRef::parse(m),
                None => ModelRef::Path(cfg.model_path()),
            };
            harness::cmd_eval(&cfg, &model)?
        }
        Command::Probe => harness::cmd_probe(&cfg)?,
        Command::Bench => unreachable!(),
    };
    Ok(serde_json::to_string_pretty(&report)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
