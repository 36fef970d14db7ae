use std::process::ExitCode;

use besov_robust_std::cli::{resolve, Cli, CliCommand, RunArgs};
use besov_robust_std::config::Command;
use besov_robust_std::{run, CliError, RunOptions, PRESET_NAMES};
use clap::Parser;

fn execute(command: Command, args: &RunArgs) -> Result<i32, CliError> {
    let cfg = resolve(command, args)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let outcome = run(&cfg, &RunOptions { jobs: args.jobs })?;
    let written = outcome.outputs.commit(&args.out)?;
    println!("{}", outcome.summary);
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let result = match &cli.command {
        CliCommand::Presets => {
            for p in PRESET_NAMES {
                println!("{p}");
            }
            Ok(0)
        }
        CliCommand::ShowConfig(a) => resolve(Command::RiskSweep, a).map(|c| {
            println!("{}", c.to_json());
            0
        }),
        CliCommand::Estimate(a) => execute(Command::Estimate, a),
        CliCommand::RiskSweep(a) => execute(Command::RiskSweep, a),
        CliCommand::RateCheck(a) => execute(Command::RateCheck, a),
        CliCommand::Breakdown(a) => execute(Command::Breakdown, a),
        CliCommand::Adversary(a) => execute(Command::Adversary, a),
    };
    let code = match result {
        Ok(c) => c,
        Err(e) => {
            println!("{}", e.to_json());
            e.exit_code()
        }
    };
    eprintln!("elapsed {:.2}s", started.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
