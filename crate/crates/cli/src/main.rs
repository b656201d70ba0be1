mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{CliError, Ctx};
use output::{render, Numbers};

fn jobs(cli: &Cli) -> Result<Option<usize>, CliError> {
    match std::env::var("LI_JOBS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "LI_JOBS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => match cli.jobs {
            Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
            other => Ok(other),
        },
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let ctx = Ctx {
        numbers: Numbers {
            digits: cli.digits as usize,
        },
        places: cli.digits as usize,
        jobs: jobs(cli)?,
    };
    let value = match &cli.command {
        Command::Prob(i) => commands::prob(i, &ctx)?,
        Command::Bayes(i) => commands::bayes_cmd(i, &ctx)?,
        Command::Maxent(i) => commands::maxent(i, &ctx)?,
        Command::Divergence(i) => commands::divergence_cmd(i, &ctx)?,
        Command::Information(i) => commands::information_cmd(i, &ctx)?,
        Command::Entropy(i) => commands::entropy_cmd(i, &ctx)?,
        Command::Lattice(i) => commands::lattice(i)?,
        Command::Assoc { command } => commands::assoc(command, &ctx)?,
        Command::Funceq { command } => commands::funceq(command, &ctx)?,
        Command::AxiomCheck(a) => commands::axioms(a, &ctx)?,
    };
    Ok(render(&value, cli.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
