mod args;
mod commands;
mod output;
mod report;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use crate::output::CliError;

fn main() -> ExitCode {
    let parsed = args::Cli::command().try_get_matches().and_then(|m| {
        let name = m.subcommand_name().map(str::to_string);
        args::Cli::from_arg_matches(&m).map(|cli| (cli, name))
    });
    let (cli, name) = match parsed {
        Ok(p) => p,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odm: {e}");
            if let (CliError::Usage(_), Some(name)) = (&e, name) {
                let mut cmd = args::Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(&name) {
                    eprintln!("\n{}", sub.render_help());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
