use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use phaseportrait_cli::cli::Cli;
use phaseportrait_cli::{run, CliError};

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                e.exit()
            }
            _ => return fail(&CliError::Usage(e.to_string().trim_start_matches("error: ").trim_end().to_owned())),
        },
    };
    let save = cli.save_config.clone();
    let cfg = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    if let Some(path) = save {
        if let Err(e) = cfg.save(&path) {
            return fail(&e);
        }
    }
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
