//! Command-line front end for `dmc-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod human;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command, Format, Output};
use crate::error::CliError;
use crate::report::Report;

fn emit(report: &Report, output: &Output) -> Result<(), CliError> {
    if let Some(path) = &output.report {
        std::fs::write(path, report.to_json()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    match output.format {
        Format::Json => println!("{}", report.to_json()),
        Format::Human => print!("{}", human::render(report)),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate(a) => {
            let r = commands::validate(&a)?;
            emit(&r, &a.output)?;
            Ok(r.exit_code)
        }
        Command::Check(a) => {
            let r = commands::check(&a)?;
            emit(&r, &a.output)?;
            Ok(r.exit_code)
        }
        Command::Chain(a) => {
            let r = commands::chain(&a)?;
            emit(&r, &a.output)?;
            Ok(r.exit_code)
        }
        Command::Oracle(a) => {
            let r = commands::oracle(&a)?;
            emit(&r, &a.output)?;
            Ok(r.exit_code)
        }
        Command::Gen(a) => {
            let (r, model) = commands::gen(&a)?;
            if let Some(path) = &a.report {
                std::fs::write(path, r.to_json()).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
            }
            if a.output.is_none() {
                let mut stdout = std::io::stdout().lock();
                let _ = writeln!(stdout, "{model}");
            } else {
                eprint!("{}", human::render(&r));
            }
            Ok(r.exit_code)
        }
    }
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                commands::EXIT_IO
            } else {
                commands::EXIT_OK
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Invalid { issues, .. } = &e {
                for i in issues {
                    eprintln!("  {}", i.message);
                }
            }
            e.exit_code()
        }
    }
}
