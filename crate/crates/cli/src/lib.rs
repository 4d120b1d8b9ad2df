//! Command-line front end for the `emlab` library.
//!
//! [`run`] parses arguments, runs one subcommand, prints a certificate (JSON)
//! or a table (CSV) and returns the exit code:
//! 0 verdict computed, 1 verdict false or counterexample, 2 usage error,
//! 3 budget or resource limit.

use std::io::Write;

use clap::Parser;

pub mod commands;
pub mod config;
pub mod input;
pub mod report;
pub mod suite;

use config::{GlobalArgs, RunConfig};
use report::{render, CliError, EXIT_FALSE, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "emlab", version, about = "Large sets, fallow colorings and EM-density")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: commands::Command,
}

/// Runs `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = RunConfig::try_from(&cli.global).and_then(|cfg| {
        let outcome = commands::dispatch(&cli.command, &cfg)?;
        Ok((cfg, outcome))
    });
    match result {
        Ok((cfg, o)) => {
            let certificate = o.certificate.stamped(cfg.stable);
            if let Err(e) = render(out, &certificate, o.table.as_ref(), cfg.format) {
                let _ = writeln!(err, "emlab: cannot write output: {e}");
                return EXIT_USAGE;
            }
            if o.passed {
                EXIT_OK
            } else {
                EXIT_FALSE
            }
        }
        Err(CliError::Failed(c)) => {
            let certificate = c.stamped(cli.global.stable);
            let _ = render(out, &certificate, None, cli.global.format);
            EXIT_FALSE
        }
        Err(e) => {
            let _ = writeln!(err, "emlab: {e}");
            e.exit_code()
        }
    }
}
