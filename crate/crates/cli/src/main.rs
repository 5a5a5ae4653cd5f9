mod args;
mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use error::CliError;
use output::Report;

fn write_out(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.global.threads)))?;
    }
    let report: Report = match &cli.command {
        Command::Lyapunov(a) => commands::lyapunov_table(a)?,
        Command::Bigf(a) => commands::big_f_table(a)?,
        Command::Phase(a) => {
            let (report, critical) = commands::phase_table(a)?;
            if let Some(p) = &a.critical_out {
                let mut s = serde_json::to_string_pretty(&critical)?;
                s.push('\n');
                std::fs::write(p, s)?;
            }
            report
        }
        Command::Critical(a) => commands::critical_table(a)?,
        Command::Meanfield(a) => commands::meanfield_table(a)?,
        Command::Simulate(a) => commands::simulate_report(a, cli.global.seed)?,
        Command::Exponent(a) => commands::exponent_report(a)?,
        Command::Appendixb(a) => commands::appendix_b_table(a)?,
    };
    let text = match cli.global.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.to_json(),
    };
    write_out(cli.global.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
