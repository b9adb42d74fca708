mod cli;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Format};

const EXIT_VALIDATION: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) => e.exit(),
    };
    let record = match cli::run(&args.command) {
        Ok(record) => record,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_domain() { EXIT_DOMAIN } else { EXIT_VALIDATION });
        }
    };
    let opts = args.command.output_opts();
    let text = match opts.format {
        Format::Csv => record.csv(),
        Format::Json => record.json(),
    };
    let written = match &opts.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    ExitCode::SUCCESS
}
