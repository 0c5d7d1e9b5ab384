use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use elastica_cli::args::{Cli, Command};
use elastica_cli::commands::{cmd_compare, cmd_denoise, cmd_metrics, cmd_synth};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Denoise(args) => cmd_denoise(args, &mut out).map(|_| ()),
        Command::Synth(args) => cmd_synth(args, &mut out),
        Command::Metrics(args) => cmd_metrics(args, &mut out),
        Command::Compare(args) => cmd_compare(args, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("elastica: {e}");
            e.exit_code()
        }
    }
}
