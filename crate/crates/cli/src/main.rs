mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use discrim_core::Error;

use args::{Cli, Command, PreParseError};

const EXIT_USAGE: u8 = 2;
const EXIT_NO_SOLUTION: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) => EXIT_USAGE,
        Error::NoSolution(_) | Error::DegenerateData(_) => EXIT_NO_SOLUTION,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn workers(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Payoff(a) => a.workers.workers,
        Command::Fig3(a) => a.workers.workers,
        Command::LoccSearch(a) => a.workers.workers,
        Command::MutualInfo(a) => a.workers.workers,
        Command::Helstrom(_) | Command::CnotVerify(_) | Command::FitNoise(_) => None,
    }
}

fn output_args(cmd: &Command) -> &args::OutputArgs {
    match cmd {
        Command::Payoff(a) => &a.out,
        Command::Fig3(a) => &a.out,
        Command::Helstrom(a) => &a.out,
        Command::LoccSearch(a) => &a.out,
        Command::CnotVerify(a) => &a.out,
        Command::FitNoise(a) => &a.out,
        Command::MutualInfo(a) => &a.out,
    }
}

fn dispatch(cmd: &Command) -> commands::CmdResult {
    match cmd {
        Command::Payoff(a) => commands::payoff(a),
        Command::Fig3(a) => commands::fig3(a),
        Command::Helstrom(a) => commands::helstrom(a),
        Command::LoccSearch(a) => commands::locc_search(a),
        Command::CnotVerify(a) => commands::cnot_verify(a),
        Command::FitNoise(a) => commands::fit(a),
        Command::MutualInfo(a) => commands::mutual_information(a),
    }
}

fn main() -> ExitCode {
    let argv = match args::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(PreParseError::Usage(m)) => return fail(EXIT_USAGE, m),
        Err(PreParseError::Io(m)) => return fail(EXIT_IO, m),
    };
    let cli = Cli::parse_from(argv);
    let cmd = &cli.command;

    let n = workers(cmd)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_IO, format!("cannot start worker pool: {e}")),
    };
    let report = match pool.install(|| dispatch(cmd)) {
        Ok(r) => r,
        Err(e) => return fail(exit_code(&e), e),
    };

    let out = output_args(cmd);
    let bytes = match report.render(cmd.name(), out.format) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_IO, e),
    };
    let written = match &out.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).and_then(|_| stdout.flush()).map_err(|e| e.to_string())
        }
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(m) => fail(EXIT_IO, m),
    }
}
