mod args;
mod commands;
mod runlog;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};
use commands::Record;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sandcast_core::Error),
    #[error("{msg}")]
    Failed { msg: String, record: Box<Record> },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Core(_) | CliError::Failed { .. } => EXIT_DATA,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Synth(_) => "synth",
        Command::Ingest(_) => "ingest",
        Command::Train(_) => "train",
        Command::TrainSingle(_) => "train-single",
        Command::BlindTest(_) => "blind-test",
        Command::Compare(_) => "compare",
        Command::VolumePredict(_) => "volume-predict",
        Command::Filter(_) => "filter",
        Command::Section(_) => "section",
        Command::Selftest(_) => "selftest",
    }
}

fn dispatch(c: &Command) -> Result<Record, CliError> {
    match c {
        Command::Synth(a) => commands::synth(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Train(a) => commands::train(a),
        Command::TrainSingle(a) => commands::train_single(a),
        Command::BlindTest(a) => commands::blind_test(a),
        Command::Compare(a) => commands::compare(a),
        Command::VolumePredict(a) => commands::volume_predict(a),
        Command::Filter(a) => commands::filter(a),
        Command::Section(a) => commands::section(a),
        Command::Selftest(a) => commands::selftest(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            std::process::exit(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            std::process::exit(EXIT_USAGE);
        }
    }
    let name = command_name(&cli.command);
    match dispatch(&cli.command) {
        Ok(record) => runlog::append(name, &argv, Some(&record), 0, None),
        Err(e) => {
            let code = e.exit_code();
            let record = match &e {
                CliError::Failed { record, .. } => Some(record.as_ref()),
                _ => None,
            };
            runlog::append(name, &argv, record, code, Some(&e.to_string()));
            eprintln!("error: {e}");
            std::process::exit(code);
        }
    }
}
