mod args;
mod corpus_tools;
mod score;
mod settings;
mod simulate;
mod train;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;
use stackdet_core::Error as CoreError;

use crate::args::{Cli, Command};
use crate::settings::{config_error, ConfigError, Settings};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_ADAPTER: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::InvalidConfig(_)
                | CoreError::UnsupportedCombination(_)
                | CoreError::InvalidFilterSpec(_) => EXIT_CONFIG,
                CoreError::Numerical { .. } => EXIT_NUMERICAL,
                CoreError::AdapterProtocol(_) => EXIT_ADAPTER,
                CoreError::EmptyDocument
                | CoreError::EmptyRetention
                | CoreError::DegenerateDataset(_)
                | CoreError::ModelFormat(_)
                | CoreError::Corpus { .. }
                | CoreError::Io(_) => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

fn init_logging(level: &str) -> anyhow::Result<()> {
    let filter: LevelFilter = level.parse().map_err(|_| {
        config_error(format!(
            "--log-level must be off, error, warn, info, debug or trace, got `{level}`"
        ))
    })?;
    env_logger::Builder::new()
        .filter_level(filter)
        .format(|buf, rec| {
            let line = serde_json::json!({
                "level": rec.level().as_str(),
                "target": rec.target(),
                "msg": rec.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .try_init()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let settings = Settings::load(cli.global.config.as_deref())?;
    let g = &cli.global;
    init_logging(&settings.or(g.log_level.clone(), "log-level", "warn".to_string())?)?;
    if let Some(jobs) = settings.get(g.jobs, "jobs")? {
        if jobs == 0 {
            return Err(config_error("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Train(a) => train::run(g, a, &settings),
        Command::Detect(a) => score::detect(g, a, &settings),
        Command::Eval(a) => score::eval(g, a, &settings),
        Command::Simulate(a) => simulate::run(g, a, &settings),
        Command::Overlap(a) => corpus_tools::overlap(a, &settings),
        Command::Bench(a) => score::bench(g, a, &settings),
        Command::Synth(a) => corpus_tools::synth(g, a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
