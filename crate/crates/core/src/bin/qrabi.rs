use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use qrabi::runner::{self, Scenario};
use qrabi::Error;

/// Digital simulation of the quantum Rabi model.
#[derive(Parser, Debug)]
#[command(name = "qrabi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario from a TOML file.
    Run {
        config: PathBuf,
        /// Output directory (overrides $QRABI_OUT_DIR and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override a config value, e.g. `--set params.n_max=40`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a built-in scenario.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the scenario as TOML instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// List built-in scenarios.
    List,
    /// Check a config file without running it.
    Validate { config: PathBuf },
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_numeric() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn execute(scenario: &Scenario, out: Option<PathBuf>) -> Result<ExitCode, Error> {
    let dir = runner::resolve_out_dir(scenario, out.as_deref());
    let report = runner::run(scenario, &dir)?;
    for path in &report.files {
        println!("{}", path.display());
    }
    if report.reference_leakage_exceeded() {
        error!("reference evolution leaks past the Fock cutoff; results are not trustworthy");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            overrides,
        } => Scenario::load(&config)
            .and_then(|s| s.with_overrides(&overrides))
            .and_then(|s| execute(&s, out)),
        Command::Preset {
            name,
            out,
            overrides,
            show,
        } => match runner::preset(&name) {
            None => Err(Error::Config(format!(
                "unknown preset {name:?}; see `qrabi list`"
            ))),
            Some(s) => s.with_overrides(&overrides).and_then(|s| {
                if show {
                    print!("{}", s.to_toml()?);
                    Ok(ExitCode::SUCCESS)
                } else {
                    execute(&s, out)
                }
            }),
        },
        Command::List => {
            for (name, description) in runner::list_presets() {
                println!("{name:<18} {description}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => Scenario::load(&config).map(|s| {
            println!("{}: ok ({} mode)", s.name, s.mode.as_str());
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
