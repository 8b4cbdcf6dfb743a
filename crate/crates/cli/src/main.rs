use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use catsim_cli::verify::{self, Fault, VerifyOptions};
use catsim_cli::{CliError, Experiment, Settings};

#[derive(Parser)]
#[command(name = "catsim", version, about = "Coherent-state qubit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its table.
    #[command(after_help = "OPTIONS (any order, after the experiment name):\n  \
        --config FILE      read `key = value` lines; later flags override them\n  \
        --out FILE         output path (stdout when omitted)\n  \
        --format csv|json  output format (csv)\n  \
        --seed N           64-bit seed (0)\n  \
        --KEY VALUE        experiment parameter; see `catsim params EXPERIMENT`")]
    Run {
        experiment: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OPTIONS")]
        args: Vec<String>,
    },
    /// List an experiment's parameters and defaults.
    Params { experiment: Experiment },
    /// Run the acceptance table.
    Verify {
        /// Print criterion ids without running them.
        #[arg(long)]
        list: bool,
        /// Plant a known error to check that it is caught.
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run only these criteria (repeatable).
        #[arg(long, value_name = "ID")]
        only: Vec<String>,
    },
}

fn run(experiment: &str, args: &[String]) -> catsim_cli::Result<()> {
    let experiment: Experiment = experiment.parse()?;
    let mut settings = Settings::default();
    let mut rest = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        match a.as_str() {
            "--config" => {
                let path = it.next().ok_or_else(|| CliError::config("`--config` needs a file"))?;
                settings = merge(Settings::from_file(&PathBuf::from(path))?, settings);
            }
            s if s.starts_with("--config=") => settings = merge(Settings::from_file(&PathBuf::from(&s[9..]))?, settings),
            _ => rest.push(a.clone()),
        }
    }
    settings.extend_from_flags(&rest)?;
    let config = settings.resolve(Some(experiment))?;
    catsim_cli::run(&config)?;
    Ok(())
}

/// File settings first so that flags given anywhere win.
fn merge(file: Settings, flags: Settings) -> Settings {
    let mut s = file;
    s.append(flags);
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { experiment, args } => run(&experiment, &args),
        Command::Params { experiment } => {
            for p in experiment.params() {
                println!("{:<8} {:<40} {:?}", p.key, p.default, p.kind);
            }
            Ok(())
        }
        Command::Verify { list, inject_fault, seed, only } => {
            if let Some(unknown) = only.iter().find(|o| !verify::criteria().iter().any(|c| c.id == o.as_str())) {
                Err(CliError::config(format!("unknown criterion `{unknown}`")))
            } else if list {
                for c in verify::criteria() {
                    println!("{}\t{}", c.id, c.title);
                }
                Ok(())
            } else {
                let options = VerifyOptions { fault: inject_fault, seed };
                verify::run_all(&options, &only, &mut std::io::stdout().lock()).and_then(|failed| {
                    if failed == 0 {
                        Ok(())
                    } else {
                        Err(CliError::Acceptance { failed })
                    }
                })
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
