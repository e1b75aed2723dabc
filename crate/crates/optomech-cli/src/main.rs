//! `optomech`: runs the simulation chain for one scenario file.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use optomech::cavity::AcConvention;
use optomech::scenario::{Scenario, FIG4_SCENARIO};
use output::{Format, Metadata, Report};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    Paper,
    Ref,
}

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Anharmonic nanomechanics coupled to an optical microresonator")]
struct Cli {
    /// Scenario file (JSON); the bundled reference scenario when omitted
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for output files; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Override the Fock-space cutoff of the scenario
    #[arg(long, global = true)]
    fock_cutoff: Option<usize>,
    /// Override how the rim radius is read
    #[arg(long, global = true, value_enum)]
    ac_convention: Option<Convention>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Beam roots, frequencies, masses and the B_11ij table
    Modes {
        /// number of modes (defaults to the scenario's mode cutoff)
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Softening sweep and the electrode operating point
    Tune {
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Energies, position matrix elements and transition frequencies
    SpectrumLevels,
    /// Field structure, placement, G0 and linearized drive couplings
    Couple,
    /// Electrode loss channels and the combined finesse
    Losses,
    /// Steady-state populations and effective linewidths
    Steady,
    /// Probe emission spectrum and peak table
    Emission {
        /// uniform grid points before refinement around peaks
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Runs the acceptance suite
    Verify,
}

struct Loaded {
    scenario: Scenario,
    source: String,
}

fn load(cli: &Cli) -> Result<Loaded, String> {
    let (text, source) = match &cli.scenario {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| format!("cannot read scenario {}: {e}", p.display()))?,
            p.display().to_string(),
        ),
        None => (FIG4_SCENARIO.to_string(), "bundled:fig4".to_string()),
    };
    let mut scenario = Scenario::parse(&text).map_err(|e| e.to_string())?;
    if let Some(n) = cli.fock_cutoff {
        scenario.options.fock_cutoff = n;
    }
    if let Some(c) = cli.ac_convention {
        scenario.options.ac_convention = match c {
            Convention::Paper => AcConvention::Paper,
            Convention::Ref => AcConvention::Reference,
        };
    }
    if let Command::Emission { grid: Some(g) } = cli.command {
        scenario.options.grid_points = g;
    }
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(Loaded { scenario, source })
}

fn metadata(command: &'static str, loaded: Option<&Loaded>) -> Metadata {
    let (source, canonical, effective) = match loaded {
        Some(l) => {
            let json = l.scenario.to_json();
            let value = serde_json::from_str(&json).expect("canonical scenario is JSON");
            (l.source.clone(), json, value)
        }
        None => ("none".to_string(), String::new(), serde_json::Value::Null),
    };
    Metadata {
        tool: "optomech",
        version: env!("CARGO_PKG_VERSION"),
        command,
        scenario: source,
        scenario_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
        effective_scenario: effective,
    }
}

fn write(meta: &Metadata, report: &Report, cli: &Cli) -> ExitCode {
    match output::emit(meta, report, cli.format, cli.out.as_deref()) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Command::Verify = cli.command {
        let (report, lines, clean) = commands::verify();
        let meta = metadata("verify", None);
        if cli.format == Format::Json || cli.out.is_some() {
            let code = write(&meta, &report, &cli);
            if code != ExitCode::SUCCESS {
                return code;
            }
        }
        if cli.format == Format::Csv || cli.out.is_some() {
            let mut stdout = std::io::stdout().lock();
            for l in lines {
                if writeln!(stdout, "{l}").is_err() {
                    break;
                }
            }
        }
        return if clean { ExitCode::SUCCESS } else { ExitCode::from(EXIT_NUMERICAL) };
    }

    let loaded = match load(&cli) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let s = &loaded.scenario;
    let result = match &cli.command {
        Command::Modes { n_max } => commands::modes(s, n_max.unwrap_or(s.options.mode_cutoff)),
        Command::Tune { points } => commands::tune(s, *points),
        Command::SpectrumLevels => commands::spectrum_levels(s),
        Command::Couple => commands::couple(s),
        Command::Losses => commands::losses(s),
        Command::Steady => commands::steady(s),
        Command::Emission { .. } => commands::emission(s),
        Command::Verify => unreachable!("handled above"),
    };
    match result {
        Ok(report) => write(&metadata(report.command, Some(&loaded)), &report, &cli),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL })
        }
    }
}
