use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use imdd_sweep::{emit, emit_to_path, pon_default_axes, run_sweep, Axis, ConfigDoc, Format, LinkConfig, Mode, SweepError, SweepSpec};

#[derive(Parser)]
#[command(name = "imdd", version, about = "Analytic and time-domain performance of M-PAM IMDD links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic FFE/DFE SNR and BER.
    Model(Common),
    /// Time-domain simulation with trained equalizers.
    Sim(Common),
    /// Model and simulation side by side, with their difference.
    Compare(Common),
    /// Received power and power budget at sensitivity.target_ber.
    Sensitivity(Common),
    /// Power budget of the 50 GBaud PON profile.
    Pon(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Swept parameter, `key=start:stop:step` or `key=v1,v2,...`; repeatable.
    #[arg(long = "sweep", value_name = "AXIS")]
    sweeps: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; defaults to json for `.json` paths, csv otherwise.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Master seed; point i uses seed ^ i.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(cli: Cli) -> Result<(), SweepError> {
    let is_pon = matches!(cli.command, Command::Pon(_));
    let (mode, base, args) = match cli.command {
        Command::Model(a) => (Mode::Model, LinkConfig::default(), a),
        Command::Sim(a) => (Mode::Sim, LinkConfig::default(), a),
        Command::Compare(a) => (Mode::Compare, LinkConfig::default(), a),
        Command::Sensitivity(a) => (Mode::Sensitivity, LinkConfig::default(), a),
        Command::Pon(a) => (Mode::Sensitivity, LinkConfig::pon(), a),
    };
    let mut doc = ConfigDoc::from_config(&base);
    if let Some(path) = &args.config {
        doc.merge_file(path)?;
    }
    doc.merge_env(std::env::vars())?;
    let mut spec = SweepSpec { seed: args.seed, jobs: args.jobs, ..SweepSpec::new(doc, mode) };
    for s in &args.sweeps {
        spec = spec.with_axis(Axis::parse(s)?);
    }
    if is_pon && spec.axes.is_empty() {
        spec.axes = pon_default_axes();
    }
    let format = match (&args.format, &args.out) {
        (Some(f), _) => f.parse()?,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Csv,
    };
    let records = run_sweep(&spec)?;
    let columns = spec.columns();
    match &args.out {
        Some(path) => emit_to_path(path, format, &columns, &records)?,
        None => emit(std::io::stdout().lock(), format, &columns, &records)
            .map_err(|e| SweepError::Io { path: "<stdout>".into(), message: e.to_string() })?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("imdd: {e}");
            match e {
                SweepError::Io { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
