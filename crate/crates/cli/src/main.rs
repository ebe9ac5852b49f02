//! `hyqubit`: runs scenario files and presets, dumps coupling tables and
//! classifies channels against the invariance condition.

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use hyqubit::channel::Channel;
use hyqubit::format::format_sig;
use hyqubit::scenarios::{
    classify_scenario, preset, run_scenario, write_csv, ScenarioConfig, SweepTable, CSV_DIGITS, PRESETS,
};
use hyqubit::Error;

#[derive(Parser)]
#[command(name = "hyqubit", version, about = "Rotation-invariant hybrid qubit link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV table.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a bundled scenario by name.
    Preset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Write the coupling coefficients of a scenario's channel.
    Coeffs {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check a scenario's channel against the invariance condition.
    Classify {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the bundled scenarios.
    ListPresets,
}

#[derive(Args)]
struct RunOpts {
    /// Output file; `-` for stdout. Defaults to the scenario's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplies the quadrature node counts.
    #[arg(long, default_value_t = 1.0)]
    grid_scale: f64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::ListPresets => {
            let mut out = io::stdout().lock();
            for (name, text) in PRESETS {
                let cfg = ScenarioConfig::from_toml_str(text)?;
                writeln!(out, "{name:32} {}", cfg.description).map_err(stdout_err)?;
            }
            Ok(())
        }
        Command::Run { config, opts } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            run(cfg, &opts)
        }
        Command::Preset { name, opts } => run(preset(&name)?, &opts),
        Command::Coeffs { config, opts } => {
            let cfg = prepare(ScenarioConfig::from_path(&config)?, &opts)?;
            if cfg.sweep.is_some() {
                return Err(Error::config("sweep", "coeffs takes a single channel; remove the sweep"));
            }
            let (_, point) = cfg.points()?.remove(0);
            let coupling = Channel::compile(&point.channel, &point.basis, &point.grid)?.spatial_coupling()?;
            with_output(opts.out.as_deref(), |w| coupling.write_csv(w))
        }
        Command::Classify { config, opts } => {
            let cfg = prepare(ScenarioConfig::from_path(&config)?, &opts)?;
            let reports = classify_scenario(&cfg)?;
            let column = cfg.sweep_column().to_string();
            with_output(opts.out.as_deref(), |w| {
                let mut w = BufWriter::new(w);
                let io = |source| Error::Io { path: "<output>".into(), source };
                writeln!(w, "{column},holds,max_dev,predicted_fidelity,direct_fidelity,agrees,survival").map_err(io)?;
                for (v, r) in &reports {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        format_sig(*v, CSV_DIGITS),
                        r.holds,
                        format_sig(r.max_dev, CSV_DIGITS),
                        format_sig(r.predicted_fidelity, CSV_DIGITS),
                        format_sig(r.direct_fidelity, CSV_DIGITS),
                        r.agrees,
                        format_sig(r.survival, CSV_DIGITS),
                    )
                    .map_err(io)?;
                }
                w.flush().map_err(io)
            })
        }
    }
}

fn prepare(mut cfg: ScenarioConfig, opts: &RunOpts) -> Result<ScenarioConfig, Error> {
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(Error::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    cfg.grid_scale = opts.grid_scale;
    cfg.points()?;
    Ok(cfg)
}

fn run(cfg: ScenarioConfig, opts: &RunOpts) -> Result<(), Error> {
    let cfg = prepare(cfg, opts)?;
    let table: SweepTable = run_scenario(&cfg)?;
    let out = opts.out.clone().or_else(|| cfg.output.clone());
    with_output(out.as_deref(), |w| write_csv(&table, w))?;
    eprintln!("{}: {} rows", cfg.name, table.rows.len());
    Ok(())
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), Error>) -> Result<(), Error> {
    match path {
        None => f(&mut io::stdout().lock()),
        Some(p) if p == Path::new("-") => f(&mut io::stdout().lock()),
        Some(p) => {
            let mut file = File::create(p).map_err(|source| Error::Io { path: p.into(), source })?;
            f(&mut file).map_err(|e| match e {
                Error::Io { source, .. } => Error::Io { path: p.into(), source },
                other => other,
            })
        }
    }
}

fn stdout_err(source: io::Error) -> Error {
    Error::Io { path: "<stdout>".into(), source }
}
