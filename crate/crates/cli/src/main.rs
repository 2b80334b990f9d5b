//! `emforce` command line: runs one computation from a config file and writes
//! a CSV table with `#` metadata lines.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad input or config, 3 numerical
//! failure (no convergence, instability).

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Table;
use config::RunConfig;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "emforce", version, about = "Forces on dispersive, dissipative bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run config (INI).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV; stdout if omitted. Written only after the run succeeds.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the command's convergence tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Re χ from Im χ by Kramers-Kronig against the closed form.
    KkCheck,
    /// Pulse through a slab: R, T, A and the force time series.
    PulsePressure,
    /// Vacuum pressure between two half-spaces over a gap sweep.
    Casimir,
    /// Centre-of-mass packet: variance, mean drift, fluctuation envelope.
    Packet,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::KkCheck => "kk-check",
            Command::PulsePressure => "pulse-pressure",
            Command::Casimir => "casimir",
            Command::Packet => "packet",
        }
    }
}

enum Failure {
    Run(emforce::Error),
    Io(String),
}

impl From<emforce::Error> for Failure {
    fn from(e: emforce::Error) -> Self {
        Failure::Run(e)
    }
}

fn render(cmd: Command, hash: &str, table: &Table) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    writeln!(buf, "# emforce {} {}", env!("CARGO_PKG_VERSION"), cmd.name()).unwrap();
    writeln!(buf, "# config-sha256: {hash}").unwrap();
    writeln!(buf, "# relations: {}", table.relations).unwrap();
    for (k, v) in &table.meta {
        writeln!(buf, "# {k}: {v}").unwrap();
    }
    let mut w = csv::Writer::from_writer(buf);
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli.config.as_ref().ok_or_else(|| emforce::Error::Config("--config is required".into()))?;
    if let Some(t) = cli.tolerance {
        if !(t > 0.0) {
            return Err(emforce::Error::Config("--tolerance must be positive".into()).into());
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(emforce::Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Io(e.to_string()))?;
    }
    let mut cfg = RunConfig::load(path)?;
    let table = match cli.command {
        Command::KkCheck => commands::kk_check(&mut cfg, cli.tolerance),
        Command::PulsePressure => commands::pulse_pressure(&mut cfg, cli.tolerance),
        Command::Casimir => commands::casimir(&mut cfg, cli.tolerance),
        Command::Packet => commands::packet(&mut cfg, cli.tolerance),
    }?;
    let hash = cfg.finish()?;
    let bytes = render(cli.command, &hash, &table)?;
    match &cli.out {
        Some(p) => write_atomic(p, &bytes),
        None => std::io::stdout().write_all(&bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(e)) => {
            eprintln!("emforce: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
        Err(Failure::Io(m)) => {
            eprintln!("emforce: {m}");
            ExitCode::from(1)
        }
    }
}
