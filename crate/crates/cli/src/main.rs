mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Outputs;
use config::{Bandwidth, RunConfig};
use netcox::numeric::KernelShape;
use netcox::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "netcox", version, about = "Cox relational event models on dynamic networks")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory against which relative input paths are resolved.
    #[arg(long, global = true, env = "NETCOX_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    events: Option<PathBuf>,
    #[arg(long, global = true)]
    network: Option<PathBuf>,
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Bandwidth, or `auto`.
    #[arg(long, global = true)]
    h: Option<String>,
    #[arg(long, global = true)]
    kernel: Option<KernelShape>,
    #[arg(long, global = true)]
    directed: Option<bool>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    level: Option<f64>,
    /// Vertex count of the simulated scenario.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Simulate a network, covariates and events.
    Simulate,
    /// Estimate the localized parameter path.
    Estimate,
    /// Test for a constant parameter.
    Test,
    /// Prediction-error bandwidth curve.
    Bandwidth,
    /// Build and validate a block partition.
    PartitionCheck,
    /// Monte-Carlo size and power of the test.
    McCalibration,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Test => "test",
            Command::Bandwidth => "bandwidth",
            Command::PartitionCheck => "partition-check",
            Command::McCalibration => "mc-calibration",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    cli_version: &'static str,
    library_version: &'static str,
    subcommand: &'static str,
    seed: u64,
    config_hash: String,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cli.events {
        cfg.events = Some(v.clone());
    }
    if let Some(v) = &cli.network {
        cfg.network = Some(v.clone());
    }
    if let Some(v) = cli.horizon {
        cfg.horizon = Some(v);
    }
    if let Some(v) = &cli.h {
        cfg.h = match v.parse::<f64>() {
            Ok(x) => Bandwidth::Value(x),
            Err(_) => Bandwidth::Keyword(v.clone()),
        };
    }
    if let Some(v) = cli.kernel {
        cfg.kernel = v;
    }
    if let Some(v) = cli.directed {
        cfg.directed = v;
    }
    if let Some(v) = cli.reps {
        cfg.reps = v;
    }
    if let Some(v) = cli.level {
        cfg.level = v;
    }
    if let Some(v) = cli.n {
        cfg.scenario.n = v;
    }
    cfg.resolve(cli.data_dir.as_deref());
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = effective_config(cli)?;
    let mut out = Outputs::new(&cfg.output_dir)?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, &mut out)?,
        Command::Estimate => commands::estimate(&cfg, &mut out)?,
        Command::Test => {
            let r = commands::test(&cfg, &mut out)?;
            println!("z = {:.4}, p = {:.4}", r.z, r.p_value);
        }
        Command::Bandwidth => commands::bandwidth_cmd(&cfg, &mut out)?,
        Command::PartitionCheck => {
            let ok = commands::partition_check(&cfg, &mut out)?;
            println!("partition {}", if ok { "ok" } else { "invalid" });
        }
        Command::McCalibration => commands::mc_calibration(&cfg, &mut out)?,
    }
    let canonical = serde_json::to_string(&cfg)?;
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let manifest = Manifest {
        tool: "netcox",
        cli_version: env!("CARGO_PKG_VERSION"),
        library_version: netcox::VERSION,
        subcommand: cli.command.name(),
        seed: cfg.seed,
        config_hash: hash,
        config: &cfg,
        outputs: out.files.clone(),
    };
    out.json("manifest.json", &manifest)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        return 4;
    }
    match e {
        Error::Config(_) | Error::Domain(_) | Error::TooLarge(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
