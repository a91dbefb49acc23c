//! Configuration-driven experiment runner: single-link analysis, parameter
//! sweeps and figure-reproduction presets emitting CSV.

use lismodes_cli::{config, presets, run};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use lismodes::geometry::{fraunhofer_distance, Wave};

use config::ExperimentConfig;
use presets::Preset;

#[derive(Parser)]
#[command(name = "lismodes", about = "Communication-mode and link-budget analysis for planar surfaces", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonOpts {
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the SVD seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep points.
    #[arg(long)]
    workers: Option<usize>,
    /// Override mesh spacing as a fraction of the wavelength.
    #[arg(long)]
    mesh_lambda_frac: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single-point configuration.
    Link {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a parameter sweep from a configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a built-in preset sweep.
    Preset {
        /// Preset name; see `preset --help` output below for the list.
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Parse and validate a configuration file.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf, common: &CommonOpts) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(frac) = common.mesh_lambda_frac {
        cfg.mesh_lambda_frac = frac;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn open_out(common: &CommonOpts, cfg_out: Option<&str>) -> anyhow::Result<Box<dyn Write>> {
    let path = common
        .out
        .clone()
        .or_else(|| cfg_out.map(PathBuf::from));
    match path {
        Some(p) => {
            let f = File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn write_fraunhofer_table<W: Write>(
    frequencies_hz: &[f64],
    sizes_m: &[f64],
    out: &mut W,
) -> anyhow::Result<()> {
    writeln!(out, "frequency_hz,size_m,fraunhofer_m")?;
    for &size in sizes_m {
        for &f in frequencies_hz {
            let wave = Wave::from_frequency(f).map_err(|e| anyhow::anyhow!("{e}"))?;
            let boundary = fraunhofer_distance(size, &wave).map_err(|e| anyhow::anyhow!("{e}"))?;
            writeln!(out, "{:.6e},{:.6e},{:.6e}", f, size, boundary)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Link { config, common } => {
            let cfg = load_config(&config, &common)?;
            let row = run::run_link(&cfg, common.seed)?;
            let mut out = open_out(&common, cfg.out.as_deref())?;
            writeln!(out, "{}", run::csv_header())?;
            writeln!(out, "{}", row.to_csv())?;
            out.flush()?;
            if let Some(err) = row.error {
                anyhow::bail!("link evaluation failed: {err}");
            }
        }
        Command::Sweep { config, common } => {
            let cfg = load_config(&config, &common)?;
            let mut out = open_out(&common, cfg.out.as_deref())?;
            run::run_sweep(&cfg, common.seed, common.workers, &mut out)?;
        }
        Command::Preset { name, common } => match presets::build(&name)? {
            Preset::Standard(mut cfg) => {
                if let Some(frac) = common.mesh_lambda_frac {
                    cfg.mesh_lambda_frac = frac;
                    cfg.validate()?;
                }
                let mut out = open_out(&common, cfg.out.as_deref())?;
                run::run_sweep(&cfg, common.seed, common.workers, &mut out)?;
            }
            Preset::FraunhoferTable {
                frequencies_hz,
                sizes_m,
            } => {
                let mut out = open_out(&common, None)?;
                write_fraunhofer_table(&frequencies_hz, &sizes_m, &mut out)?;
            }
        },
        Command::ValidateConfig { config } => {
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            ExperimentConfig::from_json(&text)?;
            println!("{}: OK", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
