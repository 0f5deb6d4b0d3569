use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dcs", version, about = "Energy-harvesting DCS simulator", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form failure lower bounds over a μ/τ grid.
    Bounds(BoundsArgs),
    /// Monte Carlo failure probability on synthetic SCCI signals.
    Mc(McArgs),
    /// Mean recovery error on sensor-log or compressible frames.
    Real(RealArgs),
    /// Split a mote log into per-sensor frames.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output CSV (stdout when omitted). A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file; entries act as flags and command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, env = "DCS_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, value_parser = positive_usize)]
    pub trials: Option<usize>,
    /// Relative error at or below which a sensor counts as recovered.
    #[arg(long, default_value_t = 1e-4, value_parser = positive_f64)]
    pub threshold: f64,
    #[arg(long = "max-iter", value_parser = positive_usize)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0.5, value_parser = spread)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e4, value_parser = positive_f64)]
    pub n: f64,
    #[arg(long, default_value_t = 1e3)]
    pub s: f64,
    #[arg(long, default_value_t = 800.0)]
    pub sc: f64,
    #[arg(long, default_value_t = 200.0)]
    pub si: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub tau: f64,
    /// Smallest μ/τ of the grid.
    #[arg(long, default_value_t = 1000.0, value_parser = positive_f64)]
    pub min: f64,
    #[arg(long, default_value_t = 20000.0, value_parser = positive_f64)]
    pub max: f64,
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McAxis {
    MuOverTau,
    NumSensors,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = McAxis::MuOverTau)]
    pub axis: McAxis,
    #[arg(long, default_value_t = 50, value_parser = positive_usize)]
    pub n: usize,
    /// Number of sensors (μ/τ axis only).
    #[arg(long, default_value_t = 2, value_parser = positive_usize)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub sc: usize,
    #[arg(long, default_value_t = 1)]
    pub si: usize,
    /// Harvest spread; defaults to 0.35 on the μ/τ axis and 0.8 on the K axis.
    #[arg(long, value_parser = spread)]
    pub rho: Option<f64>,
    /// Fixed μ/τ (K axis only).
    #[arg(long, default_value_t = 20.0, value_parser = positive_f64)]
    pub mu: f64,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "raw,cs,dcs")]
    pub schemes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RealAxis {
    PanelArea,
    NumSensors,
}

#[derive(Debug, Args)]
pub struct RealArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value_t = RealAxis::PanelArea)]
    pub axis: RealAxis,
    /// Mote log (whitespace-separated, Intel-lab layout).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Use generated compressible frames instead of a log.
    #[arg(long)]
    pub synthetic: bool,
    /// Sensor ids; defaults to 2,3 for panel area and 2,3,4,7,8,9,10,11 for K.
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<u32>>,
    #[arg(long, default_value = "temperature")]
    pub field: String,
    #[arg(long, default_value_t = 512, value_parser = positive_usize)]
    pub n: usize,
    /// Frames generated per sensor with --synthetic.
    #[arg(long, default_value_t = 32, value_parser = positive_usize)]
    pub frames: usize,
    /// Panel area in cm² (K axis only).
    #[arg(long, default_value_t = 40.0, value_parser = positive_f64)]
    pub area: f64,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Harvested power density range in W/cm².
    #[arg(long = "density-min", default_value_t = 5e-6, value_parser = positive_f64)]
    pub density_min: f64,
    #[arg(long = "density-max", default_value_t = 15e-6, value_parser = positive_f64)]
    pub density_max: f64,
    /// Harvest duration per slot in seconds.
    #[arg(long, default_value_t = 2.0, value_parser = positive_f64)]
    pub duration: f64,
    #[arg(long = "tx-power", default_value_t = 62.64e-3, value_parser = positive_f64)]
    pub tx_power: f64,
    #[arg(long, default_value_t = 250e3, value_parser = positive_f64)]
    pub rate: f64,
    #[arg(long, default_value_t = 16.0, value_parser = positive_f64)]
    pub bits: f64,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    /// Sensor ids to keep; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<u32>>,
    #[arg(long, default_value = "temperature")]
    pub field: String,
    #[arg(long, default_value_t = 512, value_parser = positive_usize)]
    pub n: usize,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be positive and finite".into())
    }
}

fn spread(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("must lie in (0, 1]".into())
    }
}
