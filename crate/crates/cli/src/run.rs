use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dcs_core::bounds::BoundInputs;
use dcs_core::energy::RadioModel;
use dcs_core::experiments::{
    bounds_curve, linear_grid, sweep_k_real, sweep_mu_over_tau, sweep_num_sensors, sweep_panel_area, EnergySetup,
    ExperimentConfig, Metric, Scheme, DEFAULT_REAL_TRIALS, DEFAULT_SYNTHETIC_TRIALS, FRAME_MAX_ITERATIONS,
};
use dcs_core::model::{
    generate_compressible, ingest_sensor_log, windowize, write_frames_csv, CompressibleParams, FrameSet, LogField,
    SensorSeries,
};
use dcs_core::solver::SolverOptions;

use crate::args::{BoundsArgs, Common, IngestArgs, McArgs, McAxis, RealArgs, RealAxis, RunArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<dcs_core::Error> for Failure {
    fn from(e: dcs_core::Error) -> Self {
        use dcs_core::Error::*;
        let msg = e.to_string();
        match e {
            Parameter(_) => Failure::Usage(msg),
            Input(_) | MissingSensor(_) | DimensionMismatch { .. } | UndefinedMetric(_) => Failure::Input(msg),
            Accounting(_) | Numeric(_) => Failure::Numeric(msg),
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

/// Resolved settings in flag order, as written to the manifest.
struct Manifest {
    subcommand: &'static str,
    entries: Vec<(&'static str, String)>,
}

impl Manifest {
    fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            entries: Vec::new(),
        }
    }

    fn set(&mut self, key: &'static str, value: impl ToString) -> &mut Self {
        self.entries.push((key, value.to_string()));
        self
    }

    fn list<T: ToString>(&mut self, key: &'static str, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(T::to_string).collect();
        self.set(key, joined.join(","))
    }

    fn render(&self, output: &Path) -> String {
        let mut s = format!(
            "# subcommand: {}\n# version: {}\n# output: {}\n",
            self.subcommand,
            env!("CARGO_PKG_VERSION"),
            output.display()
        );
        for (k, v) in &self.entries {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

/// Writes the CSV to `--out` (plus its manifest) or to stdout.
fn emit(common: &Common, manifest: &Manifest, csv: &[u8]) -> Outcome {
    match &common.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| io_failure(path, e))?;
            let mpath = manifest_path(path);
            fs::write(&mpath, manifest.render(path)).map_err(|e| io_failure(&mpath, e))
        }
        None => io::stdout()
            .write_all(csv)
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Numeric(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn run_settings(manifest: &mut Manifest, run: &RunArgs, trials: usize, max_iter: usize) {
    manifest
        .set("seed", run.seed)
        .set("workers", run.workers)
        .set("trials", trials)
        .set("threshold", run.threshold)
        .set("max-iter", max_iter);
}

pub fn bounds(args: &BoundsArgs) -> Outcome {
    if args.min > args.max {
        return Err(Failure::Usage(format!("--min {} exceeds --max {}", args.min, args.max)));
    }
    let template = BoundInputs {
        mu: args.min * args.tau,
        rho: args.rho,
        n: args.n,
        tau: args.tau,
        s: args.s,
        s_common: args.sc,
        s_innov: args.si,
    };
    template.validate()?;
    let curve = bounds_curve(&template, &linear_grid(args.min, args.max, args.points))?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv).expect("in-memory write");

    let mut m = Manifest::new("bounds");
    m.set("rho", args.rho)
        .set("n", args.n)
        .set("s", args.s)
        .set("sc", args.sc)
        .set("si", args.si)
        .set("tau", args.tau)
        .set("min", args.min)
        .set("max", args.max)
        .set("points", args.points);
    emit(&args.common, &m, &csv)
}

fn parse_schemes(names: &[String]) -> Result<Vec<Scheme>, Failure> {
    let mut schemes = Vec::new();
    for name in names {
        let s: Scheme = name.parse()?;
        if !schemes.contains(&s) {
            schemes.push(s);
        }
    }
    if schemes.is_empty() {
        return Err(Failure::Usage("no schemes selected".into()));
    }
    Ok(schemes)
}

fn sensor_counts(grid: &[f64]) -> Result<Vec<usize>, Failure> {
    grid.iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Failure::Usage(format!("sensor count {v} is not a positive integer")))
            }
        })
        .collect()
}

fn positive_grid(grid: &[f64]) -> Outcome {
    match grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(Failure::Usage(format!("grid value {v} must be positive"))),
        None if grid.is_empty() => Err(Failure::Usage("grid is empty".into())),
        None => Ok(()),
    }
}

fn step_grid(lo: usize, hi: usize, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(|v| v as f64).collect()
}

pub fn mc(args: &McArgs) -> Outcome {
    let schemes = parse_schemes(&args.schemes)?;
    let rho = args.rho.unwrap_or(match args.axis {
        McAxis::MuOverTau => 0.35,
        McAxis::NumSensors => 0.8,
    });
    let grid = args.grid.clone().unwrap_or_else(|| match args.axis {
        McAxis::MuOverTau => step_grid(16, 44, 2),
        McAxis::NumSensors => step_grid(2, 10, 1),
    });
    positive_grid(&grid)?;
    let trials = args.run.trials.unwrap_or(DEFAULT_SYNTHETIC_TRIALS);
    let max_iter = args.run.max_iter.unwrap_or(SolverOptions::default().max_iterations);

    let mu = match args.axis {
        McAxis::MuOverTau => grid[0],
        McAxis::NumSensors => args.mu,
    };
    let mut config = ExperimentConfig::synthetic(args.n, args.k, args.sc, args.si, mu, rho);
    config.schemes = schemes.clone();
    config.trials = trials;
    config.base_seed = args.run.seed;
    config.success_threshold = args.run.threshold;
    config.solver.max_iterations = max_iter;
    config.validate()?;

    let result = match args.axis {
        McAxis::MuOverTau => with_workers(args.run.workers, || sweep_mu_over_tau(&config, &grid))?,
        McAxis::NumSensors => {
            let ks = sensor_counts(&grid)?;
            with_workers(args.run.workers, || sweep_num_sensors(&config, &ks))?
        }
    }?;
    let mut csv = Vec::new();
    result
        .write_csv(&mut csv, Metric::FailureProbability)
        .expect("in-memory write");

    let mut m = Manifest::new("mc");
    m.set(
        "axis",
        match args.axis {
            McAxis::MuOverTau => "mu-over-tau",
            McAxis::NumSensors => "num-sensors",
        },
    )
    .set("n", args.n)
    .set("k", args.k)
    .set("sc", args.sc)
    .set("si", args.si)
    .set("rho", rho)
    .set("mu", args.mu)
    .list("grid", &grid)
    .list("schemes", &schemes.iter().map(|s| s.name()).collect::<Vec<_>>());
    run_settings(&mut m, &args.run, trials, max_iter);
    emit(&args.common, &m, &csv)
}

fn read_log(path: &Path, ids: &[u32], field: LogField) -> Result<Vec<SensorSeries>, Failure> {
    let file = File::open(path).map_err(|e| io_failure(path, e))?;
    let report = ingest_sensor_log(BufReader::new(file), ids, field).map_err(|e| match e {
        dcs_core::Error::Input(msg) => Failure::Input(format!("{}: {msg}", path.display())),
        other => other.into(),
    })?;
    if report.skipped > 0 {
        eprintln!("{}: skipped {} malformed lines", path.display(), report.skipped);
    }
    let mut series = report.series;
    Ok(if ids.is_empty() {
        series.into_values().collect()
    } else {
        ids.iter().filter_map(|id| series.remove(id)).collect()
    })
}

pub fn real(args: &RealArgs) -> Outcome {
    let field: LogField = args.field.parse()?;
    let ids = args.ids.clone().unwrap_or_else(|| match args.axis {
        RealAxis::PanelArea => vec![2, 3],
        RealAxis::NumSensors => vec![2, 3, 4, 7, 8, 9, 10, 11],
    });
    if ids.is_empty() {
        return Err(Failure::Usage("--ids is empty".into()));
    }
    let grid = args.grid.clone().unwrap_or_else(|| match args.axis {
        RealAxis::PanelArea => step_grid(6, 50, 4),
        RealAxis::NumSensors => step_grid(1, ids.len(), 1),
    });
    positive_grid(&grid)?;
    let trials = args.run.trials.unwrap_or(DEFAULT_REAL_TRIALS);
    let max_iter = args.run.max_iter.unwrap_or(FRAME_MAX_ITERATIONS);

    let frames = match &args.data {
        Some(path) => {
            let series = read_log(path, &ids, field)?;
            FrameSet::from_series(&series, args.n)?
        }
        None => {
            let params = CompressibleParams {
                n: args.n,
                sensors: ids.len(),
                frames: args.frames,
                ..CompressibleParams::default()
            };
            let mut set = generate_compressible(&params, args.run.seed)?;
            set.sensor_ids = ids.clone();
            set
        }
    };
    if frames.is_empty() {
        return Err(Failure::Input(format!("no complete {}-sample frames shared by all sensors", args.n)));
    }

    let mut config = ExperimentConfig::frames(Arc::new(frames), ids.len(), args.area);
    config.energy = EnergySetup::Panel {
        area_cm2: args.area,
        density_min: args.density_min,
        density_max: args.density_max,
        harvest_duration: args.duration,
        radio: RadioModel {
            tx_power: args.tx_power,
            data_rate: args.rate,
            bits_per_measurement: args.bits,
        },
    };
    config.trials = trials;
    config.base_seed = args.run.seed;
    config.success_threshold = args.run.threshold;
    config.solver.max_iterations = max_iter;
    config.validate()?;

    let result = match args.axis {
        RealAxis::PanelArea => with_workers(args.run.workers, || sweep_panel_area(&config, &grid))?,
        RealAxis::NumSensors => {
            let ks = sensor_counts(&grid)?;
            with_workers(args.run.workers, || sweep_k_real(&config, &ks))?
        }
    }?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv, Metric::MeanError).expect("in-memory write");

    let mut m = Manifest::new("real");
    m.set(
        "axis",
        match args.axis {
            RealAxis::PanelArea => "panel-area",
            RealAxis::NumSensors => "num-sensors",
        },
    );
    match &args.data {
        Some(p) => m.set("data", p.display()),
        None => m.set("synthetic", true).set("frames", args.frames),
    };
    m.list("ids", &ids)
        .set("field", field.name())
        .set("n", args.n)
        .set("area", args.area)
        .list("grid", &grid)
        .set("density-min", args.density_min)
        .set("density-max", args.density_max)
        .set("duration", args.duration)
        .set("tx-power", args.tx_power)
        .set("rate", args.rate)
        .set("bits", args.bits);
    run_settings(&mut m, &args.run, trials, max_iter);
    emit(&args.common, &m, &csv)
}

pub fn ingest(args: &IngestArgs) -> Outcome {
    let field: LogField = args.field.parse()?;
    let ids = args.ids.clone().unwrap_or_default();
    let series = read_log(&args.data, &ids, field)?;
    let mut per_sensor = Vec::with_capacity(series.len());
    for s in &series {
        per_sensor.push((s.sensor_id, windowize(s, args.n)?));
    }
    let total: usize = per_sensor.iter().map(|(_, f)| f.len()).sum();
    if total == 0 {
        eprintln!("warning: {} produced no complete {}-sample frames", args.data.display(), args.n);
    }
    let mut csv = Vec::new();
    write_frames_csv(&mut csv, args.n, &per_sensor).expect("in-memory write");

    let mut m = Manifest::new("ingest");
    m.set("data", args.data.display());
    if !ids.is_empty() {
        m.list("ids", &ids);
    }
    m.set("field", field.name()).set("n", args.n);
    emit(&args.common, &m, &csv)
}
