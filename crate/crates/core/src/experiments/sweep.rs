use std::io::Write;

use rayon::prelude::*;

use super::config::{EnergySetup, ExperimentConfig, Scheme, SignalSource};
use super::trial::{run_trial, TrialOutcome};
use crate::bounds::BoundInputs;
use crate::error::{Error, Result};
use crate::report::fmt_num;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    MuOverTau,
    NumSensors,
    PanelArea,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::MuOverTau => "mu_over_tau",
            SweepAxis::NumSensors => "k",
            SweepAxis::PanelArea => "area_cm2",
        }
    }
}

/// Aggregate of one scheme at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub failures: usize,
    pub failure_probability: f64,
    /// `sqrt(p̂ (1 − p̂) / trials)`.
    pub failure_std_error: f64,
    /// Mean over trials of the sensor-averaged relative error.
    pub mean_error: f64,
    pub error_std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub trials: usize,
    pub schemes: Vec<SchemeSummary>,
}

impl SweepPoint {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub schemes: Vec<Scheme>,
    pub points: Vec<SweepPoint>,
}

/// What a CSV reports per scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    FailureProbability,
    MeanError,
}

impl SweepResult {
    /// Failure-probability curve of one scheme as `(value, p̂, se)`.
    pub fn failure_curve(&self, scheme: Scheme) -> Vec<(f64, f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.scheme(scheme).map(|s| (p.value, s.failure_probability, s.failure_std_error)))
            .collect()
    }

    pub fn error_curve(&self, scheme: Scheme) -> Vec<(f64, f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.scheme(scheme).map(|s| (p.value, s.mean_error, s.error_std_error)))
            .collect()
    }

    /// Smallest grid value whose failure probability is at most `target`.
    pub fn first_below(&self, scheme: Scheme, target: f64) -> Option<f64> {
        self.failure_curve(scheme).into_iter().find(|(_, p, _)| *p <= target).map(|(v, _, _)| v)
    }

    /// Smallest grid value whose mean error is at most `target`.
    pub fn first_error_below(&self, scheme: Scheme, target: f64) -> Option<f64> {
        self.error_curve(scheme).into_iter().find(|(_, e, _)| *e <= target).map(|(v, _, _)| v)
    }

    pub fn write_csv<W: Write>(&self, mut out: W, metric: Metric) -> std::io::Result<()> {
        let (value, se) = match metric {
            Metric::FailureProbability => ("p", "se"),
            Metric::MeanError => ("err", "se"),
        };
        let mut header = vec![self.axis.column().to_string()];
        for s in &self.schemes {
            header.push(format!("{value}_{}", s.name()));
            header.push(format!("{se}_{}", s.name()));
        }
        header.push("trials".into());
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let mut row = vec![fmt_num(p.value)];
            for s in &p.schemes {
                let (v, e) = match metric {
                    Metric::FailureProbability => (s.failure_probability, s.failure_std_error),
                    Metric::MeanError => (s.mean_error, s.error_std_error),
                };
                row.push(fmt_num(v));
                row.push(fmt_num(e));
            }
            row.push(p.trials.to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Runs all trials of one grid point. Trials execute on the current rayon
/// pool; outcomes are collected in trial order so aggregation does not
/// depend on the number of workers.
pub fn run_point(config: &ExperimentConfig, grid_index: usize) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, grid_index, t))
        .collect()
}

pub fn summarize(schemes: &[Scheme], value: f64, outcomes: &[TrialOutcome]) -> SweepPoint {
    let trials = outcomes.len();
    let tf = trials as f64;
    let summaries = schemes
        .iter()
        .map(|&scheme| {
            let mut failures = 0;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for o in outcomes {
                let s = o.scheme(scheme).expect("scheme evaluated in every trial");
                if !s.success {
                    failures += 1;
                }
                let e = s.mean_error();
                sum += e;
                sum_sq += e * e;
            }
            let p = failures as f64 / tf;
            let mean = sum / tf;
            let var = if trials > 1 {
                ((sum_sq - tf * mean * mean) / (tf - 1.0)).max(0.0)
            } else {
                0.0
            };
            SchemeSummary {
                scheme,
                failures,
                failure_probability: p,
                failure_std_error: (p * (1.0 - p) / tf).sqrt(),
                mean_error: mean,
                error_std_error: (var / tf).sqrt(),
            }
        })
        .collect();
    SweepPoint {
        value,
        trials,
        schemes: summaries,
    }
}

fn sweep<F>(config: &ExperimentConfig, axis: SweepAxis, grid: &[f64], at: F) -> Result<SweepResult>
where
    F: Fn(&ExperimentConfig, f64) -> Result<ExperimentConfig>,
{
    if grid.is_empty() {
        return Err(Error::Parameter("sweep grid is empty".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    for (i, &value) in grid.iter().enumerate() {
        let point_config = at(config, value)?;
        let outcomes = run_point(&point_config, i)?;
        points.push(summarize(&config.schemes, value, &outcomes));
    }
    Ok(SweepResult {
        axis,
        schemes: config.schemes.clone(),
        points,
    })
}

/// Failure probability versus mean harvest in units of τ.
pub fn sweep_mu_over_tau(config: &ExperimentConfig, grid: &[f64]) -> Result<SweepResult> {
    if !matches!(config.energy, EnergySetup::Normalized { .. }) {
        return Err(Error::Parameter("mu/tau sweep needs a normalized energy setup".into()));
    }
    sweep(config, SweepAxis::MuOverTau, grid, |c, v| c.with_mu_over_tau(v))
}

fn sensor_grid(ks: &[usize]) -> Vec<f64> {
    ks.iter().map(|&k| k as f64).collect()
}

/// Failure probability (or error) versus the number of sensors.
pub fn sweep_num_sensors(config: &ExperimentConfig, ks: &[usize]) -> Result<SweepResult> {
    sweep(config, SweepAxis::NumSensors, &sensor_grid(ks), |c, v| c.with_sensors(v as usize))
}

fn require_frames(config: &ExperimentConfig) -> Result<()> {
    match &config.signal {
        SignalSource::Frames(f) if !f.is_empty() => Ok(()),
        SignalSource::Frames(_) => Err(Error::Input("no frames available for the sweep".into())),
        SignalSource::Synthetic { .. } => Err(Error::Input("this sweep needs recorded or compressible frames".into())),
    }
}

/// Mean relative error versus solar panel area.
pub fn sweep_panel_area(config: &ExperimentConfig, areas: &[f64]) -> Result<SweepResult> {
    require_frames(config)?;
    sweep(config, SweepAxis::PanelArea, areas, |c, v| c.with_panel_area(v))
}

/// Mean relative error versus the number of sensors on frame data.
pub fn sweep_k_real(config: &ExperimentConfig, ks: &[usize]) -> Result<SweepResult> {
    require_frames(config)?;
    if let SignalSource::Frames(f) = &config.signal {
        if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > f.sensor_ids.len()) {
            return Err(Error::Parameter(format!(
                "K={k} outside the {} available sensors",
                f.sensor_ids.len()
            )));
        }
    }
    sweep_num_sensors(config, ks)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub mu_over_tau: f64,
    pub p_raw: f64,
    pub p_cs: f64,
    pub p_dcs: f64,
}

/// Closed-form bound curves over a μ/τ grid (no Monte Carlo).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsCurve {
    pub rows: Vec<BoundsRow>,
}

impl BoundsCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "mu_over_tau,p_raw,p_cs,p_dcs")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_num(r.mu_over_tau),
                fmt_num(r.p_raw),
                fmt_num(r.p_cs),
                fmt_num(r.p_dcs)
            )?;
        }
        Ok(())
    }
}

/// Evaluates the bounds at each μ/τ with τ = 1 and the remaining inputs
/// taken from `template`.
pub fn bounds_curve(template: &BoundInputs, grid: &[f64]) -> Result<BoundsCurve> {
    if grid.is_empty() {
        return Err(Error::Parameter("bounds grid is empty".into()));
    }
    let rows = grid
        .iter()
        .map(|&mu| {
            let b = BoundInputs {
                mu: mu * template.tau,
                ..*template
            };
            b.validate()?;
            Ok(BoundsRow {
                mu_over_tau: mu,
                p_raw: b.p_raw(),
                p_cs: b.p_cs(),
                p_dcs: b.p_dcs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsCurve { rows })
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}
