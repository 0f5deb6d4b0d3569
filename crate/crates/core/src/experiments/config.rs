use std::sync::Arc;

use crate::energy::{per_measurement_energy, HarvestModel, RadioModel};
use crate::error::{Error, Result};
use crate::model::{FrameSet, ScciParams};
use crate::solver::{SolverOptions, DEFAULT_SUCCESS_THRESHOLD};

/// Default Monte Carlo sizes.
pub const DEFAULT_SYNTHETIC_TRIALS: usize = 1000;
/// Iteration cap for frame data. Compressible signals rarely meet the
/// stopping rule, and the recovery error settles long before it.
pub const FRAME_MAX_ITERATIONS: usize = 1000;
pub const DEFAULT_REAL_TRIALS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Every sensor ships all n samples; no recovery.
    Raw,
    /// Independent ℓ1 recovery per sensor.
    Cs,
    /// Joint ℓ1 recovery over the extended system.
    Dcs,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Raw => "raw",
            Scheme::Cs => "cs",
            Scheme::Dcs => "dcs",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Scheme::Raw),
            "cs" => Ok(Scheme::Cs),
            "dcs" => Ok(Scheme::Dcs),
            other => Err(Error::Parameter(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Where the per-trial signals come from. Synthetic ensembles are sensed
/// with Gaussian operators in the identity basis; frames are subsampled and
/// recovered in the DCT basis.
#[derive(Debug, Clone)]
pub enum SignalSource {
    Synthetic {
        n: usize,
        s_common: usize,
        s_innov: usize,
    },
    Frames(Arc<FrameSet>),
}

impl SignalSource {
    pub fn n(&self) -> usize {
        match self {
            SignalSource::Synthetic { n, .. } => *n,
            SignalSource::Frames(f) => f.n,
        }
    }

    pub(crate) fn scci(&self, sensors: usize) -> Option<Result<ScciParams>> {
        match self {
            SignalSource::Synthetic { n, s_common, s_innov } => {
                Some(ScciParams::uniform(*n, sensors, *s_common, *s_innov))
            }
            SignalSource::Frames(_) => None,
        }
    }
}

/// Per-slot harvest setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergySetup {
    /// Energies in units of τ: harvest uniform on `[(1−ρ)μ, (1+ρ)μ]·τ`.
    Normalized { mu_over_tau: f64, rho: f64 },
    /// Solar panel with a uniform power density (W/cm²) and a radio that
    /// fixes τ.
    Panel {
        area_cm2: f64,
        density_min: f64,
        density_max: f64,
        harvest_duration: f64,
        radio: RadioModel,
    },
}

impl EnergySetup {
    /// Default panel: 5–15 µW/cm² and 2 s of harvesting per slot.
    pub fn panel(area_cm2: f64) -> Self {
        EnergySetup::Panel {
            area_cm2,
            density_min: 5e-6,
            density_max: 15e-6,
            harvest_duration: 2.0,
            radio: RadioModel::default(),
        }
    }

    /// Harvest model and the energy τ of one measurement.
    pub fn resolve(&self) -> Result<(HarvestModel, f64)> {
        match *self {
            EnergySetup::Normalized { mu_over_tau, rho } => Ok((HarvestModel::new(mu_over_tau, rho, 1.0)?, 1.0)),
            EnergySetup::Panel {
                area_cm2,
                density_min,
                density_max,
                harvest_duration,
                radio,
            } => Ok((
                HarvestModel::panel(area_cm2, density_min, density_max, harvest_duration)?,
                per_measurement_energy(&radio)?,
            )),
        }
    }
}

/// Bypasses the harvest draw (test and diagnostic hook). A single value is
/// broadcast to every sensor.
#[derive(Debug, Clone, PartialEq)]
pub enum Forced {
    Harvest(Vec<f64>),
    Measurements(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub sensors: usize,
    pub signal: SignalSource,
    pub energy: EnergySetup,
    /// Battery capacity in the energy units of [`EnergySetup`].
    pub battery_capacity: f64,
    pub solver: SolverOptions,
    pub success_threshold: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub forced: Option<Forced>,
}

impl ExperimentConfig {
    /// Synthetic two-sensor setting with N(0,1) amplitudes and operators.
    pub fn synthetic(n: usize, sensors: usize, s_common: usize, s_innov: usize, mu_over_tau: f64, rho: f64) -> Self {
        Self {
            schemes: vec![Scheme::Raw, Scheme::Cs, Scheme::Dcs],
            sensors,
            signal: SignalSource::Synthetic { n, s_common, s_innov },
            energy: EnergySetup::Normalized { mu_over_tau, rho },
            battery_capacity: f64::INFINITY,
            solver: SolverOptions::default(),
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
            trials: DEFAULT_SYNTHETIC_TRIALS,
            base_seed: 1,
            forced: None,
        }
    }

    /// Frame-based setting with a solar panel of `area_cm2`.
    pub fn frames(frames: Arc<FrameSet>, sensors: usize, area_cm2: f64) -> Self {
        Self {
            schemes: vec![Scheme::Cs, Scheme::Dcs],
            sensors,
            signal: SignalSource::Frames(frames),
            energy: EnergySetup::panel(area_cm2),
            battery_capacity: f64::INFINITY,
            solver: SolverOptions {
                max_iterations: FRAME_MAX_ITERATIONS,
                ..SolverOptions::default()
            },
            success_threshold: DEFAULT_SUCCESS_THRESHOLD,
            trials: DEFAULT_REAL_TRIALS,
            base_seed: 1,
            forced: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Parameter("at least one scheme is required".into()));
        }
        if self.sensors == 0 {
            return Err(Error::Parameter("at least one sensor is required".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::Parameter("success threshold must be positive".into()));
        }
        if !(self.battery_capacity > 0.0) {
            return Err(Error::Parameter("battery capacity must be positive".into()));
        }
        self.solver.validate()?;
        self.energy.resolve()?;
        match &self.signal {
            SignalSource::Synthetic { .. } => {
                self.signal.scci(self.sensors).expect("synthetic")?;
            }
            SignalSource::Frames(f) => {
                if f.is_empty() {
                    return Err(Error::Input("no frames available".into()));
                }
                if self.sensors > f.sensor_ids.len() {
                    return Err(Error::Parameter(format!(
                        "{} sensors requested but only {} available",
                        self.sensors,
                        f.sensor_ids.len()
                    )));
                }
            }
        }
        if let Some(forced) = &self.forced {
            let len = match forced {
                Forced::Harvest(v) => v.len(),
                Forced::Measurements(v) => v.len(),
            };
            if len != 1 && len != self.sensors {
                return Err(Error::Parameter("forced values must be scalar or per sensor".into()));
            }
        }
        Ok(())
    }

    pub fn with_mu_over_tau(&self, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match &mut c.energy {
            EnergySetup::Normalized { mu_over_tau, .. } => *mu_over_tau = value,
            EnergySetup::Panel { .. } => {
                return Err(Error::Parameter("mu/tau sweep needs a normalized energy setup".into()))
            }
        }
        Ok(c)
    }

    pub fn with_panel_area(&self, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match &mut c.energy {
            EnergySetup::Panel { area_cm2, .. } => *area_cm2 = value,
            EnergySetup::Normalized { .. } => {
                return Err(Error::Parameter("panel-area sweep needs a panel energy setup".into()))
            }
        }
        Ok(c)
    }

    pub fn with_sensors(&self, k: usize) -> Result<Self> {
        let mut c = self.clone();
        c.sensors = k;
        if let SignalSource::Frames(f) = &self.signal {
            c.signal = SignalSource::Frames(Arc::new(f.take_sensors(k)?));
        }
        Ok(c)
    }
}
