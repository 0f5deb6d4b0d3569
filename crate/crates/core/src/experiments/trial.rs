use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, Forced, Scheme, SignalSource};
use super::seed::{derive_seed, Stream};
use crate::energy::{allocate_measurements, BatteryState};
use crate::error::Result;
use crate::model::{generate_scci, Basis};
use crate::sensing::{draw_gaussian_operator, draw_subsampling_operator, effective_matrix, measure, SensingOperator};
use crate::solver::{basis_pursuit, recover_joint, relative_error};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    /// All sensors reconstructed within the threshold.
    pub success: bool,
    /// Relative recovery error per sensor; sensors without data score 1.
    pub errors: Vec<f64>,
    /// Solver convergence per solve (empty for raw).
    pub converged: Vec<bool>,
}

impl SchemeOutcome {
    pub fn mean_error(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub harvested: Vec<f64>,
    pub measurements: Vec<usize>,
    pub schemes: Vec<SchemeOutcome>,
}

impl TrialOutcome {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeOutcome> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

fn broadcast<T: Copy>(v: &[T], k: usize) -> T {
    if v.len() == 1 {
        v[0]
    } else {
        v[k]
    }
}

/// Error of an estimate; a zero reference falls back to the absolute
/// squared error.
fn score(estimate: &DVector<f64>, reference: &DVector<f64>) -> f64 {
    relative_error(estimate, reference).unwrap_or_else(|_| estimate.norm_squared())
}

struct Sensed {
    matrix: DMatrix<f64>,
    y: DVector<f64>,
}

/// One slot of the pipeline: harvest → budget → allocation → sensing →
/// recovery for every configured scheme → scoring.
pub fn run_trial(config: &ExperimentConfig, grid_index: usize, trial: usize) -> Result<TrialOutcome> {
    config.validate()?;
    let k_sensors = config.sensors;
    let n = config.signal.n();
    let (harvest, tau) = config.energy.resolve()?;
    let seed = |stream| derive_seed(config.base_seed, grid_index, trial, stream);

    let mut harvested = Vec::with_capacity(k_sensors);
    let mut measurements = Vec::with_capacity(k_sensors);
    for k in 0..k_sensors {
        let energy = match &config.forced {
            Some(Forced::Harvest(v)) => broadcast(v, k),
            _ => harvest.sample(&mut ChaCha8Rng::seed_from_u64(seed(Stream::Harvest(k)))),
        };
        let mut battery = BatteryState::new(config.battery_capacity)?;
        let budget = battery.update_budget(energy, 0.0)?;
        let m = match &config.forced {
            Some(Forced::Measurements(v)) => broadcast(v, k).min(n),
            _ => allocate_measurements(budget, tau, n),
        };
        if !matches!(config.forced, Some(Forced::Measurements(_))) {
            // spending m·τ must respect the slot budget
            battery.update_budget(0.0, m as f64 * tau)?;
        }
        harvested.push(energy);
        measurements.push(m);
    }

    let (signals, basis) = match &config.signal {
        SignalSource::Synthetic { .. } => {
            let params = config.signal.scci(k_sensors).expect("synthetic")?;
            let basis = Basis::identity(n);
            (generate_scci(&params, &basis, seed(Stream::Signal))?.signals, basis)
        }
        SignalSource::Frames(set) => {
            let frame = &set.frames[trial % set.len()];
            (frame[..k_sensors].to_vec(), Basis::dct(n))
        }
    };

    let needs_solver = config.schemes.iter().any(|s| *s != Scheme::Raw);
    let mut sensed: Vec<Option<Sensed>> = Vec::with_capacity(k_sensors);
    for k in 0..k_sensors {
        let m = measurements[k];
        if m == 0 || !needs_solver {
            sensed.push(None);
            continue;
        }
        let op_seed = seed(Stream::Operator(k));
        let op: SensingOperator = match config.signal {
            SignalSource::Synthetic { .. } => draw_gaussian_operator(m, n, op_seed)?,
            SignalSource::Frames(_) => draw_subsampling_operator(m, n, op_seed)?,
        };
        sensed.push(Some(Sensed {
            matrix: effective_matrix(&op, &basis)?,
            y: measure(&op, &signals[k])?,
        }));
    }

    let threshold = config.success_threshold;
    let mut schemes = Vec::with_capacity(config.schemes.len());
    for &scheme in &config.schemes {
        let outcome = match scheme {
            Scheme::Raw => {
                let errors: Vec<f64> = measurements.iter().map(|&m| if m >= n { 0.0 } else { 1.0 }).collect();
                SchemeOutcome {
                    scheme,
                    success: measurements.iter().all(|&m| m >= n),
                    errors,
                    converged: Vec::new(),
                }
            }
            Scheme::Cs => {
                let mut errors = Vec::with_capacity(k_sensors);
                let mut converged = Vec::with_capacity(k_sensors);
                let mut success = true;
                for (k, s) in sensed.iter().enumerate() {
                    match s {
                        None => {
                            errors.push(score(&DVector::zeros(n), &signals[k]));
                            success = false;
                        }
                        Some(s) => {
                            let r = basis_pursuit(&s.matrix, &s.y, &config.solver)?;
                            let err = score(&basis.synthesize(&r.coefficients)?, &signals[k]);
                            success &= err <= threshold;
                            errors.push(err);
                            converged.push(r.converged);
                        }
                    }
                }
                SchemeOutcome {
                    scheme,
                    success,
                    errors,
                    converged,
                }
            }
            Scheme::Dcs => {
                let active: Vec<usize> = (0..k_sensors).filter(|&k| sensed[k].is_some()).collect();
                let mut errors: Vec<f64> = (0..k_sensors).map(|k| score(&DVector::zeros(n), &signals[k])).collect();
                let mut success = active.len() == k_sensors;
                let mut converged = Vec::new();
                if active.is_empty() {
                    success = false;
                } else {
                    let a = active.iter().map(|&k| sensed[k].as_ref().unwrap().matrix.clone()).collect();
                    let y: Vec<_> = active.iter().map(|&k| sensed[k].as_ref().unwrap().y.clone()).collect();
                    let r = recover_joint(a, &y, &config.solver)?;
                    converged.push(r.result.converged);
                    for (j, &k) in active.iter().enumerate() {
                        let err = score(&basis.synthesize(&r.signals[j])?, &signals[k]);
                        success &= err <= threshold;
                        errors[k] = err;
                    }
                }
                SchemeOutcome {
                    scheme,
                    success,
                    errors,
                    converged,
                }
            }
        };
        schemes.push(outcome);
    }

    Ok(TrialOutcome {
        harvested,
        measurements,
        schemes,
    })
}
