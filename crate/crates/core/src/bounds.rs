//! Closed-form lower bounds on the probability of incorrect reconstruction
//! for two sensors with independent uniform harvests, and a Monte Carlo
//! estimator of the same energy events.
//!
//! Demands outside the support of the harvest law clamp to 0 (always
//! affordable) or 1 (never affordable).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Overmeasuring factor `c(s, n) = s log₂(1 + n/s)`, with `c(0, n) = 0`.
pub fn overmeasuring(s: f64, n: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * (1.0 + n / s).log2()
    }
}

/// `ŝ = 2s' − s'²/n`.
pub fn sparsity_hat(s_innov: f64, n: f64) -> f64 {
    2.0 * s_innov - s_innov * s_innov / n
}

/// `s̃ = s_c' + 2s' − 2 s_c' s'/n − s'²/n + s_c' s'²/n²`.
pub fn sparsity_tilde(s_common: f64, s_innov: f64, n: f64) -> f64 {
    let (sc, si) = (s_common, s_innov);
    sc + 2.0 * si - 2.0 * sc * si / n - si * si / n + sc * si * si / (n * n)
}

/// Bound parameters. `tau` may be 1 with `mu` in units of τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub mu: f64,
    pub rho: f64,
    pub n: f64,
    pub tau: f64,
    /// Per-sensor sparsity for CS.
    pub s: f64,
    pub s_common: f64,
    pub s_innov: f64,
}

impl BoundInputs {
    /// Two-sensor setting of the canonical bound curves.
    pub fn reference(mu_over_tau: f64) -> Self {
        Self {
            mu: mu_over_tau,
            rho: 0.5,
            n: 1e4,
            tau: 1.0,
            s: 1e3,
            s_common: 800.0,
            s_innov: 200.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Parameter(format!("rho must lie in (0, 1], got {}", self.rho)));
        }
        if !(self.mu > 0.0 && self.tau > 0.0 && self.n > 0.0) {
            return Err(Error::Parameter("mu, tau and n must be positive".into()));
        }
        for s in [self.s, self.s_common, self.s_innov] {
            if !(0.0..=self.n).contains(&s) {
                return Err(Error::Parameter(format!("sparsity {s} outside [0, {}]", self.n)));
            }
        }
        Ok(())
    }

    pub fn p_raw(&self) -> f64 {
        p_raw_lower_bound(self.mu, self.rho, self.n, self.tau)
    }

    pub fn p_cs(&self) -> f64 {
        p_cs_lower_bound(self.mu, self.rho, self.s, self.n, self.tau)
    }

    pub fn p_dcs(&self) -> f64 {
        p_dcs_lower_bound(self.mu, self.rho, self.s_common, self.s_innov, self.n, self.tau)
    }
}

/// `1 − P(ξ₁ ≥ d, ξ₂ ≥ d)` for two independent uniform harvests.
fn per_sensor_shortfall(mu: f64, rho: f64, demand: f64) -> f64 {
    if demand <= (1.0 - rho) * mu {
        0.0
    } else if demand >= (1.0 + rho) * mu {
        1.0
    } else {
        let q = ((1.0 + rho) * mu - demand) / (2.0 * rho * mu);
        1.0 - q * q
    }
}

/// Raw gathering: each sensor must afford all `n` samples.
pub fn p_raw_lower_bound(mu: f64, rho: f64, n: f64, tau: f64) -> f64 {
    per_sensor_shortfall(mu, rho, n * tau)
}

/// Per-sensor CS with demand `c(s, n) τ`.
pub fn p_cs_lower_bound(mu: f64, rho: f64, s: f64, n: f64, tau: f64) -> f64 {
    per_sensor_shortfall(mu, rho, overmeasuring(s, n) * tau)
}

/// Joint measurement count `m' = c(ŝ, n) + c(s̃, n)`.
pub fn dcs_sum_demand(s_common: f64, s_innov: f64, n: f64) -> f64 {
    overmeasuring(sparsity_hat(s_innov, n), n) + overmeasuring(sparsity_tilde(s_common, s_innov, n), n)
}

/// `P(ξ₁ + ξ₂ < m'τ)` for the sum of two uniforms (triangular law).
pub fn p_dcs_lower_bound(mu: f64, rho: f64, s_common: f64, s_innov: f64, n: f64, tau: f64) -> f64 {
    sum_shortfall(mu, rho, dcs_sum_demand(s_common, s_innov, n) * tau)
}

fn sum_shortfall(mu: f64, rho: f64, demand: f64) -> f64 {
    let lo = 2.0 * (1.0 - rho) * mu;
    let hi = 2.0 * (1.0 + rho) * mu;
    let width = 2.0 * rho * mu;
    if demand <= lo {
        0.0
    } else if demand >= hi {
        1.0
    } else if demand <= 2.0 * mu {
        0.5 * ((demand - lo) / width).powi(2)
    } else {
        1.0 - 0.5 * ((hi - demand) / width).powi(2)
    }
}

/// Energy event whose failure probability is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyDemand {
    /// Fails unless every sensor harvests at least `per_sensor`.
    PerSensor { sensors: usize, per_sensor: f64 },
    /// Fails unless the total harvest reaches `total`.
    Sum { sensors: usize, total: f64 },
    /// Both conditions at once.
    Joint { sensors: usize, per_sensor: f64, total: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_counts(failures: usize, trials: usize) -> Self {
        let p = failures as f64 / trials as f64;
        Self {
            probability: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Monte Carlo failure probability of `demand` under i.i.d. uniform
/// harvests on `[(1 − ρ)μ, (1 + ρ)μ]`.
pub fn mc_energy_feasibility(demand: EnergyDemand, mu: f64, rho: f64, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) || !(mu > 0.0) {
        return Err(Error::Parameter(format!("invalid harvest law mu={mu}, rho={rho}")));
    }
    let (sensors, per_sensor, total) = match demand {
        EnergyDemand::PerSensor { sensors, per_sensor } => (sensors, per_sensor, f64::NEG_INFINITY),
        EnergyDemand::Sum { sensors, total } => (sensors, f64::NEG_INFINITY, total),
        EnergyDemand::Joint { sensors, per_sensor, total } => (sensors, per_sensor, total),
    };
    if sensors == 0 {
        return Err(Error::Parameter("at least one sensor is required".into()));
    }
    let (lo, hi) = ((1.0 - rho) * mu, (1.0 + rho) * mu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let mut ok = true;
        let mut sum = 0.0;
        for _ in 0..sensors {
            let xi = rng.random_range(lo..=hi);
            ok &= xi >= per_sensor;
            sum += xi;
        }
        if !(ok && sum >= total) {
            failures += 1;
        }
    }
    Ok(McEstimate::from_counts(failures, trials))
}
