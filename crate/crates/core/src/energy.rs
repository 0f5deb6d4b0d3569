//! Slotted energy harvesting: uniform harvest model, battery budget
//! recursion, per-measurement cost and the full-budget allocation policy.
//!
//! Quantities are in SI units (W, J, s) unless a model is normalised, in
//! which case energies are expressed in multiples of the per-measurement
//! cost τ.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Harvested power uniform on `[(1 − ρ) μ, (1 + ρ) μ]`, accumulated over
/// `harvest_duration` seconds per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestModel {
    pub mean_power: f64,
    pub spread: f64,
    pub harvest_duration: f64,
}

impl HarvestModel {
    pub fn new(mean_power: f64, spread: f64, harvest_duration: f64) -> Result<Self> {
        let model = Self {
            mean_power,
            spread,
            harvest_duration,
        };
        model.validate()?;
        Ok(model)
    }

    /// Solar panel of `area_cm2` with power density uniform on
    /// `[density_min, density_max]` W/cm².
    pub fn panel(area_cm2: f64, density_min: f64, density_max: f64, harvest_duration: f64) -> Result<Self> {
        if !(area_cm2 > 0.0) || !(density_min >= 0.0) || !(density_max > density_min) {
            return Err(Error::Parameter(format!(
                "panel needs area > 0 and 0 <= density_min < density_max (area={area_cm2}, range=[{density_min}, {density_max}])"
            )));
        }
        let mid = 0.5 * (density_min + density_max);
        let half = 0.5 * (density_max - density_min);
        Self::new(area_cm2 * mid, half / mid, harvest_duration)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_power > 0.0 && self.mean_power.is_finite()) {
            return Err(Error::Parameter(format!("mean power must be positive, got {}", self.mean_power)));
        }
        if !(self.spread > 0.0 && self.spread <= 1.0) {
            return Err(Error::Parameter(format!("spread must lie in (0, 1], got {}", self.spread)));
        }
        if !(self.harvest_duration > 0.0 && self.harvest_duration.is_finite()) {
            return Err(Error::Parameter(format!(
                "harvest duration must be positive, got {}",
                self.harvest_duration
            )));
        }
        Ok(())
    }

    pub fn min_energy(&self) -> f64 {
        (1.0 - self.spread) * self.mean_power * self.harvest_duration
    }

    pub fn max_energy(&self) -> f64 {
        (1.0 + self.spread) * self.mean_power * self.harvest_duration
    }

    /// Energy harvested in one slot for a given RNG.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lo = (1.0 - self.spread) * self.mean_power;
        let hi = (1.0 + self.spread) * self.mean_power;
        rng.random_range(lo..=hi) * self.harvest_duration
    }
}

/// One slot's harvested energy, deterministic in `seed`.
pub fn draw_harvest(model: &HarvestModel, seed: u64) -> Result<f64> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(model.sample(&mut rng))
}

/// Battery bookkeeping for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryState {
    pub capacity: f64,
    pub cumulative_harvested: f64,
    pub cumulative_consumed: f64,
    budget: f64,
}

impl BatteryState {
    pub fn new(capacity: f64) -> Result<Self> {
        if !(capacity > 0.0) {
            return Err(Error::Parameter(format!("battery capacity must be positive, got {capacity}")));
        }
        Ok(Self {
            capacity,
            cumulative_harvested: 0.0,
            cumulative_consumed: 0.0,
            budget: 0.0,
        })
    }

    /// Budget available in the current slot.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Advances one slot: records the previous slot's consumption and this
    /// slot's harvest, then returns
    /// `min(capacity, Σ harvested − Σ consumed)`.
    pub fn update_budget(&mut self, harvested: f64, consumed_prev: f64) -> Result<f64> {
        if !(harvested >= 0.0) || !(consumed_prev >= 0.0) {
            return Err(Error::Parameter(format!(
                "harvested and consumed energy must be non-negative (got {harvested}, {consumed_prev})"
            )));
        }
        if consumed_prev > self.budget * (1.0 + 1e-12) {
            return Err(Error::Accounting(format!(
                "consumed {consumed_prev} exceeds the previous budget {}",
                self.budget
            )));
        }
        self.cumulative_consumed += consumed_prev;
        self.cumulative_harvested += harvested;
        if self.cumulative_consumed > self.cumulative_harvested * (1.0 + 1e-12) {
            return Err(Error::Accounting("cumulative consumption exceeds harvest".into()));
        }
        let net = (self.cumulative_harvested - self.cumulative_consumed).max(0.0);
        self.budget = net.min(self.capacity);
        Ok(self.budget)
    }
}

/// Free-function form of [`BatteryState::update_budget`].
pub fn update_budget(battery: &mut BatteryState, harvested: f64, consumed_prev: f64) -> Result<f64> {
    battery.update_budget(harvested, consumed_prev)
}

/// Radio front end; τ is the energy to transmit one measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    /// W.
    pub tx_power: f64,
    /// bit/s.
    pub data_rate: f64,
    pub bits_per_measurement: f64,
}

impl Default for RadioModel {
    /// 250 kbps, 17.4 mA × 3.6 V transceiver with 16-bit measurements.
    fn default() -> Self {
        Self {
            tx_power: 62.64e-3,
            data_rate: 250e3,
            bits_per_measurement: 16.0,
        }
    }
}

impl RadioModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power", self.tx_power),
            ("data_rate", self.data_rate),
            ("bits_per_measurement", self.bits_per_measurement),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// τ = P_tx · bits / rate. Sensing energy is not included.
pub fn per_measurement_energy(radio: &RadioModel) -> Result<f64> {
    radio.validate()?;
    Ok(radio.tx_power * radio.bits_per_measurement / radio.data_rate)
}

/// Spends the whole budget: `m = min(⌊ξ/τ⌋, n_cap)`. Leftover energy is lost.
pub fn allocate_measurements(budget: f64, tau: f64, n_cap: usize) -> usize {
    debug_assert!(tau > 0.0 && budget >= 0.0);
    let ratio = budget / tau;
    if !(ratio >= 0.0) {
        return 0;
    }
    // absorb rounding in budgets that are exact multiples of τ
    let m = (ratio * (1.0 + 4.0 * f64::EPSILON)).floor();
    let m = if m * tau > budget { m - 1.0 } else { m };
    if m >= n_cap as f64 {
        n_cap
    } else {
        m.max(0.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_harvest_statistics() {
        let model = HarvestModel::new(1.0, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut sum, mut lo, mut hi) = (0.0, f64::MAX, f64::MIN);
        let draws = 1_000_000;
        for _ in 0..draws {
            let e = model.sample(&mut rng);
            sum += e;
            lo = lo.min(e);
            hi = hi.max(e);
        }
        let mean = sum / draws as f64;
        // uniform on [0, 2]: standard error 1/sqrt(3 * 10^6)
        assert!((mean - 1.0).abs() < 0.003);
        assert!((mean - 1.0).abs() < 3.0 / (3.0 * draws as f64).sqrt());
        assert!(lo >= 0.0 && hi <= 2.0);
    }

    #[test]
    fn invalid_harvest_models() {
        assert!(HarvestModel::new(0.0, 0.5, 1.0).is_err());
        assert!(HarvestModel::new(1.0, 0.0, 1.0).is_err());
        assert!(HarvestModel::new(1.0, 1.5, 1.0).is_err());
        assert!(HarvestModel::new(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn panel_energy_range() {
        let model = HarvestModel::panel(32.0, 5e-6, 15e-6, 2.0).unwrap();
        assert!((model.min_energy() - 320e-6).abs() < 1e-15);
        assert!((model.max_energy() - 960e-6).abs() < 1e-15);
        assert!((model.spread - 0.5).abs() < 1e-15);
        for seed in 0..1000 {
            let e = draw_harvest(&model, seed).unwrap();
            assert!((320e-6..=960e-6).contains(&e));
        }
    }

    #[test]
    fn budget_recursion() {
        let mut b = BatteryState::new(10.0).unwrap();
        assert_eq!(b.update_budget(4.0, 0.0).unwrap(), 4.0);
        assert_eq!(b.update_budget(5.0, 3.0).unwrap(), 6.0);
        assert_eq!(b.update_budget(6.0, 4.0).unwrap(), 8.0);

        let mut capped = BatteryState::new(5.0).unwrap();
        capped.update_budget(4.0, 0.0).unwrap();
        capped.update_budget(5.0, 3.0).unwrap();
        assert_eq!(capped.update_budget(6.0, 4.0).unwrap(), 5.0);
    }

    #[test]
    fn empty_history_has_zero_budget() {
        let mut b = BatteryState::new(f64::INFINITY).unwrap();
        assert_eq!(update_budget(&mut b, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn overspending_is_an_accounting_error() {
        let mut b = BatteryState::new(10.0).unwrap();
        b.update_budget(2.0, 0.0).unwrap();
        assert!(matches!(b.update_budget(1.0, 3.0), Err(Error::Accounting(_))));
    }

    #[test]
    fn tau_from_radio_constants() {
        let tau = per_measurement_energy(&RadioModel::default()).unwrap();
        assert!((tau - 0.06264 * 16.0 / 250000.0).abs() < 1e-18);
        assert!((tau * 1e6 - 4.009).abs() < 1e-3);
        let fast = RadioModel {
            data_rate: 500e3,
            ..Default::default()
        };
        assert!((per_measurement_energy(&fast).unwrap() - tau / 2.0).abs() < 1e-18);
        let empty = RadioModel {
            bits_per_measurement: 0.0,
            ..Default::default()
        };
        assert!(per_measurement_energy(&empty).is_err());
    }

    #[test]
    fn allocation_examples() {
        let tau = 4.00896e-6;
        assert_eq!(allocate_measurements(10.0 * tau, tau, 512), 10);
        assert_eq!(allocate_measurements(10.9 * tau, tau, 512), 10);
        assert_eq!(allocate_measurements(1e6 * tau, tau, 512), 512);
        assert_eq!(allocate_measurements(0.0, tau, 512), 0);
    }

    #[test]
    fn allocation_is_feasible_and_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let tau: f64 = rng.random_range(1e-7..1e-5);
            let budget: f64 = rng.random_range(0.0..1e-3);
            let cap = rng.random_range(1..600);
            let m = allocate_measurements(budget, tau, cap);
            assert!(tau * m as f64 <= budget);
            if m < cap {
                assert!(tau * (m + 1) as f64 > budget);
            }
        }
    }
}
