//! Signal models: common-plus-innovation sparse ensembles, compressible
//! multi-sensor frames and real sensor logs.

mod basis;
mod log;

use nalgebra::DVector;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use basis::{Basis, BasisKind};
pub use log::{
    align_series, ingest_sensor_log, windowize, write_frames_csv, IngestReport, LogField,
    SensorSeries,
};

/// Parameters of a common-component-plus-innovations ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ScciParams {
    /// Ambient dimension.
    pub n: usize,
    /// Support size of the shared component.
    pub s_common: usize,
    /// Innovation support size, one entry per sensor.
    pub s_innov: Vec<usize>,
}

impl ScciParams {
    pub fn new(n: usize, s_common: usize, s_innov: Vec<usize>) -> Result<Self> {
        let p = Self {
            n,
            s_common,
            s_innov,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same innovation sparsity on all `sensors`.
    pub fn uniform(n: usize, sensors: usize, s_common: usize, s_innov: usize) -> Result<Self> {
        Self::new(n, s_common, vec![s_innov; sensors])
    }

    pub fn sensors(&self) -> usize {
        self.s_innov.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_innov.is_empty() {
            return Err(Error::Parameter("at least one sensor is required".into()));
        }
        if self.n == 0 {
            return Err(Error::Parameter("ambient dimension must be positive".into()));
        }
        if self.s_common > self.n {
            return Err(Error::Parameter(format!(
                "common sparsity {} exceeds dimension {}",
                self.s_common, self.n
            )));
        }
        if let Some(s) = self.s_innov.iter().find(|&&s| s > self.n) {
            return Err(Error::Parameter(format!(
                "innovation sparsity {} exceeds dimension {}",
                s, self.n
            )));
        }
        Ok(())
    }
}

/// K correlated signals `f_k = Ψ (z_c + z_k)`.
#[derive(Debug, Clone)]
pub struct SignalEnsemble {
    pub common: DVector<f64>,
    pub innovations: Vec<DVector<f64>>,
    /// Sparse representations `x_k = z_c + z_k`.
    pub coefficients: Vec<DVector<f64>>,
    /// Signal-domain vectors `f_k = Ψ x_k`.
    pub signals: Vec<DVector<f64>>,
    pub basis: Basis,
}

impl SignalEnsemble {
    pub fn sensors(&self) -> usize {
        self.signals.len()
    }
}

fn sparse_gaussian(rng: &mut ChaCha8Rng, n: usize, s: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    for i in index::sample(rng, n, s) {
        v[i] = rng.sample(StandardNormal);
    }
    v
}

/// Draws an ensemble: supports uniform without replacement, non-zeros i.i.d.
/// standard normal. Common and innovation supports are independent and may
/// overlap.
pub fn generate_scci(params: &ScciParams, basis: &Basis, seed: u64) -> Result<SignalEnsemble> {
    params.validate()?;
    crate::error::check_dim(params.n, basis.n())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let common = sparse_gaussian(&mut rng, params.n, params.s_common);
    let innovations: Vec<_> = params
        .s_innov
        .iter()
        .map(|&s| sparse_gaussian(&mut rng, params.n, s))
        .collect();
    let coefficients: Vec<_> = innovations.iter().map(|z| &common + z).collect();
    let signals = coefficients
        .iter()
        .map(|x| basis.synthesize(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalEnsemble {
        common,
        innovations,
        coefficients,
        signals,
        basis: basis.clone(),
    })
}

/// Aligned multi-sensor frames: `frames[t][k]` is the length-n window of
/// sensor `sensor_ids[k]` at frame `t`.
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub sensor_ids: Vec<u32>,
    pub n: usize,
    pub frames: Vec<Vec<DVector<f64>>>,
}

impl FrameSet {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Builds aligned frames from per-sensor series. Only epochs shared by
    /// every sensor are kept.
    pub fn from_series(series: &[SensorSeries], n: usize) -> Result<Self> {
        let aligned = align_series(series)?;
        let per_sensor = aligned
            .iter()
            .map(|s| windowize(s, n))
            .collect::<Result<Vec<_>>>()?;
        let count = per_sensor.iter().map(Vec::len).min().unwrap_or(0);
        let frames = (0..count)
            .map(|t| per_sensor.iter().map(|w| w[t].clone()).collect())
            .collect();
        Ok(Self {
            sensor_ids: aligned.iter().map(|s| s.sensor_id).collect(),
            n,
            frames,
        })
    }

    /// Restricts to the first `k` sensors.
    pub fn take_sensors(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.sensor_ids.len() {
            return Err(Error::Parameter(format!(
                "requested {} sensors but {} are available",
                k,
                self.sensor_ids.len()
            )));
        }
        Ok(Self {
            sensor_ids: self.sensor_ids[..k].to_vec(),
            n: self.n,
            frames: self.frames.iter().map(|f| f[..k].to_vec()).collect(),
        })
    }
}

/// Synthetic stand-in for real temperature logs: DCT coefficients with a
/// power-law decaying shared part plus small, low-frequency per-sensor
/// innovations. The DC term carries the mean level.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressibleParams {
    pub n: usize,
    pub sensors: usize,
    pub frames: usize,
    /// Mean signal level (e.g. °C).
    pub mean_level: f64,
    /// RMS of the shared fluctuation around the mean.
    pub variation_rms: f64,
    /// Coefficient magnitude decays as `i^-decay`.
    pub decay: f64,
    /// Per-sensor DC offsets are uniform on `±offset_spread`.
    pub offset_spread: f64,
    /// Number of extra innovation coefficients per sensor.
    pub innovation_terms: usize,
    /// Innovation coefficients live in `1..innovation_band`.
    pub innovation_band: usize,
    /// RMS contribution of the innovation coefficients in the signal domain.
    pub innovation_rms: f64,
}

impl Default for CompressibleParams {
    fn default() -> Self {
        Self {
            n: 512,
            sensors: 8,
            frames: 32,
            mean_level: 20.0,
            variation_rms: 4.0,
            decay: 1.5,
            offset_spread: 0.5,
            innovation_terms: 2,
            innovation_band: 16,
            innovation_rms: 0.05,
        }
    }
}

impl CompressibleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.sensors == 0 || self.frames == 0 {
            return Err(Error::Parameter(
                "compressible frames need n >= 2, sensors >= 1 and frames >= 1".into(),
            ));
        }
        if self.innovation_band < 2 || self.innovation_band > self.n {
            return Err(Error::Parameter(format!(
                "innovation band {} must lie in [2, n]",
                self.innovation_band
            )));
        }
        if self.innovation_terms >= self.innovation_band {
            return Err(Error::Parameter(
                "innovation terms must be fewer than the innovation band".into(),
            ));
        }
        let finite = [
            self.mean_level,
            self.variation_rms,
            self.decay,
            self.offset_spread,
            self.innovation_rms,
        ];
        if finite.iter().any(|v| !v.is_finite()) || self.variation_rms < 0.0 || self.decay < 0.0 {
            return Err(Error::Parameter("compressible parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Generates compressible multi-sensor frames (sensor ids `0..sensors`).
pub fn generate_compressible(params: &CompressibleParams, seed: u64) -> Result<FrameSet> {
    params.validate()?;
    let n = params.n;
    let basis = Basis::dct(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    // Scale so that the expected fluctuation energy matches variation_rms.
    let weight_energy: f64 = (1..n).map(|i| (i as f64).powf(-2.0 * params.decay)).sum();
    let amp = params.variation_rms * (nf / weight_energy).sqrt();

    let mut frames = Vec::with_capacity(params.frames);
    for _ in 0..params.frames {
        let mut common = DVector::zeros(n);
        common[0] = params.mean_level * nf.sqrt();
        for i in 1..n {
            let g: f64 = rng.sample(StandardNormal);
            common[i] = amp * g * (i as f64).powf(-params.decay);
        }
        let mut frame = Vec::with_capacity(params.sensors);
        for _ in 0..params.sensors {
            let mut x = common.clone();
            let offset: f64 = if params.offset_spread > 0.0 {
                rng.random_range(-params.offset_spread..=params.offset_spread)
            } else {
                0.0
            };
            x[0] += offset * nf.sqrt();
            if params.innovation_terms > 0 {
                let per_term = params.innovation_rms * (nf / params.innovation_terms as f64).sqrt();
                for j in index::sample(&mut rng, params.innovation_band - 1, params.innovation_terms) {
                    let g: f64 = rng.sample(StandardNormal);
                    x[j + 1] += per_term * g;
                }
            }
            frame.push(basis.synthesize(&x)?);
        }
        frames.push(frame);
    }
    Ok(FrameSet {
        sensor_ids: (0..params.sensors as u32).collect(),
        n,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l0(v: &DVector<f64>) -> usize {
        v.iter().filter(|x| **x != 0.0).count()
    }

    #[test]
    fn two_sensor_ensemble_respects_sparsity() {
        let p = ScciParams::uniform(50, 2, 5, 1).unwrap();
        let e = generate_scci(&p, &Basis::identity(50), 7).unwrap();
        for x in &e.coefficients {
            assert!(l0(x) <= 6);
        }
        assert_eq!(l0(&e.common), 5);
        for z in &e.innovations {
            assert_eq!(l0(z), 1);
        }
    }

    #[test]
    fn empty_supports_give_zero_signals() {
        let p = ScciParams::uniform(8, 1, 0, 0).unwrap();
        let e = generate_scci(&p, &Basis::identity(8), 3).unwrap();
        assert!(e.signals[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn common_component_is_shared() {
        let p = ScciParams::uniform(10, 3, 2, 1).unwrap();
        let e = generate_scci(&p, &Basis::identity(10), 99).unwrap();
        let shared: Vec<_> = (0..3).map(|k| &e.coefficients[k] - &e.innovations[k]).collect();
        assert_eq!(shared[0], shared[1]);
        assert_eq!(shared[1], shared[2]);
        assert_eq!(shared[0], e.common);
    }

    #[test]
    fn oversized_sparsity_is_rejected() {
        assert!(ScciParams::uniform(5, 2, 6, 0).is_err());
        assert!(ScciParams::new(5, 1, vec![1, 7]).is_err());
        assert!(ScciParams::new(5, 1, vec![]).is_err());
    }

    #[test]
    fn dct_ensemble_synthesis_matches() {
        let p = ScciParams::uniform(64, 2, 4, 2).unwrap();
        let basis = Basis::dct(64);
        let e = generate_scci(&p, &basis, 5).unwrap();
        for (x, f) in e.coefficients.iter().zip(&e.signals) {
            let back = basis.analyze(f).unwrap();
            assert!((back - x).norm() <= 1e-10 * x.norm().max(1.0));
        }
    }

    #[test]
    fn compressible_frames_have_expected_shape() {
        let p = CompressibleParams {
            sensors: 3,
            frames: 4,
            n: 128,
            ..Default::default()
        };
        let set = generate_compressible(&p, 1).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.frames.iter().all(|f| f.len() == 3 && f[0].len() == 128));
        let mean = set.frames[0][0].mean();
        assert!((mean - 20.0).abs() < 1.0);
        let again = generate_compressible(&p, 1).unwrap();
        assert_eq!(set.frames, again.frames);
    }

    #[test]
    fn take_sensors_bounds() {
        let p = CompressibleParams {
            sensors: 2,
            frames: 1,
            n: 16,
            innovation_band: 8,
            ..Default::default()
        };
        let set = generate_compressible(&p, 1).unwrap();
        assert_eq!(set.take_sensors(1).unwrap().sensor_ids, vec![0]);
        assert!(set.take_sensors(3).is_err());
        assert!(set.take_sensors(0).is_err());
    }
}
