use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Identity,
    /// Orthonormal type-II DCT; synthesis is the type-III inverse.
    Dct,
}

/// Sparsifying basis Ψ with `f = Ψ x`.
#[derive(Debug, Clone)]
pub struct Basis {
    kind: BasisKind,
    n: usize,
    synthesis: Option<Arc<DMatrix<f64>>>,
}

impl Basis {
    pub fn identity(n: usize) -> Self {
        Self {
            kind: BasisKind::Identity,
            n,
            synthesis: None,
        }
    }

    pub fn dct(n: usize) -> Self {
        Self {
            kind: BasisKind::Dct,
            n,
            synthesis: Some(dct_synthesis_matrix(n)),
        }
    }

    pub fn new(kind: BasisKind, n: usize) -> Self {
        match kind {
            BasisKind::Identity => Self::identity(n),
            BasisKind::Dct => Self::dct(n),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients to signal domain.
    pub fn synthesize(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.n, x.len())?;
        Ok(match &self.synthesis {
            None => x.clone(),
            Some(psi) => psi.as_ref() * x,
        })
    }

    /// Signal to coefficient domain (the transpose of synthesis).
    pub fn analyze(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.n, f.len())?;
        Ok(match &self.synthesis {
            None => f.clone(),
            Some(psi) => psi.tr_mul(f),
        })
    }

    /// Dense synthesis matrix Ψ.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.synthesis {
            None => DMatrix::identity(self.n, self.n),
            Some(psi) => psi.as_ref().clone(),
        }
    }

    /// Selected rows of Ψ, i.e. `S Ψ` for a row-selection `S`.
    pub(crate) fn rows(&self, indices: &[usize]) -> DMatrix<f64> {
        match &self.synthesis {
            None => {
                let mut out = DMatrix::zeros(indices.len(), self.n);
                for (r, &i) in indices.iter().enumerate() {
                    out[(r, i)] = 1.0;
                }
                out
            }
            Some(psi) => psi.select_rows(indices),
        }
    }

    /// `Φ Ψ` for a dense `Φ`.
    pub(crate) fn right_multiply(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.synthesis {
            None => phi.clone(),
            Some(psi) => phi * psi.as_ref(),
        }
    }
}

fn dct_synthesis_matrix(n: usize) -> Arc<DMatrix<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<DMatrix<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let nf = n as f64;
            let dc = (1.0 / nf).sqrt();
            let ac = (2.0 / nf).sqrt();
            Arc::new(DMatrix::from_fn(n, n, |j, k| {
                let w = if k == 0 { dc } else { ac };
                w * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos()
            }))
        })
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_passthrough() {
        let b = Basis::identity(3);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(b.synthesize(&x).unwrap(), x);
        assert_eq!(b.analyze(&x).unwrap(), x);
    }

    #[test]
    fn first_dct_atom_is_constant() {
        let b = Basis::dct(4);
        let mut e0 = DVector::zeros(4);
        e0[0] = 1.0;
        let f = b.synthesize(&e0).unwrap();
        for v in f.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn dct_matches_direct_formula() {
        // X_k = w_k Σ_j f_j cos(π (2j+1) k / 2n)
        let n = 8;
        let b = Basis::dct(n);
        let f = DVector::from_fn(n, |i, _| (i as f64 * 0.7).sin() + 0.1 * i as f64);
        let x = b.analyze(&f).unwrap();
        for k in 0..n {
            let w = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            let direct: f64 = (0..n)
                .map(|j| f[j] * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * n as f64)).cos())
                .sum();
            assert!((x[k] - w * direct).abs() < 1e-12);
        }
    }

    #[test]
    fn dct_is_orthonormal_on_random_vectors() {
        let n = 512;
        let b = Basis::dct(n);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let x = b.analyze(&f).unwrap();
            assert!(((x.norm() - f.norm()) / f.norm()).abs() < 1e-10);
            let back = b.synthesize(&x).unwrap();
            assert!((back - &f).norm() / f.norm() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let b = Basis::dct(4);
        assert!(b.synthesize(&DVector::zeros(5)).is_err());
        assert!(b.analyze(&DVector::zeros(3)).is_err());
    }
}
