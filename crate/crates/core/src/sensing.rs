//! Projection operators `Φ_k`, measurements `y_k = Φ_k f_k`, effective
//! matrices `A_k = Φ_k Ψ` and the extended joint system.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::model::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// i.i.d. N(0, 1) entries, not column-normalised.
    DenseGaussian,
    /// Selection of `m` distinct samples.
    RowSubsampling,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Dense(DMatrix<f64>),
    Selection(Vec<usize>),
}

/// Per-sensor projection matrix `Φ` of size `m × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    m: usize,
    n: usize,
    seed: Option<u64>,
    repr: Repr,
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "operator needs 1 <= m <= n, got m={m}, n={n}"
        )));
    }
    Ok(())
}

pub fn draw_gaussian_operator(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    check_shape(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Row-major fill so a given (row, column) entry does not depend on m.
    let phi = DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    Ok(SensingOperator {
        m,
        n,
        seed: Some(seed),
        repr: Repr::Dense(phi),
    })
}

/// Selects `m` distinct samples uniformly at random, kept in time order.
pub fn draw_subsampling_operator(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    check_shape(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, n, m).into_vec();
    idx.sort_unstable();
    Ok(SensingOperator {
        m,
        n,
        seed: Some(seed),
        repr: Repr::Selection(idx),
    })
}

impl SensingOperator {
    /// Wraps an explicit projection matrix.
    pub fn from_matrix(phi: DMatrix<f64>) -> Result<Self> {
        check_shape(phi.nrows(), phi.ncols())?;
        Ok(Self {
            m: phi.nrows(),
            n: phi.ncols(),
            seed: None,
            repr: Repr::Dense(phi),
        })
    }

    /// Selection of the given sample indices.
    pub fn from_indices(indices: Vec<usize>, n: usize) -> Result<Self> {
        check_shape(indices.len(), n)?;
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Parameter(format!(
                    "selection index {i} is out of range or repeated"
                )));
            }
        }
        Ok(Self {
            m: indices.len(),
            n,
            seed: None,
            repr: Repr::Selection(indices),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        match self.repr {
            Repr::Dense(_) => OperatorKind::DenseGaussian,
            Repr::Selection(_) => OperatorKind::RowSubsampling,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn indices(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Selection(idx) => Some(idx),
            Repr::Dense(_) => None,
        }
    }

    /// Dense `Φ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Dense(phi) => phi.clone(),
            Repr::Selection(idx) => Basis::identity(self.n).rows(idx),
        }
    }
}

/// `y = Φ f`.
pub fn measure(op: &SensingOperator, f: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim(op.n, f.len())?;
    Ok(match &op.repr {
        Repr::Dense(phi) => phi * f,
        Repr::Selection(idx) => DVector::from_iterator(idx.len(), idx.iter().map(|&i| f[i])),
    })
}

/// `A = Φ Ψ`.
pub fn effective_matrix(op: &SensingOperator, basis: &Basis) -> Result<DMatrix<f64>> {
    check_dim(op.n, basis.n())?;
    Ok(match &op.repr {
        Repr::Dense(phi) => basis.right_multiply(phi),
        Repr::Selection(idx) => basis.rows(idx),
    })
}

/// Extended system `Ã z̃ = ỹ` with `z̃ = [z_c; z_1; …; z_K]`. Row block `k`
/// holds `A_k` in column block 0 and column block `k`. Stored block-wise;
/// [`JointSystem::to_dense`] materialises `Ã`.
#[derive(Debug, Clone)]
pub struct JointSystem {
    blocks: Vec<DMatrix<f64>>,
    rhs: DVector<f64>,
    n: usize,
    offsets: Vec<usize>,
}

pub fn assemble_joint_system(a: Vec<DMatrix<f64>>, y: &[DVector<f64>]) -> Result<JointSystem> {
    if a.is_empty() {
        return Err(Error::Parameter("joint system needs at least one sensor".into()));
    }
    check_dim(a.len(), y.len())?;
    let n = a[0].ncols();
    if let Some(bad) = a.iter().find(|ak| ak.ncols() != n) {
        return Err(Error::Parameter(format!(
            "inconsistent ambient dimension across sensors: {} vs {}",
            n,
            bad.ncols()
        )));
    }
    let mut offsets = Vec::with_capacity(a.len() + 1);
    offsets.push(0);
    for (ak, yk) in a.iter().zip(y) {
        check_dim(ak.nrows(), yk.len())?;
        offsets.push(offsets.last().unwrap() + ak.nrows());
    }
    let total = *offsets.last().unwrap();
    let mut rhs = DVector::zeros(total);
    for (k, yk) in y.iter().enumerate() {
        rhs.rows_mut(offsets[k], yk.len()).copy_from(yk);
    }
    Ok(JointSystem {
        blocks: a,
        rhs,
        n,
        offsets,
    })
}

impl JointSystem {
    pub fn sensors(&self) -> usize {
        self.blocks.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nrows(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn ncols(&self) -> usize {
        (self.sensors() + 1) * self.n
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn block(&self, k: usize) -> &DMatrix<f64> {
        &self.blocks[k]
    }

    /// Per-sensor row counts `m_k`.
    pub fn block_rows(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows(), self.ncols());
        for (k, ak) in self.blocks.iter().enumerate() {
            let (r, m) = (self.offsets[k], ak.nrows());
            out.view_mut((r, 0), (m, self.n)).copy_from(ak);
            out.view_mut((r, (k + 1) * self.n), (m, self.n)).copy_from(ak);
        }
        out
    }

    /// `Ã z̃`, computed block-wise.
    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.nrows());
        self.apply_into(z, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, z: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.n;
        let common = z.rows(0, n);
        let mut x = DVector::zeros(n);
        for (k, ak) in self.blocks.iter().enumerate() {
            x.copy_from(&common);
            x += z.rows((k + 1) * n, n);
            let mut dst = out.rows_mut(self.offsets[k], ak.nrows());
            dst.gemv(1.0, ak, &x, 0.0);
        }
    }

    /// `Ãᵀ w`.
    pub fn apply_transpose(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ncols());
        self.apply_transpose_into(w, &mut out);
        out
    }

    pub(crate) fn apply_transpose_into(&self, w: &DVector<f64>, out: &mut DVector<f64>) {
        let n = self.n;
        out.fill(0.0);
        for (k, ak) in self.blocks.iter().enumerate() {
            let wk = w.rows(self.offsets[k], ak.nrows());
            let mut dst = out.rows_mut((k + 1) * n, n);
            dst.gemv_tr(1.0, ak, &wk, 0.0);
        }
        let mut common = DVector::zeros(n);
        for k in 0..self.sensors() {
            common += out.rows((k + 1) * n, n);
        }
        out.rows_mut(0, n).copy_from(&common);
    }

    /// `Ã Ãᵀ`; block `(j, k)` is `A_j A_kᵀ`, doubled on the diagonal.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut stacked = DMatrix::zeros(self.nrows(), self.n);
        for (k, ak) in self.blocks.iter().enumerate() {
            stacked.view_mut((self.offsets[k], 0), (ak.nrows(), self.n)).copy_from(ak);
        }
        let mut g = &stacked * stacked.transpose();
        for (k, ak) in self.blocks.iter().enumerate() {
            let (r, m) = (self.offsets[k], ak.nrows());
            let own = ak * ak.transpose();
            let mut view = g.view_mut((r, r), (m, m));
            view += own;
        }
        g
    }

    /// Columns of `Ã` with the given indices.
    pub fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows(), idx.len());
        for (c, &j) in idx.iter().enumerate() {
            let (block, col) = (j / self.n, j % self.n);
            for (k, ak) in self.blocks.iter().enumerate() {
                if block == 0 || block == k + 1 {
                    out.view_mut((self.offsets[k], c), (ak.nrows(), 1))
                        .copy_from(&ak.column(col));
                }
            }
        }
        out
    }

    /// Splits `z̃` into `(z_c, [z_1, …, z_K])`.
    pub fn split(&self, z: &DVector<f64>) -> (DVector<f64>, Vec<DVector<f64>>) {
        let n = self.n;
        let common = z.rows(0, n).into_owned();
        let innov = (1..=self.sensors())
            .map(|k| z.rows(k * n, n).into_owned())
            .collect();
        (common, innov)
    }

    /// Stacks `(z_c, z_1..z_K)` into `z̃`.
    pub fn stack(&self, common: &DVector<f64>, innovations: &[DVector<f64>]) -> Result<DVector<f64>> {
        check_dim(self.n, common.len())?;
        check_dim(self.sensors(), innovations.len())?;
        let mut z = DVector::zeros(self.ncols());
        z.rows_mut(0, self.n).copy_from(common);
        for (k, zk) in innovations.iter().enumerate() {
            check_dim(self.n, zk.len())?;
            z.rows_mut((k + 1) * self.n, self.n).copy_from(zk);
        }
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn gaussian_operator_is_deterministic() {
        let a = draw_gaussian_operator(25, 50, 9).unwrap();
        let b = draw_gaussian_operator(25, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, draw_gaussian_operator(25, 50, 10).unwrap());
    }

    #[test]
    fn gaussian_entries_have_zero_mean() {
        // 10^6 entries spread over independent 3x4 draws
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut seed = 0;
        while count < 1_000_000 {
            let phi = draw_gaussian_operator(3, 4, seed).unwrap().matrix();
            sum += phi.sum();
            count += 12;
            seed += 1;
        }
        assert!((sum / count as f64).abs() < 0.01);
    }

    #[test]
    fn invalid_shapes_are_rejected() {
        assert!(draw_gaussian_operator(5, 4, 0).is_err());
        assert!(draw_gaussian_operator(0, 4, 0).is_err());
        assert!(draw_subsampling_operator(5, 4, 0).is_err());
        assert!(draw_subsampling_operator(0, 4, 0).is_err());
        assert!(SensingOperator::from_indices(vec![0, 0], 4).is_err());
        assert!(SensingOperator::from_indices(vec![4], 4).is_err());
    }

    #[test]
    fn full_subsampling_selects_everything() {
        let op = draw_subsampling_operator(16, 16, 3).unwrap();
        assert_eq!(op.indices().unwrap(), (0..16).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn single_sample_selection() {
        let op = draw_subsampling_operator(1, 512, 4).unwrap();
        let f = DVector::from_fn(512, |i, _| i as f64 * 0.5);
        let y = measure(&op, &f).unwrap();
        let i = op.indices().unwrap()[0];
        assert_eq!(y[0], f[i]);
    }

    #[test]
    fn subsampling_does_not_increase_norm() {
        let op = draw_subsampling_operator(128, 512, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_vec(&mut rng, 512);
        assert!(measure(&op, &f).unwrap().norm() <= f.norm());
    }

    #[test]
    fn subsampling_indices_are_distinct() {
        for seed in 0..1000 {
            let op = draw_subsampling_operator(40, 64, seed).unwrap();
            let mut idx = op.indices().unwrap().to_vec();
            idx.dedup();
            assert_eq!(idx.len(), 40);
        }
    }

    #[test]
    fn zero_operator_measures_zero() {
        let op = SensingOperator::from_matrix(DMatrix::zeros(2, 4)).unwrap();
        let y = measure(&op, &DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(y, DVector::zeros(2));
    }

    #[test]
    fn row_selection_measurement() {
        let op = SensingOperator::from_indices(vec![0, 2], 4).unwrap();
        let y = measure(&op, &DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 3.0]);
        assert!(measure(&op, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn effective_matrix_with_identity_is_phi() {
        let op = draw_gaussian_operator(3, 6, 2).unwrap();
        let a = effective_matrix(&op, &Basis::identity(6)).unwrap();
        assert_eq!(a, op.matrix());
        assert!(effective_matrix(&op, &Basis::identity(5)).is_err());
    }

    #[test]
    fn subsampled_dct_rows_are_unit_norm() {
        let op = draw_subsampling_operator(128, 512, 8).unwrap();
        let a = effective_matrix(&op, &Basis::dct(512)).unwrap();
        for r in a.row_iter() {
            assert!((r.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn effective_matrix_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let basis = Basis::dct(64);
        for op in [
            draw_gaussian_operator(20, 64, 1).unwrap(),
            draw_subsampling_operator(20, 64, 1).unwrap(),
        ] {
            let a = effective_matrix(&op, &basis).unwrap();
            let x = random_vec(&mut rng, 64);
            let direct = &a * &x;
            let staged = measure(&op, &basis.synthesize(&x).unwrap()).unwrap();
            assert!((direct - staged).amax() < 1e-10);
        }
    }

    #[test]
    fn joint_system_single_sensor_structure() {
        let a1 = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let js = assemble_joint_system(vec![a1.clone()], &[DVector::zeros(2)]).unwrap();
        let d = js.to_dense();
        assert_eq!(d.shape(), (2, 6));
        assert_eq!(d.columns(0, 3), a1);
        assert_eq!(d.columns(3, 3), a1);
    }

    #[test]
    fn joint_system_zero_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a1 = DMatrix::from_fn(2, 4, |_, _| rng.sample(StandardNormal));
        let a2 = DMatrix::from_fn(3, 4, |_, _| rng.sample(StandardNormal));
        let js = assemble_joint_system(vec![a1, a2], &[DVector::zeros(2), DVector::zeros(3)]).unwrap();
        let d = js.to_dense();
        assert_eq!(d.shape(), (5, 12));
        // row block 1 (sensor 2) × column block 2 (z_1) and the mirror block
        assert!(d.view((2, 4), (3, 4)).iter().all(|v| *v == 0.0));
        assert!(d.view((0, 8), (2, 4)).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn joint_system_rejects_inconsistent_n() {
        let r = assemble_joint_system(
            vec![DMatrix::zeros(2, 4), DMatrix::zeros(2, 5)],
            &[DVector::zeros(2), DVector::zeros(2)],
        );
        assert!(matches!(r, Err(Error::Parameter(_))));
        let r = assemble_joint_system(vec![DMatrix::zeros(2, 4)], &[DVector::zeros(3)]);
        assert!(r.is_err());
    }

    fn block_identity_case(k: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 7;
        let a: Vec<DMatrix<f64>> = (0..k)
            .map(|_| {
                let m = rng.random_range(1..=n);
                DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
            })
            .collect();
        let y: Vec<DVector<f64>> = a.iter().map(|ak| DVector::zeros(ak.nrows())).collect();
        let js = assemble_joint_system(a.clone(), &y).unwrap();
        let zc = random_vec(&mut rng, n);
        let zk: Vec<_> = (0..k).map(|_| random_vec(&mut rng, n)).collect();
        let z = js.stack(&zc, &zk).unwrap();

        // brute-force per-sensor products
        let mut expect = Vec::new();
        for (ak, z_k) in a.iter().zip(&zk) {
            expect.extend((ak * (&zc + z_k)).iter().copied());
        }
        let expect = DVector::from_vec(expect);
        assert!((js.to_dense() * &z - &expect).amax() <= 1e-12);
        assert!((js.apply(&z) - &expect).amax() <= 1e-12);

        let w = random_vec(&mut rng, js.nrows());
        let dense_t = js.to_dense().transpose() * &w;
        assert!((js.apply_transpose(&w) - dense_t).amax() <= 1e-12);
        let dense = js.to_dense();
        assert!((js.gram() - &dense * dense.transpose()).amax() <= 1e-10);
        let cols = [0, n + 1, 2 * n - 1, k * n + 2];
        assert_eq!(js.columns(&cols), dense.select_columns(&cols));
    }

    #[test]
    fn joint_block_identity_for_several_k() {
        for (i, k) in [1, 2, 3, 5].into_iter().enumerate() {
            block_identity_case(k, 100 + i as u64);
        }
    }

    proptest! {
        #[test]
        fn measure_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_vec(&mut rng, 32);
            let g = random_vec(&mut rng, 32);
            for op in [
                draw_gaussian_operator(12, 32, seed).unwrap(),
                draw_subsampling_operator(12, 32, seed).unwrap(),
            ] {
                let lhs = measure(&op, &(&f * a + &g * b)).unwrap();
                let rhs = measure(&op, &f).unwrap() * a + measure(&op, &g).unwrap() * b;
                prop_assert!((lhs - rhs).amax() <= 1e-12);
            }
        }

        #[test]
        fn block_identity_holds(seed in 0u64..500, k in 1usize..6) {
            block_identity_case(k, seed);
        }
    }
}
