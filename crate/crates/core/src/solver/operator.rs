use nalgebra::{DMatrix, DVector};

use crate::sensing::JointSystem;

/// Linear map used by the ℓ1 solver. Implementations may be implicit.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply_into(&self, x: &DVector<f64>, out: &mut DVector<f64>);
    fn apply_transpose_into(&self, w: &DVector<f64>, out: &mut DVector<f64>);
    /// `A Aᵀ`.
    fn gram(&self) -> DMatrix<f64>;
    fn columns(&self, idx: &[usize]) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv(1.0, self, x, 0.0);
    }

    fn apply_transpose_into(&self, w: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv_tr(1.0, self, w, 0.0);
    }

    fn gram(&self) -> DMatrix<f64> {
        self * self.transpose()
    }

    fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        self.select_columns(idx)
    }
}

impl LinearOperator for JointSystem {
    fn nrows(&self) -> usize {
        JointSystem::nrows(self)
    }

    fn ncols(&self) -> usize {
        JointSystem::ncols(self)
    }

    fn apply_into(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        JointSystem::apply_into(self, x, out)
    }

    fn apply_transpose_into(&self, w: &DVector<f64>, out: &mut DVector<f64>) {
        JointSystem::apply_transpose_into(self, w, out)
    }

    fn gram(&self) -> DMatrix<f64> {
        JointSystem::gram(self)
    }

    fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        JointSystem::columns(self, idx)
    }
}
