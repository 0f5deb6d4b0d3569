//! Equality-constrained ℓ1 recovery for single sensors and the joint
//! system, an exhaustive ℓ0 oracle and recovery metrics.

mod admm;
mod operator;
mod oracle;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::sensing::{assemble_joint_system, JointSystem};

pub use operator::LinearOperator;
pub use oracle::{l0_oracle, OracleSolution, ORACLE_MAX_N, ORACLE_MAX_SPARSITY, ORACLE_RESIDUAL};

/// Relative squared error at or below which a reconstruction is correct.
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Bound on `‖A x̂ − y‖₂ / ‖y‖₂`.
    pub feasibility_tolerance: f64,
    /// Relative bound on the ADMM primal and dual residuals.
    pub convergence_tolerance: f64,
    /// ADMM penalty ρ, applied to unit-RMS scaled measurements.
    pub penalty_parameter: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            feasibility_tolerance: 1e-8,
            convergence_tolerance: 1e-7,
            penalty_parameter: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.max_iterations == 0
            || !positive(self.feasibility_tolerance)
            || !positive(self.convergence_tolerance)
            || !positive(self.penalty_parameter)
        {
            return Err(Error::Parameter(format!("invalid solver options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub coefficients: DVector<f64>,
    /// `‖A x̂ − y‖₂ / max(‖y‖₂, ε)`.
    pub residual: f64,
    pub iterations: usize,
    /// Set only when the iteration settled and the residual is within the
    /// feasibility tolerance.
    pub converged: bool,
}

/// `min ‖x‖₁ s.t. A x = y`. Non-convergence is reported through
/// [`RecoveryResult::converged`], not as an error.
pub fn basis_pursuit(a: &DMatrix<f64>, y: &DVector<f64>, opts: &SolverOptions) -> Result<RecoveryResult> {
    if a.nrows() > a.ncols() {
        return Err(Error::Parameter(format!(
            "basis pursuit expects m <= n, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("sensing matrix contains non-finite values".into()));
    }
    admm::solve(a, y, opts)
}

/// Joint recovery of `[z_c; z_1; …; z_K]`. Only `signals` (`x̂_k = ẑ_c + ẑ_k`)
/// is meaningful per sensor; the split between common and innovation parts
/// is not identifiable in general.
#[derive(Debug, Clone)]
pub struct JointRecovery {
    pub common: DVector<f64>,
    pub innovations: Vec<DVector<f64>>,
    pub signals: Vec<DVector<f64>>,
    pub result: RecoveryResult,
}

pub fn recover_joint(a: Vec<DMatrix<f64>>, y: &[DVector<f64>], opts: &SolverOptions) -> Result<JointRecovery> {
    let system = assemble_joint_system(a, y)?;
    recover_joint_system(&system, opts)
}

pub fn recover_joint_system(system: &JointSystem, opts: &SolverOptions) -> Result<JointRecovery> {
    for k in 0..system.sensors() {
        if system.block(k).iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("sensing matrix contains non-finite values".into()));
        }
    }
    let result = admm::solve(system, system.rhs(), opts)?;
    let (common, innovations) = system.split(&result.coefficients);
    let signals = innovations.iter().map(|z| &common + z).collect();
    Ok(JointRecovery {
        common,
        innovations,
        signals,
        result,
    })
}

/// `‖f̂ − f‖₂² / ‖f‖₂²`.
pub fn relative_error(estimate: &DVector<f64>, reference: &DVector<f64>) -> Result<f64> {
    check_dim(reference.len(), estimate.len())?;
    let denom = reference.norm_squared();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("reference signal is zero".into()));
    }
    Ok((estimate - reference).norm_squared() / denom)
}

/// Inclusive threshold test.
pub fn is_success(error: f64, threshold: f64) -> bool {
    error <= threshold
}
