//! ADMM for `min ‖x‖₁ s.t. A x = y`.
//!
//! Splitting `x = z` with `x` constrained to the affine set and `z` carrying
//! the ℓ1 term gives the iteration
//!
//! ```text
//! x ← P(z − u)            P: projection onto {x : A x = b}
//! z ← soft(x + u, 1/ρ)
//! u ← u + x − z
//! ```
//!
//! The measurements are rescaled to unit RMS before iterating so the
//! penalty has the same meaning for every data scale; the result is scaled
//! back, which makes the solver exactly positively homogeneous in `y`.
//! The penalty starts at the configured value and is adapted by residual
//! balancing; the projection does not depend on ρ, so no refactorisation
//! is needed.
//!
//! Every few iterations the support of `z` is tested with a least-squares
//! fit and a dual certificate. When `A_S` has full column rank, `x_S` fits
//! the data and `w = A_S (A_SᵀA_S)⁻¹ sign(x_S)` satisfies
//! `|A_iᵀ w| < 1` off the support, the candidate is the unique ℓ1 minimiser
//! and the solve stops early with that exact solution.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::operator::LinearOperator;
use super::{RecoveryResult, SolverOptions};
use crate::error::{Error, Result};

const CERTIFICATE_INTERVAL: usize = 10;
const CERTIFICATE_MARGIN: f64 = 1e-9;
const PRUNE_RATIO: f64 = 1e-9;
/// Residual balancing: rescale ρ by `PENALTY_STEP` when one residual
/// exceeds the other by `PENALTY_RATIO`.
const PENALTY_RATIO: f64 = 10.0;
const PENALTY_STEP: f64 = 2.0;
const PENALTY_BOUNDS: (f64, f64) = (1e-6, 1e6);
/// ρ is frozen after this many iterations so the usual fixed-penalty
/// convergence argument applies to the tail.
const PENALTY_ADAPT_ITERATIONS: usize = 500;

enum GramInverse {
    Cholesky(Cholesky<f64, Dyn>),
    Pseudo(DMatrix<f64>),
}

impl GramInverse {
    fn new(gram: DMatrix<f64>) -> Self {
        let scale = gram.diagonal().amax().max(f64::MIN_POSITIVE);
        match Cholesky::new(gram.clone()) {
            // guard against numerically singular factors
            Some(ch) if ch.l_dirty().diagonal().iter().all(|d| *d > 1e-7 * scale.sqrt()) => {
                GramInverse::Cholesky(ch)
            }
            _ => GramInverse::Pseudo(
                gram.pseudo_inverse(1e-10 * scale)
                    .unwrap_or_else(|_| DMatrix::zeros(0, 0)),
            ),
        }
    }

    fn solve_mut(&self, r: &mut DVector<f64>) {
        match self {
            GramInverse::Cholesky(ch) => ch.solve_mut(r),
            GramInverse::Pseudo(p) if p.nrows() == r.len() => {
                let tmp = p * &*r;
                r.copy_from(&tmp);
            }
            GramInverse::Pseudo(_) => r.fill(0.0),
        }
    }
}

struct Projector<'a, Op: LinearOperator> {
    op: &'a Op,
    b: DVector<f64>,
    gram_inv: GramInverse,
    resid: DVector<f64>,
    back: DVector<f64>,
}

impl<'a, Op: LinearOperator> Projector<'a, Op> {
    fn new(op: &'a Op, b: DVector<f64>) -> Self {
        let (m, n) = (op.nrows(), op.ncols());
        Self {
            op,
            b,
            gram_inv: GramInverse::new(op.gram()),
            resid: DVector::zeros(m),
            back: DVector::zeros(n),
        }
    }

    /// `out ← v − Aᵀ (A Aᵀ)⁻¹ (A v − b)`.
    fn project(&mut self, v: &DVector<f64>, out: &mut DVector<f64>) {
        self.op.apply_into(v, &mut self.resid);
        self.resid -= &self.b;
        self.gram_inv.solve_mut(&mut self.resid);
        self.op.apply_transpose_into(&self.resid, &mut self.back);
        out.copy_from(v);
        *out -= &self.back;
    }
}

fn soft_threshold(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

fn support_of(z: &DVector<f64>) -> Vec<usize> {
    z.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Least-squares fit restricted to `support`; `None` when `A_S` is rank
/// deficient or the fit does not reach the feasibility tolerance.
fn fit_on_support<Op: LinearOperator>(
    op: &Op,
    b: &DVector<f64>,
    support: &[usize],
    feas_tol: f64,
) -> Option<(DMatrix<f64>, Cholesky<f64, Dyn>, DVector<f64>)> {
    if support.is_empty() || support.len() > op.nrows() {
        return None;
    }
    let a_s = op.columns(support);
    let normal = a_s.tr_mul(&a_s);
    let scale = normal.diagonal().amax();
    let ch = Cholesky::new(normal)?;
    if ch.l_dirty().diagonal().iter().any(|d| *d <= 1e-6 * scale.sqrt()) {
        return None;
    }
    let x_s = ch.solve(&a_s.tr_mul(b));
    let resid = (&a_s * &x_s - b).norm();
    (resid <= feas_tol * b.norm()).then_some((a_s, ch, x_s))
}

/// Returns the certified unique minimiser supported inside `support`.
fn certify<Op: LinearOperator>(
    op: &Op,
    b: &DVector<f64>,
    support: &[usize],
    feas_tol: f64,
) -> Option<DVector<f64>> {
    // unique sparse minimisers sit well below m nonzeros; larger supports
    // are not worth a factorisation
    if 2 * support.len() > op.nrows() {
        return None;
    }
    let (mut a_s, mut ch, mut x_s) = fit_on_support(op, b, support, feas_tol)?;
    let mut support = support.to_vec();
    let peak = x_s.amax();
    if x_s.iter().any(|v| v.abs() <= PRUNE_RATIO * peak) {
        support = support
            .iter()
            .zip(x_s.iter())
            .filter(|(_, v)| v.abs() > PRUNE_RATIO * peak)
            .map(|(i, _)| *i)
            .collect();
        (a_s, ch, x_s) = fit_on_support(op, b, &support, feas_tol)?;
    }

    let signs = x_s.map(f64::signum);
    let w = &a_s * ch.solve(&signs);
    let mut corr = DVector::zeros(op.ncols());
    op.apply_transpose_into(&w, &mut corr);
    let mut on_support = vec![false; op.ncols()];
    for &i in &support {
        on_support[i] = true;
    }
    let strict = corr
        .iter()
        .zip(&on_support)
        .filter(|(_, on)| !**on)
        .all(|(c, _)| c.abs() < 1.0 - CERTIFICATE_MARGIN);
    if !strict {
        return None;
    }
    let mut x = DVector::zeros(op.ncols());
    for (&i, v) in support.iter().zip(x_s.iter()) {
        x[i] = *v;
    }
    Some(x)
}

fn relative_residual<Op: LinearOperator>(op: &Op, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let mut ax = DVector::zeros(op.nrows());
    op.apply_into(x, &mut ax);
    (ax - y).norm() / y.norm().max(f64::MIN_POSITIVE)
}

pub(crate) fn solve<Op: LinearOperator>(
    op: &Op,
    y: &DVector<f64>,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    opts.validate()?;
    crate::error::check_dim(op.nrows(), y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("measurement vector contains non-finite values".into()));
    }
    let (m, n) = (op.nrows(), op.ncols());
    let y_norm = y.norm();
    if y_norm == 0.0 {
        return Ok(RecoveryResult {
            coefficients: DVector::zeros(n),
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    let scale = y_norm / (m as f64).sqrt();
    let b = y / scale;
    let mut rho = opts.penalty_parameter;
    let tol = opts.convergence_tolerance;

    let mut proj = Projector::new(op, b.clone());
    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    let mut u = DVector::<f64>::zeros(n);
    let mut v = DVector::zeros(n);
    let mut last_support: Vec<usize> = Vec::new();
    let mut criterion_met = false;
    let mut certified: Option<DVector<f64>> = None;
    let mut iterations = 0;

    for it in 1..=opts.max_iterations {
        iterations = it;
        v.copy_from(&z);
        v -= &u;
        proj.project(&v, &mut x);

        let kappa = 1.0 / rho;
        let mut r2 = 0.0;
        let mut s2 = 0.0;
        for i in 0..n {
            let vi = x[i] + u[i];
            let zi = soft_threshold(vi, kappa);
            let dz = zi - z[i];
            s2 += dz * dz;
            z[i] = zi;
            u[i] = vi - zi;
            let d = x[i] - zi;
            r2 += d * d;
        }
        let eps_pri = tol * (1.0 + x.norm().max(z.norm()));
        let eps_dual = tol * (1.0 + rho * u.norm());
        let (r, s) = (r2.sqrt(), rho * s2.sqrt());
        criterion_met = r <= eps_pri && s <= eps_dual;
        // u is the scaled dual, so it moves inversely to ρ
        let adapt = it <= PENALTY_ADAPT_ITERATIONS;
        if adapt && r > PENALTY_RATIO * s && rho < PENALTY_BOUNDS.1 {
            rho *= PENALTY_STEP;
            u /= PENALTY_STEP;
        } else if adapt && s > PENALTY_RATIO * r && rho > PENALTY_BOUNDS.0 {
            rho /= PENALTY_STEP;
            u *= PENALTY_STEP;
        }

        if criterion_met || it % CERTIFICATE_INTERVAL == 0 {
            let support = support_of(&z);
            if support != last_support {
                certified = certify(op, &b, &support, opts.feasibility_tolerance);
                last_support = support;
            }
        }
        if certified.is_some() || criterion_met {
            break;
        }
    }

    let mut best = match certified {
        Some(c) => {
            criterion_met = true;
            c
        }
        None => {
            // A feasible sparse refit on z's support never raises the objective.
            let support = support_of(&z);
            match fit_on_support(op, &b, &support, opts.feasibility_tolerance) {
                Some((_, _, x_s)) if x_s.lp_norm(1) <= x.lp_norm(1) => {
                    let mut polished = DVector::zeros(n);
                    for (&i, val) in support.iter().zip(x_s.iter()) {
                        polished[i] = *val;
                    }
                    polished
                }
                _ => x,
            }
        }
    };
    best *= scale;
    let residual = relative_residual(op, &best, y);
    Ok(RecoveryResult {
        coefficients: best,
        residual,
        iterations,
        converged: criterion_met && residual <= opts.feasibility_tolerance,
    })
}
