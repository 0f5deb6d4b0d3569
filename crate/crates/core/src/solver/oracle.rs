use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Largest problem the exhaustive search accepts.
pub const ORACLE_MAX_N: usize = 16;
pub const ORACLE_MAX_SPARSITY: usize = 3;
/// Residual below which a support is considered to explain the data.
pub const ORACLE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub support: Vec<usize>,
    pub coefficients: DVector<f64>,
    pub residual: f64,
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Exhaustive ℓ0 search: the sparsest support of size `<= s_max` whose
/// least-squares fit reaches a residual of at most [`ORACLE_RESIDUAL`].
/// Ties go to the smaller residual, then the lexicographically smaller
/// support.
pub fn l0_oracle(a: &DMatrix<f64>, y: &DVector<f64>, s_max: usize) -> Result<Option<OracleSolution>> {
    let (m, n) = a.shape();
    check_dim(m, y.len())?;
    if n > ORACLE_MAX_N || s_max > ORACLE_MAX_SPARSITY {
        return Err(Error::Parameter(format!(
            "exhaustive search limited to n <= {ORACLE_MAX_N} and s <= {ORACLE_MAX_SPARSITY} (got n={n}, s={s_max})"
        )));
    }
    let tol = ORACLE_RESIDUAL;
    if y.norm() <= tol {
        return Ok(Some(OracleSolution {
            support: Vec::new(),
            coefficients: DVector::zeros(n),
            residual: y.norm(),
        }));
    }

    for k in 1..=s_max.min(n) {
        let mut best: Option<(f64, Vec<usize>, DVector<f64>)> = None;
        combinations(n, k, &mut |support| {
            let a_s = a.select_columns(support);
            let Ok(x_s) = a_s.clone().svd(true, true).solve(y, 1e-12) else {
                return;
            };
            let resid = (&a_s * &x_s - y).norm();
            if resid > tol {
                return;
            }
            // strict comparison keeps the lexicographically first support
            if best.as_ref().is_none_or(|(r, _, _)| resid < *r) {
                best = Some((resid, support.to_vec(), x_s));
            }
        });
        if let Some((residual, support, x_s)) = best {
            let mut coefficients = DVector::zeros(n);
            for (&i, v) in support.iter().zip(x_s.iter()) {
                coefficients[i] = *v;
            }
            return Ok(Some(OracleSolution {
                support,
                coefficients,
                residual,
            }));
        }
    }
    Ok(None)
}
