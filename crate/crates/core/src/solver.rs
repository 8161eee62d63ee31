//! Dense direct solves with diagnostics.

use crate::error::{Error, Result};
use crate::linalg::{norm2, CMatrix, ConditionEstimate, Lu};
use crate::scalar::{Real, C};
use serde::{Deserialize, Serialize};

/// Condition number above which a system is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Diagnostics of a linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub unknowns: usize,
    /// `‖A x − b‖ / ‖b‖` (zero for a zero right-hand side).
    pub relative_residual: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub condition: f64,
}

/// Factorizes `a`, estimates its conditioning and solves `a x = b`.
pub fn solve_dense<T: Real>(a: &CMatrix<T>, b: &[C<T>]) -> Result<(Vec<C<T>>, SolveReport)> {
    let lu = Lu::factor(a)?;
    let est = ConditionEstimate::compute(a, &lu);
    let condition = est.condition().to_f64_lossy();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::Solver {
            message: format!("system of size {} is ill-conditioned", a.rows()),
            condition,
        });
    }
    let x = lu.solve(b);
    let r = crate::linalg::sub_vec(&a.matvec(&x), b);
    let bn = norm2(b);
    let relative_residual = if bn > T::zero() {
        (norm2(&r) / bn).to_f64_lossy()
    } else {
        norm2(&r).to_f64_lossy()
    };
    Ok((
        x,
        SolveReport {
            unknowns: a.rows(),
            relative_residual,
            sigma_max: est.sigma_max.to_f64_lossy(),
            sigma_min: est.sigma_min.to_f64_lossy(),
            condition,
        },
    ))
}
