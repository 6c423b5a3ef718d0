//! Second-moment matrix of the play distribution and the pseudo-inverse loss
//! estimator built on it.

use crate::action_space::{Action, ActionSet};
use crate::error::{Error, Result};
use crate::linalg::{pinv_symmetric, Matrix};
use crate::scalar::{is_simplex, Scalar};
use crate::slack::SIMPLEX_TOL;

/// Eigenvalues at or below this fraction of the largest are dropped from the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct CovarianceState<T> {
    /// `Σ_i p_i a_i a_iᵀ`
    pub matrix: Matrix<T>,
    pub pinv: Matrix<T>,
    pub rank: usize,
}

/// `P = Σ_i p_i a_i a_iᵀ` and its pseudo-inverse.
pub fn covariance_of<T: Scalar>(p: &[T], actions: &ActionSet) -> Result<CovarianceState<T>> {
    if p.len() != actions.len() {
        return Err(Error::Shape(format!(
            "{} probabilities for {} actions",
            p.len(),
            actions.len()
        )));
    }
    if !is_simplex(p, SIMPLEX_TOL) {
        return Err(Error::Contract("covariance needs p on the simplex".into()));
    }
    let d = actions.dim();
    let mut matrix = Matrix::zeros(d, d);
    let mut support = Vec::with_capacity(d);
    for (a, &pi) in actions.iter().zip(p) {
        if pi == T::zero() {
            continue;
        }
        support.clear();
        support.extend(a.support());
        for &i in &support {
            for &j in &support {
                matrix[(i, j)] = matrix[(i, j)] + pi;
            }
        }
    }
    let (pinv, rank) = pinv_symmetric(&matrix, T::of(PINV_CUTOFF))?;
    Ok(CovarianceState { matrix, pinv, rank })
}

/// `l̃ = P⁺ a (aᵀ l)` from the scalar feedback `aᵀ l` alone.
pub fn estimate_loss<T: Scalar>(
    cov: &CovarianceState<T>,
    played: &Action,
    scalar_loss: T,
) -> Vec<T> {
    let d = played.dim();
    let mut out = vec![T::zero(); d];
    if scalar_loss == T::zero() {
        return out;
    }
    for j in played.support() {
        for (i, o) in out.iter_mut().enumerate() {
            *o = *o + cov.pinv[(i, j)];
        }
    }
    for o in &mut out {
        *o = *o * scalar_loss;
    }
    out
}
