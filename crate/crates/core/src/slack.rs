//! Slack regularity and the slack-weight matrix built from per-round weights.

use std::collections::VecDeque;

use crate::action_space::{Action, ActionSet};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{is_simplex, Scalar};

/// Tolerance on `Σ p = 1` for inputs and stored rows.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// `|a_playᵀ l − a_playᵀ a_ref|`: how far `a_ref` sits from the hyperplane
/// the observed loss induces along the played action.
pub fn slack_regularity<T: Scalar>(a_play: &Action, loss: &[T], a_ref: &Action) -> Result<T> {
    let d = a_play.dim();
    if loss.len() != d || a_ref.dim() != d {
        return Err(Error::Shape(format!(
            "played action has dimension {d}, loss {}, reference {}",
            loss.len(),
            a_ref.dim()
        )));
    }
    Ok((a_play.dot(loss) - T::of_usize(a_play.overlap(a_ref))).abs())
}

/// Slacks `|h − a_playᵀ a_i|` of every action against the hyperplane value `h`
/// (`h = a_playᵀ l` or its estimate).
pub fn slack_row<T: Scalar>(a_play: &Action, hyperplane: T, actions: &ActionSet) -> Vec<T> {
    actions
        .iter()
        .map(|a| (hyperplane - T::of_usize(a_play.overlap(a))).abs())
        .collect()
}

/// `w_i = p_i e^{−η s_i} / Σ_j p_j e^{−η s_j}`.
///
/// The smallest slack on the support of `p` is subtracted before
/// exponentiation; the result is unchanged and the normaliser stays ≥ that
/// entry's probability.
pub fn exp_weight_update<T: Scalar>(p: &[T], slacks: &[T], eta: T) -> Result<Vec<T>> {
    if p.len() != slacks.len() {
        return Err(Error::Shape(format!(
            "{} probabilities against {} slacks",
            p.len(),
            slacks.len()
        )));
    }
    if !is_simplex(p, SIMPLEX_TOL) {
        return Err(Error::Contract(
            "weight update needs p on the simplex".into(),
        ));
    }
    if slacks.iter().any(|s| !(*s >= T::zero()) || !s.is_finite()) {
        return Err(Error::Contract(
            "slacks must be finite and non-negative".into(),
        ));
    }
    if !(eta >= T::zero()) || !eta.is_finite() {
        return Err(Error::Contract(format!("learning rate {eta} must be >= 0")));
    }
    let shift = p
        .iter()
        .zip(slacks)
        .filter(|(pi, _)| **pi > T::zero())
        .map(|(_, &s)| s)
        .fold(T::infinity(), T::min);
    let mut w: Vec<T> = p
        .iter()
        .zip(slacks)
        .map(|(&pi, &s)| {
            if pi > T::zero() {
                pi * (-eta * (s - shift)).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let z: T = w.iter().copied().sum();
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::Underflow("all exponential weights vanished".into()));
    }
    for v in &mut w {
        *v = *v / z;
    }
    Ok(w)
}

/// Rows of normalized weight vectors, one per round, optionally restricted to
/// the most recent `window` rounds.
#[derive(Debug, Clone)]
pub struct SlackWeightMatrix<T> {
    n_actions: usize,
    window: Option<usize>,
    rows: VecDeque<Vec<T>>,
    appended: usize,
}

impl<T: Scalar> SlackWeightMatrix<T> {
    pub fn new(n_actions: usize, window: Option<usize>) -> Self {
        Self {
            n_actions,
            window: window.filter(|&w| w > 0),
            rows: VecDeque::new(),
            appended: 0,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Total rounds recorded, including rows that slid out of the window.
    pub fn n_rows(&self) -> usize {
        self.appended
    }

    pub fn retained(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn last_row(&self) -> Option<&[T]> {
        self.rows.back().map(Vec::as_slice)
    }

    pub fn append(&mut self, w: &[T]) -> Result<()> {
        if w.len() != self.n_actions {
            return Err(Error::Shape(format!(
                "row of length {} for {} actions",
                w.len(),
                self.n_actions
            )));
        }
        if !is_simplex(w, SIMPLEX_TOL) {
            return Err(Error::Contract(
                "slack-weight rows must be normalized weight vectors".into(),
            ));
        }
        self.rows.push_back(w.to_vec());
        self.appended += 1;
        if let Some(cap) = self.window {
            while self.rows.len() > cap {
                self.rows.pop_front();
            }
        }
        Ok(())
    }

    /// Retained rows as a dense matrix.
    pub fn to_matrix(&self) -> Matrix<T> {
        let rows: Vec<&[T]> = self.rows.iter().map(Vec::as_slice).collect();
        if rows.is_empty() {
            return Matrix::zeros(0, self.n_actions);
        }
        Matrix::from_rows(&rows).expect("rows share a length")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn act(bits: &[u8]) -> Action {
        Action::new(bits.iter().map(|&b| b == 1).collect())
    }

    #[test]
    fn slack_examples() {
        let s = slack_regularity(&act(&[1, 0]), &[1.0, 0.0], &act(&[1, 0])).unwrap();
        assert_eq!(s, 0.0);
        let s = slack_regularity(&act(&[1, 1, 0]), &[0.0; 3], &act(&[0, 0, 0])).unwrap();
        assert_eq!(s, 0.0);
        let s: f64 =
            slack_regularity(&act(&[1, 0, 1]), &[0.2, 0.9, 0.4], &act(&[1, 1, 0])).unwrap();
        assert!((s - 0.4).abs() < 1e-12);
        assert!(matches!(
            slack_regularity(&act(&[1, 0]), &[0.1, 0.2, 0.3], &act(&[1, 0])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn weight_update_examples() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(exp_weight_update(&p, &[0.4, 1.0, 2.0], 0.0).unwrap(), p);
        let w: Vec<f64> = exp_weight_update(&p, &[0.7; 3], 3.0).unwrap();
        for (a, b) in w.iter().zip(&p) {
            assert!((a - b).abs() < 1e-15);
        }
        let w = exp_weight_update(&[0.5, 0.5], &[0.0, 2f64.ln()], 1.0).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weight_update_survives_huge_slacks() {
        let w = exp_weight_update(&[0.5, 0.5], &[1e6, 1e6 + 1.0], 1.0).unwrap();
        assert!((w[0] - 1.0 / (1.0 + (-1f64).exp())).abs() < 1e-12);
        // zero-probability entries cannot set the shift
        let w = exp_weight_update(&[0.0, 1.0], &[0.0, 1e5], 1.0).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
    }

    #[test]
    fn weight_update_contracts() {
        assert!(matches!(
            exp_weight_update(&[0.5, 0.6], &[0.0, 0.0], 1.0),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            exp_weight_update(&[0.5, 0.5], &[0.0], 1.0),
            Err(Error::Shape(_))
        ));
        assert!(exp_weight_update(&[0.5, 0.5], &[-1.0, 0.0], 1.0).is_err());
        assert!(exp_weight_update(&[0.5, 0.5], &[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn matrix_append_and_window() {
        let mut m = SlackWeightMatrix::new(3, None);
        m.append(&[1.0 / 3.0; 3]).unwrap();
        assert_eq!(m.n_rows(), 1);
        assert_eq!(m.to_matrix().shape(), (1, 3));
        m.append(&[0.5, 0.25, 0.25]).unwrap();
        let mat = m.to_matrix();
        assert_eq!(mat.row(0), &[1.0 / 3.0; 3]);
        assert_eq!(mat.row(1), &[0.5, 0.25, 0.25]);
        assert!(matches!(
            m.append(&[0.5, 0.5, 0.5]),
            Err(Error::Contract(_))
        ));
        assert!(matches!(m.append(&[0.5, 0.5]), Err(Error::Shape(_))));

        let mut w = SlackWeightMatrix::new(2, Some(2));
        for k in 0..5 {
            let a = k as f64 / 10.0;
            w.append(&[a, 1.0 - a]).unwrap();
        }
        assert_eq!(w.n_rows(), 5);
        assert_eq!(w.retained(), 2);
        assert_eq!(w.row(0), &[0.3, 0.7]);
    }
}
