//! Combinatorial action sets: binary incidence vectors over `{0,1}^d`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{matrix_rank, Matrix};
use crate::scalar::Scalar;

/// Relative singular-value cutoff used for the dimensional rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Binary incidence vector of one action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Action {
    bits: Vec<bool>,
}

impl Action {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_support(dim: usize, support: &[usize]) -> Self {
        let mut bits = vec![false; dim];
        for &j in support {
            bits[j] = true;
        }
        Self { bits }
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Indices of the non-zero entries.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(j, &b)| b.then_some(j))
    }

    pub fn cardinality(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `aᵀ v`
    pub fn dot<T: Scalar>(&self, v: &[T]) -> T {
        debug_assert_eq!(v.len(), self.bits.len());
        self.support()
            .map(|j| v[j])
            .fold(T::zero(), |acc, x| acc + x)
    }

    /// `aᵀ b` for another incidence vector.
    pub fn overlap(&self, other: &Action) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(&x, &y)| x && y)
            .count()
    }

    pub fn to_vec<T: Scalar>(&self) -> Vec<T> {
        self.bits
            .iter()
            .map(|&b| if b { T::one() } else { T::zero() })
            .collect()
    }
}

/// An ordered, duplicate-free set of `N` actions sharing dimension `d`.
///
/// Immutable after construction; replicas share it by reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    actions: Vec<Action>,
    dim: usize,
    rank: usize,
}

impl ActionSet {
    /// Validates and wraps a list of actions.
    pub fn new(actions: Vec<Action>) -> Result<Self> {
        let dim = actions
            .first()
            .map(Action::dim)
            .ok_or_else(|| Error::InvalidDimension("action set must not be empty".into()))?;
        if dim == 0 {
            return Err(Error::InvalidDimension("actions must have d >= 1".into()));
        }
        let mut seen = HashSet::with_capacity(actions.len());
        for (i, a) in actions.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::Shape(format!(
                    "action {i} has dimension {}, expected {dim}",
                    a.dim()
                )));
            }
            if !seen.insert(a) {
                return Err(Error::DuplicateAction(i));
            }
        }
        let rank = dimensional_rank_of(&actions, dim);
        Ok(Self { actions, dim, rank })
    }

    /// The `d` unit vectors `e_1..e_d`.
    pub fn canonical_basis(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(
                "canonical basis needs d >= 1".into(),
            ));
        }
        Self::new((0..d).map(|j| Action::from_support(d, &[j])).collect())
    }

    /// The first `min(2^d - 1, max_n)` non-zero corners of the hypercube, in
    /// binary-counting order (index `k` has bit `j` set iff coordinate `j` is 1).
    pub fn hypercube(d: usize, max_n: usize) -> Result<Self> {
        if d == 0 || max_n == 0 {
            return Err(Error::InvalidDimension(format!(
                "hypercube needs d >= 1 and max_n >= 1 (got d={d}, max_n={max_n})"
            )));
        }
        if d > 62 {
            return Err(Error::Overflow(d));
        }
        let total = (1u64 << d) - 1;
        let n = total.min(max_n as u64);
        Self::new((1..=n).map(|k| corner(d, k)).collect())
    }

    /// Canonical basis followed by the first `max_n` hypercube corners, skipping
    /// corners already present.
    pub fn basis_with_hypercube(d: usize, max_n: usize) -> Result<Self> {
        let mut actions = Self::canonical_basis(d)?.actions;
        let mut seen: HashSet<Action> = actions.iter().cloned().collect();
        for a in Self::hypercube(d, max_n)?.actions {
            if seen.insert(a.clone()) {
                actions.push(a);
            }
        }
        Self::new(actions)
    }

    /// One action per route, each route given as the edge indices it uses.
    pub fn from_routes(routes: &[Vec<usize>], d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("routes need d >= 1".into()));
        }
        if routes.is_empty() {
            return Err(Error::InvalidRoute {
                route: 0,
                reason: "no routes given".into(),
            });
        }
        let mut actions = Vec::with_capacity(routes.len());
        for (i, route) in routes.iter().enumerate() {
            if route.is_empty() {
                return Err(Error::InvalidRoute {
                    route: i,
                    reason: "route uses no edges".into(),
                });
            }
            if let Some(&bad) = route.iter().find(|&&e| e >= d) {
                return Err(Error::InvalidRoute {
                    route: i,
                    reason: format!("edge {bad} outside [0, {d})"),
                });
            }
            actions.push(Action::from_support(d, route));
        }
        Self::new(actions)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// δ: rank of the stacked N×d incidence matrix.
    pub fn dimensional_rank(&self) -> usize {
        self.rank
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn get(&self, i: usize) -> &Action {
        &self.actions[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.actions.iter()
    }

    /// True when the set is exactly `{e_1, ..., e_d}` (in any order).
    pub fn is_canonical_basis(&self) -> bool {
        self.len() == self.dim && self.actions.iter().all(|a| a.cardinality() == 1)
    }

    /// `aᵀ l` for every action.
    pub fn losses<T: Scalar>(&self, loss: &[T]) -> Vec<T> {
        self.actions.iter().map(|a| a.dot(loss)).collect()
    }

    pub fn to_matrix<T: Scalar>(&self) -> Matrix<T> {
        let rows: Vec<Vec<T>> = self.actions.iter().map(Action::to_vec).collect();
        Matrix::from_rows(&rows).expect("actions share a dimension")
    }
}

impl<'a> IntoIterator for &'a ActionSet {
    type Item = &'a Action;
    type IntoIter = std::slice::Iter<'a, Action>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}

fn corner(d: usize, k: u64) -> Action {
    Action::new((0..d).map(|j| (k >> j) & 1 == 1).collect())
}

fn dimensional_rank_of(actions: &[Action], dim: usize) -> usize {
    let rows: Vec<Vec<f64>> = actions.iter().map(Action::to_vec).collect();
    let m = Matrix::from_rows(&rows).expect("validated dimensions");
    debug_assert_eq!(m.cols(), dim);
    matrix_rank(&m, RANK_TOLERANCE)
}
