//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar usable by the bandit, factorization and linear-algebra code.
///
/// Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`. Every constant used in this crate is representable.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Threshold added to multiplicative-update numerators and denominators.
    fn tiny() -> Self {
        Self::min_positive_value().sqrt()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `Σ a_i b_i` over two equally long slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Returns `true` when `p` is entrywise non-negative and sums to one within `tol`.
pub fn is_simplex<T: Scalar>(p: &[T], tol: f64) -> bool {
    if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < T::zero()) {
        return false;
    }
    let s: T = p.iter().copied().sum();
    (s.as_f64() - 1.0).abs() <= tol
}

/// Uniform distribution over `n` outcomes.
pub fn uniform<T: Scalar>(n: usize) -> Vec<T> {
    let v = T::one() / T::of_usize(n);
    vec![v; n]
}
