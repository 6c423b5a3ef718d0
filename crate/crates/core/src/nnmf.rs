//! Non-negative factorization of the slack-weight matrix by Lee–Seung
//! multiplicative updates, a restart-based minimum-rank search, and the
//! rank-1 decomposition used to draw exploration distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Knobs for the factorization used inside the learning loop.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NnmfConfig {
    /// Acceptance threshold on relative reconstruction error for the rank search.
    pub tol: f64,
    /// Largest rank tried; `None` means `2d`.
    pub r_max: Option<usize>,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop a run when the relative error improves by less than this between iterations.
    pub stop_tol: f64,
    /// Number of most recent rounds of the slack-weight matrix that are factorized.
    pub window: usize,
}

impl Default for NnmfConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            r_max: None,
            restarts: 3,
            max_iter: 500,
            stop_tol: 1e-4,
            window: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NnmfResult<T> {
    /// m × r
    pub left: Matrix<T>,
    /// r × N
    pub right: Matrix<T>,
    pub rank: usize,
    /// ‖M − left·right‖_F / ‖M‖_F, defined as 0 for an all-zero `M`.
    pub rel_error: T,
    pub iterations: usize,
}

impl<T: Scalar> NnmfResult<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        self.left
            .matmul(&self.right)
            .expect("factor shapes agree by construction")
    }
}

/// One draw of the exploration step: a component and the action distribution
/// it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationSample<T> {
    pub component_index: usize,
    pub gamma: Vec<T>,
    /// Actions with strictly positive `gamma`.
    pub support: Vec<usize>,
}

impl<T: Scalar> ExplorationSample<T> {
    /// `log |S|`
    pub fn log_support(&self) -> T {
        T::of_usize(self.support.len()).ln()
    }
}

/// Stopping rules for a single multiplicative-update run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions<T> {
    pub max_iter: usize,
    /// Minimum per-iteration improvement of the relative error.
    pub tol: T,
    /// Stop as soon as the relative error falls to or below this value.
    pub target: Option<T>,
}

fn check_nonnegative<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::Shape(format!(
            "cannot factorize a {:?} matrix",
            m.shape()
        )));
    }
    if let Some(v) = m
        .as_slice()
        .iter()
        .find(|v| !(**v >= T::zero()) || !v.is_finite())
    {
        return Err(Error::Domain(format!(
            "matrix entry {v} is not a finite non-negative value"
        )));
    }
    Ok(())
}

/// Factorize `m ≈ left · right` at rank `rank`, starting from seeded uniform
/// factors and stopping after `max_iter` iterations or once the relative error
/// improves by less than `tol`.
pub fn factorize<T: Scalar>(
    m: &Matrix<T>,
    rank: usize,
    tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<NnmfResult<T>> {
    factorize_with(
        m,
        rank,
        RunOptions {
            max_iter,
            tol,
            target: None,
        },
        seed,
    )
    .map(|(res, _)| res)
}

/// As [`factorize`], also returning the relative error after every iteration
/// (index 0 is the error of the initial factors).
pub fn factorize_with<T: Scalar>(
    m: &Matrix<T>,
    rank: usize,
    opts: RunOptions<T>,
    seed: u64,
) -> Result<(NnmfResult<T>, Vec<T>)> {
    check_nonnegative(m)?;
    if rank == 0 {
        return Err(Error::InvalidDimension(
            "factorization rank must be >= 1".into(),
        ));
    }
    if opts.max_iter == 0 {
        return Err(Error::Contract("max_iter must be >= 1".into()));
    }
    let (rows, cols) = m.shape();
    let norm = m.frobenius_norm();
    if norm == T::zero() {
        let res = NnmfResult {
            left: Matrix::zeros(rows, rank),
            right: Matrix::zeros(rank, cols),
            rank,
            rel_error: T::zero(),
            iterations: 0,
        };
        return Ok((res, vec![T::zero()]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = m.as_slice().iter().copied().sum::<T>() / T::of_usize(rows * cols);
    let scale = (mean / T::of_usize(rank)).sqrt();
    // (0, 1]
    let mut draw = || T::of(1.0 - rng.gen::<f64>()) * scale;
    let mut left = Matrix::zeros(rows, rank);
    for i in 0..rows {
        for k in 0..rank {
            left[(i, k)] = draw();
        }
    }
    let mut right = Matrix::zeros(rank, cols);
    for k in 0..rank {
        for j in 0..cols {
            right[(k, j)] = draw();
        }
    }

    let mut ws = Workspace::new(rows, cols, rank);
    let mut err = ws.rel_error(m, &left, &right, norm);
    let mut history = vec![err];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if opts.target.is_some_and(|t| err <= t) {
            break;
        }
        ws.step(m, &mut left, &mut right);
        iterations += 1;
        let next = ws.rel_error(m, &left, &right, norm);
        history.push(next);
        let improvement = err - next;
        err = next;
        if improvement < opts.tol {
            break;
        }
    }
    Ok((
        NnmfResult {
            left,
            right,
            rank,
            rel_error: err,
            iterations,
        },
        history,
    ))
}

/// Scratch buffers for one multiplicative-update run.
struct Workspace<T> {
    ltm: Matrix<T>,
    ltl: Matrix<T>,
    denom_right: Matrix<T>,
    mrt: Matrix<T>,
    rrt: Matrix<T>,
    denom_left: Matrix<T>,
    recon: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    fn new(rows: usize, cols: usize, rank: usize) -> Self {
        Self {
            ltm: Matrix::zeros(rank, cols),
            ltl: Matrix::zeros(rank, rank),
            denom_right: Matrix::zeros(rank, cols),
            mrt: Matrix::zeros(rows, rank),
            rrt: Matrix::zeros(rank, rank),
            denom_left: Matrix::zeros(rows, rank),
            recon: vec![T::zero(); cols],
        }
    }

    /// `R ← R ⊙ (LᵀM + ε)/(LᵀLR + ε)` then `L ← L ⊙ (MRᵀ + ε)/(LRRᵀ + ε)`.
    fn step(&mut self, m: &Matrix<T>, left: &mut Matrix<T>, right: &mut Matrix<T>) {
        let eps = T::tiny();
        let rows = m.rows();
        let rank = left.cols();

        // right update
        zero(&mut self.ltm);
        zero(&mut self.ltl);
        for i in 0..rows {
            let li = left.row(i);
            let mi = m.row(i);
            for (k, &lik) in li.iter().enumerate() {
                if lik != T::zero() {
                    axpy(self.ltm.row_mut(k), lik, mi);
                    axpy(self.ltl.row_mut(k), lik, li);
                }
            }
        }
        zero(&mut self.denom_right);
        for k in 0..rank {
            let out = self.denom_right.row_mut(k);
            for q in 0..rank {
                axpy(out, self.ltl[(k, q)], right.row(q));
            }
        }
        for k in 0..rank {
            let num = self.ltm.row(k);
            let den = self.denom_right.row(k);
            for ((r, &n), &d) in right.row_mut(k).iter_mut().zip(num).zip(den) {
                *r = flush(*r * (n + eps) / (d + eps), eps);
            }
        }

        // left update
        for k in 0..rank {
            for q in k..rank {
                let v = crate::scalar::dot(right.row(k), right.row(q));
                self.rrt[(k, q)] = v;
                self.rrt[(q, k)] = v;
            }
        }
        for i in 0..rows {
            let mi = m.row(i);
            let out = self.mrt.row_mut(i);
            for (k, o) in out.iter_mut().enumerate() {
                *o = crate::scalar::dot(mi, right.row(k));
            }
        }
        zero(&mut self.denom_left);
        for i in 0..rows {
            let out = self.denom_left.row_mut(i);
            for (q, &liq) in left.row(i).iter().enumerate() {
                axpy(out, liq, self.rrt.row(q));
            }
        }
        for i in 0..rows {
            let num = self.mrt.row(i);
            let den = self.denom_left.row(i);
            for ((l, &n), &d) in left.row_mut(i).iter_mut().zip(num).zip(den) {
                *l = flush(*l * (n + eps) / (d + eps), eps);
            }
        }
    }

    fn rel_error(&mut self, m: &Matrix<T>, left: &Matrix<T>, right: &Matrix<T>, norm: T) -> T {
        let mut sq = T::zero();
        for i in 0..m.rows() {
            self.recon.fill(T::zero());
            for (k, &lik) in left.row(i).iter().enumerate() {
                if lik != T::zero() {
                    axpy(&mut self.recon, lik, right.row(k));
                }
            }
            for (&a, &b) in self.recon.iter().zip(m.row(i)) {
                let d = a - b;
                sq = sq + d * d;
            }
        }
        sq.sqrt() / norm
    }
}

/// Entries that decayed below ε are zeroed; left alone they drift into
/// subnormals, which stalls converged-but-stuck runs by orders of magnitude.
fn flush<T: Scalar>(v: T, eps: T) -> T {
    if v < eps {
        T::zero()
    } else {
        v
    }
}

fn zero<T: Scalar>(m: &mut Matrix<T>) {
    for i in 0..m.rows() {
        m.row_mut(i).fill(T::zero());
    }
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + a * xi;
    }
}

fn restart_seed(seed: u64, rank: usize, restart: usize) -> u64 {
    seed ^ ((rank as u64) << 32 | restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Outcome of the minimum-rank search.
#[derive(Debug, Clone)]
pub struct RankSearch<T> {
    pub rank: usize,
    /// Best factorization found at `rank`; `None` for an all-zero matrix.
    pub best: Option<NnmfResult<T>>,
}

/// Smallest `r ≤ r_max` at which the best of `restarts` seeded runs reaches
/// relative error `≤ tol`; `r_max` if none does, 0 for an all-zero matrix.
///
/// This is a heuristic upper bound on the non-negative rank, not an exact value.
pub fn min_nonneg_rank<T: Scalar>(
    m: &Matrix<T>,
    tol: T,
    r_max: usize,
    restarts: usize,
    seed: u64,
    max_iter: usize,
    stop_tol: T,
) -> Result<RankSearch<T>> {
    check_nonnegative(m)?;
    if r_max == 0 {
        return Err(Error::InvalidDimension("r_max must be >= 1".into()));
    }
    if m.frobenius_norm() == T::zero() {
        return Ok(RankSearch {
            rank: 0,
            best: None,
        });
    }
    let opts = RunOptions {
        max_iter,
        tol: stop_tol,
        target: Some(tol),
    };
    let mut best_at_max = None;
    for r in 1..=r_max {
        let mut best: Option<NnmfResult<T>> = None;
        for k in 0..restarts.max(1) {
            let (res, _) = factorize_with(m, r, opts, restart_seed(seed, r, k))?;
            let done = res.rel_error <= tol;
            if best.as_ref().is_none_or(|b| res.rel_error < b.rel_error) {
                best = Some(res);
            }
            if done {
                return Ok(RankSearch { rank: r, best });
            }
        }
        if r == r_max {
            best_at_max = best;
        }
    }
    Ok(RankSearch {
        rank: r_max,
        best: best_at_max,
    })
}

/// `P_k = left[:, k] ⊗ right[k, :]` for every component; they sum to `left·right`.
pub fn rank_one_components<T: Scalar>(res: &NnmfResult<T>) -> Vec<Matrix<T>> {
    (0..res.rank)
        .map(|k| Matrix::outer(&res.left.column(k), res.right.row(k)))
        .collect()
}

/// Draw a component uniformly among those with positive mass and normalize its
/// row of `right` into a distribution over actions.
pub fn sample_exploration<T: Scalar, R: Rng + ?Sized>(
    res: &NnmfResult<T>,
    rng: &mut R,
) -> Result<ExplorationSample<T>> {
    let sums: Vec<T> = (0..res.rank)
        .map(|k| res.right.row(k).iter().copied().sum())
        .collect();
    let eligible: Vec<usize> = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > T::zero() && s.is_finite())
        .map(|(k, _)| k)
        .collect();
    if eligible.is_empty() {
        return Err(Error::DegenerateFactorization);
    }
    let component_index = eligible[rng.gen_range(0..eligible.len())];
    let total = sums[component_index];
    let gamma: Vec<T> = res
        .right
        .row(component_index)
        .iter()
        .map(|&v| v / total)
        .collect();
    let support = gamma
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > T::zero())
        .map(|(i, _)| i)
        .collect();
    Ok(ExplorationSample {
        component_index,
        gamma,
        support,
    })
}

/// Shannon entropy of `gamma` in nats; never exceeds `log |S|`.
pub fn exploration_entropy<T: Scalar>(sample: &ExplorationSample<T>) -> T {
    sample
        .gamma
        .iter()
        .filter(|g| **g > T::zero())
        .map(|&g| -g * g.ln())
        .sum()
}
