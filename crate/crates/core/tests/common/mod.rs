//! Fixtures and independent oracles shared by the integration suites.
#![allow(dead_code)]

use extbandit::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point of the open simplex (normalized exponentials).
pub fn random_simplex(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / z).collect()
}

/// Slack matrix of the regular hexagon, computed from its vertices and facet
/// inequalities `⟨n_j, x⟩ ≤ 1` rather than typed in.
///
/// Entry `(i, j)` is `1 − ⟨n_j, v_i⟩` rescaled so the largest slack is 2,
/// giving the integer circulant with rows `0 0 1 2 2 1` up to rotation.
pub fn hexagon_slack_matrix() -> Matrix<f64> {
    use std::f64::consts::PI;
    let vertices: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let t = k as f64 * PI / 3.0;
            (t.cos(), t.sin())
        })
        .collect();
    // Facet j joins vertices j−1 and j; its outer normal bisects them and the
    // apothem of a unit hexagon is cos(π/6).
    let apothem = (PI / 6.0).cos();
    let normals: Vec<(f64, f64)> = (0..6)
        .map(|j| {
            let t = (j as f64 - 1.0) * PI / 3.0 + PI / 6.0;
            (t.cos() / apothem, t.sin() / apothem)
        })
        .collect();
    let raw: Vec<Vec<f64>> = vertices
        .iter()
        .map(|&(x, y)| {
            normals
                .iter()
                .map(|&(a, b)| 1.0 - (a * x + b * y))
                .collect()
        })
        .collect();
    let top = raw.iter().flatten().copied().fold(0.0, f64::max);
    let rows: Vec<Vec<f64>> = raw
        .iter()
        .map(|r| r.iter().map(|v| (2.0 * v / top).round() + 0.0).collect())
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

/// Oracle for the two-arm Extended Exp replay: the slack of arm `i` after
/// playing `k` with observed loss `c` is `|c − [i == k]|`, and with α = 0 the
/// play distribution is the normalized `w ∘ exp(−η s)`.
pub fn extended_exp_two_arm_oracle(plays: &[usize], loss: [f64; 2], eta: f64) -> Vec<[f64; 2]> {
    let mut w = [0.5, 0.5];
    let mut out = Vec::new();
    for &k in plays {
        let c = loss[k];
        let s = [(c - f64::from(k == 0)).abs(), (c - f64::from(k == 1)).abs()];
        let u = [w[0] * (-eta * s[0]).exp(), w[1] * (-eta * s[1]).exp()];
        let z = u[0] + u[1];
        w = [u[0] / z, u[1] / z];
        out.push(w);
    }
    out
}

/// Oracle for two-arm Exp3: importance-weighted cumulative losses, Gibbs
/// weights, uniform mixing. Returns `(weights, play)` after each round.
pub fn exp3_two_arm_oracle(
    plays: &[usize],
    loss: [f64; 2],
    eta: f64,
    alpha: f64,
) -> Vec<([f64; 2], [f64; 2])> {
    let mut cum = [0.0, 0.0];
    let mut p = [0.5, 0.5];
    let mut out = Vec::new();
    for &k in plays {
        cum[k] += loss[k] / p[k];
        let e = [(-eta * cum[0]).exp(), (-eta * cum[1]).exp()];
        let w = [e[0] / (e[0] + e[1]), e[1] / (e[0] + e[1])];
        p = [
            alpha * 0.5 + (1.0 - alpha) * w[0],
            alpha * 0.5 + (1.0 - alpha) * w[1],
        ];
        out.push((w, p));
    }
    out
}

/// `(x + 10) / 20` evaluated in exact rational arithmetic on the integer and
/// hundredths parts of a Jester rating with two decimals.
pub fn jester_scale_oracle(hundredths: i64) -> f64 {
    (hundredths + 1000) as f64 / 2000.0
}
