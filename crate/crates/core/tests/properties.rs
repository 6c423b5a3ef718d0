mod common;

use extbandit::linalg::matrix_rank;
use extbandit::nnmf::{factorize_with, RunOptions};
use extbandit::policies::PolicyRng;
use extbandit::slack::slack_row;
use extbandit::{
    build_policy, exp_weight_update, min_nonneg_rank, mix_distribution, rank_one_components,
    ActionSet, Matrix, PolicyConfig, PolicyKind, SlackWeightMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let z: f64 = v.iter().sum();
        v.into_iter().map(|x| x / z).collect()
    })
}

fn nonneg_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(0.0f64..1.0, r * c)
            .prop_map(move |data| Matrix::from_vec(r, c, data).unwrap())
    })
}

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_update_stays_on_simplex(
        (p, s) in (1usize..12).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.0f64..3.0, n))),
        eta in 0.0f64..5.0,
    ) {
        let w = exp_weight_update(&p, &s, eta).unwrap();
        prop_assert!((sum(&w) - 1.0).abs() <= 1e-9);
        prop_assert!(w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn smaller_slack_never_loses_relative_weight(
        (p, s) in (2usize..10).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.0f64..3.0, n))),
        eta in 0.01f64..3.0,
    ) {
        let w = exp_weight_update(&p, &s, eta).unwrap();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if s[i] <= s[j] {
                    prop_assert!(w[i] / p[i] >= w[j] / p[j] * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn raising_one_slack_never_raises_its_weight(
        (p, s) in (2usize..10).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.0f64..3.0, n))),
        eta in 0.01f64..3.0,
        bump in 0.0f64..2.0,
        pick in any::<prop::sample::Index>(),
    ) {
        let i = pick.index(p.len());
        let before = exp_weight_update(&p, &s, eta).unwrap();
        let mut raised = s.clone();
        raised[i] += bump;
        let after = exp_weight_update(&p, &raised, eta).unwrap();
        prop_assert!(after[i] <= before[i] * (1.0 + 1e-12));
    }

    #[test]
    fn scaling_eta_and_slacks_inversely_is_invisible(
        (p, s) in (1usize..10).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.0f64..3.0, n))),
        eta in 0.05f64..3.0,
        c in 0.1f64..10.0,
    ) {
        let a = exp_weight_update(&p, &s, eta).unwrap();
        let scaled: Vec<f64> = s.iter().map(|v| v * c).collect();
        let b = exp_weight_update(&p, &scaled, eta / c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_slack_shift_is_invisible(
        (p, s) in (1usize..10).prop_flat_map(|n| (simplex(n), prop::collection::vec(0.0f64..3.0, n))),
        eta in 0.05f64..3.0,
        shift in 0.0f64..50.0,
    ) {
        let a = exp_weight_update(&p, &s, eta).unwrap();
        let shifted: Vec<f64> = s.iter().map(|v| v + shift).collect();
        let b = exp_weight_update(&p, &shifted, eta).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixing_respects_the_exploration_floor(
        (w, x) in (1usize..12).prop_flat_map(|n| (simplex(n), simplex(n))),
        alpha in 0.0f64..=1.0,
    ) {
        let p = mix_distribution(&w, &x, alpha).unwrap();
        let floor = alpha * x.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((sum(&p) - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|&v| v >= floor * (1.0 - 1e-12)));
    }

    #[test]
    fn slacks_are_nonnegative_and_zero_at_the_played_action_for_exact_feedback(
        bits in prop::collection::vec(any::<bool>(), 1..8),
        loss in prop::collection::vec(0.0f64..1.0, 8),
    ) {
        let d = bits.len();
        let set = ActionSet::hypercube(d, 16).unwrap();
        let played = set.iter().position(|a| a.bits() == bits.as_slice());
        prop_assume!(played.is_some());
        let played = played.unwrap();
        let a = set.get(played);
        let h = a.dot(&loss[..d]);
        let s = slack_row(a, h, &set);
        prop_assert!(s.iter().all(|&v| v >= 0.0));
        // The hyperplane through a·a with h = |a| pins the played action.
        let s_self = slack_row(a, a.cardinality() as f64, &set);
        prop_assert!(s_self[played].abs() == 0.0);
    }

    #[test]
    fn slack_matrix_rows_stay_on_simplex(
        rows in (1usize..8).prop_flat_map(|n| prop::collection::vec(simplex(n), 1..20)),
        window in 1usize..6,
    ) {
        let n = rows[0].len();
        let mut m = SlackWeightMatrix::new(n, Some(window));
        for r in &rows {
            m.append(r).unwrap();
        }
        prop_assert_eq!(m.n_rows(), rows.len());
        prop_assert_eq!(m.retained(), rows.len().min(window));
        let mat = m.to_matrix();
        for i in 0..mat.rows() {
            prop_assert!((sum(mat.row(i)) - 1.0).abs() <= 1e-9);
        }
        prop_assert_eq!(m.last_row().unwrap(), rows.last().unwrap().as_slice());
    }

    #[test]
    fn rank_one_components_sum_to_the_product(m in nonneg_matrix(8, 8), rank in 1usize..5, seed in any::<u64>()) {
        let opts = RunOptions { max_iter: 20, tol: 0.0, target: None };
        let (res, _) = factorize_with(&m, rank, opts, seed).unwrap();
        let parts = rank_one_components(&res);
        prop_assert_eq!(parts.len(), rank);
        let mut total = Matrix::zeros(m.rows(), m.cols());
        for p in &parts {
            total = total.add(p).unwrap();
        }
        prop_assert!(total.max_abs_diff(&res.reconstruct()) <= 1e-12);
    }

    #[test]
    fn multiplicative_updates_never_increase_the_error(m in nonneg_matrix(10, 10), rank in 1usize..6, seed in any::<u64>()) {
        let opts = RunOptions { max_iter: 200, tol: f64::NEG_INFINITY, target: None };
        let (_, history) = factorize_with(&m, rank, opts, seed).unwrap();
        for pair in history.windows(2) {
            prop_assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn products_of_rank_r_factors_need_at_most_r(
        r in 1usize..=4,
        rows in 1usize..=8,
        cols in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let mut rng = common::rng(seed);
        let draw = |n: usize, rng: &mut _| (0..n).map(|_| rand::Rng::gen_range(rng, 0.1..1.0)).collect::<Vec<f64>>();
        let left = Matrix::from_vec(rows, r, draw(rows * r, &mut rng)).unwrap();
        let right = Matrix::from_vec(r, cols, draw(r * cols, &mut rng)).unwrap();
        let m = left.matmul(&right).unwrap();
        // Ill-conditioned products converge slowly under multiplicative
        // updates; the budget is generous and plateaued runs stop early.
        let found = min_nonneg_rank(&m, 1e-4, r + 1, 5, seed, 1_000_000, 1e-13).unwrap();
        prop_assert!(found.rank <= r, "found {} for a rank-{} product", found.rank, r);
        prop_assert!(found.best.unwrap().rel_error <= 1e-4);
    }

    #[test]
    fn looser_tolerance_never_needs_a_larger_rank(m in nonneg_matrix(6, 6), seed in any::<u64>()) {
        let tight = min_nonneg_rank(&m, 1e-3, 6, 2, seed, 400, 1e-7).unwrap();
        let loose = min_nonneg_rank(&m, 1e-1, 6, 2, seed, 400, 1e-7).unwrap();
        prop_assert!(loose.rank <= tight.rank);
    }

    #[test]
    fn hypercube_enumeration_is_deterministic(d in 1usize..12, max_n in 1usize..64) {
        let a = ActionSet::hypercube(d, max_n).unwrap();
        let b = ActionSet::hypercube(d, max_n).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), max_n.min((1usize << d) - 1));
        prop_assert!(a.iter().all(|x| x.cardinality() >= 1));
    }

    #[test]
    fn policies_emit_distributions(
        kind_idx in 0usize..6,
        seed in any::<u64>(),
        loss in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let kind = PolicyKind::ALL[kind_idx];
        let actions = ActionSet::canonical_basis(3).unwrap();
        let mut cfg = PolicyConfig::new(kind).with_alpha(0.2);
        cfg.nnmf.max_iter = 50;
        let mut policy = build_policy::<f64>(&cfg, &actions, 50).unwrap();
        let mut rng = PolicyRng::seed_from_u64(seed);
        for t in 0..8 {
            let k = t % 3;
            policy.update(&actions, k, loss[k], &mut rng).unwrap();
            let p = policy.distribution();
            prop_assert!((sum(p) - 1.0).abs() <= 1e-9);
            prop_assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}

#[test]
fn canonical_basis_has_full_rank() {
    for d in 1..=32 {
        let set = ActionSet::canonical_basis(d).unwrap();
        assert_eq!(set.dimensional_rank(), d);
        assert_eq!(matrix_rank(&set.to_matrix::<f64>(), 1e-10), d);
    }
}
