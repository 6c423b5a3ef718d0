//! Slack-regularized exponential weights.
//!
//! Each round every action is charged its slack against the hyperplane the
//! feedback induces along the played action, the play distribution is
//! reweighted by `exp(−η · slack)`, and the new weight vector is appended to the
//! slack-weight matrix. That matrix is factorized non-negatively; the plain
//! variant tracks its (heuristic) minimum rank, the sampling variant draws a
//! rank-1 component and explores along its action profile.

use rand::Rng;

use super::estimator::{covariance_of, estimate_loss, CovarianceState};
use super::{mix_distribution, Policy, PolicyKind, PolicyRng, RoundDiagnostics, SlackReference};
use crate::action_space::ActionSet;
use crate::error::{Error, Result};
use crate::nnmf::{
    exploration_entropy, factorize, min_nonneg_rank, sample_exploration, NnmfConfig,
};
use crate::scalar::{uniform, Scalar};
use crate::slack::{exp_weight_update, slack_row, SlackWeightMatrix};

#[derive(Debug, Clone)]
pub struct PolicyState<T> {
    pub weights: Vec<T>,
    pub play: Vec<T>,
    /// Exploration distribution mixed into `play`.
    pub exploration: Vec<T>,
    pub eta: T,
    pub alpha: T,
    /// Current non-negative rank used for the factorization.
    pub rank: usize,
    pub delta: usize,
    pub slack_matrix: SlackWeightMatrix<T>,
    pub round: usize,
    pub last_rel_error: Option<T>,
    pub last_entropy: Option<T>,
    pub last_log_support: Option<T>,
}

impl<T: Scalar> PolicyState<T> {
    /// Uniform start; the rank starts at the dimensional rank δ.
    pub fn new(actions: &ActionSet, eta: T, alpha: T, window: usize) -> Self {
        let n = actions.len();
        let u = uniform::<T>(n);
        Self {
            weights: u.clone(),
            play: u.clone(),
            exploration: u,
            eta,
            alpha,
            rank: actions.dimensional_rank(),
            delta: actions.dimensional_rank(),
            slack_matrix: SlackWeightMatrix::new(n, Some(window)),
            round: 0,
            last_rel_error: None,
            last_entropy: None,
            last_log_support: None,
        }
    }

    fn diagnostics(&self) -> RoundDiagnostics<T> {
        RoundDiagnostics {
            rank: self.rank,
            rel_error: self.last_rel_error,
            entropy: self.last_entropy,
            log_support: self.last_log_support,
            weights: self.weights.clone(),
        }
    }
}

fn check_played(actions: &ActionSet, played: usize) -> Result<()> {
    if played >= actions.len() {
        return Err(Error::Shape(format!(
            "played index {played} outside {} actions",
            actions.len()
        )));
    }
    Ok(())
}

/// One round of the plain algorithm: slack against the observed scalar,
/// exponential reweighting, rank search on the windowed slack-weight matrix,
/// uniform mixing.
pub fn extended_exp_step<T: Scalar>(
    state: &mut PolicyState<T>,
    actions: &ActionSet,
    played: usize,
    observed: T,
    cfg: &NnmfConfig,
    rng: &mut PolicyRng,
) -> Result<()> {
    check_played(actions, played)?;
    let slacks = slack_row(actions.get(played), observed, actions);
    let w = exp_weight_update(&state.play, &slacks, state.eta)?;
    state.slack_matrix.append(&w)?;

    let r_max = cfg.r_max.unwrap_or(2 * actions.dim());
    let search = min_nonneg_rank(
        &state.slack_matrix.to_matrix(),
        T::of(cfg.tol),
        r_max,
        cfg.restarts,
        rng.gen(),
        cfg.max_iter,
        T::of(cfg.stop_tol),
    )?;
    state.rank = search.rank;
    state.last_rel_error = search.best.map(|b| b.rel_error);

    state.exploration = uniform(actions.len());
    state.play = mix_distribution(&w, &state.exploration, state.alpha)?;
    state.weights = w;
    state.round += 1;
    Ok(())
}

/// One round of the sampling algorithm: estimate the loss vector through the
/// covariance pseudo-inverse, reweight by slack against `a_tᵀ l̃_t` (or the
/// observed scalar), factorize the windowed slack-weight matrix at the current
/// rank, explore along a uniformly drawn rank-1 component, and refresh the
/// covariance.
#[allow(clippy::too_many_arguments)]
pub fn extended_exp2_step<T: Scalar>(
    state: &mut PolicyState<T>,
    cov: &mut CovarianceState<T>,
    actions: &ActionSet,
    played: usize,
    observed: T,
    cfg: &NnmfConfig,
    reference: SlackReference,
    rng: &mut PolicyRng,
) -> Result<()> {
    check_played(actions, played)?;
    let a = actions.get(played);
    let hyperplane = match reference {
        SlackReference::Estimated => a.dot(&estimate_loss(cov, a, observed)),
        SlackReference::Observed => observed,
    };
    let slacks = slack_row(a, hyperplane, actions);
    let w = exp_weight_update(&state.play, &slacks, state.eta)?;
    state.slack_matrix.append(&w)?;

    let res = factorize(
        &state.slack_matrix.to_matrix(),
        state.rank,
        T::of(cfg.tol),
        cfg.max_iter,
        rng.gen(),
    )?;
    state.last_rel_error = Some(res.rel_error);
    match sample_exploration(&res, rng) {
        Ok(sample) => {
            state.last_entropy = Some(exploration_entropy(&sample));
            state.last_log_support = Some(sample.log_support());
            state.exploration = sample.gamma;
        }
        Err(Error::DegenerateFactorization) => {
            log::warn!(
                "round {}: degenerate factorization, exploring uniformly",
                state.round + 1
            );
            state.last_entropy = None;
            state.last_log_support = None;
            state.exploration = uniform(actions.len());
        }
        Err(e) => return Err(e),
    }

    state.play = mix_distribution(&w, &state.exploration, state.alpha)?;
    state.weights = w;
    *cov = covariance_of(&state.play, actions)?;
    state.round += 1;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ExtendedExp<T> {
    pub state: PolicyState<T>,
    cfg: NnmfConfig,
}

impl<T: Scalar> ExtendedExp<T> {
    pub fn new(actions: &ActionSet, eta: T, alpha: T, cfg: NnmfConfig) -> Self {
        Self {
            state: PolicyState::new(actions, eta, alpha, cfg.window),
            cfg,
        }
    }
}

impl<T: Scalar> Policy<T> for ExtendedExp<T> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::ExtendedExp
    }

    fn distribution(&self) -> &[T] {
        &self.state.play
    }

    fn exploration(&self) -> &[T] {
        &self.state.exploration
    }

    fn alpha(&self) -> T {
        self.state.alpha
    }

    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        rng: &mut PolicyRng,
    ) -> Result<()> {
        extended_exp_step(&mut self.state, actions, played, observed, &self.cfg, rng)
    }

    fn diagnostics(&self) -> Option<RoundDiagnostics<T>> {
        Some(self.state.diagnostics())
    }
}

#[derive(Debug, Clone)]
pub struct ExtendedExp2<T> {
    pub state: PolicyState<T>,
    pub cov: CovarianceState<T>,
    cfg: NnmfConfig,
    reference: SlackReference,
}

impl<T: Scalar> ExtendedExp2<T> {
    pub fn new(
        actions: &ActionSet,
        eta: T,
        alpha: T,
        cfg: NnmfConfig,
        reference: SlackReference,
    ) -> Result<Self> {
        let state = PolicyState::new(actions, eta, alpha, cfg.window);
        let cov = covariance_of(&state.play, actions)?;
        Ok(Self {
            state,
            cov,
            cfg,
            reference,
        })
    }
}

impl<T: Scalar> Policy<T> for ExtendedExp2<T> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::ExtendedExp2
    }

    fn distribution(&self) -> &[T] {
        &self.state.play
    }

    fn exploration(&self) -> &[T] {
        &self.state.exploration
    }

    fn alpha(&self) -> T {
        self.state.alpha
    }

    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        rng: &mut PolicyRng,
    ) -> Result<()> {
        extended_exp2_step(
            &mut self.state,
            &mut self.cov,
            actions,
            played,
            observed,
            &self.cfg,
            self.reference,
            rng,
        )
    }

    fn diagnostics(&self) -> Option<RoundDiagnostics<T>> {
        Some(self.state.diagnostics())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_action_stays_certain() {
        let set = ActionSet::canonical_basis(1).unwrap();
        let mut rng = PolicyRng::seed_from_u64(0);
        let mut a = ExtendedExp::new(&set, 1.0, 0.3, NnmfConfig::default());
        let mut b = ExtendedExp2::new(
            &set,
            1.0,
            0.3,
            NnmfConfig::default(),
            SlackReference::Estimated,
        )
        .unwrap();
        for _ in 0..5 {
            a.update(&set, 0, 0.4, &mut rng).unwrap();
            b.update(&set, 0, 0.4, &mut rng).unwrap();
            assert_eq!(a.distribution(), &[1.0]);
            assert_eq!(b.distribution(), &[1.0]);
        }
    }

    #[test]
    fn equal_slacks_leave_weights_alone() {
        // route sets where both actions overlap the played one equally
        let set = ActionSet::from_routes(&[vec![0, 1], vec![0, 2]], 3).unwrap();
        let mut rng = PolicyRng::seed_from_u64(1);
        let mut s = PolicyState::new(&set, 1.0f64, 0.0, 64);
        s.play = vec![0.3, 0.7];
        // played action 0 with observed 1.5: slacks |1.5-2| and |1.5-1| are both 0.5
        extended_exp_step(&mut s, &set, 0, 1.5, &NnmfConfig::default(), &mut rng).unwrap();
        assert!((s.weights[0] - 0.3).abs() < 1e-15 && (s.weights[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range_play() {
        let set = ActionSet::canonical_basis(2).unwrap();
        let mut rng = PolicyRng::seed_from_u64(1);
        let mut p = ExtendedExp::new(&set, 1.0f64, 0.1, NnmfConfig::default());
        assert!(p.update(&set, 5, 0.1, &mut rng).is_err());
    }
}
