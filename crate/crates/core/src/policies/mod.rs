//! Bandit policies behind a single interface: the two slack-regularized
//! exponential-weights algorithms and the Exp2, Exp3, Exp3.P and CombBand
//! baselines.

mod baselines;
mod estimator;
mod extended;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{combband_exploration, Exp2, Exp3, Exp3P, Exploration, EXP3P_CONFIDENCE};
pub use estimator::{covariance_of, estimate_loss, CovarianceState, PINV_CUTOFF};
pub use extended::{extended_exp2_step, extended_exp_step, ExtendedExp, ExtendedExp2, PolicyState};

use crate::action_space::ActionSet;
use crate::error::{Error, Result};
use crate::nnmf::NnmfConfig;
use crate::scalar::{is_simplex, Scalar};
use crate::slack::SIMPLEX_TOL;

/// RNG stream handed to policies for their internal randomization.
pub type PolicyRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[value(name = "extexp")]
    ExtendedExp,
    #[value(name = "extexp2")]
    ExtendedExp2,
    Exp2,
    Exp3,
    Exp3p,
    Combband,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::ExtendedExp,
        PolicyKind::ExtendedExp2,
        PolicyKind::Exp2,
        PolicyKind::Exp3,
        PolicyKind::Exp3p,
        PolicyKind::Combband,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ExtendedExp => "extexp",
            PolicyKind::ExtendedExp2 => "extexp2",
            PolicyKind::Exp2 => "exp2",
            PolicyKind::Exp3 => "exp3",
            PolicyKind::Exp3p => "exp3p",
            PolicyKind::Combband => "combband",
        }
    }

    /// Exp3 and Exp3.P only make sense on the canonical basis.
    pub fn needs_canonical_basis(self) -> bool {
        matches!(self, PolicyKind::Exp3 | PolicyKind::Exp3p)
    }
}

/// Which hyperplane value the estimated-loss algorithm measures slack against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SlackReference {
    /// `a_tᵀ l̃_t`, the reconstructed loss of the played action.
    #[default]
    Estimated,
    /// `a_tᵀ l_t`, the scalar actually observed.
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Learning rate; `None` selects `sqrt(2 ln N / (T N))`.
    pub eta: Option<f64>,
    /// Mixing coefficient; `None` selects `min(1, sqrt(N ln N / T))`.
    pub alpha: Option<f64>,
    pub nnmf: NnmfConfig,
    pub slack_reference: SlackReference,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            eta: None,
            alpha: None,
            nnmf: NnmfConfig::default(),
            slack_reference: SlackReference::default(),
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn resolved_eta(&self, n_actions: usize, horizon: usize) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(n_actions, horizon))
    }

    pub fn resolved_alpha(&self, n_actions: usize, horizon: usize) -> f64 {
        self.alpha
            .unwrap_or_else(|| default_alpha(n_actions, horizon))
    }

    pub fn validate(&self, actions: &ActionSet) -> Result<()> {
        if self.kind.needs_canonical_basis() && !actions.is_canonical_basis() {
            return Err(Error::UnsupportedActionSet(format!(
                "{} requires the canonical basis action set",
                self.kind.name()
            )));
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0) || !eta.is_finite() {
                return Err(Error::Config(format!(
                    "eta = {eta} must be finite and >= 0"
                )));
            }
        }
        if let Some(alpha) = self.alpha {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Config(format!("alpha = {alpha} must lie in [0, 1]")));
            }
        }
        let n = &self.nnmf;
        if !(n.tol > 0.0) || n.restarts == 0 || n.max_iter == 0 || n.window == 0 {
            return Err(Error::Config(
                "nnmf needs tol > 0, restarts >= 1, max_iter >= 1, window >= 1".into(),
            ));
        }
        if n.r_max == Some(0) || !(n.stop_tol >= 0.0) {
            return Err(Error::Config(
                "nnmf needs r_max >= 1 and stop_tol >= 0".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_eta(n_actions: usize, horizon: usize) -> f64 {
    let n = n_actions as f64;
    (2.0 * n.ln() / (horizon.max(1) as f64 * n)).sqrt()
}

pub fn default_alpha(n_actions: usize, horizon: usize) -> f64 {
    let n = n_actions as f64;
    (n * n.ln() / horizon.max(1) as f64).sqrt().min(1.0)
}

/// Per-round factorization diagnostics from the slack-based algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundDiagnostics<T> {
    pub rank: usize,
    pub rel_error: Option<T>,
    pub entropy: Option<T>,
    pub log_support: Option<T>,
    pub weights: Vec<T>,
}

/// A learner that maintains a play distribution and updates from bandit feedback.
pub trait Policy<T: Scalar>: Send {
    fn kind(&self) -> PolicyKind;

    /// Distribution the next action is drawn from.
    fn distribution(&self) -> &[T];

    /// Exploration distribution `x` currently mixed into the play distribution.
    fn exploration(&self) -> &[T];

    fn alpha(&self) -> T;

    /// Feed back the scalar loss `a_playedᵀ l_t` of the action just played.
    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        rng: &mut PolicyRng,
    ) -> Result<()>;

    fn diagnostics(&self) -> Option<RoundDiagnostics<T>> {
        None
    }
}

/// Instantiate the policy described by `cfg` for a game of `horizon` rounds.
pub fn build_policy<T: Scalar>(
    cfg: &PolicyConfig,
    actions: &ActionSet,
    horizon: usize,
) -> Result<Box<dyn Policy<T>>> {
    cfg.validate(actions)?;
    let n = actions.len();
    let eta = T::of(cfg.resolved_eta(n, horizon));
    let alpha = T::of(cfg.resolved_alpha(n, horizon));
    Ok(match cfg.kind {
        PolicyKind::ExtendedExp => Box::new(ExtendedExp::new(actions, eta, alpha, cfg.nnmf)),
        PolicyKind::ExtendedExp2 => Box::new(ExtendedExp2::new(
            actions,
            eta,
            alpha,
            cfg.nnmf,
            cfg.slack_reference,
        )?),
        PolicyKind::Exp2 => Box::new(Exp2::new(actions, eta, alpha, Exploration::Uniform)?),
        PolicyKind::Combband => Box::new(Exp2::new(actions, eta, alpha, Exploration::Coverage)?),
        PolicyKind::Exp3 => Box::new(Exp3::new(actions, eta, alpha)?),
        PolicyKind::Exp3p => Box::new(Exp3P::new(
            actions,
            eta,
            alpha,
            horizon,
            T::of(EXP3P_CONFIDENCE),
        )?),
    })
}

/// `p = α x + (1 − α) w`.
pub fn mix_distribution<T: Scalar>(w: &[T], x: &[T], alpha: T) -> Result<Vec<T>> {
    if w.len() != x.len() {
        return Err(Error::Shape(format!(
            "weights of length {} against exploration of length {}",
            w.len(),
            x.len()
        )));
    }
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Contract(format!(
            "mixing coefficient {alpha} outside [0, 1]"
        )));
    }
    if !is_simplex(w, SIMPLEX_TOL) || !is_simplex(x, SIMPLEX_TOL) {
        return Err(Error::Contract(
            "mixing inputs must lie on the simplex".into(),
        ));
    }
    let keep = T::one() - alpha;
    Ok(w.iter()
        .zip(x)
        .map(|(&wi, &xi)| alpha * xi + keep * wi)
        .collect())
}

/// Normalized `exp(sign · η · scores)`, shifted by the extreme score.
pub(crate) fn softmax<T: Scalar>(scores: &[T], eta: T, sign: T) -> Vec<T> {
    let logits: Vec<T> = scores.iter().map(|&s| sign * eta * s).collect();
    let top = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut w: Vec<T> = logits.iter().map(|&v| (v - top).exp()).collect();
    let z: T = w.iter().copied().sum();
    for v in &mut w {
        *v = *v / z;
    }
    w
}
