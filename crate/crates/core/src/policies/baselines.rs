//! Reference policies.
//!
//! * Exp2: exponential weights over cumulative pseudo-inverse loss estimates,
//!   mixed with uniform exploration.
//! * CombBand: the same estimator and weights, mixed with a coverage
//!   distribution induced by the action set.
//! * Exp3: importance-weighted exponential weights on the canonical basis.
//! * Exp3.P: Exp3 on gains with a confidence bonus `β / p_i` on every arm.

use super::estimator::{covariance_of, estimate_loss, CovarianceState};
use super::{mix_distribution, softmax, Policy, PolicyKind, PolicyRng};
use crate::action_space::ActionSet;
use crate::error::{Error, Result};
use crate::scalar::{uniform, Scalar};

/// Confidence level δ of the Exp3.P bonus.
pub const EXP3P_CONFIDENCE: f64 = 0.05;

/// Exploration distribution used by the combinatorial baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exploration {
    Uniform,
    /// Every covered coordinate gets equal mass, spread uniformly over the
    /// actions that contain it.
    Coverage,
}

/// `μ = mean over covered coordinates j of Uniform{i : a_i ∋ j}`.
pub fn combband_exploration<T: Scalar>(actions: &ActionSet) -> Vec<T> {
    let d = actions.dim();
    let mut counts = vec![0usize; d];
    for a in actions {
        for j in a.support() {
            counts[j] += 1;
        }
    }
    let covered = counts.iter().filter(|&&c| c > 0).count();
    let mut mu = vec![T::zero(); actions.len()];
    for (i, a) in actions.iter().enumerate() {
        for j in a.support() {
            mu[i] = mu[i] + T::one() / T::of_usize(counts[j] * covered);
        }
    }
    mu
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

fn require_basis(actions: &ActionSet, who: &str) -> Result<()> {
    if !actions.is_canonical_basis() {
        return Err(Error::UnsupportedActionSet(format!(
            "{who} requires the canonical basis action set"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Exp2<T> {
    exploration_kind: Exploration,
    eta: T,
    alpha: T,
    /// `Σ_s a_iᵀ l̃_s`
    pub cum_estimates: Vec<T>,
    pub weights: Vec<T>,
    play: Vec<T>,
    exploration: Vec<T>,
    pub cov: CovarianceState<T>,
}

impl<T: Scalar> Exp2<T> {
    pub fn new(
        actions: &ActionSet,
        eta: T,
        alpha: T,
        exploration_kind: Exploration,
    ) -> Result<Self> {
        let n = actions.len();
        let exploration = match exploration_kind {
            Exploration::Uniform => uniform(n),
            Exploration::Coverage => combband_exploration(actions),
        };
        let weights = uniform(n);
        let play = mix_distribution(&weights, &exploration, alpha)?;
        let cov = covariance_of(&play, actions)?;
        Ok(Self {
            exploration_kind,
            eta,
            alpha,
            cum_estimates: vec![T::zero(); n],
            weights,
            play,
            exploration,
            cov,
        })
    }
}

impl<T: Scalar> Policy<T> for Exp2<T> {
    fn kind(&self) -> PolicyKind {
        match self.exploration_kind {
            Exploration::Uniform => PolicyKind::Exp2,
            Exploration::Coverage => PolicyKind::Combband,
        }
    }

    fn distribution(&self) -> &[T] {
        &self.play
    }

    fn exploration(&self) -> &[T] {
        &self.exploration
    }

    fn alpha(&self) -> T {
        self.alpha
    }

    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        _rng: &mut PolicyRng,
    ) -> Result<()> {
        check_played(actions, played)?;
        let est = estimate_loss(&self.cov, actions.get(played), observed);
        for (c, a) in self.cum_estimates.iter_mut().zip(actions) {
            *c = *c + a.dot(&est);
        }
        self.weights = softmax(&self.cum_estimates, self.eta, -T::one());
        self.play = mix_distribution(&self.weights, &self.exploration, self.alpha)?;
        self.cov = covariance_of(&self.play, actions)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Exp3<T> {
    eta: T,
    alpha: T,
    /// Cumulative importance-weighted loss estimates.
    pub cum_estimates: Vec<T>,
    pub weights: Vec<T>,
    play: Vec<T>,
    exploration: Vec<T>,
}

impl<T: Scalar> Exp3<T> {
    pub fn new(actions: &ActionSet, eta: T, alpha: T) -> Result<Self> {
        require_basis(actions, "exp3")?;
        let n = actions.len();
        let weights = uniform(n);
        let exploration = uniform(n);
        let play = mix_distribution(&weights, &exploration, alpha)?;
        Ok(Self {
            eta,
            alpha,
            cum_estimates: vec![T::zero(); n],
            weights,
            play,
            exploration,
        })
    }
}

impl<T: Scalar> Policy<T> for Exp3<T> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Exp3
    }

    fn distribution(&self) -> &[T] {
        &self.play
    }

    fn exploration(&self) -> &[T] {
        &self.exploration
    }

    fn alpha(&self) -> T {
        self.alpha
    }

    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        _rng: &mut PolicyRng,
    ) -> Result<()> {
        require_basis(actions, "exp3")?;
        check_played(actions, played)?;
        self.cum_estimates[played] = self.cum_estimates[played] + observed / self.play[played];
        self.weights = softmax(&self.cum_estimates, self.eta, -T::one());
        self.play = mix_distribution(&self.weights, &self.exploration, self.alpha)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Exp3P<T> {
    eta: T,
    alpha: T,
    /// Bonus numerator `β = sqrt(ln(N/δ) / (T N))`.
    beta: T,
    /// Cumulative optimistic gain estimates.
    pub cum_gains: Vec<T>,
    pub weights: Vec<T>,
    play: Vec<T>,
    exploration: Vec<T>,
}

impl<T: Scalar> Exp3P<T> {
    pub fn new(
        actions: &ActionSet,
        eta: T,
        alpha: T,
        horizon: usize,
        confidence: T,
    ) -> Result<Self> {
        require_basis(actions, "exp3p")?;
        let n = actions.len();
        let nt = T::of_usize(n);
        let beta = ((nt / confidence).ln() / (T::of_usize(horizon.max(1)) * nt)).sqrt();
        let weights = uniform(n);
        let exploration = uniform(n);
        let play = mix_distribution(&weights, &exploration, alpha)?;
        Ok(Self {
            eta,
            alpha,
            beta,
            cum_gains: vec![T::zero(); n],
            weights,
            play,
            exploration,
        })
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

impl<T: Scalar> Policy<T> for Exp3P<T> {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Exp3p
    }

    fn distribution(&self) -> &[T] {
        &self.play
    }

    fn exploration(&self) -> &[T] {
        &self.exploration
    }

    fn alpha(&self) -> T {
        self.alpha
    }

    fn update(
        &mut self,
        actions: &ActionSet,
        played: usize,
        observed: T,
        _rng: &mut PolicyRng,
    ) -> Result<()> {
        require_basis(actions, "exp3p")?;
        check_played(actions, played)?;
        let gain = T::one() - observed;
        for (i, g) in self.cum_gains.iter_mut().enumerate() {
            let hit = if i == played { gain } else { T::zero() };
            *g = *g + (hit + self.beta) / self.play[i];
        }
        self.weights = softmax(&self.cum_gains, self.eta, T::one());
        self.play = mix_distribution(&self.weights, &self.exploration, self.alpha)?;
        Ok(())
    }
}
