//! Loss generation for the game: oblivious (fixed or i.i.d. uniform) and
//! dataset-driven reactive adversaries.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action_space::ActionSet;
use crate::error::{Error, Result};
use crate::io::RatingsMatrix;
use crate::scalar::Scalar;

/// A per-round loss vector with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector<T>(Vec<T>);

impl<T: Scalar> LossVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension(
                "loss vector must be non-empty".into(),
            ));
        }
        if let Some((j, v)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::Domain(format!(
                "loss entry {j} = {v} outside [0, 1]"
            )));
        }
        Ok(Self(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> AsRef<[T]> for LossVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

/// How an adversary produces losses; cheap to clone and share between replicas.
#[derive(Debug, Clone)]
pub enum AdversaryConfig<T> {
    /// The same loss vector every round.
    Fixed(LossVector<T>),
    /// Fresh i.i.d. uniform `[0,1]^d` losses each round.
    Stochastic { dim: usize },
    /// Row `(last_action + round) mod U` of a ratings matrix.
    Dataset(Arc<RatingsMatrix<T>>),
}

impl<T: Scalar> AdversaryConfig<T> {
    pub fn dim(&self) -> usize {
        match self {
            AdversaryConfig::Fixed(l) => l.dim(),
            AdversaryConfig::Stochastic { dim } => *dim,
            AdversaryConfig::Dataset(r) => r.items(),
        }
    }

    pub fn is_oblivious(&self) -> bool {
        !matches!(self, AdversaryConfig::Dataset(_))
    }
}

/// Per-replica adversary state.
#[derive(Debug, Clone)]
pub struct Adversary<T> {
    config: AdversaryConfig<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Adversary<T> {
    pub fn new(config: AdversaryConfig<T>, seed: u64) -> Self {
        Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &AdversaryConfig<T> {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Loss for `round` (1-based). Dataset adversaries need the previous action
    /// from round 2 on; oblivious ones ignore it.
    pub fn next_loss(&mut self, round: usize, last_action: Option<usize>) -> Result<LossVector<T>> {
        if round == 0 {
            return Err(Error::Protocol("rounds are numbered from 1".into()));
        }
        match &self.config {
            AdversaryConfig::Fixed(l) => Ok(l.clone()),
            AdversaryConfig::Stochastic { dim } => {
                let entries = (0..*dim).map(|_| T::of(self.rng.gen::<f64>())).collect();
                LossVector::new(entries)
            }
            AdversaryConfig::Dataset(ratings) => {
                let last = match (last_action, round) {
                    (Some(i), _) => i,
                    (None, 1) => 0,
                    (None, _) => {
                        return Err(Error::Protocol(format!(
                            "dataset adversary needs the previous action at round {round}"
                        )))
                    }
                };
                let row = (last + round) % ratings.users();
                LossVector::new(ratings.row(row).to_vec())
            }
        }
    }
}

/// `min_a Σ_t aᵀ l_t` over the realized loss log, by enumeration.
pub fn best_fixed_action_value<T: Scalar>(actions: &ActionSet, log: &[LossVector<T>]) -> Result<T> {
    if log.is_empty() {
        return Err(Error::InvalidHorizon("loss log is empty".into()));
    }
    let d = actions.dim();
    let mut totals = vec![T::zero(); d];
    for l in log {
        if l.dim() != d {
            return Err(Error::Shape(format!(
                "loss of dimension {} against actions of dimension {d}",
                l.dim()
            )));
        }
        for (t, &v) in totals.iter_mut().zip(l.as_slice()) {
            *t = *t + v;
        }
    }
    Ok(actions
        .iter()
        .map(|a| a.dot(&totals))
        .fold(T::infinity(), T::min))
}
