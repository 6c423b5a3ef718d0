//! Seeded games between a policy and an adversary, prefix pseudo-regret, and
//! replication across seeds.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::action_space::ActionSet;
use crate::adversary::{Adversary, AdversaryConfig, LossVector};
use crate::error::{Error, Result};
use crate::policies::{build_policy, Policy, PolicyConfig, PolicyRng, RoundDiagnostics};
use crate::scalar::Scalar;

/// Everything needed to play one game, shared by all replicas.
#[derive(Debug, Clone)]
pub struct Experiment<T> {
    pub policy: PolicyConfig,
    pub adversary: AdversaryConfig<T>,
    pub actions: Arc<ActionSet>,
    pub horizon: usize,
    /// Record per-round factorization diagnostics for the first replica.
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub struct GameRecord<T> {
    pub chosen: Vec<usize>,
    /// `a_{chosen[t]}ᵀ loss_log[t]`
    pub scalar_losses: Vec<T>,
    pub loss_log: Vec<LossVector<T>>,
    pub cum_loss: Vec<T>,
    pub seed: u64,
    /// Filled only when tracing was requested and the policy reports diagnostics.
    pub diagnostics: Vec<RoundDiagnostics<T>>,
}

impl<T> GameRecord<T> {
    pub fn horizon(&self) -> usize {
        self.chosen.len()
    }
}

/// Mean and standard deviation of cumulative pseudo-regret per round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries<T> {
    pub mean: Vec<T>,
    /// Sample standard deviation across replicas (0 for a single replica).
    pub std: Vec<T>,
    pub n_runs: usize,
}

impl<T: Scalar> RegretSeries<T> {
    pub fn final_mean(&self) -> T {
        *self.mean.last().expect("non-empty series")
    }

    pub fn final_std(&self) -> T {
        *self.std.last().expect("non-empty series")
    }

    /// Standard error of the final mean.
    pub fn final_stderr(&self) -> T {
        self.final_std() / T::of_usize(self.n_runs).sqrt()
    }
}

/// Output of [`run_replicated`]: the aggregate and the per-replica series it came from.
#[derive(Debug, Clone)]
pub struct Replicated<T> {
    pub series: RegretSeries<T>,
    pub per_replica: Vec<Vec<T>>,
    pub seeds: Vec<u64>,
    pub trace: Vec<RoundDiagnostics<T>>,
}

/// Independent streams for action sampling, the policy and the adversary.
struct Streams {
    play: ChaCha8Rng,
    policy: PolicyRng,
    adversary: u64,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        Self {
            play: ChaCha8Rng::seed_from_u64(master.gen()),
            policy: PolicyRng::seed_from_u64(master.gen()),
            adversary: master.gen(),
        }
    }
}

/// Inverse-CDF draw from `p`.
pub fn sample_index<T: Scalar, R: Rng + ?Sized>(p: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &pi) in p.iter().enumerate() {
        let pi = pi.as_f64();
        if pi > 0.0 {
            last_positive = i;
            acc += pi;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Play `horizon` rounds of `policy` against an adversary built from `adversary`.
pub fn run_game_with<T: Scalar>(
    policy: &mut dyn Policy<T>,
    adversary: &AdversaryConfig<T>,
    actions: &ActionSet,
    horizon: usize,
    seed: u64,
    trace: bool,
) -> Result<GameRecord<T>> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon(
            "a game needs at least one round".into(),
        ));
    }
    if adversary.dim() != actions.dim() {
        return Err(Error::Config(format!(
            "adversary produces {}-dimensional losses for {}-dimensional actions",
            adversary.dim(),
            actions.dim()
        )));
    }
    if policy.distribution().len() != actions.len() {
        return Err(Error::Config(format!(
            "policy covers {} actions, action set has {}",
            policy.distribution().len(),
            actions.len()
        )));
    }
    let mut streams = Streams::new(seed);
    let mut adv = Adversary::new(adversary.clone(), streams.adversary);
    let mut rec = GameRecord {
        chosen: Vec::with_capacity(horizon),
        scalar_losses: Vec::with_capacity(horizon),
        loss_log: Vec::with_capacity(horizon),
        cum_loss: Vec::with_capacity(horizon),
        seed,
        diagnostics: Vec::new(),
    };
    let mut total = T::zero();
    let mut last = None;
    for round in 1..=horizon {
        let idx = sample_index(policy.distribution(), &mut streams.play);
        let loss = adv.next_loss(round, last)?;
        let scalar = actions.get(idx).dot(loss.as_slice());
        policy.update(actions, idx, scalar, &mut streams.policy)?;
        if trace {
            if let Some(d) = policy.diagnostics() {
                rec.diagnostics.push(d);
            }
        }
        total = total + scalar;
        rec.chosen.push(idx);
        rec.scalar_losses.push(scalar);
        rec.loss_log.push(loss);
        rec.cum_loss.push(total);
        last = Some(idx);
    }
    Ok(rec)
}

/// Build the configured policy and play one game.
pub fn run_game<T: Scalar>(exp: &Experiment<T>, seed: u64) -> Result<GameRecord<T>> {
    let mut policy = build_policy::<T>(&exp.policy, &exp.actions, exp.horizon)?;
    run_game_with(
        policy.as_mut(),
        &exp.adversary,
        &exp.actions,
        exp.horizon,
        seed,
        exp.trace,
    )
}

/// Cumulative pseudo-regret at every prefix: the player's cumulative loss minus
/// the best single action's cumulative loss over the same prefix.
pub fn pseudo_regret<T: Scalar>(rec: &GameRecord<T>, actions: &ActionSet) -> Vec<T> {
    let mut cum_vector = vec![T::zero(); actions.dim()];
    let mut played = T::zero();
    rec.loss_log
        .iter()
        .zip(&rec.scalar_losses)
        .map(|(loss, &s)| {
            for (c, &v) in cum_vector.iter_mut().zip(loss.as_slice()) {
                *c = *c + v;
            }
            played = played + s;
            let best = actions
                .iter()
                .map(|a| a.dot(&cum_vector))
                .fold(T::infinity(), T::min);
            played - best
        })
        .collect()
}

/// Per-round mean and sample standard deviation, accumulated in replica order.
pub fn aggregate<T: Scalar>(per_replica: &[Vec<T>]) -> RegretSeries<T> {
    let n = per_replica.len();
    let len = per_replica.first().map_or(0, Vec::len);
    let nt = T::of_usize(n);
    let mut mean = vec![T::zero(); len];
    let mut std = vec![T::zero(); len];
    for t in 0..len {
        let m = per_replica
            .iter()
            .map(|r| r[t])
            .fold(T::zero(), |a, b| a + b)
            / nt;
        mean[t] = m;
        if n > 1 {
            let ss = per_replica
                .iter()
                .map(|r| (r[t] - m) * (r[t] - m))
                .fold(T::zero(), |a, b| a + b);
            std[t] = (ss / T::of_usize(n - 1)).sqrt();
        }
    }
    RegretSeries {
        mean,
        std,
        n_runs: n,
    }
}

/// Run `n_runs` games with seeds `base_seed..base_seed + n_runs` on up to
/// `parallelism` threads (0 = all cores) and aggregate their regret.
pub fn run_replicated<T: Scalar>(
    exp: &Experiment<T>,
    n_runs: usize,
    base_seed: u64,
    parallelism: usize,
) -> Result<Replicated<T>> {
    if n_runs == 0 {
        return Err(Error::Config("at least one replica is required".into()));
    }
    exp.policy.validate(&exp.actions)?;
    let seeds: Vec<u64> = (0..n_runs as u64)
        .map(|k| base_seed.wrapping_add(k))
        .collect();
    let one = |k: usize, seed: u64| -> Result<(Vec<T>, Vec<RoundDiagnostics<T>>)> {
        let mut e = exp.clone();
        e.trace = exp.trace && k == 0;
        let rec = run_game(&e, seed)?;
        Ok((pseudo_regret(&rec, &exp.actions), rec.diagnostics))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(k, &s)| one(k, s))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut trace = Vec::new();
    let mut per_replica = Vec::with_capacity(n_runs);
    for (k, (series, diag)) in results.into_iter().enumerate() {
        if k == 0 {
            trace = diag;
        }
        per_replica.push(series);
    }
    Ok(Replicated {
        series: aggregate(&per_replica),
        per_replica,
        seeds,
        trace,
    })
}
