//! Experiment configuration, presets, and the end-to-end run that turns a
//! configuration into a results CSV.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action_space::ActionSet;
use crate::adversary::{AdversaryConfig, LossVector};
use crate::error::{Error, Result};
use crate::harness::{run_replicated, Experiment, Replicated};
use crate::io::{self, format_significant, trace_path};
use crate::nnmf::NnmfConfig;
use crate::policies::{PolicyConfig, PolicyKind, SlackReference};

/// Seed perturbation for the fixed loss vector drawn when no loss file is given.
const FIXED_LOSS_STREAM: u64 = 0x4c4f_5353_4645_4544;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ActionsKind {
    Basis,
    Hypercube,
    Paths,
    /// Canonical basis plus the first `max_actions` hypercube corners.
    BasisHypercube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Fixed,
    Stochastic,
    Jester,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Preset {
    #[value(name = "network-d10")]
    NetworkD10,
    #[value(name = "network-d15")]
    NetworkD15,
    #[value(name = "jester-d20")]
    JesterD20,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: PolicyKind,
    pub actions: ActionsKind,
    pub dim: usize,
    /// Hypercube corners enumerated for `hypercube` / `basis-hypercube`.
    pub max_actions: usize,
    pub adversary: AdversaryKind,
    pub loss_file: Option<PathBuf>,
    pub routes_file: Option<PathBuf>,
    pub jester_file: Option<PathBuf>,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    pub nnmf: NnmfConfig,
    pub slack_reference: SlackReference,
    /// Worker threads; does not affect results.
    #[serde(skip)]
    pub threads: usize,
    pub verbose: bool,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algo: PolicyKind::ExtendedExp2,
            actions: ActionsKind::Basis,
            dim: 10,
            max_actions: 32,
            adversary: AdversaryKind::Fixed,
            loss_file: None,
            routes_file: None,
            jester_file: None,
            horizon: 1000,
            runs: 10,
            seed: 0,
            eta: None,
            alpha: None,
            nnmf: NnmfConfig::default(),
            slack_reference: SlackReference::default(),
            threads: 0,
            verbose: false,
            output: PathBuf::from("results.csv"),
        }
    }
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        let base = ExperimentConfig {
            runs: 100,
            horizon: 10_000,
            ..ExperimentConfig::default()
        };
        match self {
            Preset::NetworkD10 => ExperimentConfig {
                actions: ActionsKind::BasisHypercube,
                dim: 10,
                adversary: AdversaryKind::Fixed,
                ..base
            },
            Preset::NetworkD15 => ExperimentConfig {
                actions: ActionsKind::BasisHypercube,
                dim: 15,
                horizon: 100,
                adversary: AdversaryKind::Fixed,
                ..base
            },
            Preset::JesterD20 => ExperimentConfig {
                actions: ActionsKind::Basis,
                dim: 20,
                adversary: AdversaryKind::Jester,
                ..base
            },
        }
    }
}

/// Resolved quantities recorded next to the results.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub n_actions: usize,
    pub dimensional_rank: usize,
    pub eta: String,
    pub alpha: String,
    pub r_max: usize,
    pub seeds: Vec<u64>,
    pub fixed_loss: Option<Vec<String>>,
    pub jester_users: Option<usize>,
}

fn require_file(path: &Option<PathBuf>, flag: &str, why: &str) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| Error::Config(format!("{flag} is required {why}")))?;
    if !p.is_file() {
        return Err(Error::Config(format!(
            "{flag} {} does not exist",
            p.display()
        )));
    }
    Ok(p)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.horizon == 0 || self.runs == 0 || self.max_actions == 0 {
            return Err(Error::Config(
                "dim, horizon, runs and max-actions must all be >= 1".into(),
            ));
        }
        if self.algo.needs_canonical_basis() && self.actions != ActionsKind::Basis {
            return Err(Error::Config(format!(
                "{} requires --actions basis",
                self.algo.name()
            )));
        }
        if self.actions == ActionsKind::Paths {
            require_file(&self.routes_file, "--routes-file", "for --actions paths")?;
        }
        match self.adversary {
            AdversaryKind::Jester => {
                require_file(
                    &self.jester_file,
                    "--jester-file",
                    "for the jester adversary",
                )?;
            }
            AdversaryKind::Fixed if self.loss_file.is_some() => {
                require_file(&self.loss_file, "--loss-file", "")?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn action_set(&self) -> Result<ActionSet> {
        match self.actions {
            ActionsKind::Basis => ActionSet::canonical_basis(self.dim),
            ActionsKind::Hypercube => ActionSet::hypercube(self.dim, self.max_actions),
            ActionsKind::BasisHypercube => {
                ActionSet::basis_with_hypercube(self.dim, self.max_actions)
            }
            ActionsKind::Paths => {
                let path = require_file(&self.routes_file, "--routes-file", "for --actions paths")?;
                ActionSet::from_routes(&io::read_routes(&path)?, self.dim)
            }
        }
    }

    /// Fixed loss from `--loss-file`, or a uniform draw seeded by the base seed.
    pub fn fixed_loss(&self) -> Result<Vec<f64>> {
        match &self.loss_file {
            Some(p) => {
                let l = io::read_loss_vector(p)?;
                if l.len() != self.dim {
                    return Err(Error::Config(format!(
                        "{} holds {} losses, expected {}",
                        p.display(),
                        l.len(),
                        self.dim
                    )));
                }
                Ok(l)
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ FIXED_LOSS_STREAM);
                Ok((0..self.dim).map(|_| rng.gen::<f64>()).collect())
            }
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            kind: self.algo,
            eta: self.eta,
            alpha: self.alpha,
            nnmf: self.nnmf,
            slack_reference: self.slack_reference,
        }
    }

    /// Load every referenced file and assemble the experiment.
    pub fn build(&self) -> Result<(Experiment<f64>, RunMetadata)> {
        self.validate()?;
        let actions = self.action_set()?;
        let mut fixed_loss = None;
        let mut jester_users = None;
        let adversary = match self.adversary {
            AdversaryKind::Fixed => {
                let l = self.fixed_loss()?;
                fixed_loss = Some(l.iter().map(|&v| format_significant(v, 17)).collect());
                AdversaryConfig::Fixed(LossVector::new(l)?)
            }
            AdversaryKind::Stochastic => AdversaryConfig::Stochastic { dim: self.dim },
            AdversaryKind::Jester => {
                let path = require_file(
                    &self.jester_file,
                    "--jester-file",
                    "for the jester adversary",
                )?;
                let ratings = io::ingest_jester(&path, self.dim)?;
                jester_users = Some(ratings.users());
                AdversaryConfig::Dataset(Arc::new(ratings))
            }
        };
        let policy = self.policy_config();
        policy.validate(&actions)?;
        let n = actions.len();
        let meta = RunMetadata {
            config: self.clone(),
            n_actions: n,
            dimensional_rank: actions.dimensional_rank(),
            eta: format_significant(policy.resolved_eta(n, self.horizon), 17),
            alpha: format_significant(policy.resolved_alpha(n, self.horizon), 17),
            r_max: self.nnmf.r_max.unwrap_or(2 * self.dim),
            seeds: (0..self.runs as u64)
                .map(|k| self.seed.wrapping_add(k))
                .collect(),
            fixed_loss,
            jester_users,
        };
        let exp = Experiment {
            policy,
            adversary,
            actions: Arc::new(actions),
            horizon: self.horizon,
            trace: self.verbose,
        };
        Ok((exp, meta))
    }

    /// Build, run all replicas, and write the CSV, sidecar and (verbose) trace.
    pub fn run(&self) -> Result<Replicated<f64>> {
        let (exp, meta) = self.build()?;
        let out = run_replicated(&exp, self.runs, self.seed, self.threads)?;
        io::write_results_csv(&out.series, &meta, &self.output)?;
        if self.verbose && !out.trace.is_empty() {
            write_trace(&trace_path(&self.output), &out)?;
        }
        Ok(out)
    }
}

fn write_trace(path: &Path, out: &Replicated<f64>) -> Result<()> {
    use std::fmt::Write as _;
    let n = out.trace[0].weights.len();
    let mut text = String::from("round,rank,rel_error,entropy,log_support");
    for i in 0..n {
        let _ = write!(text, ",w_{i}");
    }
    text.push('\n');
    let opt = |v: Option<f64>| v.map(|x| format_significant(x, 9)).unwrap_or_default();
    for (t, d) in out.trace.iter().enumerate() {
        let _ = write!(
            text,
            "{},{},{},{},{}",
            t + 1,
            d.rank,
            opt(d.rel_error),
            opt(d.entropy),
            opt(d.log_support)
        );
        for w in &d.weights {
            let _ = write!(text, ",{}", format_significant(*w, 9));
        }
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
