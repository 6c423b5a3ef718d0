//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{ActionsKind, AdversaryKind, ExperimentConfig, Preset};
use crate::error::Error;
use crate::policies::{PolicyKind, SlackReference};

/// Exit status for usage errors and invalid configurations.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for runtime failures (I/O, numerical errors).
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "extbandit",
    version,
    about = "Replicated combinatorial bandit games with slack-regularized exponential weights"
)]
pub struct Cli {
    /// Start from a predefined experiment; other flags override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub algo: Option<PolicyKind>,
    #[arg(long, value_enum)]
    pub actions: Option<ActionsKind>,
    /// Ambient dimension d.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Hypercube corners to enumerate for hypercube action sets.
    #[arg(long)]
    pub max_actions: Option<usize>,
    /// Rounds per game.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Number of replicas.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Base seed; replica k uses seed + k.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub adversary: Option<AdversaryKind>,
    #[arg(long)]
    pub loss_file: Option<PathBuf>,
    #[arg(long)]
    pub routes_file: Option<PathBuf>,
    #[arg(long)]
    pub jester_file: Option<PathBuf>,
    /// Relative reconstruction error accepted by the rank search.
    #[arg(long)]
    pub nnmf_tol: Option<f64>,
    /// Most recent rounds of the slack-weight matrix kept for factorization.
    #[arg(long)]
    pub nnmf_window: Option<usize>,
    #[arg(long)]
    pub nnmf_restarts: Option<usize>,
    #[arg(long)]
    pub nnmf_max_iter: Option<usize>,
    #[arg(long)]
    pub nnmf_rank_max: Option<usize>,
    /// Hyperplane used for slacks by extexp2.
    #[arg(long, value_enum)]
    pub slack_ref: Option<SlackReference>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write a per-round factorization trace for the first replica.
    #[arg(long)]
    pub verbose: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn into_config(self) -> ExperimentConfig {
        let mut c = self.preset.map(Preset::config).unwrap_or_default();
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value {
                    c.$field = v;
                }
            };
        }
        set!(algo, self.algo);
        set!(actions, self.actions);
        set!(dim, self.dim);
        set!(max_actions, self.max_actions);
        set!(horizon, self.horizon);
        set!(runs, self.runs);
        set!(seed, self.seed);
        set!(adversary, self.adversary);
        set!(slack_reference, self.slack_ref);
        set!(threads, self.threads);
        set!(output, self.out);
        if self.eta.is_some() {
            c.eta = self.eta;
        }
        if self.alpha.is_some() {
            c.alpha = self.alpha;
        }
        if self.loss_file.is_some() {
            c.loss_file = self.loss_file;
        }
        if self.routes_file.is_some() {
            c.routes_file = self.routes_file;
        }
        if self.jester_file.is_some() {
            c.jester_file = self.jester_file;
        }
        if let Some(v) = self.nnmf_tol {
            c.nnmf.tol = v;
        }
        if let Some(v) = self.nnmf_window {
            c.nnmf.window = v;
        }
        if let Some(v) = self.nnmf_restarts {
            c.nnmf.restarts = v;
        }
        if let Some(v) = self.nnmf_max_iter {
            c.nnmf.max_iter = v;
        }
        if self.nnmf_rank_max.is_some() {
            c.nnmf.r_max = self.nnmf_rank_max;
        }
        c.verbose |= self.verbose;
        c
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnsupportedActionSet(_) | Error::InvalidDimension(_) => {
            EXIT_USAGE
        }
        _ => EXIT_FAILURE,
    }
}

/// Parse `args`, run the experiment and return the process exit status.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let cfg = cli.into_config();
    match cfg.run() {
        Ok(out) => {
            let s = &out.series;
            println!(
                "{}: {} runs x {} rounds, final pseudo-regret {:.4} +/- {:.4} (std), wrote {}",
                cfg.algo.name(),
                cfg.runs,
                cfg.horizon,
                s.final_mean(),
                s.final_std(),
                cfg.output.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_then_override() {
        let cli = Cli::try_parse_from([
            "extbandit",
            "--preset",
            "network-d10",
            "--horizon",
            "50",
            "--algo",
            "exp2",
        ])
        .unwrap();
        let c = cli.into_config();
        assert_eq!(c.dim, 10);
        assert_eq!(c.horizon, 50);
        assert_eq!(c.runs, 100);
        assert_eq!(c.algo, PolicyKind::Exp2);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(["extbandit", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["extbandit", "--algo", "nope"]), EXIT_USAGE);
    }

    #[test]
    fn exp3_on_hypercube_exits_two() {
        let code = run([
            "extbandit",
            "--algo",
            "exp3",
            "--actions",
            "hypercube",
            "--dim",
            "4",
            "--out",
            "/nonexistent/x.csv",
        ]);
        assert_eq!(code, EXIT_USAGE);
    }
}
