mod common;

use std::fs;
use std::path::Path;
use std::sync::Arc;

use extbandit::cli;
use extbandit::config::{ActionsKind, AdversaryKind, ExperimentConfig, Preset};
use extbandit::harness::aggregate;
use extbandit::io::{ingest_jester, sidecar_path, trace_path};
use extbandit::{
    pseudo_regret, run_game, run_replicated, ActionSet, AdversaryConfig, Experiment, LossVector,
    PolicyConfig, PolicyKind,
};
use rand::Rng;

fn small_experiment(kind: PolicyKind) -> Experiment<f64> {
    let actions = if kind.needs_canonical_basis() {
        ActionSet::canonical_basis(4).unwrap()
    } else {
        ActionSet::basis_with_hypercube(4, 6).unwrap()
    };
    Experiment {
        policy: PolicyConfig::new(kind),
        adversary: AdversaryConfig::Fixed(LossVector::new(vec![0.2, 0.9, 0.6, 0.4]).unwrap()),
        actions: Arc::new(actions),
        horizon: 60,
        trace: false,
    }
}

fn run_cli(args: &[&str]) -> i32 {
    let mut full = vec!["extbandit"];
    full.extend_from_slice(args);
    cli::run(full)
}

#[test]
fn identical_seeds_give_identical_games() {
    for kind in PolicyKind::ALL {
        let exp = small_experiment(kind);
        let a = run_game(&exp, 42).unwrap();
        let b = run_game(&exp, 42).unwrap();
        assert_eq!(a.chosen, b.chosen, "{}", kind.name());
        assert_eq!(a.cum_loss, b.cum_loss);
    }
}

#[test]
fn records_are_internally_consistent() {
    let exp = small_experiment(PolicyKind::Exp2);
    let rec = run_game(&exp, 3).unwrap();
    let mut total = 0.0;
    for t in 0..rec.horizon() {
        let a = exp.actions.get(rec.chosen[t]);
        assert_eq!(rec.scalar_losses[t], a.dot(rec.loss_log[t].as_slice()));
        total += rec.scalar_losses[t];
        assert_eq!(rec.cum_loss[t], total);
    }
}

#[test]
fn fixed_loss_regret_never_decreases() {
    for kind in PolicyKind::ALL {
        let exp = small_experiment(kind);
        let rec = run_game(&exp, 7).unwrap();
        let r = pseudo_regret(&rec, &exp.actions);
        assert!(
            r.windows(2).all(|w| w[1] >= w[0] - 1e-12),
            "{}",
            kind.name()
        );
    }
}

#[test]
fn aggregate_matches_a_direct_recomputation() {
    let exp = small_experiment(PolicyKind::Exp3);
    let out = run_replicated(&exp, 5, 100, 1).unwrap();
    assert_eq!(out.seeds, vec![100, 101, 102, 103, 104]);
    for t in [0, 17, 59] {
        let xs: Vec<f64> = out.per_replica.iter().map(|r| r[t]).collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((out.series.mean[t] - mean).abs() <= 1e-12);
        assert!((out.series.std[t] - var.sqrt()).abs() <= 1e-12);
    }
    let single = run_replicated(&exp, 1, 100, 1).unwrap();
    assert!(single.series.std.iter().all(|&s| s == 0.0));
    assert_eq!(single.per_replica[0], out.per_replica[0]);
}

#[test]
fn thread_count_does_not_change_results() {
    let exp = small_experiment(PolicyKind::ExtendedExp2);
    let a = run_replicated(&exp, 3, 9, 1).unwrap();
    let b = run_replicated(&exp, 3, 9, 3).unwrap();
    assert_eq!(a.series, b.series);
}

#[test]
fn aggregate_of_constant_replicas() {
    let s = aggregate(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]);
    assert_eq!(s.mean, vec![1.0, 2.0]);
    assert_eq!(s.std, vec![0.0, 0.0]);
}

fn quick_config(dir: &Path, name: &str) -> ExperimentConfig {
    ExperimentConfig {
        algo: PolicyKind::Exp2,
        actions: ActionsKind::BasisHypercube,
        dim: 5,
        max_actions: 8,
        horizon: 40,
        runs: 3,
        seed: 5,
        output: dir.join(name),
        ..ExperimentConfig::default()
    }
}

#[test]
fn csv_parses_back_to_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "out.csv");
    let out = cfg.run().unwrap();
    let mut reader = csv::Reader::from_path(&cfg.output).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["round", "mean_cum_regret", "std_cum_regret"]
    );
    let rows: Vec<(usize, f64, f64)> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 40);
    // Nine significant digits are exact to half a unit in the ninth place.
    let close = |parsed: f64, exact: f64| (parsed - exact).abs() <= 5e-9 * exact.abs() + 1e-300;
    for (t, (round, mean, std)) in rows.into_iter().enumerate() {
        assert_eq!(round, t + 1);
        assert!(
            close(mean, out.series.mean[t]),
            "round {round}: {mean} vs {}",
            out.series.mean[t]
        );
        assert!(
            close(std, out.series.std[t]),
            "round {round}: {std} vs {}",
            out.series.std[t]
        );
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sidecar_path(&cfg.output)).unwrap()).unwrap();
    assert_eq!(meta["seeds"], serde_json::json!([5, 6, 7]));
    assert_eq!(meta["config"]["horizon"], 40);
    // Corners 1..=8 in binary order; 1, 2, 4 and 8 duplicate basis vectors.
    assert_eq!(meta["n_actions"], 5 + 4);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = quick_config(dir.path(), "a.csv");
    let b = quick_config(dir.path(), "b.csv");
    a.run().unwrap();
    b.run().unwrap();
    assert_eq!(fs::read(&a.output).unwrap(), fs::read(&b.output).unwrap());
}

#[test]
fn verbose_runs_write_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        algo: PolicyKind::ExtendedExp2,
        verbose: true,
        ..quick_config(dir.path(), "v.csv")
    };
    cfg.run().unwrap();
    let trace = fs::read_to_string(trace_path(&cfg.output)).unwrap();
    let mut lines = trace.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("round,rank,rel_error,entropy,log_support,w_0"));
    assert_eq!(lines.count(), 40);
}

#[test]
fn presets_carry_the_reported_setups() {
    let n10 = Preset::NetworkD10.config();
    assert_eq!((n10.dim, n10.horizon, n10.runs), (10, 10_000, 100));
    assert_eq!(n10.adversary, AdversaryKind::Fixed);
    let j = Preset::JesterD20.config();
    assert_eq!((j.dim, j.horizon, j.runs), (20, 10_000, 100));
    assert_eq!(j.adversary, AdversaryKind::Jester);
}

#[test]
fn cli_runs_a_preset_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let code = run_cli(&[
        "--preset",
        "network-d10",
        "--algo",
        "exp2",
        "--horizon",
        "30",
        "--runs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 31);
    assert!(sidecar_path(&out).is_file());
}

#[test]
fn cli_rejects_bad_invocations_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    assert_eq!(run_cli(&["--bogus"]), cli::EXIT_USAGE);
    assert_eq!(
        run_cli(&[
            "--algo",
            "exp3",
            "--actions",
            "hypercube",
            "--dim",
            "4",
            "--out",
            out
        ]),
        cli::EXIT_USAGE
    );
    assert_eq!(
        run_cli(&[
            "--adversary",
            "jester",
            "--jester-file",
            "/nonexistent/j.csv",
            "--out",
            out
        ]),
        cli::EXIT_USAGE
    );
    assert_eq!(run_cli(&["--horizon", "0", "--out", out]), cli::EXIT_USAGE);
}

#[test]
fn cli_reads_loss_and_route_files() {
    let dir = tempfile::tempdir().unwrap();
    let loss = dir.path().join("loss.csv");
    let routes = dir.path().join("routes.txt");
    fs::write(&loss, "0.1,0.5,0.9,0.3\n").unwrap();
    fs::write(&routes, "# two-hop routes\n0,1\n2,3\n0,3\n1,2\n").unwrap();
    let out = dir.path().join("p.csv");
    let code = run_cli(&[
        "--algo",
        "exp2",
        "--actions",
        "paths",
        "--dim",
        "4",
        "--routes-file",
        routes.to_str().unwrap(),
        "--loss-file",
        loss.to_str().unwrap(),
        "--horizon",
        "20",
        "--runs",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let meta = fs::read_to_string(sidecar_path(&out)).unwrap();
    assert!(meta.contains("\"n_actions\": 4"));
}

#[test]
fn jester_ingestion_filters_and_scales() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jester.csv");
    let mut rng = common::rng(31);
    let mut text = String::new();
    let mut dense = 0;
    for u in 0..40 {
        let mut row: Vec<String> = (0..25)
            .map(|_| format!("{:.2}", rng.gen_range(-1000i64..=1000) as f64 / 100.0))
            .collect();
        if u % 4 == 1 {
            row[rng.gen_range(0..20)] = "99".into();
        } else if u % 4 == 2 {
            row[22] = "99".into();
            dense += 1;
        } else {
            dense += 1;
        }
        text.push_str(&format!("25,{}\n", row.join(",")));
    }
    fs::write(&path, text).unwrap();
    let ratings = ingest_jester(&path, 20).unwrap();
    assert_eq!(ratings.users(), dense);
    assert_eq!(ratings.items(), 20);
    assert!(ratings
        .rows()
        .iter()
        .flatten()
        .all(|v| (0.0..=1.0).contains(v)));
    assert!(ratings.source_user_ids().iter().all(|id| id % 4 != 1));
}
