use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use creasim::agent::{AgentSpec, UpdateFlags};
use creasim::constraints::{Category, ExternalConfig, InternalConfig, WeightedConstraint};
use creasim::society::{GraphSpec, SocietyConfig};
use creasim::SpaceConfig;
use creasim_cli::canonical;
use creasim_cli::commands::{FinalState, Report, RunManifest};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_creasim"))
}

fn creasim(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn spec(category: Category, center: f64, flags: UpdateFlags) -> AgentSpec<f64> {
    let ext = ExternalConfig::new(vec![WeightedConstraint::new(1.0, vec![center, center], 0.6).unwrap()]);
    let mut s = AgentSpec::new(category, InternalConfig::full_space(2), ext);
    s.update_flags = flags;
    s
}

fn write_config(dir: &Path, name: &str, cfg: &SocietyConfig<f64>) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, canonical::to_file_string(cfg).unwrap()).unwrap();
    path
}

fn pair_config(rounds: u64, flags: UpdateFlags) -> SocietyConfig<f64> {
    let agents = vec![spec(Category::Ccs, 0.7, flags), spec(Category::Human, 0.3, flags)];
    SocietyConfig::new(SpaceConfig::new(2, 10).unwrap(), GraphSpec::Inline { n: 2, edges: vec![[0, 1]] }, agents, rounds, 11)
}

#[test]
fn gen_network_writes_the_expected_graph() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = creasim(&["gen-network", "--nodes", "10", "--m", "2", "--seed", "7", "--out", p(path)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("edges: 17"), "{stdout}");
        assert!(stdout.contains("max_degree: "));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let file: creasim::network::GraphFile = serde_json::from_str(&text).unwrap();
    assert_eq!((file.n, file.m, file.seed, file.edges.len()), (10, 2, 7, 17));
    assert!(file.edges.windows(2).all(|w| w[0] < w[1]));
    assert!(text.ends_with("}\n") && !text.contains(' '));
}

#[test]
fn gen_network_rejects_too_few_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let out = creasim(&["gen-network", "--nodes", "1", "--m", "2", "--out", p(&dir.path().join("g.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nodes must be >= max(m, 2) = 2"), "{err}");
    let out = creasim(&["gen-network", "--nodes", "oops", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_all_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.json", &pair_config(1, UpdateFlags::default()));
    let (r1, r2) = (dir.path().join("r1"), dir.path().join("r2"));
    for r in [&r1, &r2] {
        let out = creasim(&["run", "--config", p(&cfg), "--out", p(r), "--quiet"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    for f in ["events.jsonl", "snapshots.jsonl", "final_state.json", "manifest.json"] {
        assert!(r1.join(f).is_file(), "{f}");
    }
    let events = std::fs::read(r1.join("events.jsonl")).unwrap();
    assert!(events.iter().filter(|&&b| b == b'\n').count() >= 2);
    assert_eq!(events, std::fs::read(r2.join("events.jsonl")).unwrap());
    assert_eq!(std::fs::read(r1.join("snapshots.jsonl")).unwrap(), std::fs::read(r2.join("snapshots.jsonl")).unwrap());
    assert_eq!(std::fs::read(r1.join("final_state.json")).unwrap(), std::fs::read(r2.join("final_state.json")).unwrap());
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.json", &pair_config(3, UpdateFlags::default()));
    let out_dir = dir.path().join("run");
    let out = creasim(&["run", "--config", p(&cfg), "--seed", "99", "--out", p(&out_dir)]);
    assert!(out.status.success());
    let m: RunManifest = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.seed, 99);
    let state: FinalState = serde_json::from_str(&std::fs::read_to_string(out_dir.join("final_state.json")).unwrap()).unwrap();
    assert_eq!(state.config.seed, 99);
}

#[test]
fn schema_violation_reports_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = serde_json::to_value(pair_config(1, UpdateFlags::default())).unwrap();
    v["agents"][1]["params"] = serde_json::json!({"lambda": "high"});
    let path = dir.path().join("bad.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = creasim(&["run", "--config", p(&path), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("agents[1].params.lambda"), "{err}");

    v["agents"][1]["params"] = serde_json::json!({"theta": 1.5});
    std::fs::write(&path, v.to_string()).unwrap();
    let out = creasim(&["run", "--config", p(&path), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("agents[1]"));

    let out = creasim(&["run", "--config", p(&dir.path().join("missing.json")), "--out", p(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_file_reference_resolves_next_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = creasim(&["gen-network", "--nodes", "6", "--m", "1", "--seed", "3", "--out", p(&dir.path().join("net.json"))]);
    assert!(out.status.success());
    let agents = (0..6).map(|i| spec(Category::Human, 0.1 + 0.1 * i as f64, UpdateFlags::default())).collect();
    let cfg = SocietyConfig::new(
        SpaceConfig::new(2, 10).unwrap(),
        GraphSpec::File { path: "net.json".into() },
        agents,
        2,
        5,
    );
    let cfg_path = write_config(dir.path(), "society.json", &cfg);
    let out = creasim(&["run", "--config", p(&cfg_path), "--out", p(&dir.path().join("r"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn run_and_analyze(dir: &Path, cfg: &SocietyConfig<f64>) -> (PathBuf, Report) {
    let cfg_path = write_config(dir, "c.json", cfg);
    let run_dir = dir.join("run");
    let out = creasim(&["run", "--config", p(&cfg_path), "--out", p(&run_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let an = dir.join("an");
    let out = creasim(&["analyze", "--run", p(&run_dir), "--out", p(&an)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_str(&std::fs::read_to_string(an.join("report.json")).unwrap()).unwrap();
    (an, report)
}

#[test]
fn analyze_frozen_society_has_constant_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let (an, report) = run_and_analyze(dir.path(), &pair_config(10, UpdateFlags::default()));
    let csv = std::fs::read_to_string(an.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "run_id,tick,mean_pairwise_config_distance,p_creative_cum,h_creative_cum");
    let dists: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(dists.len(), 11);
    assert!(dists.iter().all(|d| *d == dists[0]));
    assert_eq!(report.convergence.len(), 11);
    let inf = std::fs::read_to_string(an.join("influence.csv")).unwrap();
    assert!(inf.starts_with("agent_id,degree,influence,positive_received,negative_received,null_received\n"));
    assert!(report.creativity.h_total <= report.creativity.p_total);
}

#[test]
fn analyze_reports_the_aih_cell() {
    let dir = tempfile::tempdir().unwrap();
    let (_, report) = run_and_analyze(dir.path(), &pair_config(5, UpdateFlags::all()));
    let aih = report.forms.iter().find(|c| c.form == "AIH").expect("AIH cell present");
    assert_eq!((aih.generator, aih.evaluator), (Category::Ccs, Category::Human));
    assert!(report.forms.iter().any(|c| c.form == "2H"));
    assert!(report.forms.iter().any(|c| c.form == "2AI"));
    assert!(report.notes.iter().any(|n| n.contains("approximate")));
    for g in &report.eval_distributions {
        let total: f64 = g.pooled.pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn analyze_empty_log_gives_zeroed_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), "c.json", &pair_config(1, UpdateFlags::default()));
    let run_dir = dir.path().join("run");
    assert!(creasim(&["run", "--config", p(&cfg_path), "--out", p(&run_dir)]).status.success());
    std::fs::write(run_dir.join("events.jsonl"), "").unwrap();
    let an = dir.path().join("an");
    let out = creasim(&["analyze", "--run", p(&run_dir), "--out", p(&an)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Report = serde_json::from_str(&std::fs::read_to_string(an.join("report.json")).unwrap()).unwrap();
    assert_eq!((report.creativity.p_total, report.creativity.h_total), (0, 0));
    assert!(report.coverage.values().all(|c| *c == Some(0.0)));
    assert!(report.forms.iter().all(|c| c.evaluations == 0));
}

#[test]
fn analyze_missing_files_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = creasim(&["analyze", "--run", p(dir.path()), "--out", p(&dir.path().join("an"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing run file"));
}

#[test]
fn classify_prints_the_form_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &pair_config(1, UpdateFlags::default()));
    let out = creasim(&["classify", "--config", p(&cfg)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Human\tHuman\t2H\ttrue"));
    assert!(text.contains("Ccs\tHuman\tAIH\ttrue"));
    assert!(text.contains("Ccs\tCcs\t2AI\ttrue"));
    assert!(text.contains("Cad\tHuman\tCH\tfalse"));
    assert!(text.contains("Human\tCcs\tOther(Human,Ccs)\ttrue"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn invariant_errors_map_to_exit_3() {
    let e: creasim_cli::CliError = creasim::Error::Invariant("x".into()).into();
    assert_eq!(e.exit_code(), 3);
    let e: creasim_cli::CliError = creasim::Error::InvalidConfig("x".into()).into();
    assert_eq!(e.exit_code(), 2);
}

fn arb_constraint() -> impl Strategy<Value = WeightedConstraint<f64>> {
    (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 1e-3f64..2.0)
        .prop_map(|(w, x, y, r)| WeightedConstraint::new(w, vec![x, y], r).unwrap())
}

fn arb_config() -> impl Strategy<Value = SocietyConfig<f64>> {
    let agent = (
        proptest::collection::vec(proptest::collection::vec(arb_constraint(), 1..3), 1..3),
        proptest::collection::vec(arb_constraint(), 0..3),
        0.0f64..=1.0,
        0.01f64..0.99,
        any::<(bool, bool, bool, bool)>(),
        prop_oneof![Just(Category::Human), Just(Category::Ccs), Just(Category::Cad)],
    )
        .prop_map(|(groups, ext, lambda, theta, f, category)| {
            let mut s = AgentSpec::new(category, InternalConfig::new(groups).unwrap(), ExternalConfig::new(ext));
            s.params.lambda = lambda;
            s.params.theta = theta;
            s.update_flags = UpdateFlags { upd_external: f.0, upd_evaluation: f.1, upd_generation: f.2, self_update: f.3 };
            s
        });
    (proptest::collection::vec(agent, 1..4), any::<u64>(), 1u64..50, 1u64..5).prop_map(|(agents, seed, rounds, every)| {
        let n = agents.len();
        let edges = (1..n).map(|i| [i - 1, i]).collect();
        let mut c = SocietyConfig::new(SpaceConfig::new(2, 8).unwrap(), GraphSpec::Inline { n, edges }, agents, rounds, seed);
        c.snapshot_every = every;
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn config_round_trips_through_canonical_json(cfg in arb_config()) {
        let text = canonical::to_string(&cfg).unwrap();
        let back: SocietyConfig<f64> = creasim_cli::config::parse_json(&text, "cfg").unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(canonical::to_string(&back).unwrap(), text);
        prop_assert_eq!(creasim_cli::config::config_hash(&back), creasim_cli::config::config_hash(&cfg));
    }
}
