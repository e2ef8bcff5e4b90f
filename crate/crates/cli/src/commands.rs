//! The `gen-network`, `run`, `analyze` and `classify` subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use creasim::agent::{AgentState, EvalClass};
use creasim::metrics::{self, classify_form, CreativityCounts, Form, InfluenceRow};
use creasim::network::{degree_stats, generate_ba, seed_size, GraphFile};
use creasim::society::{self, GraphSpec};
use creasim::space::enumerate_space;
use creasim::{Agent, Category, EvalDistribution, EventKind, ExternalConfig, GlobalRegistry, Snapshot, SocietyConfig};
use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::config::{config_hash, load_config, parse_json, read_text};
use crate::error::CliError;
use crate::eventlog;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const FINAL_STATE_FILE: &str = "final_state.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const INFLUENCE_FILE: &str = "influence.csv";
pub const REPORT_FILE: &str = "report.json";

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(CliError::io(path))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn ser_err(e: serde_json::Error) -> CliError {
    CliError::Usage(format!("serialization failed: {e}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSummary {
    pub edges: usize,
    pub max_degree: usize,
}

pub fn gen_network(nodes: usize, m: usize, seed: u64, out: &Path) -> Result<NetworkSummary, CliError> {
    if m < 1 {
        return Err(CliError::Usage("m must be >= 1".into()));
    }
    let m0 = seed_size(m);
    if nodes < m0 {
        return Err(CliError::Usage(format!("nodes must be >= max(m, 2) = {m0}, got {nodes}")));
    }
    let g = generate_ba(nodes, m, seed)?;
    let file = GraphFile::from_graph(&g, m, seed);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_file(out, &canonical::to_file_string(&file).map_err(ser_err)?)?;
    Ok(NetworkSummary { edges: g.edge_count(), max_degree: degree_stats::<f64>(&g).max })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn run_id(&self) -> String {
        format!("{}-{}", &self.config_hash[..12.min(self.config_hash.len())], self.seed)
    }
}

/// Everything `analyze` needs besides the log: the effective config with the
/// graph inlined, final agent states and the artefact registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalState {
    pub config: SocietyConfig,
    pub agents: Vec<AgentState<f64>>,
    pub registry: GlobalRegistry,
}

pub fn run(config_path: &Path, seed: Option<u64>, out: &Path) -> Result<RunManifest, CliError> {
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let input = load_config(config_path)?;
    let hash = config_hash(&input);
    let mut cfg = input;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let graph = cfg.graph.resolve()?;
    cfg.graph = GraphSpec::inline(&graph);
    log::info!("running {} agents for {} rounds, seed {}", cfg.agents.len(), cfg.rounds, cfg.seed);
    let result = society::run_with_graph(&cfg, graph)?;

    ensure_dir(out)?;
    write_file(&out.join(EVENTS_FILE), &eventlog::encode_all(&result.events))?;
    let mut snaps = String::new();
    for s in &result.snapshots {
        snaps.push_str(&canonical::to_file_string(s).map_err(ser_err)?);
    }
    write_file(&out.join(SNAPSHOTS_FILE), &snaps)?;
    let state = FinalState {
        agents: result.agents.iter().map(Agent::state).collect(),
        registry: result.registry.clone(),
        config: cfg.clone(),
    };
    write_file(&out.join(FINAL_STATE_FILE), &canonical::to_file_string(&state).map_err(ser_err)?)?;

    let outputs = [EVENTS_FILE, SNAPSHOTS_FILE, FINAL_STATE_FILE]
        .into_iter()
        .map(|f| (f.trim_end_matches(".jsonl").trim_end_matches(".json").to_string(), out.join(f).display().to_string()))
        .collect();
    let manifest = RunManifest {
        config_hash: hash,
        seed: cfg.seed,
        tool_version: TOOL_VERSION.to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        outputs,
    };
    write_file(&out.join(MANIFEST_FILE), &canonical::to_file_string(&manifest).map_err(ser_err)?)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormCell {
    pub generator: Category,
    pub evaluator: Category,
    pub form: String,
    pub evaluations: u64,
    pub positive: u64,
    pub negative: u64,
    pub null: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionGroup {
    pub agents: Vec<usize>,
    pub external_samples: usize,
    pub artefacts: usize,
    pub pooled: EvalDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub run_id: String,
    pub creativity: CreativityCounts,
    pub convergence: Vec<(u64, f64)>,
    pub coverage: BTreeMap<usize, Option<f64>>,
    pub eval_distributions: Vec<DistributionGroup>,
    pub forms: Vec<FormCell>,
    pub notes: Vec<String>,
}

fn read_required(dir: &Path, name: &str) -> Result<String, CliError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(CliError::Usage(format!("missing run file {}", path.display())));
    }
    read_text(&path)
}

fn read_snapshots(text: &str) -> Result<Vec<Snapshot>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_json(l, &format!("{SNAPSHOTS_FILE}:{}", i + 1)))
        .collect()
}

pub fn analyze(run_dir: &Path, out: &Path, espace_cap: u64) -> Result<Report, CliError> {
    let events = eventlog::decode_all(&read_required(run_dir, EVENTS_FILE)?)?;
    let snapshots = read_snapshots(&read_required(run_dir, SNAPSHOTS_FILE)?)?;
    let state: FinalState = parse_json(&read_required(run_dir, FINAL_STATE_FILE)?, FINAL_STATE_FILE)?;
    let manifest: RunManifest = parse_json(&read_required(run_dir, MANIFEST_FILE)?, MANIFEST_FILE)?;
    let cfg = &state.config;
    let space = cfg.space;
    let graph = cfg.graph.resolve()?;
    let agents: Vec<Agent> = state.agents.iter().cloned().map(|s| Agent::restore(s, cfg.seed)).collect();
    let cap = espace_cap as u128;
    let run_id = manifest.run_id();
    let mut notes = vec![
        "external-config samples approximate the space of all external configurations".to_string(),
        "population distributions use each sampled agent's own final memory".to_string(),
    ];

    // convergence and cumulative creativity per snapshot tick
    let convergence: Vec<(u64, f64)> = if agents.len() >= 2 {
        snapshots
            .iter()
            .map(|s| Ok((s.tick, metrics::mean_pairwise_distance(s, &space)?)))
            .collect::<Result<_, creasim::Error>>()?
    } else {
        notes.push("convergence undefined for fewer than two agents; reported as 0".into());
        snapshots.iter().map(|s| (s.tick, 0.0)).collect()
    };
    let mut csv = String::from("run_id,tick,mean_pairwise_config_distance,p_creative_cum,h_creative_cum\n");
    let (mut p_cum, mut h_cum, mut idx) = (0u64, 0u64, 0usize);
    for &(tick, dist) in &convergence {
        while idx < events.len() && events[idx].tick <= tick {
            match events[idx].kind {
                EventKind::PCreative { .. } => p_cum += 1,
                EventKind::HCreative { .. } => h_cum += 1,
                _ => {}
            }
            idx += 1;
        }
        writeln!(csv, "{run_id},{tick},{},{p_cum},{h_cum}", canonical::format_g17(dist)).expect("string write");
    }

    let rows: Vec<InfluenceRow> = metrics::influence_by_degree(&events, &graph);
    let mut inf = String::from("agent_id,degree,influence,positive_received,negative_received,null_received\n");
    for r in &rows {
        writeln!(
            inf,
            "{},{},{},{},{},{}",
            r.agent_id, r.degree, r.influence, r.positive_received, r.negative_received, r.null_received
        )
        .expect("string write");
    }

    let enumerable = space.is_enumerable(cap);
    let coverage = agents
        .iter()
        .map(|a| {
            let c = if enumerable || a.support().is_some() { metrics::coverage(a, &events, &space, cap).ok() } else { None };
            (a.id, c)
        })
        .collect();
    if !enumerable {
        notes.push(format!("space of {} points exceeds the enumeration cap {cap}; coverage omitted", space.size()));
    }

    // group agents by identical internal configuration
    let mut groups: Vec<Vec<&Agent>> = Vec::new();
    for a in &agents {
        match groups.iter_mut().find(|g| g[0].internal() == a.internal()) {
            Some(g) => g.push(a),
            None => groups.push(vec![a]),
        }
    }
    let artefacts = if enumerable {
        enumerate_space(&space, cap)?
    } else {
        let distinct: BTreeSet<_> = state.registry.records().iter().map(|r| r.artefact.clone()).collect();
        distinct.into_iter().collect()
    };
    let mut eval_distributions = Vec::new();
    for g in &groups {
        let samples: Vec<ExternalConfig> = g.iter().map(|a| a.external.clone()).collect();
        let report = metrics::estimate_eval_distribution(g, &samples, &artefacts, &space)?;
        eval_distributions.push(DistributionGroup {
            agents: g.iter().map(|a| a.id).collect(),
            external_samples: samples.len(),
            artefacts: artefacts.len(),
            pooled: report.pooled,
        });
    }

    let forms = form_matrix(&agents, &events);
    let report = Report {
        run_id,
        creativity: metrics::creativity_counts(&events),
        convergence,
        coverage,
        eval_distributions,
        forms,
        notes,
    };
    ensure_dir(out)?;
    write_file(&out.join(METRICS_FILE), &csv)?;
    write_file(&out.join(INFLUENCE_FILE), &inf)?;
    write_file(&out.join(REPORT_FILE), &canonical::to_file_string(&report).map_err(ser_err)?)?;
    Ok(report)
}

/// One cell per (generator, evaluator) category pair present among the agents,
/// with the peer evaluations observed along that pair.
fn form_matrix(agents: &[Agent], events: &[creasim::Event]) -> Vec<FormCell> {
    let present: BTreeSet<Category> = agents.iter().map(|a| a.category).collect();
    let creators = metrics::creators(events);
    let mut cells: BTreeMap<(Category, Category), FormCell> = BTreeMap::new();
    for &g in &present {
        for &v in &present {
            cells.insert(
                (g, v),
                FormCell { generator: g, evaluator: v, form: classify_form(g, v).to_string(), evaluations: 0, positive: 0, negative: 0, null: 0 },
            );
        }
    }
    for e in events {
        if let EventKind::Evaluated { artefact_id, evaluation } = e.kind {
            let (Some(&c), Some(ev)) = (creators.get(&artefact_id), agents.get(e.agent)) else { continue };
            let Some(gen) = agents.get(c) else { continue };
            if let Some(cell) = cells.get_mut(&(gen.category, ev.category)) {
                cell.evaluations += 1;
                match evaluation.class {
                    EvalClass::Positive => cell.positive += 1,
                    EvalClass::Negative => cell.negative += 1,
                    EvalClass::NonDecidable => cell.null += 1,
                }
            }
        }
    }
    cells.into_values().collect()
}

/// Category-pair to form table; `present` marks pairs realizable in the config.
pub fn classify(config_path: &Path) -> Result<Vec<(Category, Category, Form, bool)>, CliError> {
    let cfg = load_config(config_path)?;
    let present: BTreeSet<Category> = cfg.agents.iter().map(|a| a.category).collect();
    let mut rows = Vec::new();
    for g in Category::ALL {
        for v in Category::ALL {
            rows.push((g, v, classify_form(g, v), present.contains(&g) && present.contains(&v)));
        }
    }
    Ok(rows)
}

pub fn format_classification(rows: &[(Category, Category, Form, bool)]) -> String {
    let mut s = String::from("generator\tevaluator\tform\tpresent\n");
    for (g, v, f, p) in rows {
        writeln!(s, "{g}\t{v}\t{f}\t{p}").expect("string write");
    }
    s
}

pub fn default_out(out: Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    out.ok_or_else(|| CliError::Usage(format!("--out is required for {what}")))
}
