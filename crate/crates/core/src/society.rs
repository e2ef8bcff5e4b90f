//! The simulation engine.
//!
//! Each tick visits agents in ascending id order. An agent produces an
//! artefact; a non-empty artefact is registered globally and broadcast to the
//! agent's immediate neighbors, who observe it, evaluate it and, for decidable
//! evaluations, apply their enabled update operators. Every step is recorded
//! in a totally ordered event log.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentSpec, Evaluation, UpdateTarget};
use crate::constraints::ExternalConfig;
use crate::error::{invalid, Error, Result};
use crate::network::{generate_ba, Graph, GraphFile};
use crate::scalar::Scalar;
use crate::space::{Artefact, SpaceConfig};

/// Default bound on exhaustive enumeration of the artefact space.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Inline { n: usize, edges: Vec<[usize; 2]> },
    File { path: PathBuf },
    Ba { n: usize, m: usize, seed: u64 },
}

impl GraphSpec {
    pub fn inline(g: &Graph) -> Self {
        GraphSpec::Inline { n: g.n(), edges: g.edges().map(|(a, b)| [a, b]).collect() }
    }

    pub fn resolve(&self) -> Result<Graph> {
        match self {
            GraphSpec::Inline { n, edges } => Graph::from_edges(*n, edges.iter().map(|e| (e[0], e[1]))),
            GraphSpec::File { path } => GraphFile::read(path)?.to_graph(),
            GraphSpec::Ba { n, m, seed } => generate_ba(*n, *m, *seed),
        }
    }
}

fn one() -> u64 {
    1
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct SocietyConfig<S: Scalar> {
    pub space: SpaceConfig,
    pub graph: GraphSpec,
    /// One spec per graph node, indexed by node id.
    pub agents: Vec<AgentSpec<S>>,
    pub rounds: u64,
    pub seed: u64,
    #[serde(default = "one")]
    pub snapshot_every: u64,
    #[serde(default = "default_cap")]
    pub enumeration_cap: u64,
}

impl<S: Scalar> SocietyConfig<S> {
    pub fn new(space: SpaceConfig, graph: GraphSpec, agents: Vec<AgentSpec<S>>, rounds: u64, seed: u64) -> Self {
        SocietyConfig { space, graph, agents, rounds, seed, snapshot_every: 1, enumeration_cap: DEFAULT_ENUMERATION_CAP }
    }

    /// Check everything that can be checked without building the graph.
    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if self.rounds < 1 {
            return Err(invalid("rounds must be >= 1"));
        }
        if self.snapshot_every < 1 {
            return Err(invalid("snapshot_every must be >= 1"));
        }
        for (i, a) in self.agents.iter().enumerate() {
            a.validate(&self.space).map_err(|e| invalid(format!("agents[{i}]: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtefactRecord {
    pub artefact_id: u64,
    pub artefact: Artefact,
    pub creator: usize,
    pub tick: u64,
}

/// Every point ever output by any agent. Insertion only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<ArtefactRecord>", into = "Vec<ArtefactRecord>")]
pub struct GlobalRegistry {
    records: Vec<ArtefactRecord>,
    first: BTreeMap<Artefact, usize>,
}

impl GlobalRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one output. Returns the record and whether the value was new to society.
    pub fn register(&mut self, artefact: Artefact, creator: usize, tick: u64) -> Result<(ArtefactRecord, bool)> {
        if artefact.is_empty() {
            return Err(Error::Invariant("empty artefact cannot be registered".into()));
        }
        let artefact_id = self.records.len() as u64;
        let rec = ArtefactRecord { artefact_id, artefact, creator, tick };
        let is_new = !self.first.contains_key(&rec.artefact);
        if is_new {
            self.first.insert(rec.artefact.clone(), self.records.len());
        }
        self.records.push(rec.clone());
        Ok((rec, is_new))
    }

    pub fn contains(&self, a: &Artefact) -> bool {
        self.first.contains_key(a)
    }

    /// The record of the first output of `a`.
    pub fn first_record(&self, a: &Artefact) -> Option<&ArtefactRecord> {
        self.first.get(a).map(|&i| &self.records[i])
    }

    pub fn record(&self, artefact_id: u64) -> Option<&ArtefactRecord> {
        self.records.get(artefact_id as usize)
    }

    pub fn records(&self) -> &[ArtefactRecord] {
        &self.records
    }

    /// Number of distinct artefact values.
    pub fn distinct(&self) -> usize {
        self.first.len()
    }
}

impl From<Vec<ArtefactRecord>> for GlobalRegistry {
    fn from(records: Vec<ArtefactRecord>) -> Self {
        let mut first = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            first.entry(r.artefact.clone()).or_insert(i);
        }
        GlobalRegistry { records, first }
    }
}

impl From<GlobalRegistry> for Vec<ArtefactRecord> {
    fn from(r: GlobalRegistry) -> Self {
        r.records
    }
}

/// H-creativity: the point is new to the whole society.
pub fn is_h_creative(registry: &GlobalRegistry, a: &Artefact) -> bool {
    !a.is_empty() && !registry.contains(a)
}

/// P-creativity: the point is new to this agent.
pub fn is_p_creative<S: Scalar>(agent: &Agent<S>, a: &Artefact) -> bool {
    !a.is_empty() && !agent.memory.contains(a)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind<S: Scalar> {
    Generated { artefact: Artefact, artefact_id: u64, attempts: u32, self_eval: Evaluation<S> },
    ProducedEmpty { attempts: u32 },
    Observed { artefact_id: u64, stored: bool },
    Evaluated { artefact_id: u64, evaluation: Evaluation<S> },
    Updated { artefact_id: u64, target: UpdateTarget },
    PCreative { artefact_id: u64 },
    HCreative { artefact_id: u64 },
}

/// One log record. `agent` is the acting agent: producer, observer, evaluator or updater.
#[derive(Debug, Clone, PartialEq)]
pub struct Event<S: Scalar> {
    pub tick: u64,
    pub seq: u64,
    pub agent: usize,
    pub kind: EventKind<S>,
}

impl<S: Scalar> Event<S> {
    pub fn type_name(&self) -> &'static str {
        match self.kind {
            EventKind::Generated { .. } => "Generated",
            EventKind::ProducedEmpty { .. } => "ProducedEmpty",
            EventKind::Observed { .. } => "Observed",
            EventKind::Evaluated { .. } => "Evaluated",
            EventKind::Updated { .. } => "Updated",
            EventKind::PCreative { .. } => "PCreative",
            EventKind::HCreative { .. } => "HCreative",
        }
    }

    pub fn artefact_id(&self) -> Option<u64> {
        match self.kind {
            EventKind::Generated { artefact_id, .. }
            | EventKind::Observed { artefact_id, .. }
            | EventKind::Evaluated { artefact_id, .. }
            | EventKind::Updated { artefact_id, .. }
            | EventKind::PCreative { artefact_id }
            | EventKind::HCreative { artefact_id } => Some(artefact_id),
            EventKind::ProducedEmpty { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct AgentSnapshot<S: Scalar> {
    pub agent: usize,
    pub external: ExternalConfig<S>,
    pub theta: S,
    pub beta: S,
    pub memory_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct Snapshot<S: Scalar> {
    pub tick: u64,
    pub agents: Vec<AgentSnapshot<S>>,
}

#[derive(Debug, Clone)]
pub struct RunResult<S: Scalar> {
    pub events: Vec<Event<S>>,
    pub agents: Vec<Agent<S>>,
    pub registry: GlobalRegistry,
    pub snapshots: Vec<Snapshot<S>>,
    pub graph: Graph,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct Society<S: Scalar> {
    space: SpaceConfig,
    graph: Graph,
    agents: Vec<Agent<S>>,
    registry: GlobalRegistry,
    events: Vec<Event<S>>,
    tick: u64,
    seq: u64,
}

impl<S: Scalar> Society<S> {
    pub fn new(config: &SocietyConfig<S>) -> Result<Self> {
        config.validate()?;
        let graph = config.graph.resolve()?;
        Self::with_graph(config, graph)
    }

    pub fn with_graph(config: &SocietyConfig<S>, graph: Graph) -> Result<Self> {
        config.validate()?;
        if config.agents.len() != graph.n() {
            return Err(invalid(format!(
                "config has {} agents but the graph has {} nodes",
                config.agents.len(),
                graph.n()
            )));
        }
        let cap = config.enumeration_cap as u128;
        let agents = config
            .agents
            .iter()
            .enumerate()
            .map(|(id, spec)| Agent::new(id, spec, config.seed, &config.space, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(Society {
            space: config.space,
            graph,
            agents,
            registry: GlobalRegistry::new(),
            events: Vec::new(),
            tick: 0,
            seq: 0,
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn agents(&self) -> &[Agent<S>] {
        &self.agents
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn registry(&self) -> &GlobalRegistry {
        &self.registry
    }

    pub fn events(&self) -> &[Event<S>] {
        &self.events
    }

    fn emit(&mut self, agent: usize, kind: EventKind<S>) {
        self.events.push(Event { tick: self.tick, seq: self.seq, agent, kind });
        self.seq += 1;
    }

    pub fn snapshot(&self) -> Snapshot<S> {
        Snapshot {
            tick: self.tick,
            agents: self
                .agents
                .iter()
                .map(|a| AgentSnapshot {
                    agent: a.id,
                    external: a.external.clone(),
                    theta: a.params.theta,
                    beta: a.params.beta,
                    memory_size: a.memory.len(),
                })
                .collect(),
        }
    }

    /// Advance one tick and return its events.
    pub fn step(&mut self) -> Result<&[Event<S>]> {
        self.tick += 1;
        let tick = self.tick;
        let cfg = self.space;
        let start = self.events.len();
        for g in 0..self.agents.len() {
            let production = self.agents[g].produce(&cfg, tick);
            let Some(self_eval) = production.evaluation else {
                self.emit(g, EventKind::ProducedEmpty { attempts: production.attempts });
                continue;
            };
            let artefact = production.artefact;
            let h_creative = is_h_creative(&self.registry, &artefact);
            let (rec, _) = self.registry.register(artefact.clone(), g, tick)?;
            let id = rec.artefact_id;
            self.emit(
                g,
                EventKind::Generated { artefact: artefact.clone(), artefact_id: id, attempts: production.attempts, self_eval },
            );
            if production.novel_to_self {
                self.emit(g, EventKind::PCreative { artefact_id: id });
            }
            if h_creative {
                self.emit(g, EventKind::HCreative { artefact_id: id });
            }
            if self.agents[g].update_flags.self_update && self_eval.is_decidable() {
                self.apply_updates(g, &artefact, id, &self_eval);
            }
            for i in 0..self.graph.degree(g) {
                let h = self.graph.neighbors(g)[i];
                // novelty is judged against memory as it was before this observation
                let e = self.agents[h].evaluate(&artefact, &cfg);
                let stored = self.agents[h].observe(&artefact, tick, &cfg);
                self.emit(h, EventKind::Observed { artefact_id: id, stored });
                self.emit(h, EventKind::Evaluated { artefact_id: id, evaluation: e });
                if e.is_decidable() {
                    self.apply_updates(h, &artefact, id, &e);
                }
            }
        }
        Ok(&self.events[start..])
    }

    fn apply_updates(&mut self, h: usize, a: &Artefact, artefact_id: u64, e: &Evaluation<S>) {
        let targets: Vec<UpdateTarget> = self.agents[h].enabled_updates().collect();
        for target in targets {
            self.agents[h].apply_update(target, a, e, &self.space);
            self.emit(h, EventKind::Updated { artefact_id, target });
        }
    }

    /// Check the run-level invariants against the originating config.
    pub fn check_invariants(&self, config: &SocietyConfig<S>) -> Result<()> {
        for (agent, spec) in self.agents.iter().zip(&config.agents) {
            agent.check_internal(&spec.internal)?;
            if let Some(bad) = agent.memory.iter().find(|a| !agent.is_feasible(a, &self.space)) {
                return Err(Error::Invariant(format!("agent {} remembers infeasible artefact {bad}", agent.id)));
            }
        }
        let mut h_seen = std::collections::BTreeSet::new();
        for ev in &self.events {
            if let EventKind::HCreative { artefact_id } = ev.kind {
                let rec = self
                    .registry
                    .record(artefact_id)
                    .ok_or_else(|| Error::Invariant(format!("unregistered artefact id {artefact_id}")))?;
                if !h_seen.insert(rec.artefact.clone()) {
                    return Err(Error::Invariant(format!("artefact {} reported H-creative twice", rec.artefact)));
                }
            }
            if let Some(id) = ev.artefact_id() {
                if self.registry.record(id).is_none() {
                    return Err(Error::Invariant(format!("event references unregistered artefact id {id}")));
                }
            }
        }
        Ok(())
    }

    pub fn into_result(self, snapshots: Vec<Snapshot<S>>) -> RunResult<S> {
        RunResult { events: self.events, agents: self.agents, registry: self.registry, snapshots, graph: self.graph }
    }
}

/// Execute a whole run: snapshots at tick 0, every `snapshot_every` ticks, and at the end.
pub fn run<S: Scalar>(config: &SocietyConfig<S>) -> Result<RunResult<S>> {
    let society = Society::new(config)?;
    run_society(society, config)
}

pub fn run_with_graph<S: Scalar>(config: &SocietyConfig<S>, graph: Graph) -> Result<RunResult<S>> {
    let society = Society::with_graph(config, graph)?;
    run_society(society, config)
}

fn run_society<S: Scalar>(mut society: Society<S>, config: &SocietyConfig<S>) -> Result<RunResult<S>> {
    let mut snapshots = vec![society.snapshot()];
    for t in 1..=config.rounds {
        society.step()?;
        if t % config.snapshot_every == 0 || t == config.rounds {
            snapshots.push(society.snapshot());
        }
    }
    society.check_invariants(config)?;
    Ok(society.into_result(snapshots))
}
