//! A single creative system: memory, constraint configurations, and the
//! generation, evaluation and update operators.
//!
//! Scoring mixes conformity with the external constraints and novelty with
//! respect to memory, `s = lambda * alignment + (1 - lambda) * novelty`, and
//! classifies against an adaptive threshold `theta`. Generation draws `k`
//! feasible candidates and picks one with probability proportional to
//! `alignment^beta`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::{alignment_of, feasible, potential_generation_space, Category, ExternalConfig, InternalConfig};
use crate::error::{invalid, Error, Result};
use crate::scalar::{clamp, Scalar};
use crate::space::{grid_distance, Artefact, SpaceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalClass {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "null")]
    NonDecidable,
}

impl EvalClass {
    pub const ALL: [EvalClass; 3] = [EvalClass::Positive, EvalClass::Negative, EvalClass::NonDecidable];

    pub fn symbol(self) -> &'static str {
        match self {
            EvalClass::Positive => "+",
            EvalClass::Negative => "-",
            EvalClass::NonDecidable => "null",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        EvalClass::ALL.into_iter().find(|c| c.symbol() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EvalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Qualitative class plus strength in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Evaluation<S: Scalar> {
    pub class: EvalClass,
    pub strength: S,
}

impl<S: Scalar> Evaluation<S> {
    pub fn new(class: EvalClass, strength: S) -> Self {
        match class {
            EvalClass::NonDecidable => Self::non_decidable(),
            _ => Evaluation { class, strength: clamp(strength, S::zero(), S::one()) },
        }
    }

    pub fn non_decidable() -> Self {
        Evaluation { class: EvalClass::NonDecidable, strength: S::zero() }
    }

    pub fn is_decidable(&self) -> bool {
        self.class != EvalClass::NonDecidable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default, deny_unknown_fields)]
pub struct OperatorParams<S: Scalar> {
    pub lambda: S,
    pub theta: S,
    pub theta_min: S,
    pub theta_max: S,
    pub beta: S,
    pub k: usize,
    pub n_attempts: u32,
    pub eta_c: S,
    pub eta_theta: S,
    pub eta_beta: S,
    pub beta_min: S,
    pub beta_max: S,
}

impl<S: Scalar> Default for OperatorParams<S> {
    fn default() -> Self {
        OperatorParams {
            lambda: S::lit(0.7),
            theta: S::lit(0.5),
            theta_min: S::lit(0.1),
            theta_max: S::lit(0.9),
            beta: S::lit(2.0),
            k: 16,
            n_attempts: 8,
            eta_c: S::lit(0.1),
            eta_theta: S::lit(0.05),
            eta_beta: S::lit(0.1),
            beta_min: S::lit(0.25),
            beta_max: S::lit(16.0),
        }
    }
}

impl<S: Scalar> OperatorParams<S> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !unit(self.lambda) {
            return Err(invalid("params.lambda must lie in [0, 1]"));
        }
        if !(self.theta > S::zero() && self.theta < S::one()) {
            return Err(invalid("params.theta must lie in (0, 1)"));
        }
        if !(self.theta_min <= self.theta_max && unit(self.theta_min) && unit(self.theta_max)) {
            return Err(invalid("params.theta_min/theta_max must be ordered within [0, 1]"));
        }
        if !(self.beta > S::zero() && self.beta_min > S::zero() && self.beta_min <= self.beta_max) {
            return Err(invalid("params.beta bounds must be positive and ordered"));
        }
        if !(self.eta_c >= S::zero() && self.eta_theta >= S::zero() && self.eta_beta >= S::zero()) {
            return Err(invalid("params learning rates must be >= 0"));
        }
        if self.k < 1 {
            return Err(invalid("params.k must be >= 1"));
        }
        if self.n_attempts < 1 {
            return Err(invalid("params.n_attempts must be >= 1"));
        }
        Ok(())
    }
}

/// Artefacts the system has recognised, with the tick each was first stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(u64, Artefact)>", into = "Vec<(u64, Artefact)>")]
pub struct Memory {
    set: BTreeSet<Artefact>,
    entries: Vec<(u64, Artefact)>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, a: &Artefact) -> bool {
        self.set.contains(a)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Store a point, returning false when it was already present or is empty.
    pub fn insert(&mut self, a: Artefact, tick: u64) -> bool {
        if a.is_empty() || self.set.contains(&a) {
            return false;
        }
        self.set.insert(a.clone());
        self.entries.push((tick, a));
        true
    }

    pub fn entries(&self) -> &[(u64, Artefact)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &Artefact> {
        self.entries.iter().map(|(_, a)| a)
    }
}

impl From<Vec<(u64, Artefact)>> for Memory {
    fn from(entries: Vec<(u64, Artefact)>) -> Self {
        let mut m = Memory::new();
        for (t, a) in entries {
            m.insert(a, t);
        }
        m
    }
}

impl From<Memory> for Vec<(u64, Artefact)> {
    fn from(m: Memory) -> Self {
        m.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Archetype {
    #[default]
    None,
    MisunderstoodGenius,
    AlwaysSatisfied,
    AlwaysUnsatisfied,
    FiniteGenerator,
    RandomWalk,
}

/// Which update operators fire when the agent receives an evaluated artefact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UpdateFlags {
    pub upd_external: bool,
    pub upd_evaluation: bool,
    pub upd_generation: bool,
    /// Also learn from the self-evaluation of the agent's own output.
    pub self_update: bool,
}

impl UpdateFlags {
    pub fn all() -> Self {
        UpdateFlags { upd_external: true, upd_evaluation: true, upd_generation: true, self_update: false }
    }

    pub fn any(&self) -> bool {
        self.upd_external || self.upd_evaluation || self.upd_generation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateTarget {
    External,
    Evaluation,
    Generation,
}

impl UpdateTarget {
    pub fn name(self) -> &'static str {
        match self {
            UpdateTarget::External => "external",
            UpdateTarget::Evaluation => "evaluation",
            UpdateTarget::Generation => "generation",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [UpdateTarget::External, UpdateTarget::Evaluation, UpdateTarget::Generation]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

/// Declarative description of an agent, as found in a society config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct AgentSpec<S: Scalar> {
    pub category: Category,
    #[serde(default)]
    pub archetype: Archetype,
    pub internal: InternalConfig<S>,
    #[serde(default)]
    pub external: ExternalConfig<S>,
    #[serde(default)]
    pub params: OperatorParams<S>,
    #[serde(default)]
    pub update_flags: UpdateFlags,
}

impl<S: Scalar> AgentSpec<S> {
    pub fn new(category: Category, internal: InternalConfig<S>, external: ExternalConfig<S>) -> Self {
        AgentSpec {
            category,
            archetype: Archetype::None,
            internal,
            external,
            params: OperatorParams::default(),
            update_flags: UpdateFlags::default(),
        }
    }

    pub fn validate(&self, cfg: &SpaceConfig) -> Result<()> {
        self.internal.validate(cfg)?;
        self.external.validate(cfg)?;
        self.params.validate()
    }
}

/// Outcome of one self-filtered production.
#[derive(Debug, Clone, PartialEq)]
pub struct Production<S: Scalar> {
    pub artefact: Artefact,
    pub attempts: u32,
    /// Self-evaluation of the accepted artefact, `None` when production failed.
    pub evaluation: Option<Evaluation<S>>,
    /// The artefact was absent from memory before self-insertion.
    pub novel_to_self: bool,
}

/// Deterministic per-agent stream: ChaCha8 keyed by the run seed, stream id = agent id.
pub fn agent_rng(run_seed: u64, agent_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(agent_id as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct Agent<S: Scalar> {
    pub id: usize,
    pub category: Category,
    pub archetype: Archetype,
    internal: InternalConfig<S>,
    pub external: ExternalConfig<S>,
    pub params: OperatorParams<S>,
    pub memory: Memory,
    pub update_flags: UpdateFlags,
    support: Option<Vec<Artefact>>,
    rng: ChaCha8Rng,
}

/// Serializable view of an agent's state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct AgentState<S: Scalar> {
    pub id: usize,
    pub category: Category,
    pub archetype: Archetype,
    pub internal: InternalConfig<S>,
    pub external: ExternalConfig<S>,
    pub params: OperatorParams<S>,
    pub update_flags: UpdateFlags,
    pub memory: Memory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<Artefact>>,
}

/// Build an agent from `base` with the archetype `kind` applied.
///
/// `cap` bounds the enumeration used to precompute a finite generator's support.
pub fn make_archetype<S: Scalar>(
    kind: Archetype,
    base: &AgentSpec<S>,
    id: usize,
    run_seed: u64,
    cfg: &SpaceConfig,
    cap: u128,
) -> Result<Agent<S>> {
    base.validate(cfg)?;
    let mut external = base.external.clone();
    let mut support = None;
    match kind {
        Archetype::MisunderstoodGenius => external = external.without_weights(),
        Archetype::FiniteGenerator => {
            if !cfg.is_enumerable(cap) {
                return Err(invalid(format!(
                    "finite generator needs an enumerable space ({} points, cap {cap})",
                    cfg.size()
                )));
            }
            let space = potential_generation_space(&base.internal, &external, cfg, cap)?;
            support = Some(space.into_iter().collect());
        }
        Archetype::None | Archetype::AlwaysSatisfied | Archetype::AlwaysUnsatisfied | Archetype::RandomWalk => {}
    }
    Ok(Agent {
        id,
        category: base.category,
        archetype: kind,
        internal: base.internal.clone(),
        external,
        params: base.params.clone(),
        memory: Memory::new(),
        update_flags: base.update_flags,
        support,
        rng: agent_rng(run_seed, id),
    })
}

/// Novelty of a point relative to memory: distance to the nearest stored artefact.
pub fn novelty<S: Scalar>(a: &Artefact, m: &Memory, cfg: &SpaceConfig) -> Result<S> {
    let coords = a.checked_coords(cfg)?;
    Ok(novelty_of(coords, m, cfg))
}

fn novelty_of<S: Scalar>(coords: &[u32], m: &Memory, cfg: &SpaceConfig) -> S {
    if m.is_empty() {
        return S::one();
    }
    m.iter()
        .filter_map(Artefact::coords)
        .map(|c| grid_distance::<S>(coords, c, cfg))
        .fold(S::infinity(), S::min)
}

/// Raw score `lambda * alignment + (1 - lambda) * novelty` for a feasible point.
pub fn score<S: Scalar>(coords: &[u32], external: &ExternalConfig<S>, memory: &Memory, lambda: S, cfg: &SpaceConfig) -> S {
    lambda * alignment_of(coords, external, cfg) + (S::one() - lambda) * novelty_of(coords, memory, cfg)
}

/// The evaluation operator as a pure function of the agent's components.
pub fn evaluate_with<S: Scalar>(
    a: &Artefact,
    archetype: Archetype,
    internal: &InternalConfig<S>,
    external: &ExternalConfig<S>,
    memory: &Memory,
    params: &OperatorParams<S>,
    cfg: &SpaceConfig,
) -> Evaluation<S> {
    let coords = match a.checked_coords(cfg) {
        Ok(c) if feasible(a, internal, cfg) => c,
        _ => return Evaluation::non_decidable(),
    };
    match archetype {
        Archetype::AlwaysSatisfied => return Evaluation::new(EvalClass::Positive, S::one()),
        Archetype::AlwaysUnsatisfied => return Evaluation::new(EvalClass::Negative, S::one()),
        _ => {}
    }
    let s = score(coords, external, memory, params.lambda, cfg);
    let theta = params.theta;
    let class = if s >= theta { EvalClass::Positive } else { EvalClass::Negative };
    let strength = (s - theta).abs() / theta.max(S::one() - theta);
    Evaluation::new(class, strength)
}

impl<S: Scalar> Agent<S> {
    pub fn new(id: usize, spec: &AgentSpec<S>, run_seed: u64, cfg: &SpaceConfig, cap: u128) -> Result<Self> {
        make_archetype(spec.archetype, spec, id, run_seed, cfg, cap)
    }

    /// Rebuild an agent from a stored state. The random stream restarts from `run_seed`.
    pub fn restore(state: AgentState<S>, run_seed: u64) -> Self {
        Agent {
            id: state.id,
            category: state.category,
            archetype: state.archetype,
            internal: state.internal,
            external: state.external,
            params: state.params,
            memory: state.memory,
            update_flags: state.update_flags,
            support: state.support,
            rng: agent_rng(run_seed, state.id),
        }
    }

    pub fn state(&self) -> AgentState<S> {
        AgentState {
            id: self.id,
            category: self.category,
            archetype: self.archetype,
            internal: self.internal.clone(),
            external: self.external.clone(),
            params: self.params.clone(),
            update_flags: self.update_flags,
            memory: self.memory.clone(),
            support: self.support.clone(),
        }
    }

    pub fn internal(&self) -> &InternalConfig<S> {
        &self.internal
    }

    /// Precomputed support of a finite generator.
    pub fn support(&self) -> Option<&[Artefact]> {
        self.support.as_deref()
    }

    pub fn is_feasible(&self, a: &Artefact, cfg: &SpaceConfig) -> bool {
        feasible(a, &self.internal, cfg)
    }

    /// Store a recognisable, not-yet-seen artefact.
    pub fn observe(&mut self, a: &Artefact, tick: u64, cfg: &SpaceConfig) -> bool {
        if !self.is_feasible(a, cfg) {
            return false;
        }
        self.memory.insert(a.clone(), tick)
    }

    pub fn evaluate(&self, a: &Artefact, cfg: &SpaceConfig) -> Evaluation<S> {
        evaluate_with(a, self.archetype, &self.internal, &self.external, &self.memory, &self.params, cfg)
    }

    /// Draw one artefact; `Artefact::Empty` when nothing feasible and aligned was found.
    pub fn generate(&mut self, cfg: &SpaceConfig) -> Artefact {
        let k = self.params.k;
        let mut candidates: Vec<&[u32]> = Vec::with_capacity(k);
        let mut drawn: Vec<Vec<u32>> = Vec::new();
        match &self.support {
            Some(support) => {
                if !support.is_empty() {
                    for _ in 0..k {
                        let i = self.rng.gen_range(0..support.len());
                        candidates.push(support[i].coords().unwrap_or_default());
                    }
                }
            }
            None => {
                let budget = 64 * k;
                let mut tries = 0;
                while drawn.len() < k && tries < budget {
                    tries += 1;
                    let p: Vec<u32> = (0..cfg.d).map(|_| self.rng.gen_range(0..=cfg.rho)).collect();
                    if feasible_coords(&p, &self.internal, cfg) {
                        drawn.push(p);
                    }
                }
                candidates.extend(drawn.iter().map(Vec::as_slice));
            }
        }
        if candidates.is_empty() {
            return Artefact::Empty;
        }
        let beta = self.params.beta;
        let weights: Vec<S> = candidates
            .iter()
            .map(|c| alignment_of(c, &self.external, cfg).powf(beta))
            .collect();
        let total = weights.iter().fold(S::zero(), |acc, &w| acc + w);
        if !(total > S::zero()) {
            return Artefact::Empty;
        }
        let u = S::lit(self.rng.gen::<f64>()) * total;
        let mut cum = S::zero();
        let mut pick = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= S::zero() {
                continue;
            }
            cum = cum + w;
            pick = Some(i);
            if u < cum {
                break;
            }
        }
        match pick {
            Some(i) => Artefact::Point(candidates[i].to_vec()),
            None => Artefact::Empty,
        }
    }

    /// Generate and self-evaluate until a positive artefact appears or attempts run out.
    pub fn produce(&mut self, cfg: &SpaceConfig, tick: u64) -> Production<S> {
        let max = self.params.n_attempts;
        for attempt in 1..=max {
            let a = self.generate(cfg);
            if a.is_empty() {
                continue;
            }
            let e = self.evaluate(&a, cfg);
            if e.class == EvalClass::Positive {
                let novel_to_self = self.observe(&a, tick, cfg);
                return Production { artefact: a, attempts: attempt, evaluation: Some(e), novel_to_self };
            }
        }
        Production { artefact: Artefact::Empty, attempts: max, evaluation: None, novel_to_self: false }
    }

    /// Move external centers toward (positive) or away from (negative) the artefact.
    pub fn update_external(&mut self, a: &Artefact, e: &Evaluation<S>, cfg: &SpaceConfig) {
        let eta = self.params.eta_c;
        if self.archetype == Archetype::RandomWalk {
            for c in &mut self.external.constraints {
                for x in &mut c.region.center {
                    let step = S::lit(self.rng.gen_range(-1.0..=1.0)) * eta;
                    *x = clamp(*x + step, S::zero(), S::one());
                }
            }
            return;
        }
        let Ok(coords) = a.checked_coords(cfg) else {
            log::debug!("agent {}: external update with a non-point artefact ignored", self.id);
            return;
        };
        let sign = match e.class {
            EvalClass::Positive => S::one(),
            EvalClass::Negative => -S::one(),
            EvalClass::NonDecidable => return,
        };
        let rho = S::lit(cfg.rho as f64);
        let factor = sign * eta * e.strength;
        for c in &mut self.external.constraints {
            for (x, &g) in c.region.center.iter_mut().zip(coords) {
                let target = S::lit(g as f64) / rho;
                *x = clamp(*x + factor * (target - *x), S::zero(), S::one());
            }
        }
    }

    /// Aspiration adaptation of the acceptance threshold.
    pub fn update_evaluation(&mut self, _a: &Artefact, e: &Evaluation<S>) {
        let p = &mut self.params;
        let step = p.eta_theta * e.strength;
        p.theta = match e.class {
            EvalClass::Positive => p.theta_max.min(p.theta + step),
            EvalClass::Negative => p.theta_min.max(p.theta - step),
            EvalClass::NonDecidable => p.theta,
        };
    }

    /// Sharpen selection after approval, flatten it after rejection.
    pub fn update_generation(&mut self, _a: &Artefact, e: &Evaluation<S>) {
        let p = &mut self.params;
        let factor = S::one() + p.eta_beta * e.strength;
        p.beta = match e.class {
            EvalClass::Positive => p.beta_max.min(p.beta * factor),
            EvalClass::Negative => p.beta_min.max(p.beta / factor),
            EvalClass::NonDecidable => p.beta,
        };
    }

    /// Apply one update target.
    pub fn apply_update(&mut self, target: UpdateTarget, a: &Artefact, e: &Evaluation<S>, cfg: &SpaceConfig) {
        match target {
            UpdateTarget::External => self.update_external(a, e, cfg),
            UpdateTarget::Evaluation => self.update_evaluation(a, e),
            UpdateTarget::Generation => self.update_generation(a, e),
        }
    }

    /// Targets enabled by the agent's flags, in a fixed order.
    pub fn enabled_updates(&self) -> impl Iterator<Item = UpdateTarget> {
        let f = self.update_flags;
        [
            (f.upd_external, UpdateTarget::External),
            (f.upd_evaluation, UpdateTarget::Evaluation),
            (f.upd_generation, UpdateTarget::Generation),
        ]
        .into_iter()
        .filter_map(|(on, t)| on.then_some(t))
    }

    pub(crate) fn check_internal(&self, original: &InternalConfig<S>) -> Result<()> {
        if &self.internal != original {
            return Err(Error::Invariant(format!("agent {} internal configuration changed", self.id)));
        }
        Ok(())
    }
}

fn feasible_coords<S: Scalar>(coords: &[u32], ic: &InternalConfig<S>, cfg: &SpaceConfig) -> bool {
    ic.groups.iter().any(|group| {
        group
            .iter()
            .filter(|c| c.is_active())
            .all(|c| crate::space::distance_to_center(coords, &c.region.center, cfg) <= c.region.radius)
    })
}
