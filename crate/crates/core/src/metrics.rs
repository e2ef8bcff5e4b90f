//! Post-hoc analysis over agents and completed event logs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agent::{evaluate_with, Agent, EvalClass, Evaluation};
use crate::constraints::{config_distance, potential_generation_space, Category, ExternalConfig};
use crate::error::{Error, Result};
use crate::network::Graph;
use crate::scalar::Scalar;
use crate::society::{Event, EventKind, Snapshot};
use crate::space::{Artefact, SpaceConfig};

/// Number of strength bins over `[0, 1]`.
pub const STRENGTH_BINS: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalPartition {
    pub positive: Vec<Artefact>,
    pub negative: Vec<Artefact>,
    pub non_decidable: Vec<Artefact>,
}

impl EvalPartition {
    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len() + self.non_decidable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Decidable evaluations: positive and negative together.
    pub fn decidable(&self) -> impl Iterator<Item = &Artefact> {
        self.positive.iter().chain(&self.negative)
    }
}

/// Split `artefacts` by the class the agent assigns them, preserving input order.
pub fn eval_partition<'a, S: Scalar>(
    agent: &Agent<S>,
    artefacts: impl IntoIterator<Item = &'a Artefact>,
    cfg: &SpaceConfig,
) -> EvalPartition {
    let mut out = EvalPartition::default();
    for a in artefacts {
        let bucket = match agent.evaluate(a, cfg).class {
            EvalClass::Positive => &mut out.positive,
            EvalClass::Negative => &mut out.negative,
            EvalClass::NonDecidable => &mut out.non_decidable,
        };
        bucket.push(a.clone());
    }
    out
}

/// Empirical class pmf with per-class strength histograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EvalDistribution<S: Scalar> {
    /// Indexed by [`EvalClass::index`]: positive, negative, non-decidable.
    pub pmf: [S; 3],
    pub positive_hist: [u64; STRENGTH_BINS],
    pub negative_hist: [u64; STRENGTH_BINS],
    pub samples: u64,
}

impl<S: Scalar> EvalDistribution<S> {
    fn from_counts(counts: [u64; 3], positive_hist: [u64; STRENGTH_BINS], negative_hist: [u64; STRENGTH_BINS]) -> Self {
        let samples: u64 = counts.iter().sum();
        let pmf = if samples == 0 {
            [S::zero(); 3]
        } else {
            counts.map(|c| S::lit(c as f64) / S::lit(samples as f64))
        };
        EvalDistribution { pmf, positive_hist, negative_hist, samples }
    }

    pub fn pmf_of(&self, class: EvalClass) -> S {
        self.pmf[class.index()]
    }
}

#[derive(Debug, Default, Clone)]
struct Tally {
    counts: [u64; 3],
    pos: [u64; STRENGTH_BINS],
    neg: [u64; STRENGTH_BINS],
}

impl Tally {
    fn add<S: Scalar>(&mut self, e: &Evaluation<S>) {
        self.counts[e.class.index()] += 1;
        let bin = (e.strength * S::from_count(STRENGTH_BINS)).floor().to_usize().unwrap_or(0).min(STRENGTH_BINS - 1);
        match e.class {
            EvalClass::Positive => self.pos[bin] += 1,
            EvalClass::Negative => self.neg[bin] += 1,
            EvalClass::NonDecidable => {}
        }
    }

    fn merge(&mut self, o: &Tally) {
        for i in 0..3 {
            self.counts[i] += o.counts[i];
        }
        for i in 0..STRENGTH_BINS {
            self.pos[i] += o.pos[i];
            self.neg[i] += o.neg[i];
        }
    }

    fn finish<S: Scalar>(&self) -> EvalDistribution<S> {
        EvalDistribution::from_counts(self.counts, self.pos, self.neg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport<S: Scalar> {
    pub per_artefact: Vec<(Artefact, EvalDistribution<S>)>,
    pub pooled: EvalDistribution<S>,
}

/// Population response of systems sharing one internal configuration.
///
/// Each artefact is evaluated under every pair of (agent memory, external
/// sample); the sample list stands in for the set of all possible external
/// configurations. Agents keep their own archetype and parameters.
pub fn estimate_eval_distribution<S: Scalar>(
    agents: &[&Agent<S>],
    external_samples: &[ExternalConfig<S>],
    artefacts: &[Artefact],
    cfg: &SpaceConfig,
) -> Result<DistributionReport<S>> {
    let Some(first) = agents.first() else {
        return Err(crate::error::invalid("at least one agent is required"));
    };
    if agents.iter().any(|a| a.internal() != first.internal()) {
        return Err(Error::InternalMismatch);
    }
    let mut pooled = Tally::default();
    let mut per_artefact = Vec::with_capacity(artefacts.len());
    for a in artefacts {
        let mut t = Tally::default();
        for agent in agents {
            for ext in external_samples {
                let e = evaluate_with(a, agent.archetype, agent.internal(), ext, &agent.memory, &agent.params, cfg);
                t.add(&e);
            }
        }
        pooled.merge(&t);
        per_artefact.push((a.clone(), t.finish()));
    }
    Ok(DistributionReport { per_artefact, pooled: pooled.finish() })
}

/// Union of the agents' potential generation spaces.
pub fn union_generation_space<S: Scalar>(agents: &[&Agent<S>], cfg: &SpaceConfig, cap: u128) -> Result<BTreeSet<Artefact>> {
    let mut out = BTreeSet::new();
    for a in agents {
        out.extend(potential_generation_space(a.internal(), &a.external, cfg, cap)?);
    }
    Ok(out)
}

/// Mean pairwise external-config distance per snapshot.
pub fn convergence_series<S: Scalar>(snapshots: &[Snapshot<S>], cfg: &SpaceConfig) -> Result<Vec<S>> {
    snapshots.iter().map(|s| mean_pairwise_distance(s, cfg)).collect()
}

pub fn mean_pairwise_distance<S: Scalar>(snapshot: &Snapshot<S>, cfg: &SpaceConfig) -> Result<S> {
    let ag = &snapshot.agents;
    if ag.len() < 2 {
        return Err(crate::error::invalid("convergence needs at least two agents"));
    }
    let mut sum = S::zero();
    let mut pairs = 0usize;
    for i in 0..ag.len() {
        for j in i + 1..ag.len() {
            sum = sum + config_distance(&ag[i].external, &ag[j].external, cfg)?;
            pairs += 1;
        }
    }
    Ok(sum / S::from_count(pairs))
}

/// Map each artefact id in the log to the agent that produced it.
pub fn creators<S: Scalar>(log: &[Event<S>]) -> BTreeMap<u64, usize> {
    log.iter()
        .filter_map(|e| match e.kind {
            EventKind::Generated { artefact_id, .. } => Some((artefact_id, e.agent)),
            _ => None,
        })
        .collect()
}

/// Updates in other agents triggered by this agent's artefacts.
pub fn influence<S: Scalar>(agent_id: usize, log: &[Event<S>]) -> u64 {
    let creators = creators(log);
    log.iter()
        .filter(|e| e.agent != agent_id)
        .filter(|e| match e.kind {
            EventKind::Updated { artefact_id, .. } => creators.get(&artefact_id) == Some(&agent_id),
            _ => false,
        })
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfluenceRow {
    pub agent_id: usize,
    pub degree: usize,
    pub influence: u64,
    pub positive_received: u64,
    pub negative_received: u64,
    pub null_received: u64,
}

/// Influence and received evaluations per agent, joined with node degree.
pub fn influence_by_degree<S: Scalar>(log: &[Event<S>], graph: &Graph) -> Vec<InfluenceRow> {
    let creators = creators(log);
    let mut rows: Vec<InfluenceRow> = (0..graph.n())
        .map(|v| InfluenceRow {
            agent_id: v,
            degree: graph.degree(v),
            influence: 0,
            positive_received: 0,
            negative_received: 0,
            null_received: 0,
        })
        .collect();
    for e in log {
        match e.kind {
            EventKind::Updated { artefact_id, .. } => {
                if let Some(&c) = creators.get(&artefact_id) {
                    if c != e.agent && c < rows.len() {
                        rows[c].influence += 1;
                    }
                }
            }
            EventKind::Evaluated { artefact_id, evaluation } => {
                if let Some(row) = creators.get(&artefact_id).and_then(|&c| rows.get_mut(c)) {
                    match evaluation.class {
                        EvalClass::Positive => row.positive_received += 1,
                        EvalClass::Negative => row.negative_received += 1,
                        EvalClass::NonDecidable => row.null_received += 1,
                    }
                }
            }
            _ => {}
        }
    }
    rows
}

/// Distinct outputs of the agent that lie in its potential generation space,
/// as a fraction of that space. A finite generator is measured against its support.
pub fn coverage<S: Scalar>(agent: &Agent<S>, log: &[Event<S>], cfg: &SpaceConfig, cap: u128) -> Result<S> {
    let space: BTreeSet<Artefact> = match agent.support() {
        Some(s) => s.iter().cloned().collect(),
        None => potential_generation_space(agent.internal(), &agent.external, cfg, cap)?,
    };
    if space.is_empty() {
        return Ok(S::zero());
    }
    let produced: BTreeSet<&Artefact> = log
        .iter()
        .filter(|e| e.agent == agent.id)
        .filter_map(|e| match &e.kind {
            EventKind::Generated { artefact, .. } => Some(artefact),
            _ => None,
        })
        .filter(|a| space.contains(*a))
        .collect();
    Ok(S::from_count(produced.len()) / S::from_count(space.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Form {
    /// Humans for humans.
    TwoH,
    /// Computer-aided humans for humans.
    CH,
    /// AI for humans.
    AIH,
    /// AI for AI.
    TwoAI,
    Other(Category, Category),
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Form::TwoH => f.write_str("2H"),
            Form::CH => f.write_str("CH"),
            Form::AIH => f.write_str("AIH"),
            Form::TwoAI => f.write_str("2AI"),
            Form::Other(g, v) => write!(f, "Other({g},{v})"),
        }
    }
}

pub fn classify_form(generator: Category, evaluator: Category) -> Form {
    use Category::*;
    match (generator, evaluator) {
        (Human, Human) => Form::TwoH,
        (Cad, Human) => Form::CH,
        (Ccs, Human) => Form::AIH,
        (Ccs, Ccs) => Form::TwoAI,
        (g, v) => Form::Other(g, v),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreativityCounts {
    pub p_per_agent: BTreeMap<usize, u64>,
    pub h_per_agent: BTreeMap<usize, u64>,
    pub p_total: u64,
    pub h_total: u64,
}

pub fn creativity_counts<S: Scalar>(log: &[Event<S>]) -> CreativityCounts {
    let mut c = CreativityCounts::default();
    for e in log {
        match e.kind {
            EventKind::PCreative { .. } => {
                *c.p_per_agent.entry(e.agent).or_default() += 1;
                c.p_total += 1;
            }
            EventKind::HCreative { .. } => {
                *c.h_per_agent.entry(e.agent).or_default() += 1;
                c.h_total += 1;
            }
            _ => {}
        }
    }
    c
}

/// Fraction of decidable peer evaluations received by `agent_id` that were positive.
pub fn positive_rate_received(row: &InfluenceRow) -> Option<f64> {
    let decided = row.positive_received + row.negative_received;
    (decided > 0).then(|| row.positive_received as f64 / decided as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{make_archetype, AgentSpec, Archetype};
    use crate::constraints::{InternalConfig, WeightedConstraint};
    use crate::space::enumerate_space;

    fn sp(d: usize, rho: u32) -> SpaceConfig {
        SpaceConfig::new(d, rho).unwrap()
    }

    fn wc(w: f64, center: &[f64], r: f64) -> WeightedConstraint<f64> {
        WeightedConstraint::new(w, center.to_vec(), r).unwrap()
    }

    fn agent_with(ic: InternalConfig<f64>, ec: ExternalConfig<f64>, kind: Archetype, cfg: &SpaceConfig) -> Agent<f64> {
        let spec = AgentSpec::new(Category::Human, ic, ec);
        make_archetype(kind, &spec, 0, 1, cfg, 1 << 20).unwrap()
    }

    #[test]
    fn partition_examples() {
        let cfg = sp(2, 10);
        let pts = enumerate_space(&cfg, 1000).unwrap();
        let sat = agent_with(InternalConfig::full_space(2), ExternalConfig::default(), Archetype::AlwaysSatisfied, &cfg);
        let p = eval_partition(&sat, &pts, &cfg);
        assert_eq!(p.positive.len(), pts.len());
        assert!(p.negative.is_empty() && p.non_decidable.is_empty());

        // feasible iff x <= 0.5: the left half of a 1-d grid
        let line = sp(1, 10);
        let pts1 = enumerate_space(&line, 100).unwrap();
        let half = InternalConfig::new(vec![vec![wc(1.0, &[0.0], 0.5)]]).unwrap();
        let a = agent_with(half, ExternalConfig::default(), Archetype::None, &line);
        let p = eval_partition(&a, &pts1, &line);
        let oracle: Vec<Artefact> = (0u32..=10).filter(|&k| k as f64 / 10.0 > 0.5).map(|k| Artefact::point([k])).collect();
        assert_eq!(oracle.len(), 5);
        assert_eq!(p.non_decidable, oracle);
        assert_eq!(p.len(), pts1.len());

        assert!(eval_partition(&a, &[], &cfg).is_empty());
    }

    #[test]
    fn distribution_point_mass_for_single_agent() {
        let cfg = sp(1, 4);
        let ec = ExternalConfig::new(vec![wc(1.0, &[0.5], 0.3)]);
        let a = agent_with(InternalConfig::full_space(1), ec.clone(), Archetype::None, &cfg);
        let pts = enumerate_space(&cfg, 100).unwrap();
        let r = estimate_eval_distribution(&[&a], &[ec], &pts, &cfg).unwrap();
        for (p, d) in &r.per_artefact {
            let class = a.evaluate(p, &cfg).class;
            assert_eq!(d.pmf_of(class), 1.0);
            assert_eq!(d.samples, 1);
        }
        let total: f64 = r.pooled.pmf.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let hist: u64 = r.pooled.positive_hist.iter().sum::<u64>() + r.pooled.negative_hist.iter().sum::<u64>();
        assert_eq!(hist, 5);
    }

    #[test]
    fn distribution_infeasible_is_always_null() {
        let cfg = sp(1, 4);
        let ic = InternalConfig::new(vec![vec![wc(1.0, &[0.0], 0.3)]]).unwrap();
        let a = agent_with(ic.clone(), ExternalConfig::default(), Archetype::None, &cfg);
        let b = agent_with(ic, ExternalConfig::default(), Archetype::AlwaysSatisfied, &cfg);
        let samples = vec![ExternalConfig::new(vec![wc(1.0, &[1.0], 0.5)]), ExternalConfig::default()];
        let r = estimate_eval_distribution(&[&a, &b], &samples, &[Artefact::point([4])], &cfg).unwrap();
        assert_eq!(r.per_artefact[0].1.pmf_of(EvalClass::NonDecidable), 1.0);
        assert_eq!(r.per_artefact[0].1.samples, 4);
    }

    #[test]
    fn distribution_straddling_threshold() {
        // brute force: at (1.0), aligned sample gives s = 0.7*1 + 0.3*1 = 1.0 >= 0.5,
        // the distant sample gives s = 0.7*0 + 0.3*1 = 0.3 < 0.5
        let cfg = sp(1, 4);
        let a = agent_with(InternalConfig::full_space(1), ExternalConfig::default(), Archetype::None, &cfg);
        let near = ExternalConfig::new(vec![wc(1.0, &[1.0], 0.3)]);
        let far = ExternalConfig::new(vec![wc(1.0, &[0.0], 0.3)]);
        let r = estimate_eval_distribution(&[&a], &[near, far], &[Artefact::point([4])], &cfg).unwrap();
        let d = &r.per_artefact[0].1;
        assert_eq!(d.pmf_of(EvalClass::Positive), 0.5);
        assert_eq!(d.pmf_of(EvalClass::Negative), 0.5);
        // strengths: |1.0 - 0.5| / 0.5 = 1 -> last bin; |0.3 - 0.5| / 0.5 = 0.4 sits on the 7/8 bin edge
        assert_eq!(d.positive_hist[STRENGTH_BINS - 1], 1);
        assert_eq!(d.negative_hist[7] + d.negative_hist[8], 1);
        assert_eq!(d.negative_hist.iter().sum::<u64>(), 1);
    }

    #[test]
    fn distribution_requires_shared_internal() {
        let cfg = sp(1, 4);
        let a = agent_with(InternalConfig::full_space(1), ExternalConfig::default(), Archetype::None, &cfg);
        let ic = InternalConfig::new(vec![vec![wc(1.0, &[0.0], 0.3)]]).unwrap();
        let b = agent_with(ic, ExternalConfig::default(), Archetype::None, &cfg);
        assert_eq!(
            estimate_eval_distribution(&[&a, &b], &[ExternalConfig::default()], &[], &cfg).unwrap_err(),
            Error::InternalMismatch
        );
    }

    #[test]
    fn union_examples() {
        let cfg = sp(2, 10);
        let left = InternalConfig::new(vec![vec![wc(1.0, &[0.1, 0.1], 0.1)]]).unwrap();
        let right = InternalConfig::new(vec![vec![wc(1.0, &[0.9, 0.9], 0.1)]]).unwrap();
        let a = agent_with(left, ExternalConfig::default(), Archetype::None, &cfg);
        let b = agent_with(right, ExternalConfig::default(), Archetype::None, &cfg);
        let ua = union_generation_space(&[&a], &cfg, 1000).unwrap();
        assert_eq!(ua, potential_generation_space(a.internal(), &a.external, &cfg, 1000).unwrap());
        let ub = union_generation_space(&[&b], &cfg, 1000).unwrap();
        let both = union_generation_space(&[&a, &b], &cfg, 1000).unwrap();
        assert!(ua.is_disjoint(&ub));
        assert_eq!(both.len(), ua.len() + ub.len());
        assert!((both.len() as u128) < cfg.size());
    }

    #[test]
    fn union_of_cad_agent_splits_cleanly() {
        use crate::constraints::CategoryTemplate;
        let cfg = sp(2, 20);
        let cad = CategoryTemplate::<f64>::cad(2);
        let (hum, ext) = cad.cad_parts().unwrap();
        let whole = agent_with(cad.internal.clone(), ExternalConfig::default(), Archetype::None, &cfg);
        let h = agent_with(hum, ExternalConfig::default(), Archetype::None, &cfg);
        let e = agent_with(ext, ExternalConfig::default(), Archetype::None, &cfg);
        let uw = union_generation_space(&[&whole], &cfg, 10_000).unwrap();
        let uh = union_generation_space(&[&h], &cfg, 10_000).unwrap();
        let ue = union_generation_space(&[&e], &cfg, 10_000).unwrap();
        assert!(uh.is_disjoint(&ue));
        assert_eq!(uw, uh.union(&ue).cloned().collect());
    }

    #[test]
    fn classify_form_examples() {
        use Category::*;
        assert_eq!(classify_form(Human, Human), Form::TwoH);
        assert_eq!(classify_form(Cad, Human), Form::CH);
        assert_eq!(classify_form(Ccs, Human), Form::AIH);
        assert_eq!(classify_form(Ccs, Ccs), Form::TwoAI);
        assert_eq!(classify_form(Human, Ccs), Form::Other(Human, Ccs));
        assert_eq!(Form::TwoAI.to_string(), "2AI");
    }

    #[test]
    fn counts_on_empty_log() {
        let c = creativity_counts::<f64>(&[]);
        assert_eq!((c.p_total, c.h_total), (0, 0));
        assert!(c.p_per_agent.is_empty());
    }
}
