//! Internal and external constraint configurations.
//!
//! A rule is a ball in the normalized space. Internal constraints are hard:
//! an artefact is feasible when some group has all of its active balls
//! containing it (conjunction inside a group, disjunction across groups).
//! External constraints are soft: each ball contributes a triangular kernel
//! `max(0, 1 - dist / radius)` weighted by its relevance.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::space::{distance_to_center, enumerate_space, real_distance, Artefact, SpaceConfig};

/// Alignment reported when no external constraint carries weight.
pub const NEUTRAL_ALIGNMENT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Region<S: Scalar> {
    pub center: Vec<S>,
    pub radius: S,
}

impl<S: Scalar> Region<S> {
    pub fn new(center: Vec<S>, radius: S) -> Result<Self> {
        let r = Region { center, radius };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<()> {
        if self.center.is_empty() {
            return Err(invalid("region center must have at least one component"));
        }
        if self.center.iter().any(|c| !(*c >= S::zero() && *c <= S::one())) {
            return Err(invalid("region center components must lie in [0, 1]"));
        }
        if !(self.radius > S::zero()) || !self.radius.is_finite() {
            return Err(invalid("region radius must be a finite value > 0"));
        }
        Ok(())
    }

    pub fn validate(&self, cfg: &SpaceConfig) -> Result<()> {
        self.check()?;
        if self.center.len() != cfg.d {
            return Err(Error::DimensionMismatch { expected: cfg.d, got: self.center.len() });
        }
        Ok(())
    }

    /// Two balls are disjoint when their centers are farther apart than the radii sum.
    pub fn is_disjoint_from(&self, other: &Region<S>, cfg: &SpaceConfig) -> bool {
        real_distance(&self.center, &other.center, cfg) > self.radius + other.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WeightedConstraint<S: Scalar> {
    pub weight: S,
    pub region: Region<S>,
}

impl<S: Scalar> WeightedConstraint<S> {
    pub fn new(weight: S, center: Vec<S>, radius: S) -> Result<Self> {
        let w = WeightedConstraint { weight, region: Region::new(center, radius)? };
        w.check_weight()?;
        Ok(w)
    }

    fn check_weight(&self) -> Result<()> {
        if !(self.weight >= S::zero() && self.weight <= S::one()) {
            return Err(invalid("constraint weight must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn validate(&self, cfg: &SpaceConfig) -> Result<()> {
        self.check_weight()?;
        self.region.validate(cfg)
    }

    pub fn is_active(&self) -> bool {
        self.weight > S::zero()
    }

    fn contains(&self, coords: &[u32], cfg: &SpaceConfig) -> bool {
        distance_to_center(coords, &self.region.center, cfg) <= self.region.radius
    }
}

pub type ConstraintGroup<S> = Vec<WeightedConstraint<S>>;

/// Hard cognitive limits. Never modified once an agent is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InternalConfig<S: Scalar> {
    pub groups: Vec<ConstraintGroup<S>>,
}

impl<S: Scalar> InternalConfig<S> {
    pub fn new(groups: Vec<ConstraintGroup<S>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(invalid("internal config needs at least one group"));
        }
        if groups.iter().any(Vec::is_empty) {
            return Err(invalid("internal constraint groups must be non-empty"));
        }
        Ok(InternalConfig { groups })
    }

    /// A single ball covering the whole normalized space.
    pub fn full_space(d: usize) -> Self {
        let c = WeightedConstraint {
            weight: S::one(),
            region: Region { center: vec![S::lit(0.5); d], radius: S::one() },
        };
        InternalConfig { groups: vec![vec![c]] }
    }

    pub fn validate(&self, cfg: &SpaceConfig) -> Result<()> {
        InternalConfig::new(self.groups.clone())?;
        self.groups.iter().flatten().try_for_each(|c| c.validate(cfg))
    }

    pub fn feasible(&self, a: &Artefact, cfg: &SpaceConfig) -> bool {
        feasible(a, self, cfg)
    }
}

/// Soft cultural preferences. Mutable through the update operator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ExternalConfig<S: Scalar> {
    pub constraints: Vec<WeightedConstraint<S>>,
}

impl<S: Scalar> ExternalConfig<S> {
    pub fn new(constraints: Vec<WeightedConstraint<S>>) -> Self {
        ExternalConfig { constraints }
    }

    pub fn validate(&self, cfg: &SpaceConfig) -> Result<()> {
        self.constraints.iter().try_for_each(|c| c.validate(cfg))
    }

    pub fn total_weight(&self) -> S {
        self.constraints.iter().fold(S::zero(), |acc, c| acc + c.weight)
    }

    /// Same regions, every weight set to zero.
    pub fn without_weights(&self) -> Self {
        let constraints = self
            .constraints
            .iter()
            .map(|c| WeightedConstraint { weight: S::zero(), region: c.region.clone() })
            .collect();
        ExternalConfig { constraints }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Human,
    Ccs,
    Cad,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Human, Category::Ccs, Category::Cad];
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Human => "Human",
            Category::Ccs => "Ccs",
            Category::Cad => "Cad",
        })
    }
}

/// Internal configuration shared by a whole category of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryTemplate<S: Scalar> {
    pub name: Category,
    pub internal: InternalConfig<S>,
    /// For `Cad`, the index of the first extension group; every group before it
    /// comes from the human template.
    pub extension_start: Option<usize>,
}

impl<S: Scalar> CategoryTemplate<S> {
    /// Human perception: a ball of radius 0.35 centred at 0.35 on every axis.
    pub fn human(d: usize) -> Self {
        let c = WeightedConstraint {
            weight: S::one(),
            region: Region { center: vec![S::lit(0.35); d], radius: S::lit(0.35) },
        };
        CategoryTemplate { name: Category::Human, internal: InternalConfig { groups: vec![vec![c]] }, extension_start: None }
    }

    /// Autonomous computational systems: a ball of radius 0.35 centred at 0.65.
    pub fn ccs(d: usize) -> Self {
        let c = WeightedConstraint {
            weight: S::one(),
            region: Region { center: vec![S::lit(0.65); d], radius: S::lit(0.35) },
        };
        CategoryTemplate { name: Category::Ccs, internal: InternalConfig { groups: vec![vec![c]] }, extension_start: None }
    }

    /// Computer-aided humans with the default extension ball (radius 0.12 at 0.85).
    pub fn cad(d: usize) -> Self {
        let ext = WeightedConstraint {
            weight: S::one(),
            region: Region { center: vec![S::lit(0.85); d], radius: S::lit(0.12) },
        };
        Self::cad_from(&Self::human(d), vec![ext], &SpaceConfig { d, rho: 1 })
            .expect("default extension is disjoint from the default human template")
    }

    /// Human groups plus one extension group that must not overlap any of them.
    pub fn cad_from(human: &CategoryTemplate<S>, extension: ConstraintGroup<S>, cfg: &SpaceConfig) -> Result<Self> {
        if human.name != Category::Human {
            return Err(invalid("cad template must extend a human template"));
        }
        if extension.is_empty() {
            return Err(invalid("cad extension group must be non-empty"));
        }
        let disjoint_from = |group: &ConstraintGroup<S>| {
            group.iter().filter(|h| h.is_active()).any(|h| {
                extension.iter().filter(|e| e.is_active()).any(|e| h.region.is_disjoint_from(&e.region, cfg))
            })
        };
        if !human.internal.groups.iter().all(disjoint_from) {
            return Err(invalid("cad extension group overlaps a human group"));
        }
        let mut groups = human.internal.groups.clone();
        let extension_start = groups.len();
        groups.push(extension);
        Ok(CategoryTemplate { name: Category::Cad, internal: InternalConfig { groups }, extension_start: Some(extension_start) })
    }

    /// The human-derived and extension parts of a `Cad` template.
    pub fn cad_parts(&self) -> Option<(InternalConfig<S>, InternalConfig<S>)> {
        let start = self.extension_start?;
        let (hum, ext) = self.internal.groups.split_at(start);
        Some((InternalConfig { groups: hum.to_vec() }, InternalConfig { groups: ext.to_vec() }))
    }
}

pub fn feasible<S: Scalar>(a: &Artefact, ic: &InternalConfig<S>, cfg: &SpaceConfig) -> bool {
    let Ok(coords) = a.checked_coords(cfg) else {
        return false;
    };
    ic.groups
        .iter()
        .any(|group| group.iter().filter(|c| c.is_active()).all(|c| c.contains(coords, cfg)))
}

/// Weighted mean kernel score of `a` against the external constraints.
pub fn alignment<S: Scalar>(a: &Artefact, ec: &ExternalConfig<S>, cfg: &SpaceConfig) -> Result<S> {
    let coords = a.checked_coords(cfg)?;
    Ok(alignment_of(coords, ec, cfg))
}

pub(crate) fn alignment_of<S: Scalar>(coords: &[u32], ec: &ExternalConfig<S>, cfg: &SpaceConfig) -> S {
    let total = ec.total_weight();
    if total <= S::zero() {
        return S::lit(NEUTRAL_ALIGNMENT);
    }
    let weighted = ec.constraints.iter().filter(|c| c.is_active()).fold(S::zero(), |acc, c| {
        let dist = distance_to_center(coords, &c.region.center, cfg);
        let kernel = (S::one() - dist / c.region.radius).max(S::zero());
        acc + c.weight * kernel
    });
    (weighted / total).min(S::one())
}

/// Every artefact the configuration can produce with nonzero probability.
pub fn potential_generation_space<S: Scalar>(
    ic: &InternalConfig<S>,
    ec: &ExternalConfig<S>,
    cfg: &SpaceConfig,
    cap: u128,
) -> Result<BTreeSet<Artefact>> {
    let genius = ec.total_weight() <= S::zero();
    Ok(enumerate_space(cfg, cap)?
        .into_iter()
        .filter(|a| feasible(a, ic, cfg))
        .filter(|a| genius || alignment_of(a.coords().unwrap_or_default(), ec, cfg) > S::zero())
        .collect())
}

/// Mean over position-matched constraints of center distance plus weight difference.
pub fn config_distance<S: Scalar>(ea: &ExternalConfig<S>, eb: &ExternalConfig<S>, cfg: &SpaceConfig) -> Result<S> {
    let (la, lb) = (ea.constraints.len(), eb.constraints.len());
    if la != lb {
        return Err(Error::LengthMismatch { left: la, right: lb });
    }
    if la == 0 {
        return Ok(S::zero());
    }
    let mut sum = S::zero();
    for (a, b) in ea.constraints.iter().zip(&eb.constraints) {
        if a.region.center.len() != b.region.center.len() {
            return Err(Error::LengthMismatch { left: a.region.center.len(), right: b.region.center.len() });
        }
        sum = sum + real_distance(&a.region.center, &b.region.center, cfg) + (a.weight - b.weight).abs();
    }
    Ok(sum / S::from_count(la))
}
