//! Deterministic agent-based simulation of creative systems.
//!
//! Agents generate artefacts on a finite grid, filter them through their own
//! evaluation, broadcast them over a scale-free social graph, and learn from
//! the evaluations their neighbors make. All real-valued math is generic over
//! [`Scalar`] (`f32` or `f64`); the aliases at the crate root fix it to `f64`.

pub mod agent;
pub mod constraints;
pub mod error;
pub mod metrics;
pub mod network;
pub mod scalar;
pub mod society;
pub mod space;

pub use agent::{Archetype, EvalClass, Memory, UpdateFlags, UpdateTarget};
pub use constraints::Category;
pub use error::{Error, Result};
pub use metrics::{EvalPartition, Form, InfluenceRow};
pub use network::Graph;
pub use scalar::Scalar;
pub use society::{ArtefactRecord, GlobalRegistry, GraphSpec};
pub use space::{Artefact, SpaceConfig};

pub type Agent = agent::Agent<f64>;
pub type AgentSpec = agent::AgentSpec<f64>;
pub type AgentState = agent::AgentState<f64>;
pub type Evaluation = agent::Evaluation<f64>;
pub type OperatorParams = agent::OperatorParams<f64>;
pub type Region = constraints::Region<f64>;
pub type WeightedConstraint = constraints::WeightedConstraint<f64>;
pub type InternalConfig = constraints::InternalConfig<f64>;
pub type ExternalConfig = constraints::ExternalConfig<f64>;
pub type CategoryTemplate = constraints::CategoryTemplate<f64>;
pub type SocietyConfig = society::SocietyConfig<f64>;
pub type Event = society::Event<f64>;
pub type EventKind = society::EventKind<f64>;
pub type Snapshot = society::Snapshot<f64>;
pub type RunResult = society::RunResult<f64>;
pub type EvalDistribution = metrics::EvalDistribution<f64>;
