//! Situation representation from partial observations.
//!
//! Observations are turned into semantic features, each carried by a
//! factual agent whose indicators evolve under mutual aid and aggression
//! from related agents. Agents progress through a four-state automaton and
//! are grouped into situation clusters. The [`engine`] runs this pipeline
//! one cycle at a time and produces deterministic snapshots.

pub mod agents;
pub mod characterisation;
pub mod engine;
pub mod features;
pub mod ingest;
pub mod numeric;
pub mod ontology;
pub mod proximity;

pub use agents::{AgentId, AgentPool, AtnConfig, AtnState, FactualAgent, Indicators, SalientFact};
pub use characterisation::{CharacterisationRecord, Characteriser, Cluster, ClusterConfig};
pub use engine::{
    Config, ConfigError, Control, ControlError, ControlReply, Engine, InspectReport, Snapshot,
};
pub use features::{
    FeatureKey, FeatureParseError, Localisation, Observation, ObservationPayload, SemanticFeature,
    WorldMap,
};
pub use ingest::{GeneratedWorld, IngestError, Scenario, ScenarioSpec};
pub use numeric::Fixed6;
pub use ontology::{Ontology, OntologyError};
pub use proximity::{proximity, Kernel, ProximityBreakdown, ProximitySettings};
