use serde::{Deserialize, Serialize};

use crate::agents::{AgentId, AtnState, FactualAgent, SalientFact};
use crate::characterisation::CharacterisationRecord;
use crate::numeric::Fixed6;

/// One agent as seen from outside the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRow {
    pub id: AgentId,
    pub key: String,
    pub feature: String,
    pub state: AtnState,
    pub pp: Fixed6,
    pub ps: Fixed6,
    pub pa: Fixed6,
    pub satisfaction: Fixed6,
    pub constancy: Fixed6,
    pub localisation: String,
    /// Number of close acquaintances.
    pub close: usize,
    /// Number of opposite acquaintances.
    pub opposite: usize,
}

impl AgentRow {
    pub fn of(agent: &FactualAgent) -> Self {
        let ind = &agent.indicators;
        AgentRow {
            id: agent.id,
            key: agent.feature.key.to_string(),
            feature: agent.feature.format(),
            state: agent.state,
            pp: ind.pp.into(),
            ps: ind.ps.into(),
            pa: ind.pa.into(),
            satisfaction: ind.satisfaction.into(),
            constancy: ind.constancy.into(),
            localisation: agent.feature.localisation.to_string(),
            close: agent.close().count(),
            opposite: agent.opposite().count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRow {
    pub cluster: u64,
    pub dominant_type: String,
    pub members: Vec<AgentId>,
    pub centroid: [Fixed6; 3],
    pub max_state: AtnState,
    pub bounding_box: Option<[Fixed6; 4]>,
    pub formed_cycle: u64,
    pub updated_cycle: u64,
}

impl From<&CharacterisationRecord> for ClusterRow {
    fn from(r: &CharacterisationRecord) -> Self {
        ClusterRow {
            cluster: r.cluster,
            dominant_type: r.dominant_type.clone(),
            members: r.members.clone(),
            centroid: r.centroid.map(Fixed6::new),
            max_state: r.max_state,
            bounding_box: r.bounding_box.map(|b| b.map(Fixed6::new)),
            formed_cycle: r.formed_cycle,
            updated_cycle: r.updated_cycle,
        }
    }
}

/// A problem with one observation or with the engine's own bookkeeping.
/// Recorded instead of aborting the tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostic {
    pub cycle: u64,
    /// Position of the observation in its batch, if any.
    pub observation: Option<usize>,
    pub source: String,
    pub message: String,
}

/// Image of the whole engine state at one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub cycle: u64,
    pub frozen: bool,
    /// Sorted by id.
    pub agents: Vec<AgentRow>,
    pub clusters: Vec<ClusterRow>,
    /// Salient facts emitted during this cycle.
    pub salient: Vec<SalientFact>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Snapshot {
    pub fn empty(cycle: u64) -> Self {
        Snapshot {
            cycle,
            frozen: false,
            agents: Vec::new(),
            clusters: Vec::new(),
            salient: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentRow> {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .ok()
            .map(|i| &self.agents[i])
    }

    /// Canonical single-line JSON: sorted keys, six-decimal reals.
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Serializes with object keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("snapshot types serialize");
    serde_json::to_string(&v).expect("values serialize")
}

/// An agent's row plus every acquaintance with its proximity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InspectReport {
    pub cycle: u64,
    pub agent: AgentRow,
    pub acquaintances: Vec<AcquaintanceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquaintanceRow {
    pub id: AgentId,
    pub key: String,
    pub proximity: Fixed6,
}
