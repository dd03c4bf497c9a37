//! The simulation loop.
//!
//! One tick runs the pipeline: extract features from the cycle's batch,
//! spawn or merge agents, refresh acquaintances, reinforce and update every
//! agent, step the automata, reap, recluster, and take a snapshot. Control
//! commands (freeze, resume, step, inspect, set-config) are applied between
//! ticks.

mod config;
mod snapshot;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Config, ConfigError, EngineSection, ProximityConfig, ScaleOverrides};
pub use snapshot::{
    canonical_json, AcquaintanceRow, AgentRow, ClusterRow, Diagnostic, InspectReport, Snapshot,
};

use crate::agents::{AgentId, AgentPool};
use crate::characterisation::{summarize_cluster, Characteriser};
use crate::features::{Extractor, Observation, SemanticFeature, WorldMap};
use crate::ingest::Scenario;
use crate::ontology::Ontology;
use crate::proximity::ProximitySettings;

/// Config keys that may be changed while the engine runs.
pub const LIVE_CONFIG_KEYS: [&str; 3] = ["scales.spatial", "scales.temporal", "characterisation.theta"];

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Freeze,
    Resume,
    Step,
    Inspect { agent: AgentId },
    SetConfig { key: String, value: f64 },
}

/// Wire form shared by the HTTP control endpoint and the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlRecord {
    cmd: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    agent: Option<AgentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("bad control command: {0}")]
pub struct BadControl(pub String);

impl Control {
    pub fn name(&self) -> &'static str {
        match self {
            Control::Freeze => "freeze",
            Control::Resume => "resume",
            Control::Step => "step",
            Control::Inspect { .. } => "inspect",
            Control::SetConfig { .. } => "set-config",
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BadControl> {
        let rec: ControlRecord = serde_json::from_str(text).map_err(|e| BadControl(e.to_string()))?;
        let extra = |fields: &[&str]| {
            let present = [
                ("agent", rec.agent.is_some()),
                ("key", rec.key.is_some()),
                ("value", rec.value.is_some()),
            ];
            present
                .iter()
                .find(|(name, set)| *set && !fields.contains(name))
                .map(|(name, _)| BadControl(format!("`{}` does not take `{name}`", rec.cmd)))
        };
        let control = match rec.cmd.as_str() {
            "freeze" => Control::Freeze,
            "resume" => Control::Resume,
            "step" => Control::Step,
            "inspect" => Control::Inspect {
                agent: rec.agent.ok_or_else(|| BadControl("inspect needs `agent`".into()))?,
            },
            "set-config" => Control::SetConfig {
                key: rec.key.clone().ok_or_else(|| BadControl("set-config needs `key`".into()))?,
                value: rec.value.ok_or_else(|| BadControl("set-config needs `value`".into()))?,
            },
            other => return Err(BadControl(format!("unknown command `{other}`"))),
        };
        let allowed: &[&str] = match control {
            Control::Inspect { .. } => &["agent"],
            Control::SetConfig { .. } => &["key", "value"],
            _ => &[],
        };
        match extra(allowed) {
            Some(e) => Err(e),
            None => Ok(control),
        }
    }

    pub fn to_json(&self) -> String {
        let mut rec = ControlRecord {
            cmd: self.name().to_owned(),
            agent: None,
            key: None,
            value: None,
        };
        match self {
            Control::Inspect { agent } => rec.agent = Some(*agent),
            Control::SetConfig { key, value } => {
                rec.key = Some(key.clone());
                rec.value = Some(*value);
            }
            _ => {}
        }
        canonical_json(&rec)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlReply {
    Ack { cmd: String, cycle: u64 },
    Inspect(InspectReport),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("no agent with id {0}")]
    UnknownAgent(AgentId),
    #[error("`{0}` is not a live-tunable config key")]
    UnknownConfigKey(String),
    #[error("invalid value {value} for `{key}`")]
    InvalidValue { key: String, value: f64 },
    #[error("step is only allowed while frozen")]
    NotFrozen,
    #[error("engine is frozen")]
    Frozen,
}

/// Final snapshot and full snapshot log of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub last: Snapshot,
    /// JSON Lines, one snapshot per tick.
    pub log: String,
}

#[derive(Debug, Clone)]
pub struct Engine {
    ontology: Ontology,
    map: WorldMap,
    config: Config,
    settings: ProximitySettings,
    cycle: u64,
    frozen: bool,
    pool: AgentPool,
    characteriser: Characteriser,
    extractor: Extractor,
    feed: Scenario,
    /// Last cycle whose observations have been consumed from the feed.
    fed_through: Option<u64>,
    last: Snapshot,
}

impl Engine {
    pub fn new(ontology: Ontology, map: WorldMap, config: Config) -> Result<Self, ConfigError> {
        config.validate()?;
        let settings = config.proximity_settings(&ontology);
        Ok(Engine {
            ontology,
            map,
            config,
            settings,
            cycle: 0,
            frozen: false,
            pool: AgentPool::new(),
            characteriser: Characteriser::new(),
            extractor: Extractor::new(),
            feed: Scenario::default(),
            fed_through: None,
            last: Snapshot::empty(0),
        })
    }

    /// Attaches the scenario that [`Engine::advance`] and `step` read from.
    pub fn with_feed(mut self, scenario: Scenario) -> Self {
        self.feed = scenario;
        self
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn pool(&self) -> &AgentPool {
        &self.pool
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn settings(&self) -> &ProximitySettings {
        &self.settings
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.last
    }

    /// Cycles the attached scenario asks for.
    pub fn feed_length(&self) -> u64 {
        self.feed.meta.cycles.max(self.feed.last_cycle())
    }

    /// Runs one tick on an explicit batch.
    pub fn tick(&mut self, batch: &[Observation]) -> Result<&Snapshot, ControlError> {
        if self.frozen {
            return Err(ControlError::Frozen);
        }
        Ok(self.run_tick(batch))
    }

    /// Runs one tick on the next batch of the attached scenario.
    pub fn advance(&mut self) -> Result<&Snapshot, ControlError> {
        if self.frozen {
            return Err(ControlError::Frozen);
        }
        Ok(self.tick_from_feed())
    }

    fn tick_from_feed(&mut self) -> &Snapshot {
        let next = self.cycle + 1;
        let from = self.fed_through.map_or(0, |c| c + 1);
        let batch: Vec<Observation> = self
            .feed
            .batches
            .range(from..=next)
            .flat_map(|(_, obs)| obs.iter().cloned())
            .collect();
        self.fed_through = Some(next);
        self.run_tick(&batch)
    }

    fn run_tick(&mut self, batch: &[Observation]) -> &Snapshot {
        let cycle = self.cycle + 1;
        let atn = self.config.atn;
        let mut diagnostics = Vec::new();

        // (1) features
        let mut features: Vec<SemanticFeature> = Vec::new();
        for (i, obs) in batch.iter().enumerate() {
            match self.extractor.extract(obs, &self.map, &self.ontology) {
                Ok(fs) => {
                    for f in fs {
                        let violations = self.ontology.validate_feature(&f);
                        if violations.is_empty() {
                            features.push(f);
                        } else {
                            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
                            diagnostics.push(Diagnostic {
                                cycle,
                                observation: Some(i),
                                source: obs.source.clone(),
                                message: format!("feature {f} rejected: {}", list.join("; ")),
                            });
                        }
                    }
                }
                Err(e) => diagnostics.push(Diagnostic {
                    cycle,
                    observation: Some(i),
                    source: obs.source.clone(),
                    message: e.to_string(),
                }),
            }
        }

        // (2) spawn or merge, in key order so that independent
        // observations can arrive in any order within the batch
        features.sort_by(|a, b| a.key.cmp(&b.key));
        for f in features {
            self.pool.spawn_or_merge(f, &self.ontology, cycle);
        }

        // (3) acquaintances
        self.pool.refresh_acquaintances(&self.ontology, &self.settings, &atn);

        // (4)-(6) reinforcement, indicators, automaton
        let salient = self.pool.advance(&atn, cycle);
        self.pool.end_cycle();

        // (7) reap
        self.pool.reap(&atn, cycle);

        // (8) clusters
        let every = self.config.characterisation.every.max(1);
        if cycle.is_multiple_of(every) {
            self.characteriser.build_clusters(
                &self.pool,
                &self.ontology,
                &self.settings,
                &self.config.characterisation,
                self.config.cluster_min_pp(),
                cycle,
            );
        } else {
            self.characteriser.prune(&self.pool);
        }

        // (9) snapshot
        let mut clusters = Vec::new();
        for c in self.characteriser.clusters() {
            match summarize_cluster(c, &self.pool) {
                Ok(record) => clusters.push(ClusterRow::from(&record)),
                Err(e) => diagnostics.push(Diagnostic {
                    cycle,
                    observation: None,
                    source: "engine".into(),
                    message: e.to_string(),
                }),
            }
        }
        self.cycle = cycle;
        self.last = Snapshot {
            cycle,
            frozen: self.frozen,
            agents: self.pool.iter().map(AgentRow::of).collect(),
            clusters,
            salient,
            diagnostics,
        };
        &self.last
    }

    pub fn inspect(&self, id: AgentId) -> Result<InspectReport, ControlError> {
        let agent = self.pool.get(id).ok_or(ControlError::UnknownAgent(id))?;
        let acquaintances = agent
            .acquaintances
            .iter()
            .map(|(other, p)| AcquaintanceRow {
                id: *other,
                key: self
                    .pool
                    .get(*other)
                    .map(|o| o.feature.key.to_string())
                    .unwrap_or_default(),
                proximity: (*p).into(),
            })
            .collect();
        Ok(InspectReport {
            cycle: self.cycle,
            agent: AgentRow::of(agent),
            acquaintances,
        })
    }

    fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
        self.last.frozen = frozen;
    }

    pub fn handle_control(&mut self, cmd: &Control) -> Result<ControlReply, ControlError> {
        let ack = |engine: &Engine| ControlReply::Ack {
            cmd: cmd.name().to_owned(),
            cycle: engine.cycle,
        };
        match cmd {
            Control::Freeze => self.set_frozen(true),
            Control::Resume => self.set_frozen(false),
            Control::Step => {
                if !self.frozen {
                    return Err(ControlError::NotFrozen);
                }
                self.tick_from_feed();
            }
            Control::Inspect { agent } => return self.inspect(*agent).map(ControlReply::Inspect),
            Control::SetConfig { key, value } => self.set_config(key, *value)?,
        }
        Ok(ack(self))
    }

    fn set_config(&mut self, key: &str, value: f64) -> Result<(), ControlError> {
        if !LIVE_CONFIG_KEYS.contains(&key) {
            return Err(ControlError::UnknownConfigKey(key.to_owned()));
        }
        let mut next = self.config.clone();
        match key {
            "scales.spatial" => next.scales.spatial = Some(value),
            "scales.temporal" => next.scales.temporal = Some(value),
            _ => next.characterisation.theta = value,
        }
        next.validate().map_err(|_| ControlError::InvalidValue {
            key: key.to_owned(),
            value,
        })?;
        self.settings = next.proximity_settings(&self.ontology);
        self.config = next;
        Ok(())
    }
}

/// Runs a scenario to its end, padding with empty ticks up to the
/// scenario's declared length.
pub fn run(
    scenario: Scenario,
    map: WorldMap,
    ontology: Ontology,
    config: Config,
) -> Result<RunOutput, ConfigError> {
    let mut engine = Engine::new(ontology, map, config)?.with_feed(scenario);
    let cycles = engine.feed_length();
    let mut log = String::new();
    for _ in 0..cycles {
        let snap = engine.advance().expect("a fresh engine is not frozen");
        log.push_str(&snap.to_json());
        log.push('\n');
    }
    Ok(RunOutput {
        last: engine.snapshot().clone(),
        log,
    })
}
