//! Factual agents and their pool.
//!
//! Each agent carries one semantic feature. Its pseudo-position (PP) is an
//! activity level that decays every cycle and is pushed up by fresh
//! observations and by close acquaintances (mutual aid), or down by
//! opposite ones (aggression). PS and PA are the exact first and second
//! differences of PP. The agent walks a four-state automaton gated on these
//! indicators.
//!
//! A cycle is synchronous: every agent's reinforcement is computed from the
//! previous cycle's indicators before any agent is updated, and updates are
//! applied in ascending id order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureKey, SemanticFeature};
use crate::ontology::{Ontology, Persistence};
use crate::proximity::{proximity, ProximitySettings};

pub type AgentId = u64;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid agent configuration: {0}")]
pub struct AtnConfigError(pub String);

/// Thresholds and rates of the agent dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct AtnConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    /// Satisfaction required to enter Action.
    pub s_min: f64,
    /// Consecutive negative-PS cycles before regressing one state.
    pub regression_k: u32,
    /// PP decay per cycle, in (0, 1].
    pub decay: f64,
    /// Reinforcement from being observed this cycle.
    pub obs_boost: f64,
    /// Minimum |proximity| for an acquaintance link, in (0, 1).
    pub link_threshold: f64,
    /// Acquaintance PP at which its influence saturates.
    pub pp_ref: f64,
    /// Smoothing of PS into satisfaction, in (0, 1].
    pub ema_alpha: f64,
    /// Dwell window in cycles (constancy, reaping).
    pub window: u64,
    /// PP below which an idle agent starts dying.
    pub death_floor: f64,
}

impl Default for AtnConfig {
    fn default() -> Self {
        AtnConfig {
            theta1: 1.5,
            theta2: 3.0,
            theta3: 6.0,
            s_min: 0.2,
            regression_k: 3,
            decay: 0.95,
            obs_boost: 1.0,
            link_threshold: 0.1,
            pp_ref: 10.0,
            ema_alpha: 0.3,
            window: 5,
            death_floor: 0.1,
        }
    }
}

impl AtnConfig {
    pub fn validate(&self) -> Result<(), AtnConfigError> {
        let err = |m: &str| Err(AtnConfigError(m.to_owned()));
        let all_finite = [
            self.theta1,
            self.theta2,
            self.theta3,
            self.s_min,
            self.decay,
            self.obs_boost,
            self.link_threshold,
            self.pp_ref,
            self.ema_alpha,
            self.death_floor,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return err("all values must be finite");
        }
        if !(self.theta1 < self.theta2 && self.theta2 < self.theta3) {
            return err("thresholds must satisfy theta1 < theta2 < theta3");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return err("decay must lie in (0, 1]");
        }
        if !(self.link_threshold > 0.0 && self.link_threshold < 1.0) {
            return err("link-threshold must lie in (0, 1)");
        }
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return err("ema-alpha must lie in (0, 1]");
        }
        if self.pp_ref <= 0.0 || self.death_floor <= 0.0 || self.obs_boost < 0.0 {
            return err("pp-ref and death-floor must be positive, obs-boost non-negative");
        }
        if self.window == 0 || self.regression_k == 0 {
            return err("window and regression-k must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtnState {
    Initialisation,
    Deliberation,
    Decision,
    Action,
}

impl AtnState {
    pub const ALL: [AtnState; 4] = [
        AtnState::Initialisation,
        AtnState::Deliberation,
        AtnState::Decision,
        AtnState::Action,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AtnState::Initialisation => "Initialisation",
            AtnState::Deliberation => "Deliberation",
            AtnState::Decision => "Decision",
            AtnState::Action => "Action",
        }
    }

    fn previous(self) -> AtnState {
        AtnState::ALL[self.index().saturating_sub(1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Indicators {
    pub pp: f64,
    pub ps: f64,
    pub pa: f64,
    pub satisfaction: f64,
    pub constancy: f64,
    pub ps_ema: f64,
}

/// Advances the indicators by one cycle given reinforcement `r`.
///
/// `dwell` is the number of cycles spent in the current automaton state.
pub fn update_indicators(prev: &Indicators, r: f64, cfg: &AtnConfig, dwell: u64) -> Indicators {
    let pp = cfg.decay * prev.pp + r;
    let ps = pp - prev.pp;
    let pa = ps - prev.ps;
    let ps_ema = cfg.ema_alpha * ps + (1.0 - cfg.ema_alpha) * prev.ps_ema;
    Indicators {
        pp,
        ps,
        pa,
        satisfaction: ps_ema.clamp(-1.0, 1.0),
        constancy: (dwell as f64 / cfg.window as f64).min(1.0),
        ps_ema,
    }
}

/// Emitted when an agent enters the Action state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientFact {
    pub cycle: u64,
    pub agent: AgentId,
    pub key: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactualAgent {
    pub id: AgentId,
    pub feature: SemanticFeature,
    pub indicators: Indicators,
    pub state: AtnState,
    /// Other agent -> cached combined proximity. Positive values are close
    /// acquaintances, negative ones opposite.
    pub acquaintances: BTreeMap<AgentId, f64>,
    pub negative_streak: u32,
    pub birth_cycle: u64,
    pub last_boost_cycle: u64,
    pub state_entry_cycle: u64,
    pub persistence: Persistence,
    /// Observed during the current cycle.
    pub boosted: bool,
    /// First cycle of the current run of PP below the death floor.
    pub below_floor_since: Option<u64>,
}

impl FactualAgent {
    pub fn close(&self) -> impl Iterator<Item = (AgentId, f64)> + '_ {
        self.acquaintances
            .iter()
            .filter(|(_, p)| **p > 0.0)
            .map(|(id, p)| (*id, *p))
    }

    pub fn opposite(&self) -> impl Iterator<Item = (AgentId, f64)> + '_ {
        self.acquaintances
            .iter()
            .filter(|(_, p)| **p < 0.0)
            .map(|(id, p)| (*id, *p))
    }

    /// Moves the automaton at most one state. Returns a salient fact when
    /// the agent enters Action.
    pub fn step_atn(&mut self, cfg: &AtnConfig, cycle: u64) -> Option<SalientFact> {
        let ind = self.indicators;
        if ind.ps < 0.0 {
            self.negative_streak += 1;
        } else {
            self.negative_streak = 0;
        }

        if self.negative_streak >= cfg.regression_k && self.state > AtnState::Initialisation {
            self.enter(self.state.previous(), cycle);
            return None;
        }

        let next = match self.state {
            AtnState::Initialisation if ind.pp >= cfg.theta1 => AtnState::Deliberation,
            AtnState::Deliberation if ind.pp >= cfg.theta2 && ind.ps > 0.0 => AtnState::Decision,
            AtnState::Decision if ind.pp >= cfg.theta3 && ind.satisfaction >= cfg.s_min => {
                AtnState::Action
            }
            _ => return None,
        };
        self.enter(next, cycle);
        (next == AtnState::Action).then(|| SalientFact {
            cycle,
            agent: self.id,
            key: self.feature.key.to_string(),
            kind: self.feature.kind.clone(),
            feature: self.feature.format(),
        })
    }

    fn enter(&mut self, state: AtnState, cycle: u64) {
        self.state = state;
        self.state_entry_cycle = cycle;
        self.negative_streak = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpawnOutcome {
    Created,
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcquaintanceChange {
    Linked { a: AgentId, b: AgentId, proximity: f64 },
    Refreshed { a: AgentId, b: AgentId, proximity: f64 },
    Unlinked { a: AgentId, b: AgentId },
}

/// All live factual agents, keyed by id and by feature key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentPool {
    agents: BTreeMap<AgentId, FactualAgent>,
    by_key: BTreeMap<FeatureKey, AgentId>,
    next_id: AgentId,
}

impl AgentPool {
    pub fn new() -> Self {
        AgentPool {
            next_id: 1,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn get(&self, id: AgentId) -> Option<&FactualAgent> {
        self.agents.get(&id)
    }

    pub fn get_mut(&mut self, id: AgentId) -> Option<&mut FactualAgent> {
        self.agents.get_mut(&id)
    }

    pub fn by_key(&self, key: &FeatureKey) -> Option<&FactualAgent> {
        self.by_key.get(key).and_then(|id| self.agents.get(id))
    }

    /// Agents in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &FactualAgent> {
        self.agents.values()
    }

    pub fn ids(&self) -> Vec<AgentId> {
        self.agents.keys().copied().collect()
    }

    /// Routes a feature to the agent owning its key, creating one if needed.
    /// Either way the agent counts as observed this cycle.
    pub fn spawn_or_merge(
        &mut self,
        feature: SemanticFeature,
        ont: &Ontology,
        cycle: u64,
    ) -> (AgentId, SpawnOutcome) {
        if let Some(&id) = self.by_key.get(&feature.key) {
            let agent = self.agents.get_mut(&id).expect("key index in sync");
            agent.feature = feature;
            agent.last_boost_cycle = cycle;
            agent.boosted = true;
            return (id, SpawnOutcome::Merged);
        }
        let id = self.next_id;
        self.next_id += 1;
        let persistence = ont
            .persistence_of(&feature.key.concept)
            .unwrap_or(Persistence::Temporary);
        self.by_key.insert(feature.key.clone(), id);
        self.agents.insert(
            id,
            FactualAgent {
                id,
                feature,
                indicators: Indicators::default(),
                state: AtnState::Initialisation,
                acquaintances: BTreeMap::new(),
                negative_streak: 0,
                birth_cycle: cycle,
                last_boost_cycle: cycle,
                state_entry_cycle: cycle,
                persistence,
                boosted: true,
                below_floor_since: None,
            },
        );
        (id, SpawnOutcome::Created)
    }

    fn link(&mut self, a: AgentId, b: AgentId, value: Option<f64>) -> Option<AcquaintanceChange> {
        let previous = self.agents.get(&a).and_then(|x| x.acquaintances.get(&b).copied());
        match (previous, value) {
            (None, None) => None,
            (Some(_), None) => {
                self.agents.get_mut(&a)?.acquaintances.remove(&b);
                self.agents.get_mut(&b)?.acquaintances.remove(&a);
                Some(AcquaintanceChange::Unlinked { a, b })
            }
            (prev, Some(p)) => {
                self.agents.get_mut(&a)?.acquaintances.insert(b, p);
                self.agents.get_mut(&b)?.acquaintances.insert(a, p);
                Some(match prev {
                    None => AcquaintanceChange::Linked { a, b, proximity: p },
                    Some(_) => AcquaintanceChange::Refreshed { a, b, proximity: p },
                })
            }
        }
    }

    fn pair_link(
        &self,
        a: AgentId,
        b: AgentId,
        ont: &Ontology,
        settings: &ProximitySettings,
        cfg: &AtnConfig,
    ) -> Option<f64> {
        let p = proximity(ont, settings, &self.agents[&a].feature, &self.agents[&b].feature).combined;
        (p.abs() >= cfg.link_threshold).then_some(p)
    }

    /// Recomputes one agent's links to every other agent, keeping both
    /// sides of each link in sync.
    pub fn update_acquaintances(
        &mut self,
        id: AgentId,
        ont: &Ontology,
        settings: &ProximitySettings,
        cfg: &AtnConfig,
    ) -> Vec<AcquaintanceChange> {
        if !self.agents.contains_key(&id) {
            return Vec::new();
        }
        let others: Vec<AgentId> = self.agents.keys().copied().filter(|o| *o != id).collect();
        others
            .into_iter()
            .filter_map(|other| {
                let value = self.pair_link(id, other, ont, settings, cfg);
                self.link(id, other, value)
            })
            .collect()
    }

    /// Recomputes every pairwise link once.
    pub fn refresh_acquaintances(
        &mut self,
        ont: &Ontology,
        settings: &ProximitySettings,
        cfg: &AtnConfig,
    ) -> Vec<AcquaintanceChange> {
        let ids = self.ids();
        let mut changes = Vec::new();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let value = self.pair_link(a, b, ont, settings, cfg);
                changes.extend(self.link(a, b, value));
            }
        }
        changes
    }

    /// Reinforcement for one agent from the pool's current indicators:
    /// observation boost plus the proximity-weighted, saturated PP of its
    /// acquaintances. Only acquaintances observed within the last `window`
    /// cycles pass on aid or aggression, so agents cannot keep each other
    /// alive once the world stops reporting on them.
    pub fn compute_reinforcement(&self, agent: &FactualAgent, cfg: &AtnConfig, cycle: u64) -> f64 {
        let boost = if agent.boosted { cfg.obs_boost } else { 0.0 };
        agent
            .acquaintances
            .iter()
            .filter_map(|(other, p)| {
                let other = self.agents.get(other)?;
                if cycle.saturating_sub(other.last_boost_cycle) >= cfg.window {
                    return None;
                }
                Some(p * (other.indicators.pp / cfg.pp_ref).min(1.0))
            })
            .fold(boost, |acc, x| acc + x)
    }

    /// Runs reinforcement, indicator update and automaton step for every
    /// agent. Reinforcements all read the pre-update indicators.
    pub fn advance(&mut self, cfg: &AtnConfig, cycle: u64) -> Vec<SalientFact> {
        let reinforcements: Vec<(AgentId, f64)> = self
            .agents
            .values()
            .map(|a| (a.id, self.compute_reinforcement(a, cfg, cycle)))
            .collect();
        let mut salient = Vec::new();
        for (id, r) in reinforcements {
            let agent = self.agents.get_mut(&id).expect("id from pool");
            let dwell = cycle.saturating_sub(agent.state_entry_cycle);
            agent.indicators = update_indicators(&agent.indicators, r, cfg, dwell);
            if agent.indicators.pp < cfg.death_floor {
                agent.below_floor_since.get_or_insert(cycle);
            } else {
                agent.below_floor_since = None;
            }
            salient.extend(agent.step_atn(cfg, cycle));
        }
        salient
    }

    /// Clears the per-cycle observation marks.
    pub fn end_cycle(&mut self) {
        for agent in self.agents.values_mut() {
            agent.boosted = false;
        }
    }

    /// Removes agents that have faded out: idle in Initialisation with PP
    /// below the floor for a full window, or punctual facts older than one
    /// window.
    pub fn reap(&mut self, cfg: &AtnConfig, cycle: u64) -> Vec<AgentId> {
        let doomed: Vec<AgentId> = self
            .agents
            .values()
            .filter(|a| {
                let expired = a.persistence == Persistence::Punctual
                    && cycle.saturating_sub(a.birth_cycle) >= cfg.window;
                let faded = a.state == AtnState::Initialisation
                    && a.below_floor_since
                        .is_some_and(|since| cycle.saturating_sub(since) >= cfg.window)
                    && cycle.saturating_sub(a.last_boost_cycle) >= cfg.window;
                expired || faded
            })
            .map(|a| a.id)
            .collect();
        for id in &doomed {
            self.remove(*id);
        }
        doomed
    }

    pub fn remove(&mut self, id: AgentId) -> Option<FactualAgent> {
        let agent = self.agents.remove(&id)?;
        self.by_key.remove(&agent.feature.key);
        for other in agent.acquaintances.keys() {
            if let Some(o) = self.agents.get_mut(other) {
                o.acquaintances.remove(&id);
            }
        }
        Some(agent)
    }
}
