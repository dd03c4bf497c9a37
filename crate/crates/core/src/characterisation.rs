//! Groups emerged factual agents into clusters and summarizes each cluster.
//!
//! Two eligible agents are linked when their combined proximity reaches
//! `theta` and their normalized (PP, PS, PA) distance is at most `radius`.
//! Clusters are the connected components of that graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentId, AgentPool, AtnState};
use crate::ontology::Ontology;
use crate::proximity::{proximity, ProximitySettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ClusterConfig {
    /// Minimum combined proximity for an edge.
    pub theta: f64,
    /// Maximum normalized indicator distance for an edge.
    pub radius: f64,
    /// Recluster every `every` cycles.
    pub every: u64,
    /// PP an agent needs to be clustered; defaults to the first ATN threshold.
    pub min_pp: Option<f64>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            theta: 0.4,
            radius: 0.5,
            every: 1,
            min_pp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: u64,
    /// Sorted, non-empty.
    pub members: Vec<AgentId>,
    pub centroid: [f64; 3],
    pub dominant_type: String,
    pub formed_cycle: u64,
    pub updated_cycle: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterisationRecord {
    pub cluster: u64,
    pub dominant_type: String,
    pub members: Vec<AgentId>,
    pub centroid: [f64; 3],
    pub max_state: AtnState,
    /// `[min_x, min_y, max_x, max_y]` over members with known localisation.
    pub bounding_box: Option<[f64; 4]>,
    pub formed_cycle: u64,
    pub updated_cycle: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cluster {cluster} references agent {agent}, which is not in the pool")]
pub struct StaleMember {
    pub cluster: u64,
    pub agent: AgentId,
}

/// Disjoint-set forest over `0..n` with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Per-axis normalizers: the pool-wide maximum |PP|, |PS|, |PA|.
pub fn indicator_scales(pool: &AgentPool) -> [f64; 3] {
    pool.iter().fold([0.0f64; 3], |acc, a| {
        let i = a.indicators;
        [acc[0].max(i.pp.abs()), acc[1].max(i.ps.abs()), acc[2].max(i.pa.abs())]
    })
}

/// Euclidean distance over normalized indicators; zero-scale axes add 0.
pub fn indicator_distance(a: [f64; 3], b: [f64; 3], scales: [f64; 3]) -> f64 {
    (0..3)
        .map(|k| {
            if scales[k] == 0.0 {
                0.0
            } else {
                ((a[k] - b[k]) / scales[k]).powi(2)
            }
        })
        .sum::<f64>()
        .sqrt()
}

fn triple(pool: &AgentPool, id: AgentId) -> [f64; 3] {
    let i = pool.get(id).expect("member in pool").indicators;
    [i.pp, i.ps, i.pa]
}

/// Everything the edge predicate needs, computed once per clustering pass.
pub struct EdgeContext<'a> {
    pub pool: &'a AgentPool,
    pub ont: &'a Ontology,
    pub settings: &'a ProximitySettings,
    pub theta: f64,
    pub radius: f64,
    pub scales: [f64; 3],
}

impl EdgeContext<'_> {
    pub fn linked(&self, a: AgentId, b: AgentId) -> bool {
        let (fa, fb) = match (self.pool.get(a), self.pool.get(b)) {
            (Some(x), Some(y)) => (&x.feature, &y.feature),
            _ => return false,
        };
        proximity(self.ont, self.settings, fa, fb).combined >= self.theta
            && indicator_distance(triple(self.pool, a), triple(self.pool, b), self.scales)
                <= self.radius
    }
}

/// Agents with PP at or above `min_pp`, ascending.
pub fn eligible(pool: &AgentPool, min_pp: f64) -> Vec<AgentId> {
    pool.iter()
        .filter(|a| a.indicators.pp >= min_pp)
        .map(|a| a.id)
        .collect()
}

/// Connected components of the edge predicate over `nodes`, each sorted,
/// ordered by smallest member.
pub fn components(nodes: &[AgentId], linked: impl Fn(AgentId, AgentId) -> bool) -> Vec<Vec<AgentId>> {
    let mut uf = UnionFind::new(nodes.len());
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if linked(nodes[i], nodes[j]) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<AgentId>> = BTreeMap::new();
    for (i, id) in nodes.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(*id);
    }
    let mut out: Vec<Vec<AgentId>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort_by_key(|g| g[0]);
    out
}

fn dominant_type(pool: &AgentPool, members: &[AgentId]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in members {
        if let Some(a) = pool.get(*id) {
            *counts.entry(a.feature.kind.as_str()).or_default() += 1;
        }
    }
    // BTreeMap order + strict `>` keeps the lexicographically smallest on ties.
    let mut best: Option<(&str, usize)> = None;
    for (kind, n) in counts {
        if best.is_none_or(|(_, m)| n > m) {
            best = Some((kind, n));
        }
    }
    best.map(|(k, _)| k.to_owned()).unwrap_or_default()
}

fn centroid(pool: &AgentPool, members: &[AgentId]) -> [f64; 3] {
    let n = members.len() as f64;
    let sum = members
        .iter()
        .filter_map(|id| pool.get(*id))
        .fold([0.0; 3], |acc, a| {
            [acc[0] + a.indicators.pp, acc[1] + a.indicators.ps, acc[2] + a.indicators.pa]
        });
    [sum[0] / n, sum[1] / n, sum[2] / n]
}

/// Keeps clusters and their ids across cycles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Characteriser {
    clusters: Vec<Cluster>,
    next_id: u64,
}

impl Characteriser {
    pub fn new() -> Self {
        Characteriser {
            clusters: Vec::new(),
            next_id: 1,
        }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Reclusters the pool. New components inherit the id of the previous
    /// cluster they overlap most; ties go to the lower id, unmatched
    /// components get fresh ascending ids.
    pub fn build_clusters(
        &mut self,
        pool: &AgentPool,
        ont: &Ontology,
        settings: &ProximitySettings,
        cfg: &ClusterConfig,
        min_pp: f64,
        cycle: u64,
    ) -> &[Cluster] {
        let nodes = eligible(pool, min_pp);
        let ctx = EdgeContext {
            pool,
            ont,
            settings,
            theta: cfg.theta,
            radius: cfg.radius,
            scales: indicator_scales(pool),
        };
        let groups = components(&nodes, |a, b| ctx.linked(a, b));

        let mut candidates = Vec::new();
        for (g, members) in groups.iter().enumerate() {
            let set: BTreeSet<AgentId> = members.iter().copied().collect();
            for (p, prev) in self.clusters.iter().enumerate() {
                let overlap = prev.members.iter().filter(|m| set.contains(m)).count();
                if overlap > 0 {
                    candidates.push((overlap, prev.id, g, p));
                }
            }
        }
        candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

        let mut assigned: Vec<Option<usize>> = vec![None; groups.len()];
        let mut taken = vec![false; self.clusters.len()];
        for (_, _, g, p) in candidates {
            if assigned[g].is_none() && !taken[p] {
                assigned[g] = Some(p);
                taken[p] = true;
            }
        }

        let mut next = Vec::with_capacity(groups.len());
        for (g, members) in groups.into_iter().enumerate() {
            let (id, formed, updated) = match assigned[g].map(|p| &self.clusters[p]) {
                Some(prev) => {
                    let updated = if prev.members == members { prev.updated_cycle } else { cycle };
                    (prev.id, prev.formed_cycle, updated)
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    (id, cycle, cycle)
                }
            };
            next.push(Cluster {
                id,
                centroid: centroid(pool, &members),
                dominant_type: dominant_type(pool, &members),
                members,
                formed_cycle: formed,
                updated_cycle: updated,
            });
        }
        next.sort_by_key(|c| c.id);
        self.clusters = next;
        &self.clusters
    }

    /// Drops members that left the pool, and clusters left empty. Used on
    /// cycles where reclustering is skipped.
    pub fn prune(&mut self, pool: &AgentPool) {
        for c in &mut self.clusters {
            c.members.retain(|id| pool.get(*id).is_some());
        }
        self.clusters.retain(|c| !c.members.is_empty());
    }
}

pub fn summarize_cluster(
    cluster: &Cluster,
    pool: &AgentPool,
) -> Result<CharacterisationRecord, StaleMember> {
    let mut agents = Vec::with_capacity(cluster.members.len());
    for id in &cluster.members {
        agents.push(pool.get(*id).ok_or(StaleMember {
            cluster: cluster.id,
            agent: *id,
        })?);
    }
    let max_state = agents
        .iter()
        .map(|a| a.state)
        .max()
        .unwrap_or(AtnState::Initialisation);
    let bounding_box = agents
        .iter()
        .filter_map(|a| a.feature.localisation.coords())
        .fold(None, |acc: Option<[f64; 4]>, (x, y)| {
            Some(match acc {
                None => [x, y, x, y],
                Some([x0, y0, x1, y1]) => [x0.min(x), y0.min(y), x1.max(x), y1.max(y)],
            })
        });
    Ok(CharacterisationRecord {
        cluster: cluster.id,
        dominant_type: dominant_type(pool, &cluster.members),
        members: cluster.members.clone(),
        centroid: centroid(pool, &cluster.members),
        max_state,
        bounding_box,
        formed_cycle: cluster.formed_cycle,
        updated_cycle: cluster.updated_cycle,
    })
}
