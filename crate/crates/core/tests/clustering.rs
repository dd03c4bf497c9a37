mod support;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestRunner};
use sitrep_core::agents::AgentPool;
use sitrep_core::characterisation::{Characteriser, ClusterConfig};
use sitrep_core::proximity::{proximity, ProximitySettings};
use sitrep_core::Ontology;

/// Edge predicate evaluated from scratch: combined proximity against the
/// threshold and per-axis max-normalized indicator distance against the
/// radius.
fn oracle_clusters(pool: &AgentPool, ont: &Ontology, settings: &ProximitySettings, cfg: &ClusterConfig, min_pp: f64) -> Vec<Vec<u64>> {
    let all: Vec<_> = pool.iter().collect();
    let mut norm = [0.0f64; 3];
    for a in &all {
        let t = [a.indicators.pp, a.indicators.ps, a.indicators.pa];
        for k in 0..3 {
            norm[k] = norm[k].max(t[k].abs());
        }
    }
    let nodes: Vec<_> = all.into_iter().filter(|a| a.indicators.pp >= min_pp).collect();
    let edge = |i: usize, j: usize| {
        let (a, b) = (nodes[i], nodes[j]);
        let ta = [a.indicators.pp, a.indicators.ps, a.indicators.pa];
        let tb = [b.indicators.pp, b.indicators.ps, b.indicators.pa];
        let mut sq = 0.0;
        for k in 0..3 {
            if norm[k] > 0.0 {
                sq += ((ta[k] - tb[k]) / norm[k]).powi(2);
            }
        }
        proximity(ont, settings, &a.feature, &b.feature).combined >= cfg.theta && sq.sqrt() <= cfg.radius
    };
    support::closure_components(nodes.len(), edge)
        .into_iter()
        .map(|g| g.into_iter().map(|i| nodes[i].id).collect())
        .collect()
}

/// Pools with few places, close times and indicators near a few
/// prototypes, so that edges are common.
fn dense_pool_spec() -> impl Strategy<Value = Vec<(sitrep_core::SemanticFeature, [f64; 3])>> {
    let kinds = prop::sample::select(vec!["fire", "break", "extinguish", "blockade", "clear"]);
    let intensity = prop::sample::select(vec!["low", "high", "starting", "unknown"]);
    let proto = prop::sample::select(vec![[2.0, 0.5, 0.1], [5.0, 1.0, -0.2], [8.0, -0.5, 0.0]]);
    let agent = (kinds, intensity, 0u32..3, 0u64..4, proto, -0.4f64..0.4);
    proptest::collection::vec(agent, 0..=12).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (kind, intensity, place, time, p, jitter))| {
                let loc = sitrep_core::Localisation::Known { x: f64::from(place) * 40.0, y: 0.0 };
                let f = sitrep_core::SemanticFeature::new(sitrep_core::FeatureKey::new("Phenomenon", i as u64), kind, time, loc)
                    .with("intensity", intensity);
                (f, [p[0] + jitter, p[1] + jitter / 4.0, p[2] - jitter / 4.0])
            })
            .collect()
    })
}

/// Runs `cases` random pools against the oracle and returns how many
/// produced at least one multi-member cluster.
pub fn run_oracle_cases(cases: u32) -> Result<u32, String> {
    let ont = Ontology::default_rcr();
    let settings = ProximitySettings::from_ontology(&ont);
    let mut runner = TestRunner::new(RunnerConfig { cases, ..RunnerConfig::default() });
    let nontrivial = std::cell::Cell::new(0u32);
    let pools = prop_oneof![support::random_pool_spec(12), dense_pool_spec()];
    let strategy = (pools, 0.05f64..0.9, 0.05f64..1.5, 0.0f64..3.0);
    runner
        .run(&strategy, |(spec, theta, radius, min_pp)| {
            let pool = support::pool_from(&ont, &spec);
            for cfg in [ClusterConfig::default(), ClusterConfig { theta, radius, ..ClusterConfig::default() }] {
                let mut ch = Characteriser::new();
                let got: Vec<Vec<u64>> = ch
                    .build_clusters(&pool, &ont, &settings, &cfg, min_pp, 1)
                    .iter()
                    .map(|c| c.members.clone())
                    .collect();
                let mut got_sorted = got.clone();
                got_sorted.sort();
                let mut want = oracle_clusters(&pool, &ont, &settings, &cfg, min_pp);
                want.sort();
                prop_assert_eq!(&got_sorted, &want);

                let eligible: BTreeSet<u64> = pool.iter().filter(|a| a.indicators.pp >= min_pp).map(|a| a.id).collect();
                let covered: Vec<u64> = got.iter().flatten().copied().collect();
                prop_assert_eq!(covered.len(), eligible.len(), "members are disjoint");
                prop_assert_eq!(covered.into_iter().collect::<BTreeSet<_>>(), eligible);

                let again: Vec<(u64, Vec<u64>)> = ch
                    .build_clusters(&pool, &ont, &settings, &cfg, min_pp, 2)
                    .iter()
                    .map(|c| (c.id, c.members.clone()))
                    .collect();
                let first: Vec<(u64, Vec<u64>)> = {
                    let mut fresh = Characteriser::new();
                    fresh.build_clusters(&pool, &ont, &settings, &cfg, min_pp, 1).iter().map(|c| (c.id, c.members.clone())).collect()
                };
                prop_assert_eq!(again, first, "ids stable when nothing changes");
                if got.iter().any(|g| g.len() > 1) {
                    nontrivial.set(nontrivial.get() + 1);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(nontrivial.get())
}

#[test]
fn clustering_matches_transitive_closure() {
    let nontrivial = run_oracle_cases(500).unwrap();
    assert!(nontrivial > 50, "only {nontrivial} pools had a multi-member cluster");
}

#[test]
fn ids_follow_the_largest_overlap() {
    let ont = Ontology::default_rcr();
    let settings = ProximitySettings::from_ontology(&ont);
    let cfg = ClusterConfig::default();
    let f = |id: u64, x: f64| {
        sitrep_core::SemanticFeature::new(
            sitrep_core::FeatureKey::new("Phenomenon", id),
            "fire",
            1,
            sitrep_core::Localisation::Known { x, y: 0.0 },
        )
        .with("intensity", "high")
    };
    let spec = vec![(f(1, 0.0), [5.0, 1.0, 0.0]), (f(2, 10.0), [5.0, 1.0, 0.0]), (f(3, 20.0), [5.0, 1.0, 0.0])];
    let mut pool = support::pool_from(&ont, &spec);
    let mut ch = Characteriser::new();
    let first = ch.build_clusters(&pool, &ont, &settings, &cfg, 1.0, 1).to_vec();
    assert_eq!(first.len(), 1);
    assert_eq!(first[0].members, vec![1, 2, 3]);
    // agent 3 drifts out of range: the pair keeps the id, the loner is new
    pool.get_mut(3).unwrap().feature.localisation = sitrep_core::Localisation::Known { x: 90_000.0, y: 0.0 };
    let second = ch.build_clusters(&pool, &ont, &settings, &cfg, 1.0, 2).to_vec();
    assert_eq!(second.len(), 2);
    assert_eq!((second[0].id, second[0].members.clone()), (first[0].id, vec![1, 2]));
    assert_eq!(second[0].formed_cycle, 1);
    assert_eq!(second[0].updated_cycle, 2);
    assert_eq!((second[1].id, second[1].members.clone()), (first[0].id + 1, vec![3]));
}

proptest! {
    #[test]
    fn singleton_centroid_is_the_agent(spec in support::random_pool_spec(1)) {
        let ont = Ontology::default_rcr();
        let settings = ProximitySettings::from_ontology(&ont);
        let pool = support::pool_from(&ont, &spec);
        let mut ch = Characteriser::new();
        let clusters = ch.build_clusters(&pool, &ont, &settings, &ClusterConfig::default(), 0.0, 1);
        for c in clusters {
            let a = pool.get(c.members[0]).unwrap();
            prop_assert_eq!(c.centroid, [a.indicators.pp, a.indicators.ps, a.indicators.pa]);
            prop_assert_eq!(&c.dominant_type, &a.feature.kind);
        }
    }
}
