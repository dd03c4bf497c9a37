//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use sitrep_core::agents::{AgentPool, AtnConfig, Indicators};
use sitrep_core::features::{FeatureKey, Localisation, SemanticFeature, WorldMap};
use sitrep_core::ingest::{self, EventKind, EventScript, Growth, MapSize, Scenario, ScenarioSpec};
use sitrep_core::Ontology;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn ontology_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/default_ontology.json")
}

pub fn fire_block() -> (Scenario, WorldMap) {
    let dir = scenarios_dir();
    let scenario = std::fs::read_to_string(dir.join("fire-block.scenario")).expect("shipped scenario");
    let map = std::fs::read_to_string(dir.join("fire-block.map.jsonl")).expect("shipped map");
    (
        ingest::read_scenario(&scenario).expect("scenario parses"),
        ingest::load_worldmap(&map).expect("map parses"),
    )
}

// ---- codec ---------------------------------------------------------------

fn coordinate() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-100_000i32..100_000).prop_map(f64::from),
        -1.0e7f64..1.0e7,
        Just(0.0),
    ]
}

pub fn localisation() -> impl Strategy<Value = Localisation> {
    prop_oneof![
        1 => Just(Localisation::Unknown),
        4 => (coordinate(), coordinate()).prop_map(|(x, y)| Localisation::Known { x, y }),
    ]
}

/// Any feature the codec must accept.
pub fn any_feature() -> impl Strategy<Value = SemanticFeature> {
    let couples = proptest::collection::btree_map(
        "[a-z][a-zA-Z_]{0,8}".prop_filter("reserved", |q| !["type", "time", "localisation"].contains(&q.as_str())),
        "[A-Za-z0-9_#|.:+-]{1,12}",
        0..5,
    );
    (
        "[A-Z][A-Za-z0-9_]{0,10}",
        any::<u64>(),
        "[a-z][a-z_]{0,10}",
        couples,
        any::<u64>(),
        localisation(),
    )
        .prop_map(|(concept, id, kind, couples, time, loc)| {
            let mut f = SemanticFeature::new(FeatureKey::new(concept, id), kind, time, loc);
            for (q, v) in couples {
                f.set(q, v);
            }
            f
        })
}

// ---- proximity -----------------------------------------------------------

const TYPES: [&str; 10] = [
    "fire", "break", "blockade", "injury", "clear", "extinguish", "rescue", "load", "person", "flood",
];
const INTENSITIES: [&str; 5] = ["none", "unknown", "low", "high", "starting"];

/// Features drawn from a small world so that related types, shared keys
/// and shared places all come up often.
pub fn world_feature() -> impl Strategy<Value = SemanticFeature> {
    let loc = prop_oneof![
        1 => Just(Localisation::Unknown),
        3 => (0u32..6, 0u32..6).prop_map(|(x, y)| Localisation::Known { x: f64::from(x) * 250.0, y: f64::from(y) * 250.0 }),
        2 => (-3000.0f64..3000.0, -3000.0f64..3000.0).prop_map(|(x, y)| Localisation::Known { x, y }),
    ];
    (0..TYPES.len(), 0..INTENSITIES.len(), 0u64..4, 0u64..30, loc).prop_map(|(t, i, id, time, loc)| {
        SemanticFeature::new(FeatureKey::new("Phenomenon", id), TYPES[t], time, loc).with("intensity", INTENSITIES[i])
    })
}

// ---- oracles -------------------------------------------------------------

/// PP values of the decay-then-add recurrence for a reinforcement sequence,
/// evaluated step by step from pp = 0.
pub fn pp_trace(rs: &[f64], decay: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(rs.len());
    let mut pp = 0.0;
    for r in rs {
        pp = decay * pp + r;
        out.push(pp);
    }
    out
}

/// Cycle at which an agent boosted once at `boost_cycle` (pp = b there) and
/// never again is reaped: the first k with b * decay^k < floor, plus the
/// window.
pub fn reap_cycle(boost_cycle: u64, b: f64, decay: f64, floor: f64, window: u64) -> u64 {
    let mut k = 0u64;
    let mut pp = b;
    while pp >= floor {
        pp *= decay;
        k += 1;
    }
    boost_cycle + k + window
}

/// Connected components by transitive closure of an adjacency matrix
/// (Warshall), as sorted member lists sorted by first member.
#[allow(clippy::needless_range_loop)]
pub fn closure_components(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = i == j || edge(i, j) || edge(j, i);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for i in 0..n {
        if seen.contains(&i) {
            continue;
        }
        let group: Vec<usize> = (0..n).filter(|j| reach[i][*j]).collect();
        seen.extend(group.iter().copied());
        out.push(group);
    }
    out
}

/// A pool built directly from features and indicator triples.
pub fn pool_from(ont: &Ontology, agents: &[(SemanticFeature, [f64; 3])]) -> AgentPool {
    let mut pool = AgentPool::new();
    for (feature, [pp, ps, pa]) in agents {
        let (id, _) = pool.spawn_or_merge(feature.clone(), ont, 1);
        pool.get_mut(id).unwrap().indicators = Indicators {
            pp: *pp,
            ps: *ps,
            pa: *pa,
            ..Indicators::default()
        };
    }
    pool
}

/// Up to `max` agents with distinct keys and random indicators.
pub fn random_pool_spec(max: usize) -> impl Strategy<Value = Vec<(SemanticFeature, [f64; 3])>> {
    proptest::collection::vec(
        (world_feature(), 0.0f64..12.0, -3.0f64..3.0, -3.0f64..3.0),
        0..=max,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (mut f, pp, ps, pa))| {
                f.key = FeatureKey::new("Phenomenon", i as u64);
                (f, [pp, ps, pa])
            })
            .collect()
    })
}

/// A random multi-event scenario for long runs.
pub fn random_scenario(seed: u64, duration: u64) -> (Scenario, WorldMap) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let kinds = [EventKind::Fire, EventKind::Blockade, EventKind::Injury];
    let events = (0..rng.random_range(2..6))
        .map(|i| {
            let kind = kinds[rng.random_range(0..3)];
            let peak = match kind {
                EventKind::Injury => rng.random_range(100..9000),
                _ => rng.random_range(10..100),
            };
            EventScript {
                kind,
                object: 10 + i,
                onset: rng.random_range(1..duration / 2),
                growth: Growth { peak, over: rng.random_range(1..20) },
                position: Some([rng.random_range(0.0..3000.0f64).round(), rng.random_range(0.0..3000.0f64).round()]),
            }
        })
        .collect();
    let spec = ScenarioSpec {
        name: format!("random-{seed}"),
        duration,
        map_size: MapSize { width: 3000.0, height: 3000.0 },
        events,
        reporters: 4,
        message_rate: 0.4,
        noise_rate: 0.3,
        seed,
    };
    let world = ingest::generate_scenario(&spec).expect("valid spec");
    (world.scenario, world.map)
}

pub fn default_cfg() -> AtnConfig {
    AtnConfig::default()
}
