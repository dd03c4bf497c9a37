//! World maps, recorded observation streams and synthetic scenarios.
//!
//! Both file formats are JSON Lines. Scenario observation records have a
//! fixed field order:
//!
//! ```text
//! {"cycle":7,"source":"fb#3","kind":"visual","object":14,"property":"fieryness","value":25}
//! {"cycle":11,"source":"pf#1","kind":"auditory","sender":"pf#1","text":"clear road#15"}
//! ```
//!
//! A scenario may start with a header line `{"scenario":NAME,"seed":N,"cycles":N}`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::features::{MapObject, Observation, ObservationPayload, WorldMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("line {line}: cycle {cycle} comes after cycle {previous}")]
    NonMonotoneCycle { line: usize, cycle: u64, previous: u64 },
    #[error("line {line}: duplicate object id {id}")]
    DuplicateObjectId { line: usize, id: u64 },
    #[error("line {line}: coordinates must be finite numbers")]
    BadCoordinates { line: usize },
}

/// JSON object with its keys in document order.
struct OrderedRecord(Vec<(String, Value)>);

impl<'de> Deserialize<'de> for OrderedRecord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RecordVisitor;
        impl<'de> Visitor<'de> for RecordVisitor {
            type Value = OrderedRecord;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Value>()? {
                    entries.push((k, v));
                }
                Ok(OrderedRecord(entries))
            }
        }
        d.deserialize_map(RecordVisitor)
    }
}

impl OrderedRecord {
    fn parse(line: usize, text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::Schema {
            line,
            reason: e.to_string(),
        })
    }

    fn keys(&self) -> Vec<&str> {
        self.0.iter().map(|(k, _)| k.as_str()).collect()
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

fn schema(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Schema {
        line,
        reason: reason.into(),
    }
}

fn field_u64(rec: &OrderedRecord, line: usize, key: &str) -> Result<u64, IngestError> {
    rec.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| schema(line, format!("`{key}` must be a non-negative integer")))
}

fn field_i64(rec: &OrderedRecord, line: usize, key: &str) -> Result<i64, IngestError> {
    rec.get(key)
        .and_then(Value::as_i64)
        .ok_or_else(|| schema(line, format!("`{key}` must be an integer")))
}

fn field_str<'a>(rec: &'a OrderedRecord, line: usize, key: &str) -> Result<&'a str, IngestError> {
    rec.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| schema(line, format!("`{key}` must be a string")))
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

// ---- world map ------------------------------------------------------------

const MAP_FIELDS: [&str; 4] = ["id", "concept", "x", "y"];

pub fn load_worldmap(source: &str) -> Result<WorldMap, IngestError> {
    let mut map = WorldMap::new();
    for (idx, text) in source.lines().enumerate() {
        let line = idx + 1;
        if text.trim().is_empty() {
            continue;
        }
        let rec = OrderedRecord::parse(line, text)?;
        let mut keys = rec.keys();
        keys.sort_unstable();
        let mut expected = MAP_FIELDS.to_vec();
        expected.sort_unstable();
        if keys != expected {
            return Err(schema(line, "map records have exactly the fields id, concept, x, y"));
        }
        let id = field_u64(&rec, line, "id")?;
        let concept = field_str(&rec, line, "concept")?.to_owned();
        let coord = |key| {
            rec.get(key)
                .and_then(Value::as_f64)
                .filter(|v| v.is_finite())
                .ok_or(IngestError::BadCoordinates { line })
        };
        let (x, y) = (coord("x")?, coord("y")?);
        if !map.insert(id, MapObject { concept, x, y }) {
            return Err(IngestError::DuplicateObjectId { line, id });
        }
    }
    Ok(map)
}

fn json_number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite coordinates")
}

pub fn write_worldmap(map: &WorldMap) -> String {
    let mut out = String::new();
    for (id, o) in map.iter() {
        out.push_str(&format!(
            "{{\"id\":{id},\"concept\":{},\"x\":{},\"y\":{}}}\n",
            json_str(&o.concept),
            json_number(o.x),
            json_number(o.y)
        ));
    }
    out
}

// ---- scenarios ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScenarioMeta {
    pub name: String,
    pub seed: u64,
    /// Number of cycles the scenario is meant to run.
    pub cycles: u64,
}

/// Observations grouped by cycle, in-cycle order preserved.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub meta: ScenarioMeta,
    pub batches: BTreeMap<u64, Vec<Observation>>,
}

impl Scenario {
    pub fn batch(&self, cycle: u64) -> &[Observation] {
        self.batches.get(&cycle).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn last_cycle(&self) -> u64 {
        self.batches.keys().next_back().copied().unwrap_or(0)
    }

    pub fn observations(&self) -> impl Iterator<Item = &Observation> {
        self.batches.values().flatten()
    }

    pub fn push(&mut self, obs: Observation) {
        self.batches.entry(obs.cycle).or_default().push(obs);
    }
}

const VISUAL_FIELDS: [&str; 6] = ["cycle", "source", "kind", "object", "property", "value"];
const AUDITORY_FIELDS: [&str; 5] = ["cycle", "source", "kind", "sender", "text"];
const HEADER_FIELDS: [&str; 3] = ["scenario", "seed", "cycles"];

pub fn read_scenario(source: &str) -> Result<Scenario, IngestError> {
    let mut scenario = Scenario::default();
    let mut header = None;
    let mut previous: Option<u64> = None;
    let mut first = true;
    for (idx, text) in source.lines().enumerate() {
        let line = idx + 1;
        if text.trim().is_empty() {
            continue;
        }
        let rec = OrderedRecord::parse(line, text)?;
        let keys = rec.keys();
        if keys == HEADER_FIELDS {
            if !first {
                return Err(schema(line, "scenario header must be the first record"));
            }
            first = false;
            header = Some(ScenarioMeta {
                name: field_str(&rec, line, "scenario")?.to_owned(),
                seed: field_u64(&rec, line, "seed")?,
                cycles: field_u64(&rec, line, "cycles")?,
            });
            continue;
        }
        first = false;
        let obs = parse_observation(&rec, line)?;
        if let Some(prev) = previous.filter(|p| obs.cycle < *p) {
            return Err(IngestError::NonMonotoneCycle {
                line,
                cycle: obs.cycle,
                previous: prev,
            });
        }
        previous = Some(obs.cycle);
        scenario.push(obs);
    }
    scenario.meta = header.unwrap_or_else(|| ScenarioMeta {
        cycles: scenario.last_cycle(),
        ..ScenarioMeta::default()
    });
    Ok(scenario)
}

fn parse_observation(rec: &OrderedRecord, line: usize) -> Result<Observation, IngestError> {
    let keys = rec.keys();
    let kind = rec.get("kind").and_then(Value::as_str);
    let expected: &[&str] = match kind {
        Some("visual") => &VISUAL_FIELDS,
        Some("auditory") => &AUDITORY_FIELDS,
        Some(other) => return Err(schema(line, format!("unknown observation kind `{other}`"))),
        None => return Err(schema(line, "missing observation `kind`")),
    };
    if keys != expected {
        return Err(schema(
            line,
            format!("expected fields {} in this order", expected.join(", ")),
        ));
    }
    let cycle = field_u64(rec, line, "cycle")?;
    let source = field_str(rec, line, "source")?.to_owned();
    let payload = if kind == Some("visual") {
        ObservationPayload::Visual {
            object: field_u64(rec, line, "object")?,
            property: field_str(rec, line, "property")?.to_owned(),
            value: field_i64(rec, line, "value")?,
        }
    } else {
        ObservationPayload::Auditory {
            sender: field_str(rec, line, "sender")?.to_owned(),
            text: field_str(rec, line, "text")?.to_owned(),
        }
    };
    Ok(Observation {
        cycle,
        source,
        payload,
    })
}

pub fn format_observation(obs: &Observation) -> String {
    match &obs.payload {
        ObservationPayload::Visual {
            object,
            property,
            value,
        } => format!(
            "{{\"cycle\":{},\"source\":{},\"kind\":\"visual\",\"object\":{},\"property\":{},\"value\":{}}}",
            obs.cycle,
            json_str(&obs.source),
            object,
            json_str(property),
            value
        ),
        ObservationPayload::Auditory { sender, text } => format!(
            "{{\"cycle\":{},\"source\":{},\"kind\":\"auditory\",\"sender\":{},\"text\":{}}}",
            obs.cycle,
            json_str(&obs.source),
            json_str(sender),
            json_str(text)
        ),
    }
}

pub fn write_scenario(scenario: &Scenario) -> String {
    let meta = &scenario.meta;
    let mut out = format!(
        "{{\"scenario\":{},\"seed\":{},\"cycles\":{}}}\n",
        json_str(&meta.name),
        meta.seed,
        meta.cycles
    );
    for obs in scenario.observations() {
        out.push_str(&format_observation(obs));
        out.push('\n');
    }
    out
}

// ---- generator ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fire,
    Blockade,
    Injury,
}

impl EventKind {
    fn property(self) -> &'static str {
        match self {
            EventKind::Fire => "fieryness",
            EventKind::Blockade => "blockade",
            EventKind::Injury => "hitPoint",
        }
    }

    fn object_class(self) -> &'static str {
        match self {
            EventKind::Fire => "Building",
            EventKind::Blockade => "Road",
            EventKind::Injury => "Civilian",
        }
    }

    fn reporter_prefix(self) -> &'static str {
        match self {
            EventKind::Fire => "fb",
            EventKind::Blockade => "pf",
            EventKind::Injury => "at",
        }
    }

    fn message(self, object: u64) -> String {
        match self {
            EventKind::Fire => format!("extinguish building#{object}"),
            EventKind::Blockade => format!("clear road#{object}"),
            EventKind::Injury => format!("rescue civilian#{object}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSize {
    pub width: f64,
    pub height: f64,
}

/// Linear growth of the scripted severity, reaching `peak` after `over`
/// cycles and holding there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    pub peak: i64,
    pub over: u64,
}

impl Growth {
    /// Severity `k` cycles after onset (k = 0 is the onset cycle).
    pub fn at(&self, k: u64) -> i64 {
        let step = (k + 1).min(self.over.max(1));
        let v = (self.peak as f64 * step as f64 / self.over.max(1) as f64).round() as i64;
        v.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct EventScript {
    pub kind: EventKind,
    pub object: u64,
    pub onset: u64,
    pub growth: Growth,
    /// Fixed map position; drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub duration: u64,
    pub map_size: MapSize,
    #[serde(default)]
    pub events: Vec<EventScript>,
    pub reporters: u32,
    /// Per-cycle probability of a message about each active event.
    #[serde(default)]
    pub message_rate: f64,
    /// Per-cycle probability of an isolated noise report.
    #[serde(default)]
    pub noise_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid scenario spec: {0}")]
pub struct SpecError(pub String);

/// First id used for noise objects.
pub const NOISE_OBJECT_BASE: u64 = 1_000_000;

const NOISE_PROPERTIES: [(&str, &str, i64, i64); 3] = [
    ("fieryness", "Building", 1, 100),
    ("brokenness", "Building", 1, 100),
    ("blockade", "Road", 1, 100),
];

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let err = |m: String| Err(SpecError(m));
        if !(self.message_rate >= 0.0 && self.noise_rate >= 0.0) {
            return err("rates must be >= 0".into());
        }
        if !(self.map_size.width > 0.0 && self.map_size.height > 0.0)
            || !(self.map_size.width.is_finite() && self.map_size.height.is_finite())
        {
            return err("map size must be positive".into());
        }
        if self.reporters == 0 && !self.events.is_empty() {
            return err("events need at least one reporter".into());
        }
        for ev in &self.events {
            if ev.onset > self.duration || ev.onset == 0 {
                return err(format!("event on object {} has onset outside 1..={}", ev.object, self.duration));
            }
            if ev.growth.over == 0 || ev.growth.peak < 1 {
                return err(format!("event on object {} needs peak >= 1 and over >= 1", ev.object));
            }
            let cap = match ev.kind {
                EventKind::Injury => 10_000,
                _ => 100,
            };
            if ev.growth.peak > cap {
                return err(format!("event on object {} has peak above {cap}", ev.object));
            }
            if ev.object >= NOISE_OBJECT_BASE {
                return err(format!("object ids from {NOISE_OBJECT_BASE} are reserved for noise"));
            }
        }
        Ok(())
    }
}

/// A generated scenario with the map its observations refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedWorld {
    pub scenario: Scenario,
    pub map: WorldMap,
}

/// Deterministic synthetic scenario: escalating readings from reporters
/// near each scripted event, occasional action messages, and isolated
/// one-off noise reports.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<GeneratedWorld, SpecError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut map = WorldMap::new();
    let random_point = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(0.0..spec.map_size.width).round(),
            rng.random_range(0.0..spec.map_size.height).round(),
        )
    };
    for ev in &spec.events {
        let (x, y) = match ev.position {
            Some([x, y]) => (x, y),
            None => random_point(&mut rng),
        };
        if !map.insert(
            ev.object,
            MapObject {
                concept: ev.kind.object_class().to_owned(),
                x,
                y,
            },
        ) {
            return Err(SpecError(format!("object {} scripted twice", ev.object)));
        }
    }

    let mut scenario = Scenario {
        meta: ScenarioMeta {
            name: spec.name.clone(),
            seed: spec.seed,
            cycles: spec.duration,
        },
        batches: BTreeMap::new(),
    };
    let mut noise_id = NOISE_OBJECT_BASE;
    for cycle in 1..=spec.duration {
        for ev in spec.events.iter().filter(|e| e.onset <= cycle) {
            let k = cycle - ev.onset;
            let severity = ev.growth.at(k);
            let value = match ev.kind {
                EventKind::Injury => 10_000 - severity,
                _ => severity,
            };
            let reporter = format!("{}#{}", ev.kind.reporter_prefix(), rng.random_range(1..=spec.reporters));
            scenario.push(Observation::visual(cycle, &reporter, ev.object, ev.kind.property(), value));
            if k > 0 && rng.random_bool(spec.message_rate.min(1.0)) {
                let sender = format!("{}#{}", ev.kind.reporter_prefix(), rng.random_range(1..=spec.reporters));
                let center = format!("{}#1", match ev.kind {
                    EventKind::Fire => "fs",
                    EventKind::Blockade => "po",
                    EventKind::Injury => "ac",
                });
                scenario.push(Observation::auditory(cycle, &center, &sender, &ev.kind.message(ev.object)));
            }
        }
        if rng.random_bool(spec.noise_rate.min(1.0)) {
            let (property, class, lo, hi) = NOISE_PROPERTIES[rng.random_range(0..NOISE_PROPERTIES.len())];
            let (x, y) = random_point(&mut rng);
            map.insert(noise_id, MapObject { concept: class.to_owned(), x, y });
            let value = rng.random_range(lo..=hi);
            let reporter = format!("civ#{}", rng.random_range(1..=spec.reporters.max(1)));
            scenario.push(Observation::visual(cycle, &reporter, noise_id, property, value));
            noise_id += 1;
        }
    }
    Ok(GeneratedWorld { scenario, map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_lookup() {
        let map = load_worldmap("{\"id\":15,\"concept\":\"Road\",\"x\":30,\"y\":40}\n").unwrap();
        let road = map.get(15).unwrap();
        assert_eq!((road.concept.as_str(), road.x, road.y), ("Road", 30.0, 40.0));
        assert!(load_worldmap("").unwrap().is_empty());
    }

    #[test]
    fn map_errors() {
        let dup = "{\"id\":7,\"concept\":\"Road\",\"x\":1,\"y\":2}\n{\"id\":7,\"concept\":\"Road\",\"x\":3,\"y\":4}";
        assert_eq!(load_worldmap(dup), Err(IngestError::DuplicateObjectId { line: 2, id: 7 }));
        let bad = "{\"id\":7,\"concept\":\"Road\",\"x\":\"a\",\"y\":2}";
        assert_eq!(load_worldmap(bad), Err(IngestError::BadCoordinates { line: 1 }));
        let huge = "{\"id\":7,\"concept\":\"Road\",\"x\":1e999,\"y\":2}";
        assert!(load_worldmap(huge).is_err());
        let extra = "{\"id\":7,\"concept\":\"Road\",\"x\":1,\"y\":2,\"z\":0}";
        assert!(matches!(load_worldmap(extra), Err(IngestError::Schema { line: 1, .. })));
    }

    #[test]
    fn map_round_trip() {
        let text = "{\"id\":3,\"concept\":\"Building\",\"x\":1.5,\"y\":-2}\n{\"id\":15,\"concept\":\"Road\",\"x\":30,\"y\":40}\n";
        let map = load_worldmap(text).unwrap();
        assert_eq!(load_worldmap(&write_worldmap(&map)).unwrap(), map);
    }

    #[test]
    fn groups_by_cycle() {
        let text = "{\"cycle\":1,\"source\":\"fb#3\",\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":25}\n\
                    {\"cycle\":2,\"source\":\"pf#1\",\"kind\":\"auditory\",\"sender\":\"pf#1\",\"text\":\"clear road#15\"}\n";
        let s = read_scenario(text).unwrap();
        assert_eq!(s.batches.len(), 2);
        assert_eq!(s.batch(1), &[Observation::visual(1, "fb#3", 14, "fieryness", 25)]);
        assert_eq!(s.batch(2), &[Observation::auditory(2, "pf#1", "pf#1", "clear road#15")]);
        assert_eq!(s.meta.cycles, 2);
    }

    #[test]
    fn rejects_non_monotone_cycles() {
        let text = "{\"cycle\":9,\"source\":\"fb#3\",\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":25}\n\
                    {\"cycle\":5,\"source\":\"fb#3\",\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":30}\n";
        assert_eq!(
            read_scenario(text),
            Err(IngestError::NonMonotoneCycle { line: 2, cycle: 5, previous: 9 })
        );
    }

    #[test]
    fn rejects_schema_violations() {
        let cases = [
            "{\"source\":\"fb#3\",\"cycle\":1,\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":25}",
            "{\"cycle\":1,\"source\":\"fb#3\",\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":25,\"x\":1}",
            "{\"cycle\":1,\"source\":\"fb#3\",\"kind\":\"smell\",\"object\":14}",
            "{\"cycle\":-1,\"source\":\"fb#3\",\"kind\":\"auditory\",\"sender\":\"a\",\"text\":\"b\"}",
            "{\"cycle\":1,\"source\":\"fb#3\",\"kind\":\"visual\",\"object\":14,\"property\":\"fieryness\",\"value\":2.5}",
            "not json",
        ];
        for text in cases {
            assert!(matches!(read_scenario(text), Err(IngestError::Schema { line: 1, .. })), "{text}");
        }
    }

    fn fire_spec() -> ScenarioSpec {
        ScenarioSpec {
            name: "fire".into(),
            duration: 12,
            map_size: MapSize { width: 5000.0, height: 5000.0 },
            events: vec![EventScript {
                kind: EventKind::Fire,
                object: 14,
                onset: 1,
                growth: Growth { peak: 80, over: 8 },
                position: Some([20.0, 25.0]),
            }],
            reporters: 3,
            message_rate: 0.5,
            noise_rate: 0.3,
            seed: 11,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_scenario(&fire_spec()).unwrap();
        let b = generate_scenario(&fire_spec()).unwrap();
        assert_eq!(write_scenario(&a.scenario), write_scenario(&b.scenario));
        assert_eq!(write_worldmap(&a.map), write_worldmap(&b.map));
        let other = generate_scenario(&ScenarioSpec { seed: 12, ..fire_spec() }).unwrap();
        assert_ne!(write_scenario(&a.scenario), write_scenario(&other.scenario));
    }

    #[test]
    fn round_trips_through_text() {
        let world = generate_scenario(&fire_spec()).unwrap();
        assert_eq!(read_scenario(&write_scenario(&world.scenario)).unwrap(), world.scenario);
    }

    #[test]
    fn empty_spec_gives_empty_batches() {
        let spec = ScenarioSpec { events: vec![], noise_rate: 0.0, ..fire_spec() };
        let world = generate_scenario(&spec).unwrap();
        assert!(world.scenario.batches.is_empty());
        assert_eq!(world.scenario.meta.cycles, 12);
    }

    #[test]
    fn linear_fire_growth_crosses_all_bands() {
        let g = Growth { peak: 80, over: 8 };
        let values: Vec<i64> = (0..10).map(|k| g.at(k)).collect();
        assert_eq!(values, vec![10, 20, 30, 40, 50, 60, 70, 80, 80, 80]);
        let world = generate_scenario(&fire_spec()).unwrap();
        let fieryness: Vec<i64> = world
            .scenario
            .observations()
            .filter_map(|o| match &o.payload {
                ObservationPayload::Visual { object: 14, value, .. } => Some(*value),
                _ => None,
            })
            .take(8)
            .collect();
        assert_eq!(fieryness, vec![10, 20, 30, 40, 50, 60, 70, 80]);
    }

    #[test]
    fn spec_validation() {
        let late = ScenarioSpec {
            events: vec![EventScript { onset: 40, ..fire_spec().events[0].clone() }],
            ..fire_spec()
        };
        assert!(generate_scenario(&late).is_err());
        let negative = ScenarioSpec { noise_rate: -0.1, ..fire_spec() };
        assert!(generate_scenario(&negative).is_err());
    }
}
