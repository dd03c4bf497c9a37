//! Semantic features: the key/couple data model, its canonical text codec,
//! and extraction of features from raw observations.

mod extract;

pub use extract::{ExtractError, Extractor};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Qualifiers every feature carries outside its couple list.
pub const RESERVED_QUALIFIERS: [&str; 3] = ["type", "time", "localisation"];

/// `Concept#id`, e.g. `Phenomenon#14`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureKey {
    pub concept: String,
    pub id: u64,
}

impl FeatureKey {
    pub fn new(concept: impl Into<String>, id: u64) -> Self {
        FeatureKey {
            concept: concept.into(),
            id,
        }
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.concept, self.id)
    }
}

impl FromStr for FeatureKey {
    type Err = FeatureParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FeatureParseError::BadKey(s.to_owned());
        let (concept, id) = s.split_once('#').ok_or_else(bad)?;
        let mut chars = concept.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
        if !head_ok || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad());
        }
        if id.is_empty() || !id.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let id = id.parse().map_err(|_| bad())?;
        Ok(FeatureKey::new(concept, id))
    }
}

/// Where a feature is located, in map units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Localisation {
    Known {
        x: f64,
        y: f64,
    },
    #[default]
    Unknown,
}

impl Localisation {
    pub fn coords(&self) -> Option<(f64, f64)> {
        match *self {
            Localisation::Known { x, y } => Some((x, y)),
            Localisation::Unknown => None,
        }
    }

    pub fn distance(&self, other: &Localisation) -> Option<f64> {
        let (x1, y1) = self.coords()?;
        let (x2, y2) = other.coords()?;
        Some((x1 - x2).hypot(y1 - y2))
    }
}

impl fmt::Display for Localisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Localisation::Known { x, y } => write!(f, "{x}|{y}"),
            Localisation::Unknown => f.write_str("unknown"),
        }
    }
}

/// Parses `x|y` into finite coordinates.
pub fn parse_coordinates(token: &str) -> Option<(f64, f64)> {
    let (x, y) = token.split_once('|')?;
    let x: f64 = x.parse().ok()?;
    let y: f64 = y.parse().ok()?;
    (x.is_finite() && y.is_finite()).then_some((x, y))
}

impl FromStr for Localisation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "unknown" {
            return Ok(Localisation::Unknown);
        }
        parse_coordinates(s)
            .map(|(x, y)| Localisation::Known { x, y })
            .ok_or(())
    }
}

impl Serialize for Localisation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Localisation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse()
            .map_err(|_| serde::de::Error::custom(format!("bad localisation `{text}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Couple {
    pub qualifier: String,
    pub value: String,
}

/// One partial fact about the world: a key plus qualifier/value couples,
/// stamped with a time and a localisation.
///
/// `type`, `time` and `localisation` are held in dedicated fields; `couples`
/// holds every other qualifier in its original order.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticFeature {
    pub key: FeatureKey,
    /// Value of the `type` qualifier, a lowercase concept token.
    pub kind: String,
    pub couples: Vec<Couple>,
    pub time: u64,
    pub localisation: Localisation,
}

impl SemanticFeature {
    pub fn new(key: FeatureKey, kind: impl Into<String>, time: u64, localisation: Localisation) -> Self {
        SemanticFeature {
            key,
            kind: kind.into(),
            couples: Vec::new(),
            time,
            localisation,
        }
    }

    /// Sets a couple, replacing any existing value for the qualifier.
    ///
    /// Panics on the reserved qualifiers, which have dedicated fields.
    pub fn with(mut self, qualifier: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(qualifier, value);
        self
    }

    pub fn set(&mut self, qualifier: impl Into<String>, value: impl Into<String>) {
        let qualifier = qualifier.into();
        assert!(
            !RESERVED_QUALIFIERS.contains(&qualifier.as_str()),
            "`{qualifier}` is a reserved qualifier"
        );
        let value = value.into();
        match self.couples.iter_mut().find(|c| c.qualifier == qualifier) {
            Some(existing) => existing.value = value,
            None => self.couples.push(Couple { qualifier, value }),
        }
    }

    pub fn get(&self, qualifier: &str) -> Option<&str> {
        self.couples
            .iter()
            .find(|c| c.qualifier == qualifier)
            .map(|c| c.value.as_str())
    }

    pub fn intensity(&self) -> Option<&str> {
        self.get("intensity")
    }

    /// Canonical text form, `(Key, type, T, q1, v1, ..., localisation, L, time, N)`.
    pub fn format(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, FeatureParseError> {
        text.parse()
    }
}

impl fmt::Display for SemanticFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, type, {}", self.key, self.kind)?;
        for c in &self.couples {
            write!(f, ", {}, {}", c.qualifier, c.value)?;
        }
        write!(f, ", localisation, {}, time, {})", self.localisation, self.time)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureParseError {
    #[error("syntax error at byte {position}: {reason}")]
    Syntax { position: usize, reason: &'static str },
    #[error("qualifier without a value")]
    OddCoupleCount,
    #[error("bad feature key `{0}`")]
    BadKey(String),
    #[error("missing `{0}` qualifier")]
    MissingQualifier(&'static str),
    #[error("qualifier `{0}` appears twice")]
    DuplicateQualifier(String),
    #[error("bad value `{value}` for `{qualifier}`")]
    BadValue { qualifier: String, value: String },
}

fn is_token_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, ',' | '(' | ')')
}

impl FromStr for SemanticFeature {
    type Err = FeatureParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let syntax = |position, reason| FeatureParseError::Syntax { position, reason };
        if !text.starts_with('(') {
            return Err(syntax(0, "expected `(`"));
        }
        if !text.ends_with(')') || text.len() < 2 {
            return Err(syntax(text.len(), "expected `)`"));
        }
        let inner = &text[1..text.len() - 1];

        let mut tokens = Vec::new();
        let mut offset = 1;
        for (i, raw) in inner.split(',').enumerate() {
            let lead = raw.len() - raw.trim_start().len();
            let token = raw.trim();
            if i > 0 && lead == 0 {
                return Err(syntax(offset, "expected a space after `,`"));
            }
            if token.is_empty() {
                return Err(syntax(offset, "empty token"));
            }
            if let Some(bad) = token.find(|c| !is_token_char(c)) {
                return Err(syntax(offset + lead + bad, "illegal character in token"));
            }
            tokens.push(token);
            offset += raw.len() + 1;
        }

        let key: FeatureKey = tokens[0].parse()?;
        let rest = &tokens[1..];
        if rest.len() % 2 != 0 {
            return Err(FeatureParseError::OddCoupleCount);
        }

        let mut kind = None;
        let mut time = None;
        let mut localisation = None;
        let mut couples: Vec<Couple> = Vec::new();
        let mut seen = BTreeMap::new();
        for pair in rest.chunks_exact(2) {
            let (q, v) = (pair[0], pair[1]);
            if seen.insert(q, ()).is_some() {
                return Err(FeatureParseError::DuplicateQualifier(q.to_owned()));
            }
            let bad_value = || FeatureParseError::BadValue {
                qualifier: q.to_owned(),
                value: v.to_owned(),
            };
            match q {
                "type" => kind = Some(v.to_owned()),
                "time" => time = Some(v.parse::<u64>().map_err(|_| bad_value())?),
                "localisation" => localisation = Some(v.parse().map_err(|_| bad_value())?),
                _ => couples.push(Couple {
                    qualifier: q.to_owned(),
                    value: v.to_owned(),
                }),
            }
        }
        Ok(SemanticFeature {
            key,
            kind: kind.ok_or(FeatureParseError::MissingQualifier("type"))?,
            couples,
            time: time.ok_or(FeatureParseError::MissingQualifier("time"))?,
            localisation: localisation.ok_or(FeatureParseError::MissingQualifier("localisation"))?,
        })
    }
}

/// One raw per-cycle report from a field agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub cycle: u64,
    /// Reporting agent, e.g. `fb#3`.
    pub source: String,
    pub payload: ObservationPayload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservationPayload {
    /// A property reading of a world object.
    Visual {
        object: u64,
        property: String,
        value: i64,
    },
    /// A heard message, `action_name object_name`.
    Auditory { sender: String, text: String },
}

impl Observation {
    pub fn visual(cycle: u64, source: &str, object: u64, property: &str, value: i64) -> Self {
        Observation {
            cycle,
            source: source.to_owned(),
            payload: ObservationPayload::Visual {
                object,
                property: property.to_owned(),
                value,
            },
        }
    }

    pub fn auditory(cycle: u64, source: &str, sender: &str, text: &str) -> Self {
        Observation {
            cycle,
            source: source.to_owned(),
            payload: ObservationPayload::Auditory {
                sender: sender.to_owned(),
                text: text.to_owned(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapObject {
    /// Object class as named in the map file (`Road`, `Building`, ...).
    pub concept: String,
    pub x: f64,
    pub y: f64,
}

/// Static positions of world objects.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorldMap {
    objects: BTreeMap<u64, MapObject>,
}

impl WorldMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an object; returns `false` (and leaves the map unchanged) if
    /// the id is taken.
    pub fn insert(&mut self, id: u64, object: MapObject) -> bool {
        if self.objects.contains_key(&id) {
            return false;
        }
        self.objects.insert(id, object);
        true
    }

    pub fn get(&self, id: u64) -> Option<&MapObject> {
        self.objects.get(&id)
    }

    pub fn localisation(&self, id: u64) -> Localisation {
        self.get(id)
            .map(|o| Localisation::Known { x: o.x, y: o.y })
            .unwrap_or(Localisation::Unknown)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &MapObject)> {
        self.objects.iter().map(|(id, o)| (*id, o))
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}
