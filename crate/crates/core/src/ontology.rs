//! Domain ontology: concept hierarchy, attribute schemas, semantic proximity
//! table, scales and persistence classes.
//!
//! Concepts are referred to in two spellings. The concept name (`Fire`,
//! `Phenomenon`) is used in feature keys; the lowercase token (`fire`) is
//! used as the value of the `type` qualifier and in the proximity table.
//! Intensity vocabulary tokens (`starting`, `none`, ...) are tokens too.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{SemanticFeature, RESERVED_QUALIFIERS};

/// Name of the hierarchy root.
pub const ROOT_CONCEPT: &str = "Object";

const DEFAULT_ONTOLOGY: &str = include_str!("../data/default_ontology.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OntologyError {
    #[error("malformed ontology document: {0}")]
    Malformed(String),
    #[error("concept `{concept}` names unknown parent `{parent}`")]
    UnknownParent { concept: String, parent: String },
    #[error("concept `{0}` has no parent but is not the root `Object`")]
    Unrooted(String),
    #[error("cycle in concept hierarchy through `{0}`")]
    CycleInHierarchy(String),
    #[error("duplicate concept `{0}`")]
    DuplicateConcept(String),
    #[error("proximity ({a}, {b}) = {value} is outside [-1, 1]")]
    ProximityOutOfRange { a: String, b: String, value: f64 },
    #[error("duplicate proximity entry ({a}, {b})")]
    DuplicateProximityEntry { a: String, b: String },
    #[error("unknown token `{0}` in proximity table")]
    UnknownTokenInProximityTable(String),
    #[error("concept `{concept}`, qualifier `{qualifier}`: {reason}")]
    BadAttribute {
        concept: String,
        qualifier: String,
        reason: String,
    },
    #[error("persistence assigned to undeclared concept `{0}`")]
    UnknownPersistenceConcept(String),
    #[error("concrete concept `{0}` has no persistence class")]
    MissingPersistence(String),
    #[error("scale `{0}` must be finite and > 0")]
    BadScale(&'static str),
    #[error("property rule `{name}`: {reason}")]
    BadProperty { name: String, reason: String },
    #[error("action `{action}` implies undeclared phenomenon `{concept}`")]
    BadAction { action: String, concept: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("undeclared token `{0}`")]
pub struct UnknownToken(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Abstract,
    Concrete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueDomain {
    Enumerated(Vec<String>),
    IntegerRange { lo: i64, hi: i64 },
    CoordinatePair,
    Identifier,
    FreeText,
}

impl ValueDomain {
    pub fn accepts(&self, token: &str) -> bool {
        match self {
            ValueDomain::Enumerated(tokens) => tokens.iter().any(|t| t == token),
            ValueDomain::IntegerRange { lo, hi } => token
                .parse::<i64>()
                .map(|v| (*lo..=*hi).contains(&v))
                .unwrap_or(false),
            ValueDomain::CoordinatePair => {
                token == "unknown" || crate::features::parse_coordinates(token).is_some()
            }
            ValueDomain::Identifier => {
                !token.is_empty() && !token.chars().any(|c| c.is_whitespace() || ",()".contains(c))
            }
            ValueDomain::FreeText => true,
        }
    }
}

impl fmt::Display for ValueDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDomain::Enumerated(tokens) => write!(f, "enumerated({})", tokens.join("|")),
            ValueDomain::IntegerRange { lo, hi } => write!(f, "integer-range({lo},{hi})"),
            ValueDomain::CoordinatePair => f.write_str("coordinate-pair"),
            ValueDomain::Identifier => f.write_str("identifier"),
            ValueDomain::FreeText => f.write_str("free-text"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    pub qualifier: String,
    pub domain: ValueDomain,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub name: String,
    pub parent: Option<String>,
    pub kind: ConceptKind,
    pub attributes: Vec<AttributeSchema>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persistence {
    Persistent,
    Temporary,
    Punctual,
}

/// Symmetric token-pair table of semantic proximities in `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProximityTable {
    entries: BTreeMap<(String, String), f64>,
}

fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    }
}

impl ProximityTable {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.entries.get(&ordered_pair(a, b)).copied()
    }

    /// Inserts or replaces an entry. Values outside `[-1, 1]` are rejected.
    pub fn set(&mut self, a: &str, b: &str, value: f64) -> Result<(), OntologyError> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(OntologyError::ProximityOutOfRange {
                a: a.to_owned(),
                b: b.to_owned(),
                value,
            });
        }
        self.entries.insert(ordered_pair(a, b), value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries
            .iter()
            .map(|((a, b), v)| (a.as_str(), b.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scales {
    /// Spatial scale in map units.
    pub spatial: f64,
    /// Temporal scale in cycles.
    pub temporal: f64,
}

/// One intensity band of a phenomenon-producing property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityBand {
    pub min: i64,
    pub max: Option<i64>,
    pub intensity: String,
}

impl IntensityBand {
    fn contains(&self, value: i64) -> bool {
        value >= self.min && self.max.is_none_or(|max| value <= max)
    }
}

/// How a visual property reading turns into a feature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyEffect {
    /// The reading describes a phenomenon whose intensity comes from the
    /// bands; the intact value maps to intensity `none`.
    Phenomenon {
        concept: String,
        bands: Vec<IntensityBand>,
    },
    /// The reading is an attribute of a concrete object (e.g. a person's
    /// `hitPoint`).
    Attribute { concept: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyRule {
    pub name: String,
    /// Reading that describes an intact object; first readings equal to it
    /// are not interesting.
    pub intact: i64,
    pub effect: PropertyEffect,
}

impl PropertyRule {
    /// Intensity token for a phenomenon reading, `None` if no band covers it.
    pub fn intensity_for(&self, value: i64) -> Option<&str> {
        match &self.effect {
            PropertyEffect::Phenomenon { bands, .. } => {
                if value == self.intact {
                    Some("none")
                } else {
                    bands
                        .iter()
                        .find(|b| b.contains(value))
                        .map(|b| b.intensity.as_str())
                }
            }
            PropertyEffect::Attribute { .. } => None,
        }
    }
}

/// A problem found by [`Ontology::validate_feature`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UndeclaredConcept(String),
    AbstractConcept(String),
    TypeOutsideKey { type_token: String, key_concept: String },
    MissingRequired { qualifier: String },
    OutOfDomain {
        qualifier: String,
        value: String,
        domain: ValueDomain,
    },
    UndeclaredQualifier { qualifier: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UndeclaredConcept(c) => write!(f, "undeclared concept `{c}`"),
            Violation::AbstractConcept(c) => write!(f, "abstract concept `{c}` cannot be instantiated"),
            Violation::TypeOutsideKey {
                type_token,
                key_concept,
            } => write!(f, "type `{type_token}` is not a kind of `{key_concept}`"),
            Violation::MissingRequired { qualifier } => {
                write!(f, "required qualifier `{qualifier}` absent")
            }
            Violation::OutOfDomain {
                qualifier,
                value,
                domain,
            } => write!(f, "`{qualifier}` = `{value}` outside {domain}"),
            Violation::UndeclaredQualifier { qualifier } => {
                write!(f, "qualifier `{qualifier}` not declared for this concept")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    concepts: BTreeMap<String, Concept>,
    /// lowercase token -> concept name
    concept_tokens: BTreeMap<String, String>,
    intensity_tokens: BTreeSet<String>,
    proximity: ProximityTable,
    scales: Scales,
    persistence: BTreeMap<String, Persistence>,
    properties: BTreeMap<String, PropertyRule>,
    /// action token -> implied phenomenon concept
    actions: BTreeMap<String, String>,
}

// ---- file schema ----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyFile {
    concepts: Vec<ConceptRecord>,
    #[serde(default)]
    proximity: Vec<ProximityRecord>,
    scales: Scales,
    persistence: BTreeMap<String, Persistence>,
    #[serde(default)]
    properties: Vec<PropertyRecord>,
    #[serde(default)]
    actions: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptRecord {
    name: String,
    parent: Option<String>,
    kind: ConceptKind,
    #[serde(default)]
    attributes: Vec<AttributeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeRecord {
    qualifier: String,
    domain: DomainRecord,
    #[serde(default)]
    required: bool,
}

// Flat record rather than a tagged enum: numeric fields inside internally
// tagged enums do not survive serde_json's arbitrary_precision buffering.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProximityRecord {
    a: String,
    b: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyRecord {
    name: String,
    emits: String,
    intact: i64,
    #[serde(default)]
    bands: Vec<IntensityBand>,
}

fn domain_from_record(
    concept: &str,
    qualifier: &str,
    rec: DomainRecord,
) -> Result<ValueDomain, OntologyError> {
    let bad = |reason: &str| OntologyError::BadAttribute {
        concept: concept.to_owned(),
        qualifier: qualifier.to_owned(),
        reason: reason.to_owned(),
    };
    match rec.kind.as_str() {
        "enumerated" => {
            let tokens = rec.tokens.ok_or_else(|| bad("enumerated domain needs `tokens`"))?;
            if tokens.is_empty() {
                return Err(bad("enumerated domain is empty"));
            }
            Ok(ValueDomain::Enumerated(tokens))
        }
        "integer-range" => {
            let (lo, hi) = rec
                .lo
                .zip(rec.hi)
                .ok_or_else(|| bad("integer-range needs `lo` and `hi`"))?;
            if lo > hi {
                return Err(bad("integer-range has lo > hi"));
            }
            Ok(ValueDomain::IntegerRange { lo, hi })
        }
        "coordinate-pair" => Ok(ValueDomain::CoordinatePair),
        "identifier" => Ok(ValueDomain::Identifier),
        "free-text" => Ok(ValueDomain::FreeText),
        other => Err(bad(&format!("unknown domain kind `{other}`"))),
    }
}

fn domain_to_record(domain: &ValueDomain) -> DomainRecord {
    let mut rec = DomainRecord {
        kind: String::new(),
        tokens: None,
        lo: None,
        hi: None,
    };
    rec.kind = match domain {
        ValueDomain::Enumerated(tokens) => {
            rec.tokens = Some(tokens.clone());
            "enumerated"
        }
        ValueDomain::IntegerRange { lo, hi } => {
            rec.lo = Some(*lo);
            rec.hi = Some(*hi);
            "integer-range"
        }
        ValueDomain::CoordinatePair => "coordinate-pair",
        ValueDomain::Identifier => "identifier",
        ValueDomain::FreeText => "free-text",
    }
    .to_owned();
    rec
}

// ---- loading --------------------------------------------------------------

impl Ontology {
    /// The shipped RoboCupRescue ontology.
    pub fn default_rcr() -> Ontology {
        Ontology::from_json(DEFAULT_ONTOLOGY).expect("shipped ontology is valid")
    }

    /// Raw text of the shipped ontology file.
    pub fn default_source() -> &'static str {
        DEFAULT_ONTOLOGY
    }

    pub fn from_json(source: &str) -> Result<Ontology, OntologyError> {
        let file: OntologyFile =
            serde_json::from_str(source).map_err(|e| OntologyError::Malformed(e.to_string()))?;
        Ontology::from_file(file)
    }

    fn from_file(file: OntologyFile) -> Result<Ontology, OntologyError> {
        let mut concepts = BTreeMap::new();
        let mut concept_tokens = BTreeMap::new();
        for rec in file.concepts {
            let token = rec.name.to_lowercase();
            if concepts.contains_key(&rec.name) || concept_tokens.contains_key(&token) {
                return Err(OntologyError::DuplicateConcept(rec.name));
            }
            let mut attributes = Vec::with_capacity(rec.attributes.len());
            for attr in rec.attributes {
                if attributes
                    .iter()
                    .any(|a: &AttributeSchema| a.qualifier == attr.qualifier)
                {
                    return Err(OntologyError::BadAttribute {
                        concept: rec.name.clone(),
                        qualifier: attr.qualifier,
                        reason: "declared twice".into(),
                    });
                }
                let domain = domain_from_record(&rec.name, &attr.qualifier, attr.domain)?;
                attributes.push(AttributeSchema {
                    qualifier: attr.qualifier,
                    domain,
                    required: attr.required,
                });
            }
            concept_tokens.insert(token, rec.name.clone());
            concepts.insert(
                rec.name.clone(),
                Concept {
                    name: rec.name,
                    parent: rec.parent,
                    kind: rec.kind,
                    attributes,
                },
            );
        }

        check_hierarchy(&concepts)?;

        let mut intensity_tokens = BTreeSet::new();
        for concept in concepts.values() {
            for attr in &concept.attributes {
                if let (true, ValueDomain::Enumerated(tokens)) =
                    (attr.qualifier == "intensity", &attr.domain)
                {
                    intensity_tokens.extend(tokens.iter().cloned());
                }
            }
        }

        let mut proximity = ProximityTable::default();
        for rec in file.proximity {
            for token in [&rec.a, &rec.b] {
                if !concept_tokens.contains_key(token) && !intensity_tokens.contains(token) {
                    return Err(OntologyError::UnknownTokenInProximityTable(token.clone()));
                }
            }
            if proximity.get(&rec.a, &rec.b).is_some() {
                return Err(OntologyError::DuplicateProximityEntry { a: rec.a, b: rec.b });
            }
            proximity.set(&rec.a, &rec.b, rec.value)?;
        }

        let scales = file.scales;
        if !(scales.spatial.is_finite() && scales.spatial > 0.0) {
            return Err(OntologyError::BadScale("spatial"));
        }
        if !(scales.temporal.is_finite() && scales.temporal > 0.0) {
            return Err(OntologyError::BadScale("temporal"));
        }

        for name in file.persistence.keys() {
            if !concepts.contains_key(name) {
                return Err(OntologyError::UnknownPersistenceConcept(name.clone()));
            }
        }

        let mut ont = Ontology {
            concepts,
            concept_tokens,
            intensity_tokens,
            proximity,
            scales,
            persistence: file.persistence,
            properties: BTreeMap::new(),
            actions: BTreeMap::new(),
        };

        for concept in ont.concepts.values() {
            if concept.kind == ConceptKind::Concrete && ont.persistence_of(&concept.name).is_none() {
                return Err(OntologyError::MissingPersistence(concept.name.clone()));
            }
        }

        for rec in file.properties {
            let rule = ont.property_from_record(rec)?;
            ont.properties.insert(rule.name.clone(), rule);
        }
        for (action, concept) in file.actions {
            if !ont.concepts.contains_key(&concept) || !ont.is_a(&concept, "Phenomenon") {
                return Err(OntologyError::BadAction { action, concept });
            }
            ont.actions.insert(action, concept);
        }
        Ok(ont)
    }

    fn property_from_record(&self, rec: PropertyRecord) -> Result<PropertyRule, OntologyError> {
        let bad = |reason: String| OntologyError::BadProperty {
            name: rec.name.clone(),
            reason,
        };
        if !self.concepts.contains_key(&rec.emits) {
            return Err(bad(format!("emits undeclared concept `{}`", rec.emits)));
        }
        if self.properties.contains_key(&rec.name) {
            return Err(bad("declared twice".into()));
        }
        let effect = if self.is_a(&rec.emits, "Phenomenon") {
            let domain = self
                .attribute(&rec.emits, "intensity")
                .map(|a| a.domain.clone())
                .ok_or_else(|| bad("phenomenon has no intensity attribute".into()))?;
            if rec.bands.is_empty() {
                return Err(bad("phenomenon property needs intensity bands".into()));
            }
            for band in &rec.bands {
                if band.max.is_some_and(|m| m < band.min) {
                    return Err(bad(format!("band `{}` has max < min", band.intensity)));
                }
                if band.min <= rec.intact && band.max.is_none_or(|m| rec.intact <= m) {
                    return Err(bad("a band covers the intact value".into()));
                }
                if !domain.accepts(&band.intensity) {
                    return Err(bad(format!("intensity `{}` outside {domain}", band.intensity)));
                }
            }
            PropertyEffect::Phenomenon {
                concept: rec.emits.clone(),
                bands: rec.bands.clone(),
            }
        } else {
            if !rec.bands.is_empty() {
                return Err(bad("attribute property cannot declare bands".into()));
            }
            match self.attribute(&rec.emits, &rec.name) {
                Some(attr) if attr.domain.accepts(&rec.intact.to_string()) => {}
                Some(_) => return Err(bad("intact value outside the attribute domain".into())),
                None => {
                    return Err(bad(format!(
                        "`{}` declares no attribute `{}`",
                        rec.emits, rec.name
                    )))
                }
            }
            PropertyEffect::Attribute {
                concept: rec.emits.clone(),
            }
        };
        Ok(PropertyRule {
            name: rec.name,
            intact: rec.intact,
            effect,
        })
    }

    /// Serializes back to the ontology file format.
    pub fn to_json(&self) -> String {
        let file = OntologyFile {
            concepts: self
                .concepts
                .values()
                .map(|c| ConceptRecord {
                    name: c.name.clone(),
                    parent: c.parent.clone(),
                    kind: c.kind,
                    attributes: c
                        .attributes
                        .iter()
                        .map(|a| AttributeRecord {
                            qualifier: a.qualifier.clone(),
                            domain: domain_to_record(&a.domain),
                            required: a.required,
                        })
                        .collect(),
                })
                .collect(),
            proximity: self
                .proximity
                .iter()
                .map(|(a, b, value)| ProximityRecord {
                    a: a.to_owned(),
                    b: b.to_owned(),
                    value,
                })
                .collect(),
            scales: self.scales,
            persistence: self.persistence.clone(),
            properties: self
                .properties
                .values()
                .map(|p| PropertyRecord {
                    name: p.name.clone(),
                    emits: match &p.effect {
                        PropertyEffect::Phenomenon { concept, .. }
                        | PropertyEffect::Attribute { concept } => concept.clone(),
                    },
                    intact: p.intact,
                    bands: match &p.effect {
                        PropertyEffect::Phenomenon { bands, .. } => bands.clone(),
                        PropertyEffect::Attribute { .. } => Vec::new(),
                    },
                })
                .collect(),
            actions: self.actions.clone(),
        };
        serde_json::to_string_pretty(&file).expect("ontology serializes")
    }
}

fn check_hierarchy(concepts: &BTreeMap<String, Concept>) -> Result<(), OntologyError> {
    for concept in concepts.values() {
        match &concept.parent {
            None if concept.name != ROOT_CONCEPT => {
                return Err(OntologyError::Unrooted(concept.name.clone()))
            }
            Some(parent) if !concepts.contains_key(parent) => {
                return Err(OntologyError::UnknownParent {
                    concept: concept.name.clone(),
                    parent: parent.clone(),
                })
            }
            _ => {}
        }
    }
    for concept in concepts.values() {
        let mut seen = BTreeSet::new();
        let mut cursor = Some(concept);
        while let Some(c) = cursor {
            if !seen.insert(c.name.as_str()) {
                return Err(OntologyError::CycleInHierarchy(concept.name.clone()));
            }
            cursor = c.parent.as_ref().and_then(|p| concepts.get(p));
        }
    }
    if !concepts.contains_key(ROOT_CONCEPT) {
        return Err(OntologyError::Malformed(format!(
            "root concept `{ROOT_CONCEPT}` is not declared"
        )));
    }
    Ok(())
}

// ---- queries --------------------------------------------------------------

impl Ontology {
    pub fn concept(&self, name: &str) -> Option<&Concept> {
        self.concepts.get(name)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    /// Concept named by a lowercase `type` token.
    pub fn concept_for_token(&self, token: &str) -> Option<&Concept> {
        self.concept_tokens
            .get(token)
            .and_then(|name| self.concepts.get(name))
    }

    pub fn is_declared_token(&self, token: &str) -> bool {
        self.concept_tokens.contains_key(token) || self.intensity_tokens.contains(token)
    }

    /// Iterates from `name` up to the root.
    pub fn ancestry<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Concept> + 'a {
        let mut cursor = self.concepts.get(name);
        std::iter::from_fn(move || {
            let current = cursor?;
            cursor = current.parent.as_ref().and_then(|p| self.concepts.get(p));
            Some(current)
        })
    }

    /// Whether `name` is `ancestor` or one of its descendants.
    pub fn is_a(&self, name: &str, ancestor: &str) -> bool {
        self.ancestry(name).any(|c| c.name == ancestor)
    }

    /// Attribute schema for `qualifier` as seen from `concept`; the nearest
    /// declaration wins.
    pub fn attribute(&self, concept: &str, qualifier: &str) -> Option<&AttributeSchema> {
        self.ancestry(concept)
            .find_map(|c| c.attributes.iter().find(|a| a.qualifier == qualifier))
    }

    /// Effective attribute schemas of `concept`, nearest declaration first.
    pub fn attributes(&self, concept: &str) -> Vec<&AttributeSchema> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in self.ancestry(concept) {
            for attr in &c.attributes {
                if seen.insert(attr.qualifier.as_str()) {
                    out.push(attr);
                }
            }
        }
        out
    }

    pub fn persistence_of(&self, concept: &str) -> Option<Persistence> {
        self.ancestry(concept)
            .find_map(|c| self.persistence.get(&c.name).copied())
    }

    pub fn scales(&self) -> Scales {
        self.scales
    }

    pub fn proximity_table(&self) -> &ProximityTable {
        &self.proximity
    }

    /// Replaces the proximity table entry for `(a, b)`.
    pub fn set_proximity(&mut self, a: &str, b: &str, value: f64) -> Result<(), OntologyError> {
        for token in [a, b] {
            if !self.is_declared_token(token) {
                return Err(OntologyError::UnknownTokenInProximityTable(token.to_owned()));
            }
        }
        self.proximity.set(a, b, value)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyRule> {
        self.properties.get(name)
    }

    pub fn properties(&self) -> impl Iterator<Item = &PropertyRule> {
        self.properties.values()
    }

    /// Phenomenon concept implied by a heard action, if any.
    pub fn implied_phenomenon(&self, action: &str) -> Option<&str> {
        self.actions.get(action).map(String::as_str)
    }

    /// Semantic proximity between two declared tokens: the table entry if
    /// present, else 1 for identical tokens, else 0.
    pub fn semantic_proximity(&self, a: &str, b: &str) -> Result<f64, UnknownToken> {
        for token in [a, b] {
            if !self.is_declared_token(token) {
                return Err(UnknownToken(token.to_owned()));
            }
        }
        Ok(self
            .proximity
            .get(a, b)
            .unwrap_or(if a == b { 1.0 } else { 0.0 }))
    }

    /// Checks a feature against the attribute schemas. An empty report means
    /// the feature is valid.
    pub fn validate_feature(&self, feature: &SemanticFeature) -> Vec<Violation> {
        let mut report = Vec::new();
        let key_concept = feature.key.concept.as_str();
        match self.concept(key_concept) {
            None => report.push(Violation::UndeclaredConcept(key_concept.to_owned())),
            Some(c) if c.kind == ConceptKind::Abstract => {
                report.push(Violation::AbstractConcept(key_concept.to_owned()))
            }
            Some(_) => {}
        }

        let type_concept = match self.concept_for_token(&feature.kind) {
            None => {
                report.push(Violation::UndeclaredConcept(feature.kind.clone()));
                return report;
            }
            Some(c) => c,
        };
        if type_concept.kind == ConceptKind::Abstract {
            report.push(Violation::AbstractConcept(type_concept.name.clone()));
        }
        if self.concept(key_concept).is_some() && !self.is_a(&type_concept.name, key_concept) {
            report.push(Violation::TypeOutsideKey {
                type_token: feature.kind.clone(),
                key_concept: key_concept.to_owned(),
            });
        }

        let schemas = self.attributes(&type_concept.name);
        for schema in &schemas {
            let value = match schema.qualifier.as_str() {
                "type" => Some(feature.kind.clone()),
                "time" => Some(feature.time.to_string()),
                "localisation" => Some(feature.localisation.to_string()),
                q => feature.get(q).map(str::to_owned),
            };
            match value {
                None if schema.required => report.push(Violation::MissingRequired {
                    qualifier: schema.qualifier.clone(),
                }),
                None => {}
                Some(v) if !schema.domain.accepts(&v) => report.push(Violation::OutOfDomain {
                    qualifier: schema.qualifier.clone(),
                    value: v,
                    domain: schema.domain.clone(),
                }),
                Some(_) => {}
            }
        }
        for couple in &feature.couples {
            let declared = schemas.iter().any(|s| s.qualifier == couple.qualifier);
            if !declared && !RESERVED_QUALIFIERS.contains(&couple.qualifier.as_str()) {
                report.push(Violation::UndeclaredQualifier {
                    qualifier: couple.qualifier.clone(),
                });
            }
        }
        report
    }
}
