use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{FeatureKey, Observation, ObservationPayload, SemanticFeature, WorldMap};
use crate::ontology::{ConceptKind, Ontology, PropertyEffect, ValueDomain};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("reading {property} = {value} is outside the declared domain")]
    InvalidReading { property: String, value: i64 },
    #[error("unparsable message `{0}`")]
    UnparsableMessage(String),
    #[error("bad agent identifier `{0}`")]
    BadIdentifier(String),
}

/// What a feature is about: a phenomenon or activity type at one world
/// object. `negated` separates "no longer burning" reports from the
/// phenomenon itself, so the two can oppose each other as agents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Subject {
    type_token: String,
    object: u64,
    negated: bool,
}

/// Allocates feature keys. One key per subject; ids prefer the world
/// object's id and fall back to the next unused id of the key concept.
#[derive(Debug, Clone, Default)]
struct KeyAllocator {
    by_subject: BTreeMap<Subject, FeatureKey>,
    used: BTreeMap<String, BTreeSet<u64>>,
}

impl KeyAllocator {
    fn key_for(&mut self, concept: &str, subject: Subject) -> FeatureKey {
        if let Some(key) = self.by_subject.get(&subject) {
            return key.clone();
        }
        let id = self.claim(concept, Some(subject.object));
        let key = FeatureKey::new(concept, id);
        self.by_subject.insert(subject, key.clone());
        key
    }

    fn fresh(&mut self, concept: &str) -> FeatureKey {
        let id = self.claim(concept, None);
        FeatureKey::new(concept, id)
    }

    fn claim(&mut self, concept: &str, preferred: Option<u64>) -> u64 {
        let used = self.used.entry(concept.to_owned()).or_default();
        let id = match preferred {
            Some(p) if !used.contains(&p) => p,
            _ => used.last().map_or(0, |max| max + 1),
        };
        used.insert(id);
        id
    }
}

/// Turns observations into semantic features.
///
/// Holds the key allocator and the last reading seen for every
/// (object, property), which drives the interest filter: a reading is only
/// interesting when it changes, and a first reading only when it differs
/// from the property's intact value.
#[derive(Debug, Clone, Default)]
pub struct Extractor {
    keys: KeyAllocator,
    readings: BTreeMap<(u64, String), i64>,
    intensities: BTreeMap<Subject, String>,
}

fn is_identifier(token: &str) -> bool {
    ValueDomain::Identifier.accepts(token)
}

/// Outermost concrete ancestor of a concept: the concept named in keys.
fn key_concept<'a>(ont: &'a Ontology, concept: &str) -> &'a str {
    ont.ancestry(concept)
        .take_while(|c| c.kind == ConceptKind::Concrete)
        .last()
        .map(|c| c.name.as_str())
        .unwrap_or_else(|| ont.concept(concept).map(|c| c.name.as_str()).unwrap_or(""))
}

impl Extractor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Features for one observation; empty when the observation carries
    /// nothing interesting.
    pub fn extract(
        &mut self,
        obs: &Observation,
        map: &WorldMap,
        ont: &Ontology,
    ) -> Result<Vec<SemanticFeature>, ExtractError> {
        if !is_identifier(&obs.source) {
            return Err(ExtractError::BadIdentifier(obs.source.clone()));
        }
        match &obs.payload {
            ObservationPayload::Visual {
                object,
                property,
                value,
            } => self.reading_features(obs.cycle, *object, property, *value, map, ont),
            ObservationPayload::Auditory { sender, text } => {
                self.message_features(obs.cycle, &obs.source, sender, text, map, ont)
            }
        }
    }

    fn reading_features(
        &mut self,
        cycle: u64,
        object: u64,
        property: &str,
        value: i64,
        map: &WorldMap,
        ont: &Ontology,
    ) -> Result<Vec<SemanticFeature>, ExtractError> {
        let rule = ont
            .property(property)
            .ok_or_else(|| ExtractError::UnknownProperty(property.to_owned()))?;
        let invalid = || ExtractError::InvalidReading {
            property: property.to_owned(),
            value,
        };
        match &rule.effect {
            PropertyEffect::Phenomenon { .. } => {
                rule.intensity_for(value).ok_or_else(invalid)?;
            }
            PropertyEffect::Attribute { concept } => {
                let schema = ont.attribute(concept, property).ok_or_else(invalid)?;
                if !schema.domain.accepts(&value.to_string()) {
                    return Err(invalid());
                }
            }
        }

        let slot = (object, property.to_owned());
        let last = self.readings.insert(slot, value);
        match last {
            Some(prev) if prev == value => return Ok(Vec::new()),
            None if value == rule.intact => return Ok(Vec::new()),
            _ => {}
        }

        let localisation = map.localisation(object);
        let feature = match &rule.effect {
            PropertyEffect::Phenomenon { concept, .. } => {
                let intensity = rule.intensity_for(value).expect("checked above");
                let type_token = concept.to_lowercase();
                let subject = Subject {
                    type_token: type_token.clone(),
                    object,
                    negated: intensity == "none",
                };
                let key = self.keys.key_for(key_concept(ont, concept), subject.clone());
                self.intensities.insert(subject, intensity.to_owned());
                SemanticFeature::new(key, type_token, cycle, localisation).with("intensity", intensity)
            }
            PropertyEffect::Attribute { concept } => {
                let type_token = concept.to_lowercase();
                let subject = Subject {
                    type_token: type_token.clone(),
                    object,
                    negated: false,
                };
                let key = self.keys.key_for(key_concept(ont, concept), subject);
                let mut feature = SemanticFeature::new(key, type_token, cycle, localisation);
                // Everything known about this object for the same concept.
                for ((obj, prop), reading) in self.readings.range((object, String::new())..) {
                    if *obj != object {
                        break;
                    }
                    let same_concept = ont.property(prop).is_some_and(|r| {
                        matches!(&r.effect, PropertyEffect::Attribute { concept: c } if c == concept)
                    });
                    if same_concept {
                        feature.set(prop.clone(), reading.to_string());
                    }
                }
                feature
            }
        };
        Ok(vec![feature])
    }

    fn message_features(
        &mut self,
        cycle: u64,
        receiver: &str,
        sender: &str,
        text: &str,
        map: &WorldMap,
        ont: &Ontology,
    ) -> Result<Vec<SemanticFeature>, ExtractError> {
        let unparsable = || ExtractError::UnparsableMessage(text.to_owned());
        if !is_identifier(sender) {
            return Err(ExtractError::BadIdentifier(sender.to_owned()));
        }
        let mut words = text.split_whitespace();
        let (action, target) = match (words.next(), words.next(), words.next()) {
            (Some(a), Some(t), None) => (a.to_lowercase(), t),
            _ => return Err(unparsable()),
        };
        let activity = ont
            .concept_for_token(&action)
            .filter(|c| c.name != "Activity" && ont.is_a(&c.name, "Activity"))
            .ok_or_else(unparsable)?
            .name
            .clone();
        let object: u64 = target
            .split_once('#')
            .filter(|(name, _)| !name.is_empty() && is_identifier(name))
            .and_then(|(_, id)| id.parse().ok())
            .ok_or_else(unparsable)?;
        let localisation = map.localisation(object);

        let mut out = Vec::with_capacity(3);
        if let Some(phenomenon) = ont.implied_phenomenon(&action) {
            let type_token = phenomenon.to_lowercase();
            let subject = Subject {
                type_token: type_token.clone(),
                object,
                negated: false,
            };
            // A message confirms the phenomenon without saying how strong it is.
            let intensity = self.intensities.get(&subject).cloned().unwrap_or_else(|| "unknown".into());
            let key = self.keys.key_for(key_concept(ont, phenomenon), subject);
            out.push(SemanticFeature::new(key, type_token, cycle, localisation).with("intensity", intensity));
        }

        let key = self.keys.key_for(
            key_concept(ont, &activity),
            Subject {
                type_token: action.clone(),
                object,
                negated: false,
            },
        );
        out.push(
            SemanticFeature::new(key, action, cycle, localisation)
                .with("actor", sender)
                .with("target", target),
        );

        if let Some(message) = ont.concept("Message") {
            let key = self.keys.fresh(&message.name);
            out.push(
                SemanticFeature::new(key, message.name.to_lowercase(), cycle, localisation)
                    .with("receiver", receiver)
                    .with("sender", sender),
            );
        }
        Ok(out)
    }
}
