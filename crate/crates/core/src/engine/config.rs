use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AtnConfig;
use crate::characterisation::ClusterConfig;
use crate::ontology::Ontology;
use crate::proximity::{Kernel, ProximitySettings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config is not valid JSON for the expected schema: {0}")]
    Malformed(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Overrides for the ontology's proximity scales.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spatial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temporal: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProximityConfig {
    pub kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EngineSection {
    /// Milliseconds between ticks when driven live; 0 runs as fast as possible.
    pub tick_ms: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_log: Option<String>,
}

/// The engine config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub atn: AtnConfig,
    pub scales: ScaleOverrides,
    pub proximity: ProximityConfig,
    pub characterisation: ClusterConfig,
    pub engine: EngineSection,
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be a positive number")))
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Config =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.atn
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(s) = self.scales.spatial {
            positive("scales.spatial", s)?;
        }
        if let Some(t) = self.scales.temporal {
            positive("scales.temporal", t)?;
        }
        let c = &self.characterisation;
        if !(c.theta > 0.0 && c.theta <= 1.0) {
            return Err(ConfigError::Invalid("characterisation.theta must lie in (0, 1]".into()));
        }
        positive("characterisation.radius", c.radius)?;
        if c.every == 0 {
            return Err(ConfigError::Invalid("characterisation.every must be at least 1".into()));
        }
        if c.min_pp.is_some_and(|m| !m.is_finite()) {
            return Err(ConfigError::Invalid("characterisation.min-pp must be finite".into()));
        }
        Ok(())
    }

    pub fn proximity_settings(&self, ont: &Ontology) -> ProximitySettings {
        let mut settings = ProximitySettings::from_ontology(ont);
        if let Some(s) = self.scales.spatial {
            settings.spatial_scale = s;
        }
        if let Some(t) = self.scales.temporal {
            settings.temporal_scale = t;
        }
        settings.kernel = self.proximity.kernel;
        settings
    }

    /// PP an agent needs to take part in clustering.
    pub fn cluster_min_pp(&self) -> f64 {
        self.characterisation.min_pp.unwrap_or(self.atn.theta1)
    }
}
