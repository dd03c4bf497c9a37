//! Signed proximity between two semantic features.
//!
//! The semantic component comes from the ontology table; spatial and
//! temporal factors in `[0, 1]` attenuate it. The combined value is the
//! product of the three, so distance and time can only weaken a relation,
//! never flip its sign.

use serde::{Deserialize, Serialize};

use crate::features::SemanticFeature;
use crate::ontology::Ontology;

/// Spatial factor used when either side has no known localisation.
pub const UNKNOWN_LOCALISATION_FACTOR: f64 = 0.5;

/// Attenuation law applied to `gap / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `max(0, 1 - r)`
    #[default]
    Linear,
    /// `exp(-4.5 r²)`, truncated to 0 at `r >= 1`.
    Gaussian,
}

impl Kernel {
    pub fn attenuate(self, gap: f64, scale: f64) -> f64 {
        let ratio = gap / scale;
        if ratio >= 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Linear => (1.0 - ratio).max(0.0),
            Kernel::Gaussian => (-4.5 * ratio * ratio).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProximitySettings {
    pub spatial_scale: f64,
    pub temporal_scale: f64,
    pub kernel: Kernel,
}

impl ProximitySettings {
    pub fn from_ontology(ont: &Ontology) -> Self {
        let scales = ont.scales();
        ProximitySettings {
            spatial_scale: scales.spatial,
            temporal_scale: scales.temporal,
            kernel: Kernel::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProximityBreakdown {
    pub semantic: f64,
    pub spatial: f64,
    pub temporal: f64,
    pub combined: f64,
}

/// Linear spatial factor `max(0, 1 - d/D)`.
pub fn spatial_factor(distance: f64, scale: f64) -> f64 {
    Kernel::Linear.attenuate(distance, scale)
}

/// Linear temporal factor `max(0, 1 - dt/T)`.
pub fn temporal_factor(gap: u64, scale: f64) -> f64 {
    Kernel::Linear.attenuate(gap as f64, scale)
}

fn is_active(intensity: Option<&str>) -> bool {
    intensity.is_some_and(|i| i != "none")
}

/// Whether two features state opposite things about the same subject: one
/// reports the phenomenon, the other reports it absent (`none`).
pub fn contradicts(a: &SemanticFeature, b: &SemanticFeature) -> bool {
    if a.kind != b.kind {
        return false;
    }
    let (ia, ib) = (a.intensity(), b.intensity());
    let opposed = (ia == Some("none") && is_active(ib)) || (ib == Some("none") && is_active(ia));
    if !opposed {
        return false;
    }
    let same_place = matches!(
        (a.localisation.coords(), b.localisation.coords()),
        (Some(pa), Some(pb)) if pa == pb
    );
    a.key == b.key || same_place
}

/// Semantic component: the contradiction rule, else the ontology table on
/// the two `type` tokens. Undeclared tokens are independent (0).
pub fn semantic_component(ont: &Ontology, a: &SemanticFeature, b: &SemanticFeature) -> f64 {
    if contradicts(a, b) {
        return -1.0;
    }
    ont.semantic_proximity(&a.kind, &b.kind).unwrap_or(0.0)
}

pub fn proximity(
    ont: &Ontology,
    settings: &ProximitySettings,
    a: &SemanticFeature,
    b: &SemanticFeature,
) -> ProximityBreakdown {
    let semantic = semantic_component(ont, a, b);
    let spatial = match a.localisation.distance(&b.localisation) {
        Some(d) => settings.kernel.attenuate(d, settings.spatial_scale),
        None => UNKNOWN_LOCALISATION_FACTOR,
    };
    let temporal = settings
        .kernel
        .attenuate(a.time.abs_diff(b.time) as f64, settings.temporal_scale);
    // `+ 0.0` folds a negative zero into zero.
    let combined = if semantic == 0.0 {
        0.0
    } else {
        semantic * spatial * temporal + 0.0
    };
    ProximityBreakdown {
        semantic,
        spatial,
        temporal,
        combined,
    }
}
