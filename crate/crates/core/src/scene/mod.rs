//! Audio objects, scenes and their metadata.
//!
//! Scenes are immutable once parsed; the scene adapter produces adapted
//! copies. Object `level_db` is a mix-time offset and is never baked into the
//! stems.

mod schema;
mod validate;

pub use schema::{load_scene, parse_scene, parse_scene_unchecked, serialize_scene, SCHEMA_VERSION};
pub use validate::{validate_scene, Violation, SCENE_SCOPE};

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{BandFilterBank, BandLevels, SignalDirectives};
use crate::geometry::Direction3;
use crate::router::RendererRequest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectType {
    Dialogue,
    Music,
    Ambience,
    Effect,
    Diffuse,
    Hoa,
}

impl ObjectType {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Dialogue => "dialogue",
            Self::Music => "music",
            Self::Ambience => "ambience",
            Self::Effect => "effect",
            Self::Diffuse => "diffuse",
            Self::Hoa => "hoa",
        }
    }
}

/// Perceptual properties that editorial priorities rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Intelligibility,
    Position,
    Velocity,
    Locatedness,
    Scale,
    Envelopment,
    Level,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Intelligibility,
        Property::Position,
        Property::Velocity,
        Property::Locatedness,
        Property::Scale,
        Property::Envelopment,
        Property::Level,
    ];

    /// Highest priority first; `level` last so it is modified first.
    pub fn default_priority() -> Vec<Property> {
        vec![
            Property::Intelligibility,
            Property::Position,
            Property::Locatedness,
            Property::Scale,
            Property::Envelopment,
            Property::Velocity,
            Property::Level,
        ]
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

impl FromStr for Property {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown property '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicMetadata {
    pub object_type: ObjectType,
    pub id: String,
    pub channels: i64,
    pub group: Option<String>,
    /// 0 (lowest) to 10.
    pub priority: i64,
    /// Mix-time offset in dB.
    pub level_db: f64,
    pub position: Direction3,
    pub extent_deg: Option<f64>,
    pub diffuseness: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdvancedMetadata {
    pub importance_to_narrative: i64,
    pub onscreen: bool,
    pub interactivity_restriction: bool,
    pub preferred_renderer: Option<RendererRequest>,
    pub target_device: Option<String>,
    pub language: Option<String>,
    pub object_quality: f64,
    /// Descriptive fields carried through to reports without driving
    /// behavior (emotional content, signal statistics, HOA rotation, ...).
    pub annotations: BTreeMap<String, serde_json::Value>,
}

/// Half-ranges within which adaptation may move each property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub level_db: f64,
    pub position_deg: f64,
    pub time_shift_ms: f64,
    pub spectral_tilt_db: f64,
    pub reverb_scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            level_db: 6.0,
            position_deg: 15.0,
            time_shift_ms: 100.0,
            spectral_tilt_db: 6.0,
            reverb_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditorialConstraints {
    pub tolerances: Tolerances,
    /// Highest priority first.
    pub perceptual_priority: Vec<Property>,
}

impl Default for EditorialConstraints {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            perceptual_priority: Property::default_priority(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reflection {
    pub direction: Direction3,
    pub delay_ms: f64,
    pub gain_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBand {
    pub band_center_hz: f64,
    pub onset_ms: f64,
    pub attack_ms: f64,
    pub amplitude_db: f64,
    pub decay_tau_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReverbMetadata {
    #[serde(default)]
    pub reflections: Vec<Reflection>,
    #[serde(default)]
    pub tail_bands: Vec<TailBand>,
}

/// A mono signal referenced by relative path.
#[derive(Debug, Clone, PartialEq)]
pub struct Stem {
    pub path: String,
    pub samples: Arc<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct AudioObject {
    pub basic: BasicMetadata,
    pub advanced: AdvancedMetadata,
    pub constraints: EditorialConstraints,
    pub reverb: Option<ReverbMetadata>,
    pub stems: Vec<Stem>,
    /// Pending signal edits from adaptation; identity for parsed scenes.
    pub directives: SignalDirectives,
    spectrum: OnceLock<BandLevels>,
}

impl PartialEq for AudioObject {
    fn eq(&self, o: &Self) -> bool {
        self.basic == o.basic
            && self.advanced == o.advanced
            && self.constraints == o.constraints
            && self.reverb == o.reverb
            && self.stems == o.stems
            && self.directives == o.directives
    }
}

impl AudioObject {
    pub fn new(basic: BasicMetadata, stems: Vec<Stem>) -> Self {
        Self {
            basic,
            advanced: AdvancedMetadata {
                object_quality: 1.0,
                ..Default::default()
            },
            constraints: EditorialConstraints::default(),
            reverb: None,
            stems,
            directives: SignalDirectives::default(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.basic.id
    }

    pub fn len(&self) -> usize {
        self.stems.iter().map(|s| s.samples.len()).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mono signal rendered for this object: the mean of its stems.
    pub fn mono(&self) -> Vec<f64> {
        let len = self.len();
        let mut out = vec![0.0; len];
        if self.stems.is_empty() {
            return out;
        }
        let w = 1.0 / self.stems.len() as f64;
        for s in &self.stems {
            for (o, v) in out.iter_mut().zip(s.samples.iter()) {
                *o += w * v;
            }
        }
        out
    }

    /// Octave-band levels of the whole mono signal (computed once).
    pub fn spectrum(&self, sample_rate: f64) -> BandLevels {
        *self.spectrum.get_or_init(|| {
            let mono = self.mono();
            BandFilterBank::new(sample_rate)
                .band_powers(&mono)
                .map(crate::dsp::power_to_db)
        })
    }

    /// Drops the cached spectrum after the signal was replaced.
    pub fn invalidate_spectrum(&mut self) {
        self.spectrum = OnceLock::new();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneTargets {
    pub envelopment: f64,
    pub intelligibility: f64,
}

impl Default for SceneTargets {
    fn default() -> Self {
        Self {
            envelopment: 0.5,
            intelligibility: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub objects: Vec<AudioObject>,
    pub targets: SceneTargets,
    pub sample_rate: u32,
    /// Samples.
    pub duration: usize,
}

impl Scene {
    pub fn object(&self, id: &str) -> Option<&AudioObject> {
        self.objects.iter().find(|o| o.basic.id == id)
    }

    pub fn object_mut(&mut self, id: &str) -> Option<&mut AudioObject> {
        self.objects.iter_mut().find(|o| o.basic.id == id)
    }

    pub fn dialogue(&self) -> impl Iterator<Item = &AudioObject> {
        self.objects
            .iter()
            .filter(|o| o.basic.object_type == ObjectType::Dialogue)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene_model: schema: {0}")]
    Schema(String),
    #[error("scene_model: {field} of object '{object_id}': {reason}")]
    Range {
        object_id: String,
        field: String,
        reason: String,
    },
    #[error("scene_model: missing stem {}", .0.display())]
    MissingStem(PathBuf),
    #[error("scene_model: stem {} of object '{object_id}' has rate {found} Hz, scene expects {expected} Hz", .path.display())]
    RateMismatch {
        object_id: String,
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("scene_model: stem: {0}")]
    Stem(#[from] crate::io::WavError),
    #[error("scene_model: {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl From<Violation> for SceneError {
    fn from(v: Violation) -> Self {
        SceneError::Range {
            object_id: v.object_id,
            field: v.field,
            reason: v.reason,
        }
    }
}
