//! The `scene-schema v1` document format (JSON).
//!
//! See `docs/scene-schema-v1.md` for the field reference.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    validate_scene, AdvancedMetadata, AudioObject, BasicMetadata, EditorialConstraints, ObjectType,
    Property, ReverbMetadata, Scene, SceneError, SceneTargets, Stem, Tolerances,
};
use crate::dsp::SignalDirectives;
use crate::geometry::Direction3;
use crate::io;
use crate::router::RendererRequest;

pub const SCHEMA_VERSION: &str = "scene-schema v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default = "schema_version")]
    schema: String,
    sample_rate: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration: Option<usize>,
    #[serde(default)]
    targets: SceneTargets,
    #[serde(default)]
    objects: Vec<ObjectDoc>,
}

fn schema_version() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: String,
    #[serde(rename = "type")]
    object_type: ObjectType,
    #[serde(default = "one")]
    channels: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(default = "default_priority")]
    priority: i64,
    #[serde(default)]
    level_db: f64,
    position: Direction3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extent_deg: Option<f64>,
    #[serde(default)]
    diffuseness: f64,
    #[serde(default)]
    advanced: AdvancedDoc,
    #[serde(default)]
    constraints: ConstraintsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reverb: Option<ReverbMetadata>,
    stems: Vec<String>,
    #[serde(default, skip_serializing_if = "SignalDirectives::is_identity")]
    directives: SignalDirectives,
}

fn one() -> i64 {
    1
}

fn default_priority() -> i64 {
    5
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AdvancedDoc {
    importance_to_narrative: i64,
    onscreen: bool,
    interactivity_restriction: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    preferred_renderer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_device: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    language: Option<String>,
    object_quality: f64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    annotations: BTreeMap<String, serde_json::Value>,
}

impl Default for AdvancedDoc {
    fn default() -> Self {
        Self {
            importance_to_narrative: 5,
            onscreen: false,
            interactivity_restriction: false,
            preferred_renderer: None,
            target_device: None,
            language: None,
            object_quality: 1.0,
            annotations: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConstraintsDoc {
    tolerances: Tolerances,
    priority_order: Vec<Property>,
}

impl Default for ConstraintsDoc {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            priority_order: Property::default_priority(),
        }
    }
}

impl ObjectDoc {
    fn into_object(self, sample_rate: u32, stem_dir: &Path) -> Result<AudioObject, SceneError> {
        let preferred_renderer = match &self.advanced.preferred_renderer {
            None => None,
            Some(name) => Some(name.parse::<RendererRequest>().map_err(|e| SceneError::Range {
                object_id: self.id.clone(),
                field: "advanced.preferred_renderer".into(),
                reason: e.to_string(),
            })?),
        };
        let mut stems = Vec::with_capacity(self.stems.len());
        for rel in &self.stems {
            let path = stem_dir.join(rel);
            let wav = io::read_mono(&path).map_err(|e| match e {
                io::WavError::NotFound { path } => SceneError::MissingStem(path),
                other => SceneError::Stem(other),
            })?;
            if wav.sample_rate != sample_rate {
                return Err(SceneError::RateMismatch {
                    object_id: self.id.clone(),
                    path,
                    expected: sample_rate,
                    found: wav.sample_rate,
                });
            }
            stems.push(Stem {
                path: rel.clone(),
                samples: Arc::new(wav.samples),
            });
        }
        let mut obj = AudioObject::new(
            BasicMetadata {
                object_type: self.object_type,
                id: self.id,
                channels: self.channels,
                group: self.group,
                priority: self.priority,
                level_db: self.level_db,
                position: self.position,
                extent_deg: self.extent_deg,
                diffuseness: self.diffuseness,
            },
            stems,
        );
        obj.advanced = AdvancedMetadata {
            importance_to_narrative: self.advanced.importance_to_narrative,
            onscreen: self.advanced.onscreen,
            interactivity_restriction: self.advanced.interactivity_restriction,
            preferred_renderer,
            target_device: self.advanced.target_device,
            language: self.advanced.language,
            object_quality: self.advanced.object_quality,
            annotations: self.advanced.annotations,
        };
        obj.constraints = EditorialConstraints {
            tolerances: self.constraints.tolerances,
            perceptual_priority: self.constraints.priority_order,
        };
        obj.reverb = self.reverb;
        obj.directives = self.directives;
        Ok(obj)
    }

    fn from_object(o: &AudioObject) -> Self {
        Self {
            id: o.basic.id.clone(),
            object_type: o.basic.object_type,
            channels: o.basic.channels,
            group: o.basic.group.clone(),
            priority: o.basic.priority,
            level_db: o.basic.level_db,
            position: o.basic.position,
            extent_deg: o.basic.extent_deg,
            diffuseness: o.basic.diffuseness,
            advanced: AdvancedDoc {
                importance_to_narrative: o.advanced.importance_to_narrative,
                onscreen: o.advanced.onscreen,
                interactivity_restriction: o.advanced.interactivity_restriction,
                preferred_renderer: o.advanced.preferred_renderer.map(|r| r.to_string()),
                target_device: o.advanced.target_device.clone(),
                language: o.advanced.language.clone(),
                object_quality: o.advanced.object_quality,
                annotations: o.advanced.annotations.clone(),
            },
            constraints: ConstraintsDoc {
                tolerances: o.constraints.tolerances,
                priority_order: o.constraints.perceptual_priority.clone(),
            },
            reverb: o.reverb.clone(),
            stems: o.stems.iter().map(|s| s.path.clone()).collect(),
            directives: o.directives,
        }
    }
}

/// Parses and loads a scene without range validation. Schema errors, missing
/// stems and rate mismatches are still reported.
pub fn parse_scene_unchecked(text: &str, stem_dir: &Path) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| SceneError::Schema(e.to_string()))?;
    if doc.schema != SCHEMA_VERSION {
        return Err(SceneError::Schema(format!(
            "unsupported schema '{}', expected '{SCHEMA_VERSION}'",
            doc.schema
        )));
    }
    let objects = doc
        .objects
        .into_iter()
        .map(|o| o.into_object(doc.sample_rate, stem_dir))
        .collect::<Result<Vec<_>, _>>()?;
    let longest = objects.iter().map(AudioObject::len).max().unwrap_or(0);
    Ok(Scene {
        objects,
        targets: doc.targets,
        sample_rate: doc.sample_rate,
        duration: doc.duration.unwrap_or(longest),
    })
}

/// Parses, loads and validates a scene document. Stem paths are resolved
/// against `stem_dir`.
pub fn parse_scene(text: &str, stem_dir: &Path) -> Result<Scene, SceneError> {
    let scene = parse_scene_unchecked(text, stem_dir)?;
    if let Some(v) = validate_scene(&scene).into_iter().next() {
        return Err(v.into());
    }
    Ok(scene)
}

/// Reads a scene file; stems are resolved relative to the file's directory.
pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scene(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Deterministic pretty-printed document. Stem references are written, not
/// audio data.
pub fn serialize_scene(scene: &Scene) -> String {
    let doc = SceneDoc {
        schema: SCHEMA_VERSION.to_string(),
        sample_rate: scene.sample_rate,
        duration: Some(scene.duration),
        targets: scene.targets,
        objects: scene.objects.iter().map(ObjectDoc::from_object).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("scene documents always serialize");
    s.push('\n');
    s
}
