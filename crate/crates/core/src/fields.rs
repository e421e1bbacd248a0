//! Named fields visible to rulebook and selection-table expressions.

use crate::context::{ContextualInfo, ObjectContext};
use crate::expr::Value;
use crate::scene::{AudioObject, ObjectType, Scene};

/// Per-object fields.
pub const OBJECT_FIELDS: &[&str] = &[
    "id",
    "type",
    "group",
    "priority",
    "level_db",
    "az",
    "el",
    "dist",
    "has_distance",
    "diffuseness",
    "extent_deg",
    "onscreen",
    "importance",
    "interactivity_restriction",
    "preferred_renderer",
    "target_device",
    "language",
    "quality",
    "channels",
    "has_reverb",
    "nearest_device",
    "localizability_need",
];

/// Scene-wide and context fields.
pub const CONTEXT_FIELDS: &[&str] = &[
    "deficit",
    "intelligibility",
    "noise_db",
    "noise_delta_db",
    "speaker_count",
    "listener",
    "team_preference",
    "has_team_preference",
    "hearing_impaired",
    "intelligibility_preference",
    "envelopment_preference",
    "target_intelligibility",
    "target_envelopment",
    "has_room_decay",
    "t_s",
    "object_count",
    "dialogue_count",
];

/// Context fields followed by object fields.
pub fn all_fields() -> Vec<&'static str> {
    CONTEXT_FIELDS.iter().chain(OBJECT_FIELDS).copied().collect()
}

fn num(v: impl Into<f64>) -> Option<Value> {
    Some(Value::Num(v.into()))
}

fn text(v: Option<&str>) -> Option<Value> {
    Some(Value::Str(v.unwrap_or_default().to_string()))
}

pub fn context_field(ctx: &ContextualInfo, scene: &Scene, name: &str) -> Option<Value> {
    let h = &ctx.high_level;
    match name {
        "deficit" => num(h.intelligibility_deficit),
        "intelligibility" => num(h.measured_intelligibility.unwrap_or(-1.0)),
        "noise_db" => num(h.noise_level_db),
        "noise_delta_db" => num(h.noise_delta_db),
        "speaker_count" => num(h.speaker_count as f64),
        "listener" => text(Some(&h.dominant_listener)),
        "team_preference" => text(h.listener.team_preference.as_deref()),
        "has_team_preference" => Some(Value::Bool(h.listener.team_preference.is_some())),
        "hearing_impaired" => Some(Value::Bool(h.listener.hearing_impaired)),
        "intelligibility_preference" => num(h.listener.intelligibility_preference),
        "envelopment_preference" => num(h.listener.envelopment_preference),
        "target_intelligibility" => num(h.targets.intelligibility),
        "target_envelopment" => num(h.targets.envelopment),
        "has_room_decay" => Some(Value::Bool(h.room_decay_tau_s.is_some())),
        "t_s" => num(h.time_s),
        "object_count" => num(scene.objects.len() as f64),
        "dialogue_count" => num(scene.dialogue().count() as f64),
        _ => None,
    }
}

pub fn object_field(o: &AudioObject, octx: Option<&ObjectContext>, name: &str) -> Option<Value> {
    let b = &o.basic;
    let a = &o.advanced;
    match name {
        "id" => text(Some(&b.id)),
        "type" => text(Some(b.object_type.as_str())),
        "group" => text(b.group.as_deref()),
        "priority" => num(b.priority as f64),
        "level_db" => num(b.level_db),
        "az" => num(b.position.azimuth_deg),
        "el" => num(b.position.elevation_deg),
        "dist" => num(b.position.distance_m.unwrap_or(-1.0)),
        "has_distance" => Some(Value::Bool(b.position.distance_m.is_some())),
        "diffuseness" => num(b.diffuseness),
        "extent_deg" => num(b.extent_deg.unwrap_or(-1.0)),
        "onscreen" => Some(Value::Bool(a.onscreen)),
        "importance" => num(a.importance_to_narrative as f64),
        "interactivity_restriction" => Some(Value::Bool(a.interactivity_restriction)),
        "preferred_renderer" => Some(Value::Str(
            a.preferred_renderer.map(|r| r.to_string()).unwrap_or_default(),
        )),
        "target_device" => text(a.target_device.as_deref()),
        "language" => text(a.language.as_deref()),
        "quality" => num(a.object_quality),
        "channels" => num(b.channels as f64),
        "has_reverb" => Some(Value::Bool(o.reverb.is_some())),
        "nearest_device" => text(octx.and_then(|c| c.nearest_device.as_deref())),
        "localizability_need" => num(octx.map_or(1.0 - b.diffuseness, |c| c.localizability_need)),
        _ => None,
    }
}

/// Lookup over context fields, then object fields when an object is given.
pub struct FieldEnv<'a> {
    pub ctx: &'a ContextualInfo,
    pub scene: &'a Scene,
    pub object: Option<&'a AudioObject>,
}

impl crate::expr::Env for FieldEnv<'_> {
    fn get(&self, name: &str) -> Option<Value> {
        context_field(self.ctx, self.scene, name).or_else(|| {
            self.object
                .and_then(|o| object_field(o, self.ctx.low_level.get(o.id()), name))
        })
    }
}

pub fn is_dialogue(o: &AudioObject) -> bool {
    o.basic.object_type == ObjectType::Dialogue
}
