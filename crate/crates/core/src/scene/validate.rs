use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::Scene;

/// Object id used for scene-level violations.
pub const SCENE_SCOPE: &str = "<scene>";

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub object_id: String,
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}: {}", self.object_id, self.field, self.reason)
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// Lists every violated scene invariant; empty iff the scene is valid.
pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |object_id: &str, field: &str, reason: String| {
        out.push(Violation {
            object_id: object_id.to_string(),
            field: field.to_string(),
            reason,
        })
    };

    if scene.sample_rate == 0 {
        push(SCENE_SCOPE, "sample_rate", "expected a positive rate".into());
    }
    if !in_unit(scene.targets.envelopment) {
        push(SCENE_SCOPE, "targets.envelopment", "expected value in [0, 1]".into());
    }
    if !in_unit(scene.targets.intelligibility) {
        push(SCENE_SCOPE, "targets.intelligibility", "expected value in [0, 1]".into());
    }

    let mut seen = HashSet::new();
    for o in &scene.objects {
        let b = &o.basic;
        let id = b.id.as_str();
        if id.is_empty() {
            push(id, "id", "expected a non-empty id".into());
        }
        if !seen.insert(id) {
            push(id, "id", "duplicate".into());
        }
        if b.channels < 1 {
            push(id, "channels", "expected at least 1".into());
        } else if b.channels as usize != o.stems.len() {
            push(
                id,
                "channels",
                format!("declares {} channels but has {} stems", b.channels, o.stems.len()),
            );
        }
        if !(0..=10).contains(&b.priority) {
            push(id, "priority", "expected integer in [0, 10]".into());
        }
        if !(-60.0..=12.0).contains(&b.level_db) {
            push(id, "level_db", "expected dB in [-60, 12]".into());
        }
        for (field, reason) in b.position.violations() {
            push(id, field, reason);
        }
        if let Some(e) = b.extent_deg {
            if !(0.0..360.0).contains(&e) {
                push(id, "extent_deg", "expected degrees in [0, 360)".into());
            }
        }
        if !in_unit(b.diffuseness) {
            push(id, "diffuseness", "expected value in [0, 1]".into());
        }

        let a = &o.advanced;
        if !(0..=10).contains(&a.importance_to_narrative) {
            push(id, "advanced.importance_to_narrative", "expected integer in [0, 10]".into());
        }
        if !in_unit(a.object_quality) {
            push(id, "advanced.object_quality", "expected value in [0, 1]".into());
        }

        let t = &o.constraints.tolerances;
        for (name, v) in [
            ("level_db", t.level_db),
            ("position_deg", t.position_deg),
            ("time_shift_ms", t.time_shift_ms),
            ("spectral_tilt_db", t.spectral_tilt_db),
            ("reverb_scale", t.reverb_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                push(
                    id,
                    &format!("constraints.tolerances.{name}"),
                    "expected a finite value >= 0".into(),
                );
            }
        }
        let prio = &o.constraints.perceptual_priority;
        if prio.iter().collect::<HashSet<_>>().len() != prio.len() {
            push(id, "constraints.priority_order", "duplicate property".into());
        }

        if let Some(r) = &o.reverb {
            for (i, refl) in r.reflections.iter().enumerate() {
                if !(refl.delay_ms >= 0.0) {
                    push(id, &format!("reverb.reflections[{i}].delay_ms"), "expected >= 0".into());
                }
                for (field, reason) in refl.direction.violations() {
                    push(id, &format!("reverb.reflections[{i}].direction.{field}"), reason);
                }
            }
            for (i, band) in r.tail_bands.iter().enumerate() {
                let f = |s: &str| format!("reverb.tail_bands[{i}].{s}");
                if !(band.band_center_hz > 0.0) {
                    push(id, &f("band_center_hz"), "expected > 0".into());
                }
                if !(band.onset_ms >= 0.0) {
                    push(id, &f("onset_ms"), "expected >= 0".into());
                }
                if !(band.attack_ms >= 0.0) {
                    push(id, &f("attack_ms"), "expected >= 0".into());
                }
                if !(band.decay_tau_s > 0.0) {
                    push(id, &f("decay_tau_s"), "expected > 0".into());
                }
            }
            if r
                .tail_bands
                .windows(2)
                .any(|w| !(w[0].band_center_hz < w[1].band_center_hz))
            {
                push(id, "reverb.tail_bands", "bands must be sorted ascending by center".into());
            }
        }

        if let Some(first) = o.stems.first() {
            if o.stems.iter().any(|s| s.samples.len() != first.samples.len()) {
                push(id, "stems", "stems differ in length".into());
            }
        }
        if o.len() > scene.duration {
            push(id, "stems", format!("longer than scene duration {}", scene.duration));
        }

        let d = &o.directives;
        if !(d.tilt_db.is_finite() && d.time_shift_ms.is_finite() && in_unit(d.decorrelate)) {
            push(id, "directives", "expected finite values, decorrelate in [0, 1]".into());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Direction3;
    use crate::scene::{AudioObject, BasicMetadata, ObjectType, SceneTargets, Stem};
    use std::sync::Arc;

    fn object(id: &str) -> AudioObject {
        AudioObject::new(
            BasicMetadata {
                object_type: ObjectType::Dialogue,
                id: id.into(),
                channels: 1,
                group: None,
                priority: 10,
                level_db: 0.0,
                position: Direction3::horizontal(0.0),
                extent_deg: None,
                diffuseness: 0.0,
            },
            vec![Stem {
                path: format!("{id}.wav"),
                samples: Arc::new(vec![0.0; 16]),
            }],
        )
    }

    fn scene(objects: Vec<AudioObject>) -> Scene {
        Scene {
            objects,
            targets: SceneTargets::default(),
            sample_rate: 48_000,
            duration: 16,
        }
    }

    #[test]
    fn valid_scene_has_no_violations() {
        assert!(validate_scene(&scene(vec![object("dlg1"), object("mus1")])).is_empty());
    }

    #[test]
    fn duplicate_id_reported_once() {
        let v = validate_scene(&scene(vec![object("dlg1"), object("dlg1")]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "id");
        assert_eq!(v[0].reason, "duplicate");
    }

    #[test]
    fn diffuseness_out_of_range() {
        let mut o = object("amb");
        o.basic.diffuseness = 1.5;
        let v = validate_scene(&scene(vec![o]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "diffuseness");
        assert_eq!(v[0].object_id, "amb");
    }
}
