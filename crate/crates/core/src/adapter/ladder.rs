//! Intelligibility ladder: progressively stronger edits to non-dialogue
//! objects while dialogue remains masked.

use serde::{Deserialize, Serialize};

use super::action::{clamp_to_tolerances, ActionKind, AdaptationAction};
use super::AdapterError;
use crate::context::{intelligibility_from_levels, ContextualInfo};
use crate::dsp::{gain_to_db, power_to_db, BandLevels, TiltFilter, BAND_CENTERS_HZ, LEVEL_FLOOR_DB, NUM_BANDS};
use crate::fields::is_dialogue;
use crate::geometry::azimuth_difference;
use crate::scene::{AudioObject, Scene};

const LADDER_REASON: &str = "intelligibility_ladder";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderParams {
    pub max_step_db: f64,
    pub db_per_deficit: f64,
    pub reposition_deg_per_db: f64,
    /// Later rungs are added while the projected deficit exceeds this.
    pub residual_threshold: f64,
    pub decorrelate_amount: f64,
}

impl Default for LadderParams {
    fn default() -> Self {
        Self {
            max_step_db: 6.0,
            db_per_deficit: 20.0,
            reposition_deg_per_db: 5.0,
            residual_threshold: 0.05,
            decorrelate_amount: 0.5,
        }
    }
}

/// Per-band levels of one object as mixed: its signal spectrum, its level
/// offset and any pending tilt.
fn object_levels(o: &AudioObject, fs: f64, extra_level_db: f64, extra_tilt_db: f64) -> BandLevels {
    let spec = o.spectrum(fs);
    let tilt = o.directives.tilt_db + extra_tilt_db;
    let filt = (tilt != 0.0).then(|| TiltFilter::design(tilt, fs));
    let mut out = [LEVEL_FLOOR_DB; NUM_BANDS];
    for (b, v) in out.iter_mut().enumerate() {
        if spec[b] <= LEVEL_FLOOR_DB {
            continue;
        }
        let t = filt.map_or(0.0, |f| gain_to_db(f.magnitude(BAND_CENTERS_HZ[b])));
        *v = spec[b] + o.basic.level_db + extra_level_db + t;
    }
    out
}

fn power_sum(parts: &[BandLevels]) -> BandLevels {
    let mut out = [0.0; NUM_BANDS];
    for p in parts {
        for (o, v) in out.iter_mut().zip(p) {
            if *v > LEVEL_FLOOR_DB {
                *o += 10f64.powf(v / 10.0);
            }
        }
    }
    out.map(power_to_db)
}

/// Proxy intelligibility of the scene's mixed-down dialogue against its
/// non-dialogue objects plus the monitored noise. `edits` holds extra
/// (level dB, tilt dB) per object id.
pub fn preview_intelligibility(scene: &Scene, ctx: &ContextualInfo, edits: &[(String, f64, f64)]) -> f64 {
    let fs = scene.sample_rate as f64;
    let mut dialogue = Vec::new();
    let mut masker = vec![ctx.high_level.noise_band_levels_db];
    for o in &scene.objects {
        let (dl, dt) = edits
            .iter()
            .find(|e| e.0 == o.id())
            .map_or((0.0, 0.0), |e| (e.1, e.2));
        let lv = object_levels(o, fs, dl, dt);
        if is_dialogue(o) {
            dialogue.push(lv);
        } else {
            masker.push(lv);
        }
    }
    intelligibility_from_levels(&power_sum(&dialogue), &power_sum(&masker))
}

pub fn intelligibility_boost(scene: &Scene, ctx: &ContextualInfo) -> Result<Vec<AdaptationAction>, AdapterError> {
    intelligibility_boost_with(scene, ctx, &LadderParams::default())
}

/// Emits the ladder rungs warranted by the context's intelligibility deficit.
/// Returns no actions when there is no deficit.
pub fn intelligibility_boost_with(
    scene: &Scene,
    ctx: &ContextualInfo,
    p: &LadderParams,
) -> Result<Vec<AdaptationAction>, AdapterError> {
    let deficit = ctx.high_level.intelligibility_deficit;
    if !(deficit > 0.0) {
        return Ok(vec![]);
    }
    let dialogue: Vec<&AudioObject> = scene.objects.iter().filter(|o| is_dialogue(o)).collect();
    if dialogue.is_empty() {
        return Err(AdapterError::NoDialogueObject);
    }
    let others: Vec<&AudioObject> = scene.objects.iter().filter(|o| !is_dialogue(o)).collect();
    let step = (deficit * p.db_per_deficit).min(p.max_step_db);
    let base = preview_intelligibility(scene, ctx, &[]);
    let residual = |edits: &[(String, f64, f64)]| deficit - (preview_intelligibility(scene, ctx, edits) - base);

    let mut actions = Vec::new();
    let mut edits: Vec<(String, f64, f64)> = Vec::new();
    for o in &others {
        let a = AdaptationAction::new(o.id(), ActionKind::GainOffset { db: -step }, LADDER_REASON);
        if let ActionKind::GainOffset { db } = clamp_to_tolerances(&a, &o.constraints).kind {
            edits.push((o.id().to_string(), db, 0.0));
        }
        actions.push(a);
    }
    if residual(&edits) <= p.residual_threshold {
        return Ok(actions);
    }

    for (o, e) in others.iter().zip(edits.iter_mut()) {
        let a = AdaptationAction::new(o.id(), ActionKind::SpectralTilt { db: -step }, LADDER_REASON);
        if let ActionKind::SpectralTilt { db } = clamp_to_tolerances(&a, &o.constraints).kind {
            e.2 = db;
        }
        actions.push(a);
    }
    // repositioning and decorrelation leave band levels unchanged, so the
    // projected residual stays where the tilt rung left it
    if residual(&edits) <= p.residual_threshold {
        return Ok(actions);
    }

    for o in &others {
        let az = o.basic.position.azimuth_deg;
        let nearest = dialogue
            .iter()
            .map(|d| azimuth_difference(az, d.basic.position.azimuth_deg))
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        let sign = if nearest < 0.0 { -1.0 } else { 1.0 };
        let d_az = sign * step * p.reposition_deg_per_db;
        actions.push(AdaptationAction::new(
            o.id(),
            ActionKind::Reposition { d_az, d_el: 0.0 },
            LADDER_REASON,
        ));
    }
    for o in &others {
        actions.push(AdaptationAction::new(
            o.id(),
            ActionKind::Decorrelate {
                amount: p.decorrelate_amount,
            },
            LADDER_REASON,
        ));
    }
    Ok(actions)
}
