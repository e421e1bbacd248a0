use serde::{Deserialize, Serialize};

use super::select::{select_renderer, RendererAssignment, SelectionTable};
use super::RouterError;
use crate::context::{ContextualInfo, SpeakerLayout};
use crate::scene::Scene;

/// Default crossfade duration between renderers, in seconds.
pub const DEFAULT_CROSSFADE_S: f64 = 1.0;

/// Both assignments run during `[start_s, start_s + duration_s]` under an
/// equal-power envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossfadeSchedule {
    pub object_id: String,
    pub from: RendererAssignment,
    pub to: RendererAssignment,
    pub start_s: f64,
    pub duration_s: f64,
}

pub fn schedule_crossfade(
    old: &RendererAssignment,
    new: &RendererAssignment,
    start_s: f64,
    duration_s: f64,
) -> Result<CrossfadeSchedule, RouterError> {
    if old.object_id != new.object_id {
        return Err(RouterError::ObjectMismatch(old.object_id.clone(), new.object_id.clone()));
    }
    if old == new {
        return Err(RouterError::SameRenderer);
    }
    if !(duration_s > 0.0) {
        return Err(RouterError::NonPositiveDuration(duration_s));
    }
    Ok(CrossfadeSchedule {
        object_id: old.object_id.clone(),
        from: old.clone(),
        to: new.clone(),
        start_s: start_s.max(0.0),
        duration_s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Routing {
    /// One per object, in scene order.
    pub assignments: Vec<RendererAssignment>,
    pub schedules: Vec<CrossfadeSchedule>,
}

/// Assigns every object and emits a crossfade for each object whose
/// assignment differs from `previous`.
pub fn route(
    scene: &Scene,
    ctx: &ContextualInfo,
    layout: &SpeakerLayout,
    table: &SelectionTable,
    previous: &[RendererAssignment],
    start_s: f64,
    crossfade_s: f64,
) -> Routing {
    let assignments: Vec<RendererAssignment> = scene
        .objects
        .iter()
        .map(|o| select_renderer(o, scene, ctx, layout, table))
        .collect();
    let schedules = assignments
        .iter()
        .filter_map(|a| {
            let old = previous.iter().find(|p| p.object_id == a.object_id)?;
            schedule_crossfade(old, a, start_s, crossfade_s).ok()
        })
        .collect();
    Routing {
        assignments,
        schedules,
    }
}
