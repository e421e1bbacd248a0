use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ListenerInfo, NoiseState, ReproductionScenario, SpeakerLayout};
use crate::dsp::BandLevels;
use crate::router::{feasible_renderers, RendererClass};
use crate::scene::{AudioObject, Scene, SceneTargets};

/// Measurements supplied by the monitoring unit for one update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitoring {
    pub noise: NoiseState,
    /// Proxy intelligibility of the dialogue in [0, 1].
    pub intelligibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighLevelInfo {
    /// Wanted minus measured intelligibility, in [-1, 1].
    pub intelligibility_deficit: f64,
    pub measured_intelligibility: Option<f64>,
    pub noise_delta_db: f64,
    /// Broadband noise level (power sum of the bands).
    pub noise_level_db: f64,
    pub noise_band_levels_db: BandLevels,
    pub dominant_listener: String,
    pub listener: ListenerInfo,
    pub targets: SceneTargets,
    pub speaker_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub room_decay_tau_s: Option<Vec<f64>>,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectContext {
    pub feasible_renderers: Vec<RendererClass>,
    pub nearest_device: Option<String>,
    pub localizability_need: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualInfo {
    pub high_level: HighLevelInfo,
    /// Keyed by object id.
    pub low_level: BTreeMap<String, ObjectContext>,
}

/// The object's target device when the layout has it, otherwise the speaker
/// closest to the (listener-centred) origin.
fn nearest_device(layout: &SpeakerLayout, object: &AudioObject) -> Option<String> {
    if let Some(t) = &object.advanced.target_device {
        if layout.index_of(t).is_some() {
            return Some(t.clone());
        }
    }
    let mut best: Option<(f64, &str)> = None;
    for s in &layout.speakers {
        let d = s.position.distance_m.unwrap_or(f64::INFINITY);
        if best.is_none_or(|b| d < b.0) {
            best = Some((d, &s.speaker_id));
        }
    }
    best.map(|b| b.1.to_string())
}

/// Builds contextual information. `previous_noise_db` is the broadband
/// noise level seen at the previous monitored update, if any.
pub fn update_context(
    scenario: &ReproductionScenario,
    scene: &Scene,
    monitoring: Option<&Monitoring>,
    previous_noise_db: Option<f64>,
    time_s: f64,
) -> ContextualInfo {
    let listener = scenario.dominant_listener();
    let noise = monitoring.map_or(scenario.noise, |m| m.noise);
    let noise_level_db = noise.broadband_db();
    let wanted = listener.intelligibility_preference.max(scene.targets.intelligibility);
    let (deficit, measured) = match monitoring {
        Some(m) => ((wanted - m.intelligibility).clamp(-1.0, 1.0), Some(m.intelligibility)),
        None => (0.0, None),
    };
    let noise_delta_db = match (monitoring, previous_noise_db) {
        (Some(_), Some(prev)) => noise_level_db - prev,
        _ => 0.0,
    };
    let low_level = scene
        .objects
        .iter()
        .map(|o| {
            let feasible = feasible_renderers(&scenario.layout, o).unwrap_or_else(|_| vec![RendererClass::Ap1Nearest]);
            (
                o.id().to_string(),
                ObjectContext {
                    feasible_renderers: feasible,
                    nearest_device: nearest_device(&scenario.layout, o),
                    localizability_need: (1.0 - o.basic.diffuseness).clamp(0.0, 1.0),
                },
            )
        })
        .collect();
    ContextualInfo {
        high_level: HighLevelInfo {
            intelligibility_deficit: deficit,
            measured_intelligibility: measured,
            noise_delta_db,
            noise_level_db,
            noise_band_levels_db: noise.band_levels_db,
            dominant_listener: listener.listener_id.clone(),
            listener: listener.clone(),
            targets: scene.targets,
            speaker_count: scenario.layout.len(),
            room_decay_tau_s: scenario.environment.room_decay_tau_s.clone(),
            time_s,
        },
        low_level,
    }
}

/// Holds the one piece of state carried between context updates.
#[derive(Debug, Clone, Default)]
pub struct ContextTracker {
    previous_noise_db: Option<f64>,
}

impl ContextTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(
        &mut self,
        scenario: &ReproductionScenario,
        scene: &Scene,
        monitoring: Option<&Monitoring>,
        time_s: f64,
    ) -> ContextualInfo {
        let info = update_context(scenario, scene, monitoring, self.previous_noise_db, time_s);
        if monitoring.is_some() {
            self.previous_noise_db = Some(info.high_level.noise_level_db);
        }
        info
    }
}
