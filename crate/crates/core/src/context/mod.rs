//! Context unit: reproduction scenario (speakers, listeners, room, noise),
//! microphone monitoring and the contextual information handed to the
//! adapter and the router.

mod devices;
mod document;
mod monitor;
mod tracker;

pub use devices::{enumerate_devices, parse_device_config, DeviceConfig, DeviceEntry, DeviceError, KindDefaults};
pub use document::{load_scenario, parse_scenario, NoiseStep, ScenarioDoc, ScenarioError, ScenarioFile, SCENARIO_SCHEMA};
pub use monitor::{estimate_intelligibility, estimate_noise_level, intelligibility_from_levels};
pub use tracker::{update_context, ContextTracker, ContextualInfo, HighLevelInfo, Monitoring, ObjectContext};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsp::{BandLevels, LEVEL_FLOOR_DB, NUM_BANDS};
use crate::geometry::{Direction3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("context_unit: layout has no speakers")]
    EmptyLayout,
    #[error("context_unit: scenario has no listener")]
    NoListener,
    #[error("context_unit: {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("context_unit: {0}")]
    Dsp(#[from] crate::dsp::DspError),
}

impl ContextError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Discrete,
    Tv,
    Phone,
    Tablet,
    Laptop,
    Soundbar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bandwidth {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoudspeakerDescriptor {
    pub speaker_id: String,
    /// Relative to the layout origin; the distance is required.
    pub position: Direction3,
    /// Facing azimuth in degrees.
    #[serde(default)]
    pub orientation: f64,
    pub bandwidth_hz: Bandwidth,
    #[serde(default)]
    pub latency_ms: f64,
    pub connection_kbps: f64,
    pub device_kind: DeviceKind,
}

/// Speakers positioned relative to the reference listening point (origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerLayout {
    pub speakers: Vec<LoudspeakerDescriptor>,
}

impl SpeakerLayout {
    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    pub fn directions(&self) -> Vec<Direction3> {
        self.speakers.iter().map(|s| s.position).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.speakers.iter().position(|s| s.speaker_id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.speakers.iter().map(|s| s.speaker_id.clone()).collect()
    }

    /// Every broken layout invariant, as `(field, reason)` pairs.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (i, s) in self.speakers.iter().enumerate() {
            let f = |name: &str| format!("layout.speakers[{i}].{name}");
            if !seen.insert(s.speaker_id.as_str()) {
                out.push((f("speaker_id"), format!("duplicate id '{}'", s.speaker_id)));
            }
            for (field, reason) in s.position.violations() {
                out.push((f(field), reason));
            }
            match s.position.distance_m {
                Some(d) if d > 0.0 => {}
                _ => out.push((f("position.dist"), "speaker distance is required and must be > 0".into())),
            }
            let b = s.bandwidth_hz;
            if !(b.low >= 0.0 && b.low < b.high && b.high.is_finite()) {
                out.push((f("bandwidth_hz"), "expected 0 <= low < high".into()));
            }
            if !(s.latency_ms >= 0.0 && s.latency_ms.is_finite()) {
                out.push((f("latency_ms"), "expected a finite value >= 0".into()));
            }
            if !(s.connection_kbps > 0.0) {
                out.push((f("connection_kbps"), "expected > 0".into()));
            }
        }
        out
    }
}

fn default_preference() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListenerInfo {
    pub listener_id: String,
    /// Relative to the origin; no distance means at the origin.
    #[serde(default = "origin")]
    pub position: Direction3,
    #[serde(default)]
    pub preferred_language: Option<String>,
    #[serde(default)]
    pub hearing_impaired: bool,
    #[serde(default = "default_preference")]
    pub intelligibility_preference: f64,
    #[serde(default = "default_preference")]
    pub envelopment_preference: f64,
    #[serde(default)]
    pub team_preference: Option<String>,
}

fn origin() -> Direction3 {
    Direction3::with_distance(0.0, 0.0, 0.0)
}

impl ListenerInfo {
    pub fn new(listener_id: impl Into<String>) -> Self {
        Self {
            listener_id: listener_id.into(),
            position: origin(),
            preferred_language: None,
            hearing_impaired: false,
            intelligibility_preference: default_preference(),
            envelopment_preference: default_preference(),
            team_preference: None,
        }
    }

    pub fn location(&self) -> Vec3 {
        self.position.position().unwrap_or(Vec3::ZERO)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDims {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artefact {
    pub name: String,
    pub position: Direction3,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentInfo {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub room_dims_m: Option<RoomDims>,
    /// One decay constant per octave band (125 Hz to 8 kHz).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub room_decay_tau_s: Option<Vec<f64>>,
    pub artefacts: Vec<Artefact>,
}

/// Octave-band noise levels (dB re full scale) at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseState {
    pub band_levels_db: BandLevels,
    #[serde(default)]
    pub timestamp_s: f64,
}

impl NoiseState {
    pub fn silent() -> Self {
        Self {
            band_levels_db: [LEVEL_FLOOR_DB; NUM_BANDS],
            timestamp_s: 0.0,
        }
    }

    /// Power sum over bands in dB.
    pub fn broadband_db(&self) -> f64 {
        crate::dsp::band_power_sum_db(&self.band_levels_db)
    }
}

impl Default for NoiseState {
    fn default() -> Self {
        Self::silent()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionScenario {
    /// Listener-relative speaker positions.
    pub layout: SpeakerLayout,
    pub listeners: Vec<ListenerInfo>,
    pub environment: EnvironmentInfo,
    pub noise: NoiseState,
}

impl ReproductionScenario {
    /// The first listener.
    pub fn dominant_listener(&self) -> &ListenerInfo {
        &self.listeners[0]
    }

    pub fn listener(&self, id: &str) -> Option<&ListenerInfo> {
        self.listeners.iter().find(|l| l.listener_id == id)
    }
}

fn shift(d: &Direction3, by: Vec3) -> Option<Direction3> {
    let p = d.position()?;
    Direction3::from_position(p.sub(&by))
}

/// Validates inputs and re-expresses every position relative to the first
/// listener.
pub fn build_scenario(
    layout: SpeakerLayout,
    listeners: Vec<ListenerInfo>,
    environment: EnvironmentInfo,
    noise: NoiseState,
) -> Result<ReproductionScenario, ContextError> {
    if layout.is_empty() {
        return Err(ContextError::EmptyLayout);
    }
    if listeners.is_empty() {
        return Err(ContextError::NoListener);
    }
    if let Some((field, reason)) = layout.violations().into_iter().next() {
        return Err(ContextError::invalid(field, reason));
    }
    let mut ids = HashSet::new();
    for (i, l) in listeners.iter().enumerate() {
        if !ids.insert(l.listener_id.as_str()) {
            return Err(ContextError::invalid(format!("listeners[{i}].listener_id"), "duplicate id"));
        }
        for (name, v) in [
            ("intelligibility_preference", l.intelligibility_preference),
            ("envelopment_preference", l.envelopment_preference),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ContextError::invalid(format!("listeners[{i}].{name}"), "expected value in [0, 1]"));
            }
        }
    }
    if let Some(d) = environment.room_dims_m {
        if !(d.x > 0.0 && d.y > 0.0 && d.z > 0.0) {
            return Err(ContextError::invalid("environment.room_dims_m", "expected positive dimensions"));
        }
    }
    if let Some(taus) = &environment.room_decay_tau_s {
        if taus.len() != NUM_BANDS || taus.iter().any(|t| !(*t > 0.0)) {
            return Err(ContextError::invalid(
                "environment.room_decay_tau_s",
                format!("expected {NUM_BANDS} positive values"),
            ));
        }
    }
    if noise.band_levels_db.iter().any(|v| !v.is_finite()) {
        return Err(ContextError::invalid("noise.band_levels_db", "expected finite values"));
    }

    let offset = listeners[0].location();
    if offset == Vec3::ZERO {
        return Ok(ReproductionScenario {
            layout,
            listeners,
            environment,
            noise,
        });
    }
    let mut layout = layout;
    for (i, s) in layout.speakers.iter_mut().enumerate() {
        s.position = shift(&s.position, offset).ok_or_else(|| {
            ContextError::invalid(format!("layout.speakers[{i}].position"), "speaker coincides with the listener")
        })?;
    }
    let mut listeners = listeners;
    for l in listeners.iter_mut() {
        let p = l.location().sub(&offset);
        l.position = Direction3::from_position(p).unwrap_or_else(origin);
    }
    let mut environment = environment;
    for a in environment.artefacts.iter_mut() {
        if let Some(p) = shift(&a.position, offset) {
            a.position = p;
        }
    }
    Ok(ReproductionScenario {
        layout,
        listeners,
        environment,
        noise,
    })
}
