//! The scenario document: layout (or device list), listeners, environment,
//! noise and an optional noise timeline or microphone recording.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    build_scenario, ContextError, DeviceConfig, DeviceEntry, DeviceError, EnvironmentInfo, ListenerInfo, NoiseState,
    ReproductionScenario, SpeakerLayout,
};
use crate::dsp::BandLevels;
use crate::io::{read_mono, MonoWav, WavError};

pub const SCENARIO_SCHEMA: &str = "scenario v1";
const DEFAULT_INTERVAL_S: f64 = 2.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("context_unit: scenario: {0}")]
    Parse(String),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("context_unit: microphone: {0}")]
    Microphone(#[from] WavError),
    #[error("context_unit: unknown listener '{0}'")]
    UnknownListener(String),
    #[error("context_unit: cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Noise levels that hold from `t_s` until the next step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStep {
    pub t_s: f64,
    pub band_levels_db: BandLevels,
}

fn default_interval() -> f64 {
    DEFAULT_INTERVAL_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<SpeakerLayout>,
    /// Alternative to `layout`: virtual devices, of which the connected ones
    /// form the layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub devices: Option<Vec<DeviceEntry>>,
    pub listeners: Vec<ListenerInfo>,
    #[serde(default)]
    pub environment: EnvironmentInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseState>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise_timeline: Vec<NoiseStep>,
    /// Mono WAV recorded at the listening position, relative to the document.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub microphone: Option<String>,
    #[serde(default = "default_interval")]
    pub context_interval_s: f64,
}

/// A loaded scenario document with its resources resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub layout: SpeakerLayout,
    pub listeners: Vec<ListenerInfo>,
    pub environment: EnvironmentInfo,
    pub noise: NoiseState,
    pub noise_timeline: Vec<NoiseStep>,
    pub microphone: Option<MonoWav>,
    pub context_interval_s: f64,
}

impl ScenarioFile {
    /// Builds the reproduction scenario centred on `listener` (default: the
    /// first listener).
    pub fn scenario(&self, listener: Option<&str>) -> Result<ReproductionScenario, ScenarioError> {
        let mut listeners = self.listeners.clone();
        if let Some(id) = listener {
            let i = listeners
                .iter()
                .position(|l| l.listener_id == id)
                .ok_or_else(|| ScenarioError::UnknownListener(id.to_string()))?;
            let l = listeners.remove(i);
            listeners.insert(0, l);
        }
        Ok(build_scenario(
            self.layout.clone(),
            listeners,
            self.environment.clone(),
            self.noise,
        )?)
    }

    /// Noise in effect at `t_s` according to the timeline, if there is one.
    pub fn scheduled_noise(&self, t_s: f64) -> Option<NoiseState> {
        self.noise_timeline
            .iter()
            .filter(|s| s.t_s <= t_s + 1e-9)
            .next_back()
            .map(|s| NoiseState {
                band_levels_db: s.band_levels_db,
                timestamp_s: t_s,
            })
    }
}

fn invalid(field: &str, reason: &str) -> ScenarioError {
    ScenarioError::Context(ContextError::Invalid {
        field: field.to_string(),
        reason: reason.to_string(),
    })
}

/// Parses a scenario document; relative paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<ScenarioFile, ScenarioError> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if doc.schema != SCENARIO_SCHEMA {
        return Err(invalid("schema", &format!("expected \"{SCENARIO_SCHEMA}\"")));
    }
    let layout = match (doc.layout, doc.devices) {
        (Some(l), None) => l,
        (None, Some(devices)) => DeviceConfig { devices }.layout()?,
        _ => return Err(invalid("layout", "expected exactly one of 'layout' or 'devices'")),
    };
    if !(doc.context_interval_s > 0.0 && doc.context_interval_s.is_finite()) {
        return Err(invalid("context_interval_s", "expected a positive value"));
    }
    if doc.noise_timeline.windows(2).any(|w| w[0].t_s >= w[1].t_s) {
        return Err(invalid("noise_timeline", "steps must be in increasing time order"));
    }
    let microphone = doc
        .microphone
        .map(|p| read_mono(&base_dir.join(p)))
        .transpose()?;
    Ok(ScenarioFile {
        layout,
        listeners: doc.listeners,
        environment: doc.environment,
        noise: doc.noise.unwrap_or_default(),
        noise_timeline: doc.noise_timeline,
        microphone,
        context_interval_s: doc.context_interval_s,
    })
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "schema": "scenario v1",
        "devices": [
            {"speaker_id": "L", "position": {"az": 30, "dist": 2}, "device_kind": "discrete"},
            {"speaker_id": "R", "position": {"az": -30, "dist": 2}, "device_kind": "discrete"},
            {"speaker_id": "P", "position": {"az": 0, "dist": 0.5}, "device_kind": "phone", "connected": false}
        ],
        "listeners": [{"listener_id": "a"}, {"listener_id": "b", "team_preference": "home"}],
        "noise_timeline": [
            {"t_s": 0, "band_levels_db": [-50, -50, -50, -50, -50, -50, -50]},
            {"t_s": 4, "band_levels_db": [-40, -40, -40, -40, -40, -40, -40]}
        ]
    }"#;

    #[test]
    fn devices_and_timeline() {
        let f = parse_scenario(DOC, Path::new(".")).unwrap();
        assert_eq!(f.layout.len(), 2);
        assert_eq!(f.context_interval_s, 2.0);
        assert_eq!(f.scheduled_noise(3.9).unwrap().band_levels_db[0], -50.0);
        assert_eq!(f.scheduled_noise(4.0).unwrap().band_levels_db[0], -40.0);
    }

    #[test]
    fn listener_selection_reorders() {
        let f = parse_scenario(DOC, Path::new(".")).unwrap();
        let sc = f.scenario(Some("b")).unwrap();
        assert_eq!(sc.dominant_listener().listener_id, "b");
        assert!(matches!(f.scenario(Some("zz")), Err(ScenarioError::UnknownListener(_))));
    }

    #[test]
    fn wrong_schema_rejected() {
        let text = DOC.replace("scenario v1", "scenario v9");
        assert!(parse_scenario(&text, Path::new(".")).is_err());
    }
}
