//! Static device manager: a config of virtual devices, filtered to the
//! connected ones, with per-kind capability defaults.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Bandwidth, DeviceKind, LoudspeakerDescriptor, SpeakerLayout};
use crate::geometry::Direction3;

const KIND_DEFAULTS: &str = include_str!("../../data/device_kinds.json");

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("cli_io: duplicate device id '{0}'")]
    DuplicateDeviceId(String),
    #[error("cli_io: device config: {0}")]
    Parse(String),
    #[error("cli_io: cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Capabilities filled in when a device entry omits them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindDefaults {
    pub bandwidth_hz: Bandwidth,
    pub latency_ms: f64,
    pub connection_kbps: f64,
}

impl KindDefaults {
    pub fn table() -> BTreeMap<DeviceKind, KindDefaults> {
        let raw: BTreeMap<String, KindDefaults> = serde_json::from_str(KIND_DEFAULTS).expect("bundled table parses");
        raw.into_iter()
            .map(|(k, v)| {
                let kind: DeviceKind = serde_json::from_value(serde_json::Value::String(k)).expect("known kind");
                (kind, v)
            })
            .collect()
    }

    pub fn for_kind(kind: DeviceKind) -> KindDefaults {
        Self::table()[&kind]
    }
}

fn connected_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub speaker_id: String,
    pub position: Direction3,
    pub device_kind: DeviceKind,
    #[serde(default = "connected_default")]
    pub connected: bool,
    #[serde(default)]
    pub orientation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<Bandwidth>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection_kbps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub devices: Vec<DeviceEntry>,
}

impl DeviceConfig {
    /// Layout of the connected devices, in config order.
    pub fn layout(&self) -> Result<SpeakerLayout, DeviceError> {
        let mut seen = HashSet::new();
        for d in &self.devices {
            if !seen.insert(d.speaker_id.as_str()) {
                return Err(DeviceError::DuplicateDeviceId(d.speaker_id.clone()));
            }
        }
        let table = KindDefaults::table();
        let speakers = self
            .devices
            .iter()
            .filter(|d| d.connected)
            .map(|d| {
                let def = table[&d.device_kind];
                LoudspeakerDescriptor {
                    speaker_id: d.speaker_id.clone(),
                    position: d.position,
                    orientation: d.orientation,
                    bandwidth_hz: d.bandwidth_hz.unwrap_or(def.bandwidth_hz),
                    latency_ms: d.latency_ms.unwrap_or(def.latency_ms),
                    connection_kbps: d.connection_kbps.unwrap_or(def.connection_kbps),
                    device_kind: d.device_kind,
                }
            })
            .collect();
        Ok(SpeakerLayout { speakers })
    }
}

pub fn parse_device_config(text: &str) -> Result<DeviceConfig, DeviceError> {
    serde_json::from_str(text).map_err(|e| DeviceError::Parse(e.to_string()))
}

/// Reads a device config file and assembles the layout of connected devices.
pub fn enumerate_devices(path: &Path) -> Result<SpeakerLayout, DeviceError> {
    let text = std::fs::read_to_string(path).map_err(|source| DeviceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_device_config(&text)?.layout()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, kind: &str, connected: bool) -> String {
        format!(
            r#"{{"speaker_id":"{id}","position":{{"az":0,"dist":2}},"device_kind":"{kind}","connected":{connected}}}"#
        )
    }

    #[test]
    fn disconnected_devices_are_excluded() {
        let entries: Vec<String> = ["a", "b", "c", "d"]
            .iter()
            .map(|id| entry(id, "discrete", true))
            .chain([entry("e", "tv", false)])
            .collect();
        let cfg = parse_device_config(&format!(r#"{{"devices":[{}]}}"#, entries.join(","))).unwrap();
        assert_eq!(cfg.layout().unwrap().len(), 4);
    }

    #[test]
    fn phone_defaults_fill_bandwidth() {
        let cfg = parse_device_config(&format!(r#"{{"devices":[{}]}}"#, entry("p", "phone", true))).unwrap();
        let l = cfg.layout().unwrap();
        assert_eq!(l.speakers[0].bandwidth_hz, Bandwidth { low: 300.0, high: 8000.0 });
    }

    #[test]
    fn duplicate_ids_rejected() {
        let cfg = parse_device_config(&format!(
            r#"{{"devices":[{},{}]}}"#,
            entry("p", "phone", true),
            entry("p", "tv", false)
        ))
        .unwrap();
        assert!(matches!(cfg.layout(), Err(DeviceError::DuplicateDeviceId(id)) if id == "p"));
    }

    #[test]
    fn every_kind_has_defaults() {
        assert_eq!(KindDefaults::table().len(), 6);
    }
}
