//! Synthetic demo scenes and scenarios.
//!
//! `Basic` is a 10 s scene with on-screen dialogue, a music bed with a
//! distance and a room reverb, and a diffuse ambience, played over a
//! five-speaker ring with a +10 dB noise step at 4 s. `Narrator` adds an
//! off-screen narrator addressed to a phone next to the listener, alongside
//! an on-screen actor.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::adapter::Rulebook;
use crate::context::{parse_scenario, ScenarioFile};
use crate::dsp::{rms, BandFilterBank, DEFAULT_SAMPLE_RATE};
use crate::geometry::Direction3;
use crate::io::{write_mono, WavError};
use crate::router::SelectionTable;
use crate::scene::{
    serialize_scene, AudioObject, BasicMetadata, ObjectType, Reflection, ReverbMetadata, Scene, SceneTargets, Stem,
    TailBand,
};

pub const DEMO_SECONDS: f64 = 10.0;
/// Noise level before the step, per octave band (dBFS).
pub const DEMO_NOISE_DB: f64 = -50.0;
/// Time of the noise step.
pub const DEMO_NOISE_STEP_S: f64 = 4.0;
pub const DEMO_NOISE_STEP_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoKind {
    Basic,
    Narrator,
}

impl std::str::FromStr for DemoKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Self::Basic),
            "narrator" => Ok(Self::Narrator),
            _ => Err(format!("unknown demo '{s}' (expected basic or narrator)")),
        }
    }
}

fn white(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn scale_to_rms(mut x: Vec<f64>, target: f64) -> Vec<f64> {
    let r = rms(&x);
    if r > 0.0 {
        x.iter_mut().for_each(|v| *v *= target / r);
    }
    x
}

/// Noise shaped by per-band weights over the octave filter bank.
fn shaped_noise(rng: &mut ChaCha8Rng, n: usize, fs: f64, weights: &[(usize, f64)]) -> Vec<f64> {
    let bank = BandFilterBank::new(fs);
    let w = white(rng, n);
    let mut out = vec![0.0; n];
    for &(band, g) in weights {
        for (o, v) in out.iter_mut().zip(bank.filter_band(band, &w)) {
            *o += g * v;
        }
    }
    out
}

/// Speech-like signal: speech-band noise with syllable-rate modulation and
/// phrase pauses.
pub fn speech_like(seed: u64, n: usize, fs: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carrier = shaped_noise(&mut rng, n, fs, &[(1, 0.8), (2, 1.0), (3, 1.0), (4, 0.8), (5, 0.5), (6, 0.2)]);
    let syllable_hz = rng.gen_range(3.5..4.5);
    let x: Vec<f64> = carrier
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / fs;
            let syl = (std::f64::consts::PI * syllable_hz * t).sin().abs();
            let phrase = if t % 3.0 < 2.6 { 1.0 } else { 0.0 };
            v * syl * phrase
        })
        .collect();
    scale_to_rms(x, 0.1)
}

/// Harmonic chords changing every 2.5 s.
pub fn music_like(seed: u64, n: usize, fs: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chords: [[f64; 3]; 4] = [[220.0, 277.2, 329.6], [196.0, 246.9, 293.7], [174.6, 220.0, 261.6], [196.0, 246.9, 311.1]];
    let phases: Vec<f64> = (0..64).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let x: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let chord = &chords[((t / 2.5) as usize) % chords.len()];
            let mut s = 0.0;
            for (c, f0) in chord.iter().enumerate() {
                for k in 1..=20 {
                    let f = f0 * k as f64;
                    if f > 10_000.0 {
                        break;
                    }
                    s += (std::f64::consts::TAU * f * t + phases[(c * 20 + k) % 64]).sin() / k as f64;
                }
            }
            s
        })
        .collect();
    scale_to_rms(x, 0.1)
}

/// Gently sloping broadband noise.
pub fn ambience_like(seed: u64, n: usize, fs: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<(usize, f64)> = (0..7).map(|b| (b, 0.8f64.powi(b as i32))).collect();
    scale_to_rms(shaped_noise(&mut rng, n, fs, &weights), 0.1)
}

fn object(id: &str, kind: ObjectType, position: Direction3, level_db: f64, priority: i64, samples: Vec<f64>) -> AudioObject {
    AudioObject::new(
        BasicMetadata {
            object_type: kind,
            id: id.to_string(),
            channels: 1,
            group: None,
            priority,
            level_db,
            position,
            extent_deg: None,
            diffuseness: 0.0,
        },
        vec![Stem {
            path: format!("stems/{id}.wav"),
            samples: Arc::new(samples),
        }],
    )
}

fn music_reverb() -> ReverbMetadata {
    let band = |hz: f64, tau: f64| TailBand {
        band_center_hz: hz,
        onset_ms: 20.0,
        attack_ms: 10.0,
        amplitude_db: -30.0,
        decay_tau_s: tau,
    };
    ReverbMetadata {
        reflections: vec![Reflection {
            direction: Direction3::new(-60.0, 0.0),
            delay_ms: 12.0,
            gain_db: -8.0,
            eq: None,
        }],
        tail_bands: vec![band(500.0, 0.12), band(1000.0, 0.11), band(2000.0, 0.1)],
    }
}

/// The demo scene, deterministic in `seed`.
pub fn demo_scene(kind: DemoKind, seed: u64) -> Scene {
    let fs = DEFAULT_SAMPLE_RATE as f64;
    let n = (DEMO_SECONDS * fs) as usize;
    let mut objects = Vec::new();

    let mut host = object(
        "dlg_host",
        ObjectType::Dialogue,
        Direction3::with_distance(0.0, 0.0, 2.0),
        0.0,
        10,
        speech_like(seed, n, fs),
    );
    host.advanced.onscreen = true;
    host.advanced.importance_to_narrative = 10;
    host.advanced.language = Some("en".into());
    objects.push(host);

    if kind == DemoKind::Narrator {
        let mut narrator = object(
            "dlg_narrator",
            ObjectType::Dialogue,
            Direction3::new(0.0, 0.0),
            0.0,
            9,
            speech_like(seed.wrapping_add(11), n, fs),
        );
        narrator.advanced.target_device = Some("phone".into());
        narrator.advanced.importance_to_narrative = 8;
        objects.push(narrator);
    }

    let mut music = object(
        "music_bed",
        ObjectType::Music,
        Direction3::with_distance(30.0, 0.0, 3.0),
        -4.0,
        5,
        music_like(seed.wrapping_add(1), n, fs),
    );
    music.reverb = Some(music_reverb());
    objects.push(music);

    let mut amb = object(
        "amb_room",
        ObjectType::Ambience,
        Direction3::new(180.0, 0.0),
        -10.0,
        0,
        ambience_like(seed.wrapping_add(2), n, fs),
    );
    amb.basic.diffuseness = 0.7;
    amb.basic.extent_deg = Some(120.0);
    objects.push(amb);

    Scene {
        objects,
        targets: SceneTargets::default(),
        sample_rate: DEFAULT_SAMPLE_RATE,
        duration: n,
    }
}

fn noise_step(t_s: f64, db: f64) -> serde_json::Value {
    json!({ "t_s": t_s, "band_levels_db": vec![db; 7] })
}

/// Scenario document for the demo.
pub fn demo_scenario_json(kind: DemoKind) -> serde_json::Value {
    let timeline = vec![
        noise_step(0.0, DEMO_NOISE_DB),
        noise_step(DEMO_NOISE_STEP_S, DEMO_NOISE_DB + DEMO_NOISE_STEP_DB),
    ];
    let environment = json!({ "room_decay_tau_s": [0.3, 0.28, 0.25, 0.22, 0.2, 0.18, 0.15] });
    match kind {
        DemoKind::Basic => {
            let speaker = |id: &str, az: f64| {
                json!({
                    "speaker_id": id,
                    "position": { "az": az, "dist": 2.0 },
                    "bandwidth_hz": { "low": 40.0, "high": 20000.0 },
                    "latency_ms": 0.0,
                    "connection_kbps": 1411.0,
                    "device_kind": "discrete"
                })
            };
            json!({
                "schema": "scenario v1",
                "layout": { "speakers": [
                    speaker("C", 0.0), speaker("L", 30.0), speaker("R", -30.0),
                    speaker("Ls", 110.0), speaker("Rs", -110.0)
                ]},
                "listeners": [{ "listener_id": "main" }],
                "environment": environment,
                "noise_timeline": timeline,
                "context_interval_s": 2.0
            })
        }
        DemoKind::Narrator => json!({
            "schema": "scenario v1",
            "devices": [
                { "speaker_id": "tv_L", "position": { "az": 30.0, "dist": 2.5 }, "device_kind": "tv" },
                { "speaker_id": "tv_R", "position": { "az": -30.0, "dist": 2.5 }, "device_kind": "tv" },
                { "speaker_id": "sur_L", "position": { "az": 110.0, "dist": 2.0 }, "device_kind": "discrete" },
                { "speaker_id": "sur_R", "position": { "az": -110.0, "dist": 2.0 }, "device_kind": "discrete" },
                { "speaker_id": "phone", "position": { "az": -20.0, "dist": 0.4 }, "device_kind": "phone" }
            ],
            "listeners": [{ "listener_id": "main" }],
            "environment": environment,
            "noise_timeline": timeline,
            "context_interval_s": 2.0
        }),
    }
}

pub fn demo_scenario(kind: DemoKind) -> ScenarioFile {
    parse_scenario(&demo_scenario_json(kind).to_string(), Path::new(".")).expect("demo scenario is valid")
}

/// Files written by [`write_demo`].
#[derive(Debug, Clone, PartialEq)]
pub struct DemoPaths {
    pub scene: PathBuf,
    pub scenario: PathBuf,
    pub rules: PathBuf,
    pub select: PathBuf,
}

/// Writes the scene (with stems), scenario, bundled rulebook and bundled
/// selection table into `dir`.
pub fn write_demo(dir: &Path, kind: DemoKind, seed: u64) -> Result<DemoPaths, WavError> {
    let io_err = |path: &Path, e: std::io::Error| WavError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    std::fs::create_dir_all(dir.join("stems")).map_err(|e| io_err(dir, e))?;
    let scene = demo_scene(kind, seed);
    for o in &scene.objects {
        for s in &o.stems {
            write_mono(&dir.join(&s.path), scene.sample_rate, &s.samples)?;
        }
    }
    let paths = DemoPaths {
        scene: dir.join("scene.json"),
        scenario: dir.join("scenario.json"),
        rules: dir.join("rulebook.json"),
        select: dir.join("selection.json"),
    };
    let scenario = serde_json::to_string_pretty(&demo_scenario_json(kind)).expect("json value") + "\n";
    for (path, text) in [
        (&paths.scene, serialize_scene(&scene)),
        (&paths.scenario, scenario),
        (&paths.rules, Rulebook::builtin_text().to_string()),
        (&paths.select, SelectionTable::builtin_text().to_string()),
    ] {
        std::fs::write(path, text).map_err(|e| io_err(path, e))?;
    }
    Ok(paths)
}
