//! Fixtures and independent reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use objrender::context::{
    build_scenario, update_context, Bandwidth, ContextualInfo, DeviceKind, EnvironmentInfo, ListenerInfo,
    LoudspeakerDescriptor, NoiseState, ReproductionScenario, SpeakerLayout,
};
use objrender::geometry::Direction3;
use objrender::scene::{AudioObject, BasicMetadata, ObjectType, Scene, SceneTargets, Stem};

pub const FS: f64 = 48_000.0;
pub const CENTERS: [f64; 7] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];

pub fn white(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn scaled(x: Vec<f64>, rms: f64) -> Vec<f64> {
    let r = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    x.into_iter().map(|v| v * rms / r).collect()
}

pub fn fft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub fn ifft_real(spec: &[Complex64]) -> Vec<f64> {
    let mut buf = spec.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let n = buf.len() as f64;
    buf.iter().map(|c| c.re / n).collect()
}

/// Mean-square power of `x` falling in `[lo, hi)` Hz, by Parseval.
pub fn fft_power(x: &[f64], lo: f64, hi: f64) -> f64 {
    let n = x.len();
    let spec = fft(x);
    let mut p = 0.0;
    for (k, c) in spec.iter().enumerate().take(n / 2 + 1).skip(1) {
        let f = k as f64 * FS / n as f64;
        if f >= lo && f < hi {
            let w = if 2 * k == n { 1.0 } else { 2.0 };
            p += w * c.norm_sqr();
        }
    }
    p / (n as f64 * n as f64)
}

/// Octave-band levels in dB from FFT bins between the band edges.
pub fn fft_band_levels(x: &[f64]) -> [f64; 7] {
    CENTERS.map(|fc| 10.0 * fft_power(x, fc / 2f64.sqrt(), fc * 2f64.sqrt()).max(1e-12).log10())
}

/// White noise with every bin outside `[lo, hi]` removed.
pub fn band_limited_noise(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut spec = fft(&white(seed, n));
    for (k, c) in spec.iter_mut().enumerate() {
        let kk = k.min(n - k);
        let f = kk as f64 * FS / n as f64;
        if f < lo || f > hi {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    ifft_real(&spec)
}

/// Proxy intelligibility from band levels: the mean over bands of the band
/// SNR mapped linearly from [-15, 15] dB onto [0, 1].
pub fn proxy_score(dialogue_db: &[f64; 7], masker_db: &[f64; 7]) -> f64 {
    dialogue_db
        .iter()
        .zip(masker_db)
        .map(|(d, m)| ((d - m + 15.0) / 30.0).clamp(0.0, 1.0))
        .sum::<f64>()
        / 7.0
}

pub fn object(id: &str, kind: ObjectType, position: Direction3, samples: Vec<f64>) -> AudioObject {
    AudioObject::new(
        BasicMetadata {
            object_type: kind,
            id: id.to_string(),
            channels: 1,
            group: None,
            priority: 5,
            level_db: 0.0,
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

pub fn scene(objects: Vec<AudioObject>) -> Scene {
    let duration = objects.iter().map(AudioObject::len).max().unwrap_or(0);
    Scene {
        objects,
        targets: SceneTargets::default(),
        sample_rate: FS as u32,
        duration,
    }
}

pub fn speaker(id: &str, az: f64, dist: f64, kind: DeviceKind, low_hz: f64) -> LoudspeakerDescriptor {
    LoudspeakerDescriptor {
        speaker_id: id.to_string(),
        position: Direction3::with_distance(az, 0.0, dist),
        orientation: 0.0,
        bandwidth_hz: Bandwidth {
            low: low_hz,
            high: 20_000.0,
        },
        latency_ms: 0.0,
        connection_kbps: 1411.0,
        device_kind: kind,
    }
}

/// Full-range speakers at the given azimuths, all `dist` metres away.
pub fn ring(azimuths: &[f64], dist: f64) -> SpeakerLayout {
    SpeakerLayout {
        speakers: azimuths
            .iter()
            .enumerate()
            .map(|(i, &az)| speaker(&format!("S{i}"), az, dist, DeviceKind::Discrete, 40.0))
            .collect(),
    }
}

pub fn regular_ring(n: usize, dist: f64) -> SpeakerLayout {
    let az: Vec<f64> = (0..n).map(|i| wrap(360.0 * i as f64 / n as f64)).collect();
    ring(&az, dist)
}

pub fn five_ring() -> SpeakerLayout {
    ring(&[0.0, 30.0, -30.0, 110.0, -110.0], 2.0)
}

/// Wraps into (-180, 180].
pub fn wrap(d: f64) -> f64 {
    let w = d.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

pub fn scenario(layout: SpeakerLayout) -> ReproductionScenario {
    build_scenario(
        layout,
        vec![ListenerInfo::new("main")],
        EnvironmentInfo::default(),
        NoiseState::silent(),
    )
    .expect("valid scenario")
}

pub fn noise_state(per_band_db: f64) -> NoiseState {
    NoiseState {
        band_levels_db: [per_band_db; 7],
        timestamp_s: 0.0,
    }
}

/// Context without monitoring, with the deficit forced to `deficit`.
pub fn context_with_deficit(sc: &ReproductionScenario, s: &Scene, deficit: f64) -> ContextualInfo {
    let mut ctx = update_context(sc, s, None, None, 0.0);
    ctx.high_level.intelligibility_deficit = deficit;
    ctx
}
