//! Voices: the signals the engine renders for each object (direct sound,
//! early reflections and late tail) with their renderer and speakers.

use std::collections::HashMap;
use std::sync::Arc;

use crate::dsp::{
    apply_directives, db_to_gain, render_tail, time_shift, BandFilterBank, FirFilter, BAND_CENTERS_HZ, NUM_BANDS,
};
use crate::geometry::Direction3;
use crate::renderers::{driving_function, DrivingFunction, RenderParams, DEFAULT_BETA};
use crate::router::{RendererAssignment, RendererClass};
use crate::scene::{AudioObject, Reflection, TailBand};

/// Longest synthesized reverb tail, in seconds.
const MAX_TAIL_S: f64 = 8.0;
/// Amplitude decay, in time constants, after which a tail is cut (-60 dB).
const TAIL_DECAY_CONSTANTS: f64 = 6.91;

pub(crate) struct VoiceSpec {
    /// Unique per voice and stable across intervals.
    pub key: String,
    /// Index of the owning object in the input scene.
    pub owner: usize,
    pub signal: Arc<Vec<f64>>,
    pub signal_key: String,
    pub class: RendererClass,
    pub drive: DrivingFunction,
    pub channels: Vec<usize>,
    pub gain: f64,
}

/// A renderer that failed and the class used instead.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Fallback {
    pub voice: String,
    pub requested: RendererClass,
    pub used: RendererClass,
    pub error: String,
}

/// Caches processed signals and driving functions across intervals.
pub(crate) struct VoiceBuilder {
    pub sample_rate: f64,
    pub duration: usize,
    pub seed: u64,
    signals: HashMap<String, Arc<Vec<f64>>>,
    drives: HashMap<String, Result<DrivingFunction, String>>,
}

fn nearest_octave(hz: f64) -> usize {
    BAND_CENTERS_HZ
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.ln() - hz.ln()).abs().total_cmp(&(b.1.ln() - hz.ln()).abs()))
        .map_or(0, |(i, _)| i)
}

/// Impulse response of a reverb tail built from its band descriptions.
pub fn tail_impulse_response(bands: &[TailBand], sample_rate: f64, seed: u64) -> Vec<f64> {
    let secs = bands
        .iter()
        .map(|b| (b.onset_ms + b.attack_ms) * 1e-3 + TAIL_DECAY_CONSTANTS * b.decay_tau_s)
        .fold(0.0, f64::max)
        .min(MAX_TAIL_S);
    let len = (secs * sample_rate).ceil() as usize + 1;
    let mut ir = vec![0.0; len];
    for (i, b) in bands.iter().enumerate() {
        let part = render_tail(
            b.onset_ms * 1e-3,
            b.attack_ms * 1e-3,
            b.amplitude_db,
            b.decay_tau_s,
            Some(nearest_octave(b.band_center_hz)),
            sample_rate,
            len,
            seed.wrapping_add(i as u64),
        );
        for (o, v) in ir.iter_mut().zip(part) {
            *o += v;
        }
    }
    ir
}

fn fit(mut x: Vec<f64>, len: usize) -> Vec<f64> {
    x.resize(len, 0.0);
    x
}

impl VoiceBuilder {
    pub fn new(sample_rate: f64, duration: usize, seed: u64) -> Self {
        Self {
            sample_rate,
            duration,
            seed,
            signals: HashMap::new(),
            drives: HashMap::new(),
        }
    }

    /// The object's mono signal with its pending directives applied.
    fn direct_signal(&mut self, owner: usize, o: &AudioObject) -> (Arc<Vec<f64>>, String) {
        let key = format!("{}|{:?}", o.id(), o.directives);
        if let Some(s) = self.signals.get(&key) {
            return (s.clone(), key);
        }
        let fs = self.sample_rate;
        let seed = self.seed.wrapping_add(1000 * owner as u64);
        let mut mix = vec![0.0; self.duration];
        if !o.stems.is_empty() {
            let w = 1.0 / o.stems.len() as f64;
            for (i, s) in o.stems.iter().enumerate() {
                let y = apply_directives(&s.samples, &o.directives, fs, seed.wrapping_add(i as u64));
                for (m, v) in mix.iter_mut().zip(y) {
                    *m += w * v;
                }
            }
        }
        let s = Arc::new(mix);
        self.signals.insert(key.clone(), s.clone());
        (s, key)
    }

    fn tail_signal(&mut self, owner: usize, o: &AudioObject, bands: &[TailBand]) -> (Arc<Vec<f64>>, String) {
        let (direct, dkey) = self.direct_signal(owner, o);
        let key = format!("{dkey}|tail|{bands:?}");
        if let Some(s) = self.signals.get(&key) {
            return (s.clone(), key);
        }
        let ir = tail_impulse_response(bands, self.sample_rate, self.seed.wrapping_add(7919 * (owner as u64 + 1)));
        let mut wet = vec![0.0; direct.len()];
        FirFilter::new(ir).process(&direct, &mut wet);
        let s = Arc::new(wet);
        self.signals.insert(key.clone(), s.clone());
        (s, key)
    }

    fn reflection_signal(&mut self, owner: usize, o: &AudioObject, r: &Reflection) -> (Arc<Vec<f64>>, String) {
        let (direct, dkey) = self.direct_signal(owner, o);
        let key = format!("{dkey}|refl|{}|{:?}", r.delay_ms, r.eq);
        if let Some(s) = self.signals.get(&key) {
            return (s.clone(), key);
        }
        let mut y = time_shift(&direct, r.delay_ms, self.sample_rate);
        if let Some(eq) = &r.eq {
            // x + sum_b (g_b - 1) * band_b(x)
            let bank = BandFilterBank::new(self.sample_rate);
            let dry = y.clone();
            for (b, db) in eq.iter().enumerate().take(NUM_BANDS) {
                let w = db_to_gain(*db) - 1.0;
                if w != 0.0 {
                    for (o, v) in y.iter_mut().zip(bank.filter_band(b, &dry)) {
                        *o += w * v;
                    }
                }
            }
        }
        let s = Arc::new(fit(y, self.duration));
        self.signals.insert(key.clone(), s.clone());
        (s, key)
    }

    /// Driving function for `class`, falling back to AP1 when the renderer
    /// rejects the configuration.
    fn drive(
        &mut self,
        voice: &str,
        class: RendererClass,
        position: &Direction3,
        dirs: &[Direction3],
        beta: f64,
        fallbacks: &mut Vec<Fallback>,
    ) -> (RendererClass, DrivingFunction) {
        let key = format!("{class}|{position:?}|{dirs:?}|{beta}");
        let params = RenderParams {
            beta,
            sample_rate: self.sample_rate,
        };
        let got = self
            .drives
            .entry(key)
            .or_insert_with(|| driving_function(class, position, dirs, &params).map_err(|e| e.to_string()))
            .clone();
        match got {
            Ok(d) => (class, d),
            Err(error) => {
                fallbacks.push(Fallback {
                    voice: voice.to_string(),
                    requested: class,
                    used: RendererClass::Ap1Nearest,
                    error,
                });
                let d = driving_function(RendererClass::Ap1Nearest, position, dirs, &params)
                    .expect("AP1 accepts any non-empty subset");
                (RendererClass::Ap1Nearest, d)
            }
        }
    }

    /// Voices of one object under its assignment. `layout_dirs` are the
    /// listener-relative speaker directions; `usable` the speakers able to
    /// carry the object.
    pub fn voices(
        &mut self,
        owner: usize,
        o: &AudioObject,
        a: &RendererAssignment,
        subset: &[usize],
        layout_dirs: &[Direction3],
        usable: &[usize],
        fallbacks: &mut Vec<Fallback>,
    ) -> Vec<VoiceSpec> {
        let mut out = Vec::new();
        let gain = db_to_gain(o.basic.level_db);
        let dirs: Vec<Direction3> = subset.iter().map(|&i| layout_dirs[i]).collect();
        let beta = a.params.beta.unwrap_or(DEFAULT_BETA);
        if subset.is_empty() {
            return out;
        }
        let (signal, signal_key) = self.direct_signal(owner, o);
        let (class, drive) = self.drive(o.id(), a.renderer, &o.basic.position, &dirs, beta, fallbacks);
        out.push(VoiceSpec {
            key: o.id().to_string(),
            owner,
            signal,
            signal_key,
            class,
            drive,
            channels: subset.to_vec(),
            gain,
        });

        let Some(reverb) = &o.reverb else { return out };
        let all_dirs: Vec<Direction3> = usable.iter().map(|&i| layout_dirs[i]).collect();
        for (k, r) in reverb.reflections.iter().enumerate() {
            let key = format!("{}#reflection{k}", o.id());
            let (signal, signal_key) = self.reflection_signal(owner, o, r);
            let (class, drive) = self.drive(&key, RendererClass::Ap1Nearest, &r.direction, &all_dirs, beta, fallbacks);
            out.push(VoiceSpec {
                key,
                owner,
                signal,
                signal_key,
                class,
                drive,
                channels: usable.to_vec(),
                gain: gain * db_to_gain(r.gain_db),
            });
        }
        if !reverb.tail_bands.is_empty() {
            let key = format!("{}#tail", o.id());
            let (signal, signal_key) = self.tail_signal(owner, o, &reverb.tail_bands);
            let class = if usable.len() >= 2 {
                RendererClass::Diffuse
            } else {
                RendererClass::Ap1Nearest
            };
            let (class, drive) = self.drive(&key, class, &o.basic.position, &all_dirs, beta, fallbacks);
            out.push(VoiceSpec {
                key,
                owner,
                signal,
                signal_key,
                class,
                drive,
                channels: usable.to_vec(),
                gain,
            });
        }
        out
    }
}
