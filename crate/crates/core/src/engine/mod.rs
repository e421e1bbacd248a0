//! The block-based rendering pipeline.
//!
//! Every context interval the engine measures the scenario, adapts the scene
//! (always starting from the input scene), routes every object and rebuilds
//! its voices. Voices whose renderer class changes are crossfaded over the
//! crossfade duration; any other change of drive or signal is crossfaded over
//! one block. Output channels follow the layout order and are aligned for
//! speaker latency at the end.

mod lanes;
mod voices;

pub use lanes::fade_weights;
pub use voices::{tail_impulse_response, Fallback};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::adapter::{apply_rules, AdaptationReport, AdapterError, Rulebook};
use crate::context::{
    estimate_noise_level, intelligibility_from_levels, update_context, ContextualInfo, Monitoring, NoiseState,
    ScenarioError, ScenarioFile,
};
use crate::dsp::{power_to_db, BandFilterBank, DEFAULT_BLOCK_SIZE, MIN_ANALYSIS_LEN, NUM_BANDS};
use crate::fields::is_dialogue;
use crate::router::{route, usable_speakers, CrossfadeSchedule, RendererAssignment, SelectionTable, DEFAULT_CROSSFADE_S};
use crate::scene::Scene;
use lanes::{Lane, Track};
use voices::VoiceBuilder;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    pub block_size: usize,
    pub crossfade_s: f64,
    pub seed: u64,
    /// Listener the scenario is centred on; the first listener by default.
    pub listener: Option<String>,
    /// Also return each object's own contribution to the output.
    pub capture_objects: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            block_size: DEFAULT_BLOCK_SIZE,
            crossfade_s: DEFAULT_CROSSFADE_S,
            seed: DEFAULT_SEED,
            listener: None,
            capture_objects: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("engine: {field}: {reason}")]
    Options { field: &'static str, reason: String },
}

/// What happened in one context interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRecord {
    pub t_s: f64,
    pub end_s: f64,
    pub noise_db: f64,
    pub measured_intelligibility: Option<f64>,
    pub deficit: f64,
    pub assignments: Vec<RendererAssignment>,
    pub crossfades: Vec<CrossfadeSchedule>,
    pub adaptation: AdaptationReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fallbacks: Vec<Fallback>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSample {
    pub t_s: f64,
    pub metric: String,
    pub value: f64,
}

/// One object's share of the output (direct sound plus its reverb).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectRender {
    pub object_id: String,
    pub dialogue: bool,
    pub channels: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    pub sample_rate: u32,
    /// One per speaker, in layout order.
    pub channels: Vec<Vec<f64>>,
    pub speaker_ids: Vec<String>,
    pub intervals: Vec<IntervalRecord>,
    pub metrics: Vec<MetricSample>,
    /// Filled when [`EngineOptions::capture_objects`] is set.
    pub objects: Vec<ObjectRender>,
}

/// Per-object mono signals of the input scene, level applied, used for
/// intelligibility measurement.
struct Monitor {
    bank: BandFilterBank,
    signals: Vec<(bool, Vec<f64>)>,
}

impl Monitor {
    fn new(scene: &Scene) -> Self {
        Self {
            bank: BandFilterBank::new(scene.sample_rate as f64),
            signals: scene
                .objects
                .iter()
                .map(|o| {
                    let g = crate::dsp::db_to_gain(o.basic.level_db);
                    (is_dialogue(o), o.mono().into_iter().map(|v| v * g).collect())
                })
                .collect(),
        }
    }

    /// Proxy intelligibility of the unadapted mix over `[a, b)` against the
    /// given noise. Windows without dialogue score 1.
    fn intelligibility(&self, a: usize, b: usize, noise: &NoiseState) -> f64 {
        let mut dlg = [0.0; NUM_BANDS];
        let mut msk = noise.band_levels_db.map(|l| if l > crate::dsp::LEVEL_FLOOR_DB { 10f64.powf(l / 10.0) } else { 0.0 });
        for (dialogue, x) in &self.signals {
            let end = b.min(x.len());
            if a >= end {
                continue;
            }
            let p = self.bank.band_powers(&x[a..end]);
            let scale = (end - a) as f64 / (b - a) as f64;
            let target = if *dialogue { &mut dlg } else { &mut msk };
            for (t, v) in target.iter_mut().zip(p) {
                *t += v * scale;
            }
        }
        if dlg.iter().all(|p| *p <= 0.0) {
            return 1.0;
        }
        intelligibility_from_levels(&dlg.map(power_to_db), &msk.map(power_to_db))
    }
}

/// Noise for the interval starting at sample `a`: from the microphone when
/// there is one, else from the noise timeline.
fn monitored_noise(file: &ScenarioFile, a: usize, b: usize, fs: f64) -> Option<NoiseState> {
    let t = a as f64 / fs;
    if let Some(mic) = &file.microphone {
        let end = b.min(mic.samples.len());
        let start = end.saturating_sub((b - a).max(MIN_ANALYSIS_LEN));
        return estimate_noise_level(&mic.samples[start..end], fs).ok().map(|mut n| {
            n.timestamp_s = t;
            n
        });
    }
    file.scheduled_noise(t)
}

fn validate(opts: &EngineOptions, scene: &Scene) -> Result<(), EngineError> {
    if opts.block_size == 0 {
        return Err(EngineError::Options {
            field: "block_size",
            reason: "must be > 0".into(),
        });
    }
    if !(opts.crossfade_s > 0.0 && opts.crossfade_s.is_finite()) {
        return Err(EngineError::Options {
            field: "crossfade_s",
            reason: format!("must be > 0 (got {})", opts.crossfade_s),
        });
    }
    if scene.sample_rate == 0 {
        return Err(EngineError::Options {
            field: "sample_rate",
            reason: "must be > 0".into(),
        });
    }
    Ok(())
}

/// Renders `scene` for the scenario. Deterministic for fixed inputs and seed.
pub fn render(
    scene: &Scene,
    file: &ScenarioFile,
    rulebook: &Rulebook,
    table: &SelectionTable,
    opts: &EngineOptions,
) -> Result<EngineOutput, EngineError> {
    validate(opts, scene)?;
    let scenario = file.scenario(opts.listener.as_deref())?;
    let layout = &scenario.layout;
    let fs = scene.sample_rate as f64;
    let n_ch = layout.len();
    let duration = scene.duration;
    let block = opts.block_size;
    let interval = ((file.context_interval_s * fs).round() as usize).max(1);
    let xfade = ((opts.crossfade_s.min(file.context_interval_s) * fs).round() as usize).max(1);
    let dirs = layout.directions();

    let monitor = Monitor::new(scene);
    let mut builder = VoiceBuilder::new(fs, duration, opts.seed);
    let mut tracks: BTreeMap<String, (usize, Track)> = BTreeMap::new();
    let mut mix = vec![vec![0.0; duration]; n_ch];
    let mut captured: Vec<Vec<Vec<f64>>> = if opts.capture_objects {
        vec![vec![vec![0.0; duration]; n_ch]; scene.objects.len()]
    } else {
        vec![]
    };
    let mut intervals = Vec::new();
    let mut previous: Vec<RendererAssignment> = Vec::new();
    let mut previous_noise_db: Option<f64> = None;
    let mut next_update = 0usize;
    let mut scratch = vec![vec![0.0; block]; n_ch];

    let mut start = 0usize;
    while start < duration {
        if start >= next_update {
            let end = (start + interval).min(duration);
            let noise = monitored_noise(file, start, end, fs);
            let monitoring = noise.map(|n| Monitoring {
                noise: n,
                intelligibility: monitor.intelligibility(start, end, &n),
            });
            let t = start as f64 / fs;
            let ctx = update_context(&scenario, scene, monitoring.as_ref(), previous_noise_db, t);
            let (adapted, report) = apply_rules(scene, &ctx, rulebook)?;
            let routing_ctx = ContextualInfo {
                high_level: ctx.high_level.clone(),
                low_level: update_context(&scenario, &adapted, monitoring.as_ref(), previous_noise_db, t).low_level,
            };
            if monitoring.is_some() {
                previous_noise_db = Some(ctx.high_level.noise_level_db);
            }
            let routing = route(&adapted, &routing_ctx, layout, table, &previous, t, xfade as f64 / fs);

            let mut fallbacks = Vec::new();
            let mut wanted: BTreeMap<String, voices::VoiceSpec> = BTreeMap::new();
            for (o, a) in adapted.objects.iter().zip(&routing.assignments) {
                let owner = scene.objects.iter().position(|x| x.id() == o.id()).unwrap_or(0);
                let subset: Vec<usize> = a.speaker_subset.iter().filter_map(|id| layout.index_of(id)).collect();
                let usable = usable_speakers(layout, o);
                for v in builder.voices(owner, o, a, &subset, &dirs, &usable, &mut fallbacks) {
                    wanted.insert(v.key.clone(), v);
                }
            }
            let class_changed: Vec<&str> = routing
                .schedules
                .iter()
                .filter(|s| s.from.renderer != s.to.renderer)
                .map(|s| s.object_id.as_str())
                .collect();
            let first = start == 0;

            // retire voices that disappeared
            for (key, (_, track)) in tracks.iter_mut() {
                if !wanted.contains_key(key) && track.current.is_some() {
                    track.switch(None, start, block, n_ch, fs);
                }
            }
            for (key, v) in wanted {
                let entry = tracks.entry(key).or_insert_with(|| (v.owner, Track::default()));
                let track = &mut entry.1;
                let same = track.current.as_ref().is_some_and(|l| {
                    l.class == v.class && l.drive == v.drive && l.channels == v.channels && l.signal_key == v.signal_key
                });
                if same {
                    if let Some(l) = track.current.as_mut() {
                        l.gain = v.gain;
                    }
                    continue;
                }
                let owner_id = scene.objects[v.owner].id();
                let len = if first && track.current.is_none() {
                    0
                } else if track.current.is_some() && class_changed.contains(&owner_id) {
                    xfade
                } else {
                    block
                };
                let mut lane = Lane::new(v.signal, v.signal_key, v.class, v.drive, v.channels, v.gain, fs, block);
                lane.prime(start, fs);
                track.switch(Some(lane), start, len, n_ch, fs);
            }

            intervals.push(IntervalRecord {
                t_s: t,
                end_s: end as f64 / fs,
                noise_db: ctx.high_level.noise_level_db,
                measured_intelligibility: ctx.high_level.measured_intelligibility,
                deficit: ctx.high_level.intelligibility_deficit,
                assignments: routing.assignments.clone(),
                crossfades: routing.schedules,
                adaptation: report,
                fallbacks,
            });
            previous = routing.assignments;
            next_update = start + interval;
        }

        let n = block.min(duration - start);
        for (owner, track) in tracks.values_mut() {
            if track.is_idle() {
                continue;
            }
            scratch.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v = 0.0));
            track.mix_into(start, block, &mut scratch);
            for (c, s) in scratch.iter().enumerate() {
                for (m, v) in mix[c][start..start + n].iter_mut().zip(s) {
                    *m += v;
                }
                if let Some(obj) = captured.get_mut(*owner) {
                    for (m, v) in obj[c][start..start + n].iter_mut().zip(s) {
                        *m += v;
                    }
                }
            }
        }
        tracks.retain(|_, (_, t)| !t.is_idle());
        start += block;
    }

    // align arrivals across speakers with different latencies
    let latencies: Vec<usize> = layout
        .speakers
        .iter()
        .map(|s| (s.latency_ms * 1e-3 * fs).round() as usize)
        .collect();
    let max_latency = latencies.iter().copied().max().unwrap_or(0);
    let compensate = |chans: &mut Vec<Vec<f64>>| {
        for (c, l) in chans.iter_mut().zip(&latencies) {
            let shift = max_latency - l;
            if shift > 0 {
                c.splice(0..0, std::iter::repeat_n(0.0, shift));
                c.truncate(duration);
            }
        }
    };
    compensate(&mut mix);
    captured.iter_mut().for_each(compensate);

    let speaker_ids = layout.ids();
    let metrics = interval_metrics(&intervals, &mix, &speaker_ids, fs);
    let objects = captured
        .into_iter()
        .zip(&scene.objects)
        .map(|(channels, o)| ObjectRender {
            object_id: o.id().to_string(),
            dialogue: is_dialogue(o),
            channels,
        })
        .collect();
    Ok(EngineOutput {
        sample_rate: scene.sample_rate,
        channels: mix,
        speaker_ids,
        intervals,
        metrics,
        objects,
    })
}

fn interval_metrics(intervals: &[IntervalRecord], mix: &[Vec<f64>], ids: &[String], fs: f64) -> Vec<MetricSample> {
    let mut out = Vec::new();
    for r in intervals {
        let mut push = |metric: String, value: f64| out.push(MetricSample { t_s: r.t_s, metric, value });
        push("noise_db".into(), r.noise_db);
        if let Some(i) = r.measured_intelligibility {
            push("intelligibility".into(), i);
        }
        push("deficit".into(), r.deficit);
        push("actions_applied".into(), r.adaptation.applied.len() as f64);
        let a = (r.t_s * fs).round() as usize;
        let b = (r.end_s * fs).round() as usize;
        for (id, ch) in ids.iter().zip(mix) {
            let seg = &ch[a.min(ch.len())..b.min(ch.len())];
            push(format!("rms.{id}"), crate::dsp::rms(seg));
        }
    }
    out
}
