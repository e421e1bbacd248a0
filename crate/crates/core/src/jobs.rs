//! Command implementations behind the CLI: render jobs, validation, layout
//! probing and device enumeration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::adapter::{AdapterError, Rulebook};
use crate::context::{
    load_scenario, enumerate_devices, ContextError, DeviceError, ScenarioError, ScenarioFile, SpeakerLayout,
};
use crate::engine::{render, EngineError, EngineOptions, IntervalRecord, MetricSample};
use crate::geometry::Direction3;
use crate::io::{write_multichannel, WavError};
use crate::renderers::{ambi_mm_decode, driving_function, DrivingFunction, RenderParams, DEFAULT_BETA};
use crate::router::{
    check_renderer, feasibility_table, Feasibility, RendererAssignment, RendererClass, RouterError, SelectionTable,
};
use crate::scene::{
    load_scene, parse_scene_unchecked, validate_scene, AudioObject, BasicMetadata, ObjectType, Scene, SceneError,
};

pub const REPORT_SCHEMA: &str = "render-report v1";

/// Process exit status for a failed job.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status of `validate` when an input cannot be read or parsed.
pub const EXIT_UNREADABLE: i32 = 2;

#[derive(Debug, Error)]
pub enum JobError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Rules(#[from] AdapterError),
    #[error(transparent)]
    Select(#[from] RouterError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Devices(#[from] DeviceError),
    #[error("cli_io: output: {0}")]
    Wav(#[from] WavError),
    #[error("cli_io: {}: {message}", .path.display())]
    Output { path: PathBuf, message: String },
}

impl JobError {
    /// The diagnostic on a single line.
    pub fn diagnostic(&self) -> String {
        self.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

/// One invocation of `render`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderJob {
    pub scene: PathBuf,
    pub scenario: PathBuf,
    /// Bundled rulebook when `None`.
    pub rules: Option<PathBuf>,
    /// Bundled selection table when `None`.
    pub select: Option<PathBuf>,
    /// Multichannel WAV; the report and metrics are written next to it.
    pub out: PathBuf,
    pub options: EngineOptions,
}

impl RenderJob {
    pub fn report_path(&self) -> PathBuf {
        sibling(&self.out, "report.json")
    }

    pub fn metrics_path(&self) -> PathBuf {
        sibling(&self.out, "metrics.csv")
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportInputs {
    pub scene: String,
    pub scenario: String,
    pub rules: String,
    pub select: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOptions {
    pub block_size: usize,
    pub crossfade_s: f64,
    pub seed: u64,
    pub listener: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub render_s: f64,
    /// Rendered duration divided by wall time.
    pub realtime_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderReport {
    pub schema: &'static str,
    pub inputs: ReportInputs,
    pub options: ReportOptions,
    pub sample_rate: u32,
    pub duration_samples: usize,
    pub speaker_ids: Vec<String>,
    pub intervals: Vec<IntervalRecord>,
    pub metrics: Vec<MetricSample>,
    pub timing: Timing,
}

fn display(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| "<builtin>".into(), |p| p.display().to_string())
}

fn load_rules(path: &Option<PathBuf>) -> Result<Rulebook, JobError> {
    Ok(match path {
        Some(p) => Rulebook::load(p)?,
        None => Rulebook::builtin(),
    })
}

fn load_table(path: &Option<PathBuf>) -> Result<SelectionTable, JobError> {
    Ok(match path {
        Some(p) => SelectionTable::load(p)?,
        None => SelectionTable::builtin(),
    })
}

/// Renders a job and writes the WAV, the report and the metrics CSV.
pub fn cmd_render(job: &RenderJob) -> Result<RenderReport, JobError> {
    let scene = load_scene(&job.scene)?;
    let scenario = load_scenario(&job.scenario)?;
    let rules = load_rules(&job.rules)?;
    let table = load_table(&job.select)?;

    let clock = Instant::now();
    let out = render(&scene, &scenario, &rules, &table, &job.options)?;
    let render_s = clock.elapsed().as_secs_f64();

    if let Some(dir) = job.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| JobError::Output {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    write_multichannel(&job.out, out.sample_rate, &out.channels)?;

    let duration_s = scene.duration as f64 / scene.sample_rate as f64;
    let report = RenderReport {
        schema: REPORT_SCHEMA,
        inputs: ReportInputs {
            scene: job.scene.display().to_string(),
            scenario: job.scenario.display().to_string(),
            rules: display(&job.rules),
            select: display(&job.select),
        },
        options: ReportOptions {
            block_size: job.options.block_size,
            crossfade_s: job.options.crossfade_s,
            seed: job.options.seed,
            listener: job.options.listener.clone(),
        },
        sample_rate: out.sample_rate,
        duration_samples: scene.duration,
        speaker_ids: out.speaker_ids,
        intervals: out.intervals,
        metrics: out.metrics,
        timing: Timing {
            render_s,
            realtime_factor: if render_s > 0.0 { duration_s / render_s } else { f64::INFINITY },
        },
    };
    write_report(job, &report)?;
    Ok(report)
}

fn write_report(job: &RenderJob, report: &RenderReport) -> Result<(), JobError> {
    let path = job.report_path();
    let out_err = |path: &Path, message: String| JobError::Output {
        path: path.to_path_buf(),
        message,
    };
    let text = serde_json::to_string_pretty(report).map_err(|e| out_err(&path, e.to_string()))? + "\n";
    std::fs::write(&path, text).map_err(|e| out_err(&path, e.to_string()))?;

    let path = job.metrics_path();
    let mut w = csv::Writer::from_path(&path).map_err(|e| out_err(&path, e.to_string()))?;
    for m in &report.metrics {
        w.serialize(m).map_err(|e| out_err(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| out_err(&path, e.to_string()))
}

/// Assignments that fail the feasibility check against `layout`, as
/// `(interval start, object id, reason)`.
pub fn cross_check(report_intervals: &[IntervalRecord], scene: &Scene, layout: &SpeakerLayout) -> Vec<(f64, String, String)> {
    let mut bad = Vec::new();
    for iv in report_intervals {
        for a in &iv.assignments {
            let Some(object) = scene.object(&a.object_id) else {
                bad.push((iv.t_s, a.object_id.clone(), "unknown object".into()));
                continue;
            };
            let subset: Option<Vec<usize>> = a.speaker_subset.iter().map(|id| layout.index_of(id)).collect();
            let Some(subset) = subset else {
                bad.push((iv.t_s, a.object_id.clone(), "unknown speaker in subset".into()));
                continue;
            };
            match check_renderer(a.renderer, layout, object, &subset) {
                Ok(used) if used == subset => {}
                Ok(_) => bad.push((iv.t_s, a.object_id.clone(), format!("{} drives a different subset", a.renderer))),
                Err(reason) => bad.push((iv.t_s, a.object_id.clone(), format!("{}: {reason}", a.renderer))),
            }
        }
    }
    bad
}

/// One problem found by `validate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationRecord {
    /// `scene` or `scenario`.
    pub scope: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object_id: Option<String>,
    pub field: String,
    pub reason: String,
}

impl std::fmt::Display for ValidationRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.object_id {
            Some(id) => write!(f, "{}: {id}: {}: {}", self.scope, self.field, self.reason),
            None => write!(f, "{}: {}: {}", self.scope, self.field, self.reason),
        }
    }
}

/// Lists every violation in a scene and a scenario. Fails only when a file
/// cannot be read or parsed.
pub fn cmd_validate(scene: &Path, scenario: &Path) -> Result<Vec<ValidationRecord>, JobError> {
    let mut records = Vec::new();
    let text = std::fs::read_to_string(scene).map_err(|source| SceneError::Io {
        path: scene.to_path_buf(),
        source,
    })?;
    let stem_dir = scene.parent().unwrap_or(Path::new("."));
    match parse_scene_unchecked(&text, stem_dir) {
        Ok(s) => records.extend(validate_scene(&s).into_iter().map(|v| ValidationRecord {
            scope: "scene",
            object_id: (v.object_id != crate::scene::SCENE_SCOPE).then_some(v.object_id),
            field: v.field,
            reason: v.reason,
        })),
        Err(SceneError::MissingStem(path)) => records.push(ValidationRecord {
            scope: "scene",
            object_id: None,
            field: "stems".into(),
            reason: format!("missing stem {}", path.display()),
        }),
        Err(SceneError::RateMismatch {
            object_id,
            path,
            expected,
            found,
        }) => records.push(ValidationRecord {
            scope: "scene",
            object_id: Some(object_id),
            field: "stems".into(),
            reason: format!("{} has rate {found} Hz, scene expects {expected} Hz", path.display()),
        }),
        Err(e) => return Err(e.into()),
    }
    match load_scenario(scenario).and_then(|f| f.scenario(None).map(drop)) {
        Ok(()) => {}
        Err(ScenarioError::Context(e)) => records.push(context_record(e)),
        Err(ScenarioError::Device(DeviceError::DuplicateDeviceId(id))) => records.push(ValidationRecord {
            scope: "scenario",
            object_id: None,
            field: "devices".into(),
            reason: format!("duplicate device id '{id}'"),
        }),
        Err(e) => return Err(e.into()),
    }
    Ok(records)
}

fn context_record(e: ContextError) -> ValidationRecord {
    let (field, reason) = match e {
        ContextError::Invalid { field, reason } => (field, reason),
        ContextError::EmptyLayout => ("layout".into(), "layout has no speakers".into()),
        ContextError::NoListener => ("listeners".into(), "scenario has no listener".into()),
        ContextError::Dsp(e) => ("microphone".into(), e.to_string()),
    };
    ValidationRecord {
        scope: "scenario",
        object_id: None,
        field,
        reason,
    }
}

/// Compass points probed by `probe`, with azimuths (counter-clockwise,
/// 0 = front).
pub const PROBE_DIRECTIONS: [(&str, f64); 8] = [
    ("N", 0.0),
    ("NE", -45.0),
    ("E", -90.0),
    ("SE", -135.0),
    ("S", 180.0),
    ("SW", 135.0),
    ("W", 90.0),
    ("NW", 45.0),
];
/// Distance of the probe's reference object.
pub const PROBE_DISTANCE_M: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub direction: &'static str,
    pub azimuth_deg: f64,
    pub renderers: Vec<Feasibility>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTable {
    pub speaker_ids: Vec<String>,
    pub rows: Vec<ProbeRow>,
}

impl ProbeTable {
    /// Plain-text table, one line per direction and renderer.
    pub fn to_text(&self) -> String {
        let mut s = format!("layout: {}\n", self.speaker_ids.join(" "));
        for row in &self.rows {
            for f in &row.renderers {
                let verdict = if f.feasible { "✓".to_string() } else { "✗".to_string() };
                let reason = f.reason.as_deref().map(|r| format!(" \"{r}\"")).unwrap_or_default();
                s += &format!("{:<3} {:>7.1}  {:<16} {verdict}{reason}\n", row.direction, row.azimuth_deg, f.renderer.to_string());
            }
        }
        s
    }
}

fn reference_object(azimuth_deg: f64) -> AudioObject {
    AudioObject::new(
        BasicMetadata {
            object_type: ObjectType::Effect,
            id: "probe".into(),
            channels: 1,
            group: None,
            priority: 5,
            level_db: 0.0,
            position: Direction3::with_distance(azimuth_deg, 0.0, PROBE_DISTANCE_M),
            extent_deg: None,
            diffuseness: 0.0,
        },
        vec![],
    )
}

/// Feasibility of every renderer for a reference object at each compass
/// point around the scenario's layout.
pub fn probe_layout(layout: &SpeakerLayout) -> Result<ProbeTable, JobError> {
    let rows = PROBE_DIRECTIONS
        .iter()
        .map(|&(direction, az)| {
            Ok(ProbeRow {
                direction,
                azimuth_deg: az,
                renderers: feasibility_table(layout, &reference_object(az))?,
            })
        })
        .collect::<Result<Vec<_>, RouterError>>()?;
    Ok(ProbeTable {
        speaker_ids: layout.ids(),
        rows,
    })
}

pub fn cmd_probe(scenario: &Path) -> Result<ProbeTable, JobError> {
    let file: ScenarioFile = load_scenario(scenario)?;
    probe_layout(&file.layout)
}

/// The layout assembled from a device config.
pub fn cmd_devices(config: &Path) -> Result<SpeakerLayout, JobError> {
    Ok(enumerate_devices(config)?)
}

/// Driving function computed for one assignment, as dumped by `render
/// --dump-drives`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriveDump {
    pub t_s: f64,
    pub object_id: String,
    pub renderer: RendererClass,
    pub speakers: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<DrivingFunction>,
    /// Ambisonic decode matrix, speakers × harmonics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decode_matrix: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Driving functions of every assignment in `intervals`, listed when an
/// object's assignment first appears or changes.
pub fn dump_drives(intervals: &[IntervalRecord], scene: &Scene, layout: &SpeakerLayout) -> Vec<DriveDump> {
    let dirs = layout.directions();
    let mut last: Vec<&RendererAssignment> = Vec::new();
    let mut out = Vec::new();
    for iv in intervals {
        for a in &iv.assignments {
            if last.contains(&a) {
                continue;
            }
            last.retain(|p| p.object_id != a.object_id);
            last.push(a);
            let Some(object) = scene.object(&a.object_id) else { continue };
            let sub: Vec<Direction3> = a.speaker_subset.iter().filter_map(|id| layout.index_of(id)).map(|i| dirs[i]).collect();
            let params = RenderParams {
                beta: a.params.beta.unwrap_or(DEFAULT_BETA),
                sample_rate: scene.sample_rate as f64,
            };
            let (drive, error) = match driving_function(a.renderer, &object.basic.position, &sub, &params) {
                Ok(d) => (Some(d), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let decode_matrix = match a.renderer {
                RendererClass::AmbiMm(order) => ambi_mm_decode(&sub, order)
                    .ok()
                    .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect()),
                _ => None,
            };
            out.push(DriveDump {
                t_s: iv.t_s,
                object_id: a.object_id.clone(),
                renderer: a.renderer,
                speakers: a.speaker_subset.clone(),
                drive,
                decode_matrix,
                error,
            });
        }
    }
    out
}
