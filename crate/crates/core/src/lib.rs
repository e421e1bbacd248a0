//! Object-based audio rendering.
//!
//! A scene of audio objects (mono stems plus metadata) is rendered for the
//! speakers actually present. Every context interval the engine measures the
//! reproduction scenario, adapts the scene within its editorial tolerances,
//! picks a renderer and speaker subset per object and mixes the rendered
//! objects into one channel per speaker.
//!
//! - [`scene`]: objects, metadata and the scene document.
//! - [`context`]: layout, listeners, environment, noise monitoring.
//! - [`adapter`]: rule-driven adaptation bounded by editorial tolerances.
//! - [`router`]: renderer feasibility, selection and crossfade scheduling.
//! - [`renderers`]: amplitude panning, ambisonics, WFS, pressure matching
//!   and diffuse rendering.
//! - [`dsp`]: filters, delays, band analysis.
//! - [`engine`]: the block-based pipeline.
//! - [`jobs`]: the commands behind the CLI.

pub mod adapter;
pub mod context;
pub mod demo;
pub mod dsp;
pub mod engine;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod io;
pub mod jobs;
pub mod renderers;
pub mod router;
pub mod scene;

pub use adapter::{apply_rules, AdaptationAction, AdaptationReport, ActionKind, Rulebook};
pub use context::{
    load_scenario, ContextualInfo, LoudspeakerDescriptor, NoiseState, ReproductionScenario, ScenarioFile,
    SpeakerLayout,
};
pub use engine::{render, EngineOptions, EngineOutput};
pub use geometry::Direction3;
pub use jobs::{cmd_devices, cmd_probe, cmd_render, cmd_validate, JobError, RenderJob, RenderReport};
pub use renderers::{driving_function, DrivingFunction};
pub use router::{route, RendererAssignment, RendererClass, SelectionTable};
pub use scene::{load_scene, AudioObject, Property, Scene, Tolerances};
