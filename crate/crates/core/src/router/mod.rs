//! Object router: chooses a renderer and speaker subset per object and
//! schedules crossfades when an assignment changes.

mod class;
mod feasibility;
mod route;
mod select;

pub use class::{RendererClass, RendererFamily, RendererRequest, UnknownRenderer};
pub use feasibility::{
    candidate_classes, check_renderer, feasibility_table, feasible_renderers, usable_speakers, Feasibility,
    BAND_EXCLUSION_DB, WFS_MAX_SPACING_M, WFS_MIN_SPEAKERS,
};
pub use route::{route, schedule_crossfade, CrossfadeSchedule, Routing, DEFAULT_CROSSFADE_S};
pub use select::{select_renderer, AssignmentParams, RendererAssignment, SelectionRow, SelectionTable, SubsetRule};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouterError {
    #[error("object_router: layout has no speakers")]
    EmptyLayout,
    #[error("object_router: old and new assignments are identical")]
    SameRenderer,
    #[error("object_router: crossfade duration must be > 0, got {0}")]
    NonPositiveDuration(f64),
    #[error("object_router: assignments belong to different objects ('{0}' vs '{1}')")]
    ObjectMismatch(String, String),
    #[error("object_router: selection table: {0}")]
    Table(String),
}
