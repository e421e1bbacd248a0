//! Rulebook-driven, tolerance-bounded scene adaptation.
//!
//! Metadata edits (level, position, group, pruning, reverb tails) are applied
//! directly to an adapted copy of the scene. Signal edits (tilt, time shift,
//! decorrelation) are accumulated as per-object directives and executed once
//! at render time.

mod action;
mod ladder;
mod personalize;
mod reverb;
mod rules;

pub use action::{clamp_scale, clamp_to_tolerances, resolve_priority, ActionKind, AdaptationAction, MIN_TAIL_SCALE};
pub use ladder::{intelligibility_boost, intelligibility_boost_with, preview_intelligibility, LadderParams};
pub use personalize::{personalize_levels, personalize_levels_with, PERSONALIZE_GAIN_DB};
pub use reverb::{adapt_reverb, combined_tau, production_tau, ReverbAdaptation, MAX_TAU_S};
pub use rules::{
    apply_rules, ActionTemplate, AdaptationReport, AdaptationRule, AppliedAction, ObjectDelta, Rulebook, SkippedAction,
    TemplateOp,
};

use thiserror::Error;

use crate::expr::ExprError;
use crate::scene::Property;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdapterError {
    #[error("scene_adapter: property '{0}' is not in the object's perceptual priority")]
    UnknownProperty(Property),
    #[error("scene_adapter: scene has no dialogue object")]
    NoDialogueObject,
    #[error("scene_adapter: {field} must be > 0 (got {value})")]
    NonPositiveTau { field: String, value: f64 },
    #[error("scene_adapter: {0}")]
    LengthMismatch(String),
    #[error("scene_adapter: rulebook: {0}")]
    Rulebook(String),
    #[error("scene_adapter: rule '{rule_id}': {source}")]
    Eval {
        rule_id: String,
        #[source]
        source: ExprError,
    },
}
