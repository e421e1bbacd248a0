//! Renderer selection from an ordered, data-driven table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::feasibility::{check_renderer, usable_speakers};
use super::{RendererClass, RendererRequest, RouterError};
use crate::context::{ContextualInfo, SpeakerLayout};
use crate::expr::Condition;
use crate::fields::{all_fields, FieldEnv};
use crate::scene::{AudioObject, Scene};

const DEFAULT_TABLE: &str = include_str!("../../data/selection.json");

/// Which speakers a selection row renders over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetRule {
    /// Every speaker able to reproduce the object.
    #[default]
    All,
    /// Only the device nearest the listener (or the object's target device).
    NearestDevice,
    /// Speakers behind the listener (|azimuth| > 90°), when they suffice.
    Backdrop,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentParams {
    /// Pressure-matching regularization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RendererAssignment {
    pub object_id: String,
    pub renderer: RendererClass,
    #[serde(default)]
    pub params: AssignmentParams,
    pub speaker_subset: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RowDoc {
    #[serde(rename = "match")]
    condition: String,
    renderer: String,
    #[serde(default)]
    subset: SubsetRule,
    #[serde(default)]
    params: AssignmentParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    rows: Vec<RowDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRow {
    pub condition: Condition,
    pub renderer: RendererRequest,
    pub subset: SubsetRule,
    pub params: AssignmentParams,
}

/// Rows are tried in order; the first matching row whose renderer is
/// feasible wins. AP1 over all usable speakers is the final fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTable {
    pub rows: Vec<SelectionRow>,
}

impl SelectionTable {
    pub fn parse(text: &str) -> Result<Self, RouterError> {
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| RouterError::Table(e.to_string()))?;
        let fields = all_fields();
        let rows = doc
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let condition = Condition::parse(&r.condition, &fields)
                    .map_err(|e| RouterError::Table(format!("rows[{i}].match: {e}")))?;
                let renderer = r
                    .renderer
                    .parse()
                    .map_err(|e| RouterError::Table(format!("rows[{i}].renderer: {e}")))?;
                Ok(SelectionRow {
                    condition,
                    renderer,
                    subset: r.subset,
                    params: r.params,
                })
            })
            .collect::<Result<_, RouterError>>()?;
        Ok(Self { rows })
    }

    pub fn load(path: &Path) -> Result<Self, RouterError> {
        let text = std::fs::read_to_string(path).map_err(|e| RouterError::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The bundled table.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled selection table parses")
    }

    pub fn builtin_text() -> &'static str {
        DEFAULT_TABLE
    }
}

/// Resolves `request` over `subset`; `AmbiHighest` picks the highest order
/// that passes.
fn resolve(
    request: RendererRequest,
    layout: &SpeakerLayout,
    object: &AudioObject,
    subset: &[usize],
) -> Option<(RendererClass, Vec<usize>)> {
    match request {
        RendererRequest::Exact(c) => check_renderer(c, layout, object, subset).ok().map(|s| (c, s)),
        RendererRequest::AmbiHighest => {
            let top = (subset.len().saturating_sub(1) / 2) as u32;
            (1..=top).rev().find_map(|n| {
                let c = RendererClass::AmbiMm(n);
                check_renderer(c, layout, object, subset).ok().map(|s| (c, s))
            })
        }
    }
}

fn assignment(
    object: &AudioObject,
    layout: &SpeakerLayout,
    class: RendererClass,
    subset: Vec<usize>,
    params: AssignmentParams,
) -> RendererAssignment {
    let params = if class == RendererClass::PmSingleZone {
        params
    } else {
        AssignmentParams::default()
    };
    RendererAssignment {
        object_id: object.id().to_string(),
        renderer: class,
        params,
        speaker_subset: subset.iter().map(|&i| layout.speakers[i].speaker_id.clone()).collect(),
    }
}

/// Picks the renderer and speaker subset for one object.
pub fn select_renderer(
    object: &AudioObject,
    scene: &Scene,
    ctx: &ContextualInfo,
    layout: &SpeakerLayout,
    table: &SelectionTable,
) -> RendererAssignment {
    let usable = usable_speakers(layout, object);
    if let Some(req) = object.advanced.preferred_renderer {
        if let Some((c, s)) = resolve(req, layout, object, &usable) {
            return assignment(object, layout, c, s, AssignmentParams::default());
        }
    }
    let env = FieldEnv {
        ctx,
        scene,
        object: Some(object),
    };
    for row in &table.rows {
        if !row.condition.holds(&env).unwrap_or(false) {
            continue;
        }
        let chosen = match row.subset {
            SubsetRule::All => resolve(row.renderer, layout, object, &usable),
            SubsetRule::NearestDevice => ctx
                .low_level
                .get(object.id())
                .and_then(|c| c.nearest_device.as_deref())
                .and_then(|id| layout.index_of(id))
                .and_then(|i| resolve(row.renderer, layout, object, &[i]))
                .or_else(|| resolve(row.renderer, layout, object, &usable)),
            SubsetRule::Backdrop => {
                let back: Vec<usize> = usable
                    .iter()
                    .copied()
                    .filter(|&i| layout.speakers[i].position.azimuth_deg.abs() > 90.0)
                    .collect();
                resolve(row.renderer, layout, object, &back).or_else(|| resolve(row.renderer, layout, object, &usable))
            }
        };
        if let Some((c, s)) = chosen {
            return assignment(object, layout, c, s, row.params);
        }
    }
    assignment(object, layout, RendererClass::Ap1Nearest, usable, AssignmentParams::default())
}
