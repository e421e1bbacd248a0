use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::scene::{EditorialConstraints, Property, Tolerances};

/// Smallest reverb tail scale factor an action may carry.
pub const MIN_TAIL_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionKind {
    GainOffset {
        db: f64,
    },
    /// Response at 4 kHz relative to 250 Hz.
    SpectralTilt {
        db: f64,
    },
    Reposition {
        d_az: f64,
        #[serde(default)]
        d_el: f64,
    },
    TimeShift {
        ms: f64,
    },
    Decorrelate {
        amount: f64,
    },
    /// Multiplies tail decay constants; `band` indexes the object's tail
    /// bands, `None` scales all of them.
    ReverbTailScale {
        factor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        band: Option<usize>,
    },
    Prune,
    Regroup {
        group: String,
    },
}

impl ActionKind {
    /// Perceptual property an action touches unless a rule says otherwise.
    pub fn default_property(&self) -> Property {
        match self {
            ActionKind::GainOffset { .. } | ActionKind::Prune => Property::Level,
            ActionKind::SpectralTilt { .. } => Property::Intelligibility,
            ActionKind::Reposition { .. } => Property::Position,
            ActionKind::TimeShift { .. } => Property::Velocity,
            ActionKind::Decorrelate { .. } => Property::Locatedness,
            ActionKind::ReverbTailScale { .. } => Property::Envelopment,
            ActionKind::Regroup { .. } => Property::Scale,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::GainOffset { .. } => "gain_offset",
            ActionKind::SpectralTilt { .. } => "spectral_tilt",
            ActionKind::Reposition { .. } => "reposition",
            ActionKind::TimeShift { .. } => "time_shift",
            ActionKind::Decorrelate { .. } => "decorrelate",
            ActionKind::ReverbTailScale { .. } => "reverb_tail_scale",
            ActionKind::Prune => "prune",
            ActionKind::Regroup { .. } => "regroup",
        }
    }

    /// Whether the action's magnitude lies inside `tol`.
    pub fn within(&self, tol: &Tolerances) -> bool {
        match self {
            ActionKind::GainOffset { db } => db.abs() <= tol.level_db,
            ActionKind::SpectralTilt { db } => db.abs() <= tol.spectral_tilt_db,
            ActionKind::Reposition { d_az, d_el } => d_az.abs() <= tol.position_deg && d_el.abs() <= tol.position_deg,
            ActionKind::TimeShift { ms } => ms.abs() <= tol.time_shift_ms,
            ActionKind::Decorrelate { amount } => (0.0..=1.0).contains(amount),
            ActionKind::ReverbTailScale { factor, .. } => (factor - 1.0).abs() <= tol.reverb_scale && *factor > 0.0,
            ActionKind::Prune | ActionKind::Regroup { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationAction {
    pub object_id: String,
    #[serde(flatten)]
    pub kind: ActionKind,
    /// Id of the rule that requested the action.
    pub reason: String,
    pub property: Property,
}

impl AdaptationAction {
    pub fn new(object_id: impl Into<String>, kind: ActionKind, reason: impl Into<String>) -> Self {
        let property = kind.default_property();
        Self {
            object_id: object_id.into(),
            kind,
            reason: reason.into(),
            property,
        }
    }
}

fn clamp_sym(v: f64, tol: f64) -> f64 {
    if v.is_finite() {
        v.clamp(-tol, tol)
    } else {
        0.0
    }
}

/// Bounds a tail scale factor to `[1 - tol, 1 + tol]`, never below
/// [`MIN_TAIL_SCALE`].
pub fn clamp_scale(factor: f64, tol: f64) -> f64 {
    if !factor.is_finite() || factor <= 0.0 {
        return 1.0;
    }
    factor.clamp((1.0 - tol).max(MIN_TAIL_SCALE), 1.0 + tol)
}

/// Clamps the action's magnitude into the object's editorial tolerance.
/// Prune and Regroup pass through.
pub fn clamp_to_tolerances(action: &AdaptationAction, constraints: &EditorialConstraints) -> AdaptationAction {
    let t = &constraints.tolerances;
    let kind = match &action.kind {
        ActionKind::GainOffset { db } => ActionKind::GainOffset {
            db: clamp_sym(*db, t.level_db),
        },
        ActionKind::SpectralTilt { db } => ActionKind::SpectralTilt {
            db: clamp_sym(*db, t.spectral_tilt_db),
        },
        ActionKind::Reposition { d_az, d_el } => ActionKind::Reposition {
            d_az: clamp_sym(*d_az, t.position_deg),
            d_el: clamp_sym(*d_el, t.position_deg),
        },
        ActionKind::TimeShift { ms } => ActionKind::TimeShift {
            ms: clamp_sym(*ms, t.time_shift_ms),
        },
        ActionKind::Decorrelate { amount } => ActionKind::Decorrelate {
            amount: if amount.is_finite() { amount.clamp(0.0, 1.0) } else { 0.0 },
        },
        ActionKind::ReverbTailScale { factor, band } => ActionKind::ReverbTailScale {
            factor: clamp_scale(*factor, t.reverb_scale),
            band: *band,
        },
        other => other.clone(),
    };
    AdaptationAction {
        kind,
        ..action.clone()
    }
}

/// Orders actions so the lowest-priority properties come first (stable),
/// then keeps at most `budget` of them.
pub fn resolve_priority(
    requested: &[AdaptationAction],
    constraints: &EditorialConstraints,
    budget: usize,
) -> Result<Vec<AdaptationAction>, AdapterError> {
    let order = &constraints.perceptual_priority;
    let mut ranked = requested
        .iter()
        .map(|a| {
            order
                .iter()
                .position(|p| *p == a.property)
                .map(|rank| (rank, a.clone()))
                .ok_or(AdapterError::UnknownProperty(a.property))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ranked.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(ranked.into_iter().take(budget).map(|(_, a)| a).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constraints(level: f64) -> EditorialConstraints {
        EditorialConstraints {
            tolerances: Tolerances {
                level_db: level,
                ..Tolerances::default()
            },
            perceptual_priority: vec![Property::Intelligibility, Property::Position, Property::Level],
        }
    }

    #[test]
    fn gain_clamped_to_level_tolerance() {
        let a = AdaptationAction::new("m", ActionKind::GainOffset { db: -12.0 }, "r");
        assert_eq!(clamp_to_tolerances(&a, &constraints(6.0)).kind, ActionKind::GainOffset { db: -6.0 });
        assert_eq!(clamp_to_tolerances(&a, &constraints(0.0)).kind, ActionKind::GainOffset { db: 0.0 });
    }

    #[test]
    fn reposition_inside_tolerance_unchanged() {
        let a = AdaptationAction::new("m", ActionKind::Reposition { d_az: 10.0, d_el: 0.0 }, "r");
        assert_eq!(clamp_to_tolerances(&a, &constraints(6.0)), a);
    }

    #[test]
    fn budget_keeps_lowest_priority() {
        let req = vec![
            AdaptationAction::new("m", ActionKind::Reposition { d_az: 5.0, d_el: 0.0 }, "r"),
            AdaptationAction::new("m", ActionKind::GainOffset { db: -3.0 }, "r"),
        ];
        let out = resolve_priority(&req, &constraints(6.0), 1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, ActionKind::GainOffset { db: -3.0 });
        let all = resolve_priority(&req, &constraints(6.0), 10).unwrap();
        assert_eq!(all[0].property, Property::Level);
        assert!(resolve_priority(&[], &constraints(6.0), 1).unwrap().is_empty());
    }

    #[test]
    fn property_outside_order_is_unknown() {
        let req = vec![AdaptationAction::new("m", ActionKind::TimeShift { ms: 1.0 }, "r")];
        assert_eq!(
            resolve_priority(&req, &constraints(6.0), 1).unwrap_err(),
            AdapterError::UnknownProperty(Property::Velocity)
        );
    }
}
