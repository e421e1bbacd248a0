//! Rulebooks and their application to a scene.
//!
//! Rules run in rulebook order, each seeing the scene as adapted by the rules
//! before it. Within a fired rule, each object's requested actions are
//! ordered lowest-priority property first and cut to the rule's budget, then
//! clamped to the object's tolerances. Running totals per object are clamped
//! as well, so repeated requests never push an object past its tolerance.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::action::{clamp_scale, clamp_to_tolerances, resolve_priority, ActionKind, AdaptationAction};
use super::ladder::{intelligibility_boost_with, LadderParams};
use super::personalize::{personalize_levels_with, PERSONALIZE_GAIN_DB};
use super::reverb::adapt_reverb;
use super::AdapterError;
use crate::context::ContextualInfo;
use crate::dsp::BAND_CENTERS_HZ;
use crate::expr::Condition;
use crate::fields::{all_fields, FieldEnv};
use crate::geometry::azimuth_difference;
use crate::scene::{AudioObject, Property, Scene};

const DEFAULT_RULEBOOK: &str = include_str!("../../data/rulebook.json");
/// Scene-wide bounds on an object's level offset.
const LEVEL_RANGE_DB: (f64, f64) = (-60.0, 12.0);

/// What a rule action produces: one fixed action per selected object, or a
/// generator computing actions from the scene and context.
#[derive(Debug, Clone, PartialEq)]
pub enum TemplateOp {
    Action(ActionKind),
    IntelligibilityLadder(LadderParams),
    Personalize { gain_db: f64 },
    /// Reverb tail scaling towards the scene's own tails through the
    /// monitored room decay.
    AdaptReverb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionTemplate {
    pub op: TemplateOp,
    /// Object filter; all objects when absent.
    pub selector: Option<Condition>,
    /// Overrides the property the action is ranked under.
    pub property: Option<Property>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationRule {
    pub rule_id: String,
    pub condition: Condition,
    pub actions: Vec<ActionTemplate>,
    /// Maximum actions per object when the rule fires.
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rulebook {
    pub rules: Vec<AdaptationRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDoc {
    rule_id: String,
    condition: String,
    #[serde(default)]
    budget: Option<usize>,
    actions: Vec<serde_json::Map<String, Json>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RulebookDoc {
    rules: Vec<RuleDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PersonalizeDoc {
    #[serde(default = "default_personalize_gain")]
    gain_db: f64,
}

fn default_personalize_gain() -> f64 {
    PERSONALIZE_GAIN_DB
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyDoc {}

fn parse_template(mut m: serde_json::Map<String, Json>, fields: &[&str], at: &str) -> Result<ActionTemplate, AdapterError> {
    let err = |msg: String| AdapterError::Rulebook(format!("{at}: {msg}"));
    let selector = match m.remove("where") {
        None => None,
        Some(Json::String(s)) => Some(Condition::parse(&s, fields).map_err(|e| err(format!("where: {e}")))?),
        Some(_) => return Err(err("where must be a string".into())),
    };
    let property = match m.remove("property") {
        None => None,
        Some(v) => Some(serde_json::from_value(v).map_err(|e| err(format!("property: {e}")))?),
    };
    let kind = m
        .get("kind")
        .and_then(Json::as_str)
        .ok_or_else(|| err("missing kind".into()))?
        .to_string();
    let rest = |mut m: serde_json::Map<String, Json>| {
        m.remove("kind");
        Json::Object(m)
    };
    let op = match kind.as_str() {
        "intelligibility_ladder" => {
            TemplateOp::IntelligibilityLadder(serde_json::from_value(rest(m)).map_err(|e| err(e.to_string()))?)
        }
        "personalize" => {
            let d: PersonalizeDoc = serde_json::from_value(rest(m)).map_err(|e| err(e.to_string()))?;
            TemplateOp::Personalize { gain_db: d.gain_db }
        }
        "adapt_reverb" => {
            let _: EmptyDoc = serde_json::from_value(rest(m)).map_err(|e| err(e.to_string()))?;
            TemplateOp::AdaptReverb
        }
        _ => TemplateOp::Action(serde_json::from_value(Json::Object(m)).map_err(|e| err(e.to_string()))?),
    };
    if let TemplateOp::Action(ActionKind::ReverbTailScale { factor, .. }) = &op {
        if !(*factor > 0.0) {
            return Err(err(format!("factor must be > 0 (got {factor})")));
        }
    }
    Ok(ActionTemplate { op, selector, property })
}

impl Rulebook {
    pub fn parse(text: &str) -> Result<Self, AdapterError> {
        let doc: RulebookDoc = serde_json::from_str(text).map_err(|e| AdapterError::Rulebook(e.to_string()))?;
        let fields = all_fields();
        let mut rules: Vec<AdaptationRule> = Vec::new();
        for (i, r) in doc.rules.into_iter().enumerate() {
            if rules.iter().any(|x| x.rule_id == r.rule_id) {
                return Err(AdapterError::Rulebook(format!("rules[{i}]: duplicate rule_id '{}'", r.rule_id)));
            }
            let condition = Condition::parse(&r.condition, &fields)
                .map_err(|e| AdapterError::Rulebook(format!("rules[{i}].condition: {e}")))?;
            let actions = r
                .actions
                .into_iter()
                .enumerate()
                .map(|(j, a)| parse_template(a, &fields, &format!("rules[{i}].actions[{j}]")))
                .collect::<Result<_, _>>()?;
            rules.push(AdaptationRule {
                rule_id: r.rule_id,
                condition,
                actions,
                budget: r.budget,
            });
        }
        Ok(Self { rules })
    }

    pub fn load(path: &Path) -> Result<Self, AdapterError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| AdapterError::Rulebook(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The bundled rulebook.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_RULEBOOK).expect("bundled rulebook parses")
    }

    pub fn builtin_text() -> &'static str {
        DEFAULT_RULEBOOK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedAction {
    pub rule_id: String,
    pub object_id: String,
    pub property: Property,
    pub requested: ActionKind,
    /// What was actually applied after tolerance clamping.
    pub clamped: ActionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedAction {
    pub rule_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub object_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionKind>,
    pub reason: String,
}

/// Net change of one object between the input and the adapted scene.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectDelta {
    pub object_id: String,
    pub level_db: f64,
    pub d_az: f64,
    pub d_el: f64,
    pub tilt_db: f64,
    pub time_shift_ms: f64,
    pub decorrelate: f64,
    /// Ratio of adapted to original decay per tail band.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reverb_scale: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub pruned: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AdaptationReport {
    pub fired_rules: Vec<String>,
    pub applied: Vec<AppliedAction>,
    pub skipped: Vec<SkippedAction>,
    pub deltas: Vec<ObjectDelta>,
}

impl AdaptationReport {
    pub fn is_empty(&self) -> bool {
        self.fired_rules.is_empty() && self.applied.is_empty() && self.skipped.is_empty()
    }
}

/// Running totals of one object's adaptation, relative to the input scene.
#[derive(Debug, Clone, Default)]
struct Totals {
    level_db: f64,
    tilt_db: f64,
    d_az: f64,
    d_el: f64,
    time_shift_ms: f64,
    /// Per tail band; missing entries are 1.
    reverb_scale: Vec<f64>,
}

/// Moves `total` by `step`, keeping it inside `[-tol, tol]`; returns the
/// step actually taken.
fn bounded_step(total: &mut f64, step: f64, lo: f64, hi: f64) -> f64 {
    let next = (*total + step).clamp(lo.min(*total), hi.max(*total));
    let taken = next - *total;
    *total = next;
    taken
}

/// Octave band whose centre is closest (in log frequency) to `hz`.
fn nearest_octave(hz: f64) -> usize {
    BAND_CENTERS_HZ
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.ln() - hz.ln()).abs().total_cmp(&(b.1.ln() - hz.ln()).abs()))
        .map_or(0, |(i, _)| i)
}

/// Applies one clamped action to `o`, returning what was effectively done.
fn apply_one(o: &mut AudioObject, kind: &ActionKind, totals: &mut Totals) -> Result<ActionKind, String> {
    let tol = o.constraints.tolerances;
    Ok(match kind {
        ActionKind::GainOffset { db } => {
            let lo = (-tol.level_db).max(LEVEL_RANGE_DB.0 - (o.basic.level_db - totals.level_db));
            let hi = tol.level_db.min(LEVEL_RANGE_DB.1 - (o.basic.level_db - totals.level_db));
            let db = bounded_step(&mut totals.level_db, *db, lo, hi);
            o.basic.level_db += db;
            ActionKind::GainOffset { db }
        }
        ActionKind::SpectralTilt { db } => {
            let db = bounded_step(&mut totals.tilt_db, *db, -tol.spectral_tilt_db, tol.spectral_tilt_db);
            o.directives.tilt_db += db;
            ActionKind::SpectralTilt { db }
        }
        ActionKind::Reposition { d_az, d_el } => {
            let d_az = bounded_step(&mut totals.d_az, *d_az, -tol.position_deg, tol.position_deg);
            let d_el = bounded_step(&mut totals.d_el, *d_el, -tol.position_deg, tol.position_deg);
            o.basic.position = o.basic.position.rotated(d_az, d_el);
            ActionKind::Reposition { d_az, d_el }
        }
        ActionKind::TimeShift { ms } => {
            let ms = bounded_step(&mut totals.time_shift_ms, *ms, -tol.time_shift_ms, tol.time_shift_ms);
            o.directives.time_shift_ms += ms;
            ActionKind::TimeShift { ms }
        }
        ActionKind::Decorrelate { amount } => {
            o.directives.decorrelate = o.directives.decorrelate.max(*amount);
            ActionKind::Decorrelate { amount: *amount }
        }
        ActionKind::ReverbTailScale { factor, band } => {
            let Some(reverb) = o.reverb.as_mut().filter(|r| !r.tail_bands.is_empty()) else {
                return Err("object has no reverb tail".into());
            };
            let n = reverb.tail_bands.len();
            let bands: Vec<usize> = match band {
                Some(b) if *b < n => vec![*b],
                Some(b) => return Err(format!("tail band {b} out of range ({n} bands)")),
                None => (0..n).collect(),
            };
            totals.reverb_scale.resize(n, 1.0);
            let mut applied = *factor;
            for b in bands {
                let cur = totals.reverb_scale[b];
                let next = clamp_scale(cur * factor, tol.reverb_scale);
                // keep moving only in the requested direction
                let next = if (*factor >= 1.0) == (next >= cur) { next } else { cur };
                applied = next / cur;
                totals.reverb_scale[b] = next;
                reverb.tail_bands[b].decay_tau_s *= applied;
            }
            ActionKind::ReverbTailScale {
                factor: applied,
                band: *band,
            }
        }
        ActionKind::Prune => ActionKind::Prune,
        ActionKind::Regroup { group } => {
            o.basic.group = Some(group.clone());
            ActionKind::Regroup { group: group.clone() }
        }
    })
}

/// Reverb actions scaling each tail band towards a reproduced decay equal to
/// the band's own production decay.
fn reverb_actions(o: &AudioObject, ctx: &ContextualInfo, rule_id: &str) -> Vec<AdaptationAction> {
    let (Some(reverb), Some(room)) = (&o.reverb, &ctx.high_level.room_decay_tau_s) else {
        return vec![];
    };
    if room.is_empty() {
        return vec![];
    }
    let room_taus: Vec<f64> = reverb
        .tail_bands
        .iter()
        .map(|b| room[nearest_octave(b.band_center_hz).min(room.len() - 1)])
        .collect();
    let targets: Vec<f64> = reverb.tail_bands.iter().map(|b| b.decay_tau_s).collect();
    let Ok(adapted) = adapt_reverb(reverb, &room_taus, &targets, f64::INFINITY) else {
        return vec![];
    };
    adapted
        .reverb
        .tail_bands
        .iter()
        .zip(&targets)
        .enumerate()
        .filter(|(_, (b, t))| b.decay_tau_s != **t)
        .map(|(i, (b, t))| {
            AdaptationAction::new(
                o.id(),
                ActionKind::ReverbTailScale {
                    factor: b.decay_tau_s / t,
                    band: Some(i),
                },
                rule_id,
            )
        })
        .collect()
}

fn selected(sel: &Option<Condition>, o: &AudioObject, scene: &Scene, ctx: &ContextualInfo) -> Result<bool, crate::expr::ExprError> {
    match sel {
        None => Ok(true),
        Some(c) => c.holds(&FieldEnv {
            ctx,
            scene,
            object: Some(o),
        }),
    }
}

/// Requested actions of one fired rule, in template order.
fn requested_actions(
    rule: &AdaptationRule,
    scene: &Scene,
    ctx: &ContextualInfo,
    skipped: &mut Vec<SkippedAction>,
) -> Result<Vec<AdaptationAction>, AdapterError> {
    let eval_err = |source| AdapterError::Eval {
        rule_id: rule.rule_id.clone(),
        source,
    };
    let mut out = Vec::new();
    for t in &rule.actions {
        let generated = match &t.op {
            TemplateOp::Action(kind) => scene
                .objects
                .iter()
                .map(|o| AdaptationAction::new(o.id(), kind.clone(), &rule.rule_id))
                .collect(),
            TemplateOp::IntelligibilityLadder(p) => match intelligibility_boost_with(scene, ctx, p) {
                Ok(v) => v,
                Err(e) => {
                    skipped.push(SkippedAction {
                        rule_id: rule.rule_id.clone(),
                        object_id: None,
                        action: None,
                        reason: e.to_string(),
                    });
                    vec![]
                }
            },
            TemplateOp::Personalize { gain_db } => personalize_levels_with(scene, &ctx.high_level.listener, *gain_db),
            TemplateOp::AdaptReverb => scene
                .objects
                .iter()
                .flat_map(|o| reverb_actions(o, ctx, &rule.rule_id))
                .collect(),
        };
        for mut a in generated {
            let Some(o) = scene.object(&a.object_id) else { continue };
            if !selected(&t.selector, o, scene, ctx).map_err(eval_err)? {
                continue;
            }
            a.reason = rule.rule_id.clone();
            if let Some(p) = t.property {
                a.property = p;
            }
            out.push(a);
        }
    }
    Ok(out)
}

fn object_delta(before: &AudioObject, after: Option<&AudioObject>) -> Option<ObjectDelta> {
    let id = before.id().to_string();
    let Some(a) = after else {
        return Some(ObjectDelta {
            object_id: id,
            pruned: true,
            ..Default::default()
        });
    };
    let reverb_scale = match (&before.reverb, &a.reverb) {
        (Some(b), Some(r)) if b != r => b
            .tail_bands
            .iter()
            .zip(&r.tail_bands)
            .map(|(x, y)| y.decay_tau_s / x.decay_tau_s)
            .collect(),
        _ => vec![],
    };
    let d = ObjectDelta {
        object_id: id,
        level_db: a.basic.level_db - before.basic.level_db,
        d_az: azimuth_difference(a.basic.position.azimuth_deg, before.basic.position.azimuth_deg),
        d_el: a.basic.position.elevation_deg - before.basic.position.elevation_deg,
        tilt_db: a.directives.tilt_db - before.directives.tilt_db,
        time_shift_ms: a.directives.time_shift_ms - before.directives.time_shift_ms,
        decorrelate: a.directives.decorrelate - before.directives.decorrelate,
        reverb_scale,
        group: (a.basic.group != before.basic.group).then(|| a.basic.group.clone().unwrap_or_default()),
        pruned: false,
    };
    let unchanged = d.level_db == 0.0
        && d.d_az == 0.0
        && d.d_el == 0.0
        && d.tilt_db == 0.0
        && d.time_shift_ms == 0.0
        && d.decorrelate == 0.0
        && d.reverb_scale.is_empty()
        && d.group.is_none();
    (!unchanged).then_some(d)
}

/// Evaluates the rulebook against the context and returns the adapted copy
/// of `scene` with a report. `scene` itself is not modified.
pub fn apply_rules(
    scene: &Scene,
    ctx: &ContextualInfo,
    rulebook: &Rulebook,
) -> Result<(Scene, AdaptationReport), AdapterError> {
    let mut work = scene.clone();
    let mut report = AdaptationReport::default();
    let mut totals: BTreeMap<String, Totals> = BTreeMap::new();

    for rule in &rulebook.rules {
        let env = FieldEnv {
            ctx,
            scene: &work,
            object: None,
        };
        let fires = rule.condition.holds(&env).map_err(|source| AdapterError::Eval {
            rule_id: rule.rule_id.clone(),
            source,
        })?;
        if !fires {
            continue;
        }
        report.fired_rules.push(rule.rule_id.clone());
        let requested = requested_actions(rule, &work, ctx, &mut report.skipped)?;

        let mut ids: Vec<String> = Vec::new();
        for a in &requested {
            if !ids.contains(&a.object_id) {
                ids.push(a.object_id.clone());
            }
        }
        for id in ids {
            let mine: Vec<AdaptationAction> = requested.iter().filter(|a| a.object_id == id).cloned().collect();
            let constraints = match work.object(&id) {
                Some(o) => o.constraints.clone(),
                None => continue,
            };
            let ordered = resolve_priority(&mine, &constraints, usize::MAX)?;
            let budget = rule.budget.unwrap_or(usize::MAX).min(ordered.len());
            for a in &ordered[budget..] {
                report.skipped.push(SkippedAction {
                    rule_id: rule.rule_id.clone(),
                    object_id: Some(id.clone()),
                    action: Some(a.kind.clone()),
                    reason: format!("over rule budget of {budget}"),
                });
            }
            for a in &ordered[..budget] {
                let Some(idx) = work.objects.iter().position(|o| o.id() == id) else {
                    report.skipped.push(SkippedAction {
                        rule_id: rule.rule_id.clone(),
                        object_id: Some(id.clone()),
                        action: Some(a.kind.clone()),
                        reason: "object was pruned".into(),
                    });
                    continue;
                };
                let clamped = clamp_to_tolerances(a, &constraints);
                let t = totals.entry(id.clone()).or_default();
                match apply_one(&mut work.objects[idx], &clamped.kind, t) {
                    Ok(done) => {
                        if done == ActionKind::Prune {
                            work.objects.remove(idx);
                        }
                        report.applied.push(AppliedAction {
                            rule_id: rule.rule_id.clone(),
                            object_id: id.clone(),
                            property: a.property,
                            requested: a.kind.clone(),
                            clamped: done,
                        });
                    }
                    Err(reason) => report.skipped.push(SkippedAction {
                        rule_id: rule.rule_id.clone(),
                        object_id: Some(id.clone()),
                        action: Some(a.kind.clone()),
                        reason,
                    }),
                }
            }
        }
    }

    report.deltas = scene
        .objects
        .iter()
        .filter_map(|o| object_delta(o, work.object(o.id())))
        .collect();
    Ok((work, report))
}
