//! Team-preference level personalization.
//!
//! Objects opt in through a group tag of the form `<team>_<role>`, e.g.
//! `home_crowd` or `away_commentary`.

use super::action::{ActionKind, AdaptationAction};
use crate::context::ListenerInfo;
use crate::scene::Scene;

pub const PERSONALIZE_GAIN_DB: f64 = 3.0;
const PERSONALIZE_REASON: &str = "personalize";

fn team_of(group: &str) -> Option<&str> {
    group.split_once('_').map(|(team, _)| team).filter(|t| !t.is_empty())
}

/// `+gain_db` for the preferred team's objects, `-gain_db` for every other
/// team's. Untagged objects are left alone.
pub fn personalize_levels_with(scene: &Scene, listener: &ListenerInfo, gain_db: f64) -> Vec<AdaptationAction> {
    let Some(pref) = listener.team_preference.as_deref() else {
        return vec![];
    };
    scene
        .objects
        .iter()
        .filter_map(|o| {
            let group = o.basic.group.as_deref()?;
            let team = team_of(group)?;
            let db = if team == pref { gain_db } else { -gain_db };
            Some(AdaptationAction::new(o.id(), ActionKind::GainOffset { db }, PERSONALIZE_REASON))
        })
        .collect()
}

pub fn personalize_levels(scene: &Scene, listener: &ListenerInfo) -> Vec<AdaptationAction> {
    personalize_levels_with(scene, listener, PERSONALIZE_GAIN_DB)
}
