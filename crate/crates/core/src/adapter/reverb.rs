//! Reverb tail adaptation to the reproduction room.
//!
//! The reproduced tail is modelled as the product of the production and room
//! exponential envelopes, so `1/τ_comb = 1/τ_p + 1/τ_r`.

use serde::{Deserialize, Serialize};

use super::action::clamp_scale;
use super::AdapterError;
use crate::scene::ReverbMetadata;

/// Decay constant assigned to bands the room alone already over-damps.
pub const MAX_TAU_S: f64 = 10.0;

/// Decay of the product of two exponential envelopes.
pub fn combined_tau(tau_p: f64, tau_r: f64) -> f64 {
    if tau_r.is_infinite() {
        return tau_p;
    }
    1.0 / (1.0 / tau_p + 1.0 / tau_r)
}

/// Production decay that reproduces `target` through a room of decay `room`,
/// or `None` when `room <= target`.
pub fn production_tau(target: f64, room: f64) -> Option<f64> {
    if room.is_infinite() {
        return Some(target);
    }
    (room > target).then(|| target * room / (room - target))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverbAdaptation {
    pub reverb: ReverbMetadata,
    /// Tail band indices whose target the room makes unreachable.
    pub infeasible_bands: Vec<usize>,
}

fn check_taus(name: &str, taus: &[f64]) -> Result<(), AdapterError> {
    match taus.iter().position(|t| !(*t > 0.0)) {
        Some(i) => Err(AdapterError::NonPositiveTau {
            field: format!("{name}[{i}]"),
            value: taus[i],
        }),
        None => Ok(()),
    }
}

/// Rewrites each tail band's decay so the reproduced tail approaches the
/// target. `room_tau_s` and `target_tau_s` are aligned with the tail bands;
/// the change per band is bounded to a factor in `[1 - tolerance,
/// 1 + tolerance]` of the original decay.
pub fn adapt_reverb(
    reverb: &ReverbMetadata,
    room_tau_s: &[f64],
    target_tau_s: &[f64],
    tolerance: f64,
) -> Result<ReverbAdaptation, AdapterError> {
    let n = reverb.tail_bands.len();
    if room_tau_s.len() != n || target_tau_s.len() != n {
        return Err(AdapterError::LengthMismatch(format!(
            "{n} tail bands, {} room taus, {} target taus",
            room_tau_s.len(),
            target_tau_s.len()
        )));
    }
    let originals: Vec<f64> = reverb.tail_bands.iter().map(|b| b.decay_tau_s).collect();
    check_taus("tail_bands.decay_tau_s", &originals)?;
    check_taus("room_decay_tau_s", room_tau_s)?;
    check_taus("target_tau_s", target_tau_s)?;

    let mut out = reverb.clone();
    let mut infeasible_bands = Vec::new();
    for (i, band) in out.tail_bands.iter_mut().enumerate() {
        let wanted = production_tau(target_tau_s[i], room_tau_s[i]).unwrap_or_else(|| {
            infeasible_bands.push(i);
            MAX_TAU_S
        });
        band.decay_tau_s = originals[i] * clamp_scale(wanted / originals[i], tolerance);
    }
    Ok(ReverbAdaptation {
        reverb: out,
        infeasible_bands,
    })
}
