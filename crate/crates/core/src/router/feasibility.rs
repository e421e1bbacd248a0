//! Arrangement requirements of each renderer.

use serde::{Deserialize, Serialize};

use super::{RendererClass, RouterError};
use crate::context::SpeakerLayout;
use crate::dsp::{BAND_CENTERS_HZ, DEFAULT_SAMPLE_RATE};
use crate::geometry::{azimuth_difference, Direction3};
use crate::renderers::{ambi_mm_decode, vbap_gains, RenderError};
use crate::scene::AudioObject;

/// Maximum spacing between neighbouring speakers of a WFS segment (m).
pub const WFS_MAX_SPACING_M: f64 = 0.5;
pub const WFS_MIN_SPEAKERS: usize = 4;
/// Energy below a speaker's low band edge, relative to the object's total,
/// above which the speaker is excluded for that object.
pub const BAND_EXCLUSION_DB: f64 = -30.0;
/// Highest ambisonic order always listed in feasibility tables.
const LISTED_AMBI_ORDER: u32 = 3;

/// One row of a feasibility table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub renderer: RendererClass,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Layout indices the renderer would use.
    #[serde(skip)]
    pub subset: Vec<usize>,
}

/// Speakers able to reproduce the object's low-frequency content. Falls
/// back to every speaker when none qualifies.
pub fn usable_speakers(layout: &SpeakerLayout, object: &AudioObject) -> Vec<usize> {
    let all: Vec<usize> = (0..layout.len()).collect();
    if object.is_empty() {
        return all;
    }
    let powers: Vec<f64> = object
        .spectrum(DEFAULT_SAMPLE_RATE as f64)
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let total: f64 = powers.iter().sum();
    if total <= 0.0 {
        return all;
    }
    let threshold = 10f64.powf(BAND_EXCLUSION_DB / 10.0);
    let kept: Vec<usize> = layout
        .speakers
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let below: f64 = BAND_CENTERS_HZ
                .iter()
                .zip(&powers)
                .filter(|(fc, _)| **fc < s.bandwidth_hz.low)
                .map(|(_, p)| p)
                .sum();
            below / total <= threshold
        })
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        all
    } else {
        kept
    }
}

/// Contiguous runs (in azimuth order) of speakers no more than
/// [`WFS_MAX_SPACING_M`] apart. A closed ring is returned as one run and
/// flagged `true`.
fn wfs_segments(dirs: &[Direction3], subset: &[usize]) -> (Vec<Vec<usize>>, bool) {
    let mut order: Vec<usize> = subset.to_vec();
    order.sort_by(|&a, &b| {
        dirs[a]
            .azimuth_deg
            .partial_cmp(&dirs[b].azimuth_deg)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n = order.len();
    if n == 0 {
        return (vec![], false);
    }
    let close = |a: usize, b: usize| match (dirs[a].position(), dirs[b].position()) {
        (Some(p), Some(q)) => p.distance(&q) <= WFS_MAX_SPACING_M + 1e-9,
        _ => false,
    };
    let gaps: Vec<usize> = (0..n).filter(|&k| !close(order[k], order[(k + 1) % n])).collect();
    if gaps.is_empty() {
        return (vec![order], n > 1);
    }
    // each run starts right after a gap and ends at the next gap
    let runs = gaps
        .iter()
        .enumerate()
        .map(|(g, &end_prev)| {
            let end = gaps[(g + 1) % gaps.len()];
            let mut run = Vec::new();
            let mut k = (end_prev + 1) % n;
            loop {
                run.push(order[k]);
                if k == end {
                    break;
                }
                k = (k + 1) % n;
            }
            run
        })
        .collect();
    (runs, false)
}

/// Whether `az` lies on the counter-clockwise arc from the first to the
/// last speaker of `run`.
fn within_span(az: f64, dirs: &[Direction3], run: &[usize], closed: bool) -> bool {
    if closed {
        return true;
    }
    let first = dirs[run[0]].azimuth_deg;
    let last = dirs[run[run.len() - 1]].azimuth_deg;
    let span = azimuth_difference(last, first).rem_euclid(360.0);
    let offset = azimuth_difference(az, first).rem_euclid(360.0);
    offset <= span + 1e-9
}

fn wfs_subset(object: &AudioObject, dirs: &[Direction3], subset: &[usize]) -> Result<Vec<usize>, String> {
    let (runs, closed) = wfs_segments(dirs, subset);
    let long: Vec<&Vec<usize>> = runs.iter().filter(|r| r.len() >= WFS_MIN_SPEAKERS).collect();
    if long.is_empty() {
        return Err(format!(
            "needs ≥{WFS_MIN_SPEAKERS} speakers spaced ≤{WFS_MAX_SPACING_M} m"
        ));
    }
    let pos = object.basic.position;
    let run = long
        .into_iter()
        .find(|r| within_span(pos.azimuth_deg, dirs, r, closed))
        .ok_or_else(|| "direction outside every speaker segment".to_string())?;
    if let Some(d) = pos.distance_m {
        let far = run.iter().all(|&i| dirs[i].distance_m.unwrap_or(f64::INFINITY) < d);
        if !far {
            return Err("source not behind the speaker segment".into());
        }
    }
    Ok(run.clone())
}

/// Checks one renderer over `subset` (layout indices). Returns the indices
/// it would actually drive, or the reason it cannot be used.
pub fn check_renderer(
    class: RendererClass,
    layout: &SpeakerLayout,
    object: &AudioObject,
    subset: &[usize],
) -> Result<Vec<usize>, String> {
    let dirs = layout.directions();
    let sub_dirs: Vec<Direction3> = subset.iter().map(|&i| dirs[i]).collect();
    let l = subset.len();
    if l == 0 {
        return Err("no speakers".into());
    }
    match class {
        RendererClass::Ap1Nearest => Ok(subset.to_vec()),
        RendererClass::Ap3Vbap => {
            if l < 2 {
                return Err("needs ≥2 speakers".into());
            }
            match vbap_gains(&object.basic.position, &sub_dirs) {
                Ok(_) => Ok(subset.to_vec()),
                Err(RenderError::NotBracketed) => Err("direction not bracketed by the speakers".into()),
                Err(e) => Err(e.to_string()),
            }
        }
        RendererClass::AmbiMm(order) => {
            let need = 2 * order as usize + 1;
            if order == 0 {
                return Err("order must be >=1".into());
            }
            if l < need {
                return Err(format!("needs ≥{need} speakers"));
            }
            ambi_mm_decode(&sub_dirs, order)
                .map(|_| subset.to_vec())
                .map_err(|_| format!("layout is rank deficient for order {order}"))
        }
        RendererClass::WfsGainDelay => wfs_subset(object, &dirs, subset),
        RendererClass::PmSingleZone => {
            if object.basic.position.distance_m.is_none() {
                Err("object has no distance".into())
            } else {
                Ok(subset.to_vec())
            }
        }
        RendererClass::Diffuse => {
            if l < 2 {
                Err("needs ≥2 speakers".into())
            } else {
                Ok(subset.to_vec())
            }
        }
    }
}

/// Renderer classes listed in feasibility tables for a layout of `n` speakers.
pub fn candidate_classes(n: usize) -> Vec<RendererClass> {
    let max_order = LISTED_AMBI_ORDER.max((n.saturating_sub(1) / 2) as u32);
    let mut v = vec![RendererClass::Ap1Nearest, RendererClass::Ap3Vbap];
    v.extend((1..=max_order).map(RendererClass::AmbiMm));
    v.extend([RendererClass::WfsGainDelay, RendererClass::PmSingleZone, RendererClass::Diffuse]);
    v
}

/// Every candidate renderer with its verdict for `object`.
pub fn feasibility_table(layout: &SpeakerLayout, object: &AudioObject) -> Result<Vec<Feasibility>, RouterError> {
    if layout.is_empty() {
        return Err(RouterError::EmptyLayout);
    }
    let usable = usable_speakers(layout, object);
    Ok(candidate_classes(layout.len())
        .into_iter()
        .map(|renderer| match check_renderer(renderer, layout, object, &usable) {
            Ok(subset) => Feasibility {
                renderer,
                feasible: true,
                reason: None,
                subset,
            },
            Err(reason) => Feasibility {
                renderer,
                feasible: false,
                reason: Some(reason),
                subset: vec![],
            },
        })
        .collect())
}

pub fn feasible_renderers(layout: &SpeakerLayout, object: &AudioObject) -> Result<Vec<RendererClass>, RouterError> {
    Ok(feasibility_table(layout, object)?
        .into_iter()
        .filter(|f| f.feasible)
        .map(|f| f.renderer)
        .collect())
}
