//! Gain-and-delay wave field synthesis over a speaker segment.

use super::{DrivingFunction, RenderError, SpeakerDrive};
use crate::geometry::Direction3;

/// Point sources at a known distance use spherical spreading; far-field
/// objects (no distance) are rendered as a plane wave.
///
/// Point source: delay `r_i / c` and gain `(1/r_i) / sqrt(Σ 1/r_j²)`, where
/// `r_i` is the source-to-speaker distance. Delays are offset so the
/// smallest is zero. Plane wave: delay from the projection of each speaker
/// onto the propagation direction, equal gains `1/sqrt(L)`.
pub fn wfs_drive(source: &Direction3, subset: &[Direction3], c: f64) -> Result<DrivingFunction, RenderError> {
    if subset.is_empty() {
        return Err(RenderError::EmptySubset);
    }
    let speakers = subset
        .iter()
        .map(|s| s.position().ok_or(RenderError::MissingDistance("wave field synthesis")))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut delays, gains): (Vec<f64>, Vec<f64>) = match source.position() {
        Some(src) => {
            let src_dist = src.norm();
            if subset.iter().any(|s| s.distance_m.unwrap_or(0.0) >= src_dist) {
                return Err(RenderError::SourceInsideArray);
            }
            let r: Vec<f64> = speakers.iter().map(|p| p.distance(&src)).collect();
            if r.iter().any(|v| *v <= 0.0) {
                return Err(RenderError::SourceInsideArray);
            }
            let norm = r.iter().map(|v| 1.0 / (v * v)).sum::<f64>().sqrt();
            (r.iter().map(|v| v / c).collect(), r.iter().map(|v| (1.0 / v) / norm).collect())
        }
        None => {
            // the wave travels from the source direction towards the listener
            let n = source.unit();
            let g = 1.0 / (speakers.len() as f64).sqrt();
            (speakers.iter().map(|p| -p.dot(&n) / c).collect(), vec![g; speakers.len()])
        }
    };
    let min = delays.iter().copied().fold(f64::INFINITY, f64::min);
    delays.iter_mut().for_each(|d| *d -= min);
    Ok(DrivingFunction {
        speakers: gains
            .into_iter()
            .zip(delays)
            .map(|(gain, delay_s)| SpeakerDrive {
                gain,
                delay_s,
                filter: None,
            })
            .collect(),
    })
}
