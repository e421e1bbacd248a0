//! The renderer bank: per-object driving functions (gains, delays, filters)
//! and the block renderer that applies them.
//!
//! Speaker directions passed to renderers are listener-relative.

mod ambi;
mod ap1;
mod diffuse;
mod lane;
mod pm;
mod vbap;
mod wfs;

pub use ambi::{ambi_encode, ambi_gains, ambi_mm_decode, encoding_matrix, mode_matching_residual, AmbiCoeffs};
pub use ap1::nearest_speaker_gains;
pub use diffuse::diffuse_gains;
pub use lane::{render_block, RenderState};
pub use pm::{
    default_control_points, default_pm_grid, green, pm_filters, pm_fir, PmSolution, DEFAULT_BETA,
    PM_FIR_TAPS,
};
pub use vbap::vbap_gains;
pub use wfs::wfs_drive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Direction3;
use crate::router::RendererClass;

/// Speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("renderer_bank: no speakers in subset")]
    EmptySubset,
    #[error("renderer_bank: direction not bracketed by any speaker pair or triplet")]
    NotBracketed,
    #[error("renderer_bank: layout is rank deficient for ambisonic order {0}")]
    RankDeficient(u32),
    #[error("renderer_bank: virtual source lies inside the speaker array")]
    SourceInsideArray,
    #[error("renderer_bank: singular pressure-matching system (beta = 0)")]
    SingularSystem,
    #[error("renderer_bank: diffuse rendering needs at least 2 speakers, got {0}")]
    TooFewSpeakers(usize),
    #[error("renderer_bank: render state does not match the driving function or block size")]
    StateMismatch,
    #[error("renderer_bank: {0} requires a distance")]
    MissingDistance(&'static str),
}

/// Per-speaker linear gains aligned with the speaker subset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainVector(pub Vec<f64>);

impl GainVector {
    pub fn power(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum()
    }

    /// Scales to unit power; all-zero vectors are returned unchanged.
    pub fn normalized(mut self) -> Self {
        let p = self.power();
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            self.0.iter_mut().for_each(|g| *g *= s);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerDrive {
    pub gain: f64,
    pub delay_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Vec<f64>>,
}

/// What one renderer computes for one object: one entry per subset speaker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingFunction {
    pub speakers: Vec<SpeakerDrive>,
}

impl DrivingFunction {
    pub fn from_gains(g: &GainVector) -> Self {
        Self {
            speakers: g
                .0
                .iter()
                .map(|&gain| SpeakerDrive {
                    gain,
                    delay_s: 0.0,
                    filter: None,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.speakers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speakers.is_empty()
    }

    /// Longest delay plus filter length, in samples.
    pub fn span_samples(&self, sample_rate: f64) -> usize {
        self.speakers
            .iter()
            .map(|s| (s.delay_s * sample_rate).ceil() as usize + 4 + s.filter.as_ref().map_or(1, Vec::len))
            .max()
            .unwrap_or(0)
    }

    /// Per-speaker impulse responses of length `len` (gain, delay and filter).
    pub fn impulse_responses(&self, sample_rate: f64, len: usize) -> Vec<Vec<f64>> {
        let mut impulse = vec![0.0; len];
        if len > 0 {
            impulse[0] = 1.0;
        }
        let mut state = RenderState::new(self, sample_rate, len);
        render_block(&impulse, self, &mut state).expect("state built for this drive")
    }
}

/// Renderer parameters that are not part of the class itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    /// Pressure-matching regularization.
    pub beta: f64,
    pub sample_rate: f64,
}

impl Default for RenderParams {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            sample_rate: crate::dsp::DEFAULT_SAMPLE_RATE as f64,
        }
    }
}

/// Computes the driving function of `class` for an object at `position`
/// over `subset` (listener-relative speaker directions with distances).
///
/// Panning renderers (AP1, VBAP, ambisonics) are power-normalized to
/// Σg² = 1. Pressure-matching filters are normalized to unit total energy.
pub fn driving_function(
    class: RendererClass,
    position: &Direction3,
    subset: &[Direction3],
    params: &RenderParams,
) -> Result<DrivingFunction, RenderError> {
    if subset.is_empty() {
        return Err(RenderError::EmptySubset);
    }
    match class {
        RendererClass::Ap1Nearest => Ok(DrivingFunction::from_gains(&nearest_speaker_gains(position, subset))),
        RendererClass::Ap3Vbap => Ok(DrivingFunction::from_gains(&vbap_gains(position, subset)?)),
        RendererClass::AmbiMm(order) => {
            let dec = ambi_mm_decode(subset, order)?;
            Ok(DrivingFunction::from_gains(&ambi_gains(&dec, position, order).normalized()))
        }
        RendererClass::WfsGainDelay => wfs_drive(position, subset, SPEED_OF_SOUND),
        RendererClass::PmSingleZone => {
            let target = position.position().ok_or(RenderError::MissingDistance("pressure matching"))?;
            let speakers = subset
                .iter()
                .map(|s| s.position().ok_or(RenderError::MissingDistance("pressure matching")))
                .collect::<Result<Vec<_>, _>>()?;
            let firs = pm_fir(
                &speakers,
                &default_control_points(),
                target,
                params.beta,
                SPEED_OF_SOUND,
                params.sample_rate,
                PM_FIR_TAPS,
            )?;
            Ok(DrivingFunction {
                speakers: firs
                    .into_iter()
                    .map(|h| SpeakerDrive {
                        gain: 1.0,
                        delay_s: 0.0,
                        filter: Some(h),
                    })
                    .collect(),
            })
        }
        RendererClass::Diffuse => diffuse_gains(subset.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_response_reflects_gain_and_delay() {
        let d = DrivingFunction {
            speakers: vec![SpeakerDrive {
                gain: 0.5,
                delay_s: 10.0 / 48_000.0,
                filter: Some(vec![1.0, 0.5]),
            }],
        };
        let h = d.impulse_responses(48_000.0, 32);
        assert_eq!(h[0][10], 0.5);
        assert_eq!(h[0][11], 0.25);
        assert_eq!(h[0].iter().filter(|v| **v != 0.0).count(), 2);
    }
}
