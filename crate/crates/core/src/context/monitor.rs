//! Microphone monitoring: octave-band noise levels and the band-SNR
//! intelligibility proxy.

use super::{ContextError, NoiseState};
use crate::dsp::{BandFilterBank, BandLevels, DspError, MIN_ANALYSIS_LEN, NUM_BANDS};

/// SNR (dB) mapped to a score of 0.
const SNR_LOW_DB: f64 = -15.0;
/// Width of the linear SNR-to-score ramp in dB.
const SNR_SPAN_DB: f64 = 30.0;

pub fn estimate_noise_level(mic_block: &[f64], sample_rate: f64) -> Result<NoiseState, ContextError> {
    let band_levels_db = BandFilterBank::new(sample_rate).levels(mic_block)?;
    Ok(NoiseState {
        band_levels_db,
        timestamp_s: 0.0,
    })
}

/// Mean over octave bands of `clamp((SNR + 15) / 30, 0, 1)`.
pub fn intelligibility_from_levels(dialogue_db: &BandLevels, masker_db: &BandLevels) -> f64 {
    let sum: f64 = dialogue_db
        .iter()
        .zip(masker_db)
        .map(|(d, m)| ((d - m - SNR_LOW_DB) / SNR_SPAN_DB).clamp(0.0, 1.0))
        .sum();
    sum / NUM_BANDS as f64
}

/// Intelligibility proxy of a dialogue block against a masker block.
pub fn estimate_intelligibility(dialogue: &[f64], masker: &[f64], sample_rate: f64) -> Result<f64, ContextError> {
    if dialogue.len() != masker.len() {
        return Err(DspError::LengthMismatch(dialogue.len(), masker.len()).into());
    }
    if dialogue.len() < MIN_ANALYSIS_LEN {
        return Err(DspError::BlockTooShort {
            len: dialogue.len(),
            min: MIN_ANALYSIS_LEN,
        }
        .into());
    }
    let bank = BandFilterBank::new(sample_rate);
    let d = bank.levels(dialogue)?;
    let m = bank.levels(masker)?;
    Ok(intelligibility_from_levels(&d, &m))
}
