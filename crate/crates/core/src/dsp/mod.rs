//! Signal primitives shared by the renderers, the monitoring unit and the
//! engine: fractional delay, FIR filtering, crossfades, octave-band analysis
//! and the signal-domain adaptation directives.
//!
//! Samples are `f64` throughout; conversion to 32-bit float happens only at
//! the file boundary.

mod allpass;
mod bands;
mod crossfade;
mod delay;
mod directives;
mod fir;
mod tail;

pub use allpass::{random_phase_allpass, DECORRELATOR_SEED, DECORRELATOR_TAPS};
pub use bands::{
    band_power_sum_db, octave_band_levels, power_to_db, BandFilterBank, BandLevels, BAND_CENTERS_HZ,
    LEVEL_FLOOR_DB, MIN_ANALYSIS_LEN, NUM_BANDS,
};
pub use crossfade::{
    equal_power_crossfade, equal_power_crossfade_ramp, equal_power_gains, CrossfadeEnvelope,
};
pub use delay::{fractional_delay, lagrange_weights, FractionalDelay};
pub use directives::{
    apply_directives, decorrelate, spectral_tilt, time_shift, SignalDirectives, TiltFilter,
};
pub use fir::FirFilter;
pub use tail::{fit_decay_tau, render_tail};

use thiserror::Error;

/// Engine block size in samples.
pub const DEFAULT_BLOCK_SIZE: usize = 1024;
/// The only supported sample rate.
pub const DEFAULT_SAMPLE_RATE: u32 = 48_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DspError {
    #[error("negative delay {0} s")]
    NegativeDelay(f64),
    #[error("block lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("block too short: {len} samples, need at least {min}")]
    BlockTooShort { len: usize, min: usize },
}

/// Mean square of a block.
pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// RMS of a block.
pub fn rms(x: &[f64]) -> f64 {
    mean_square(x).sqrt()
}

pub fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn gain_to_db(g: f64) -> f64 {
    20.0 * g.abs().log10()
}
