//! Octave-band analysis with Butterworth band-pass filter banks.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::DspError;

pub const NUM_BANDS: usize = 7;
pub const BAND_CENTERS_HZ: [f64; NUM_BANDS] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0];
/// Level reported for silent bands.
pub const LEVEL_FLOOR_DB: f64 = -120.0;
/// Shortest block accepted for analysis.
pub const MIN_ANALYSIS_LEN: usize = 4096;
/// Low-pass prototype order of each band-pass (the band-pass itself has
/// twice as many poles). Order 8 keeps the adjacent-band leakage of a tone
/// at a band center around -52 dB.
const PROTOTYPE_ORDER: usize = 8;
/// Longest reflected prefix used to settle the filters.
const MAX_PRIMING: usize = 16_384;

pub type BandLevels = [f64; NUM_BANDS];

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn run(&self, x: &mut [f64]) {
        // b1 is zero for these band-pass sections
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b0 * *v + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
            x2 = x1;
            x1 = *v;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }

    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b0 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }
}

/// One octave band-pass filter per band center, designed for a sample rate.
#[derive(Debug, Clone)]
pub struct BandFilterBank {
    sample_rate: f64,
    bands: Vec<Vec<Biquad>>,
}

impl BandFilterBank {
    pub fn new(sample_rate: f64) -> Self {
        let bands = BAND_CENTERS_HZ
            .iter()
            .map(|&fc| design_band_pass(fc / 2f64.sqrt(), fc * 2f64.sqrt(), sample_rate))
            .collect();
        Self { sample_rate, bands }
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Magnitude response of band `band` at `freq_hz`.
    pub fn magnitude(&self, band: usize, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate;
        self.bands[band]
            .iter()
            .map(|bq| bq.response(w))
            .product::<Complex64>()
            .norm()
    }

    /// Per-band mean-square power of `block`.
    pub fn band_powers(&self, block: &[f64]) -> [f64; NUM_BANDS] {
        let mut out = [0.0; NUM_BANDS];
        if block.iter().all(|v| *v == 0.0) {
            return out;
        }
        // Odd reflection about the first sample continues the signal with
        // matching value and slope, so the filters start settled.
        let prime = block.len().saturating_sub(1).min(MAX_PRIMING);
        let mut padded: Vec<f64> = (1..=prime).rev().map(|k| 2.0 * block[0] - block[k]).collect();
        padded.extend_from_slice(block);
        for (band, sections) in self.bands.iter().enumerate() {
            let mut x = padded.clone();
            for bq in sections {
                bq.run(&mut x);
            }
            out[band] = super::mean_square(&x[prime..]);
        }
        out
    }

    /// Filters `x` through band `band` from a zero initial state.
    pub fn filter_band(&self, band: usize, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for bq in &self.bands[band] {
            bq.run(&mut y);
        }
        y
    }

    /// Per-band level in dB relative to full scale, floored.
    pub fn levels(&self, block: &[f64]) -> Result<BandLevels, DspError> {
        if block.len() < MIN_ANALYSIS_LEN {
            return Err(DspError::BlockTooShort {
                len: block.len(),
                min: MIN_ANALYSIS_LEN,
            });
        }
        Ok(self.band_powers(block).map(power_to_db))
    }
}

/// Mean-square power to dB, floored at [`LEVEL_FLOOR_DB`].
pub fn power_to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(LEVEL_FLOOR_DB)
    } else {
        LEVEL_FLOOR_DB
    }
}

/// Power sum of band levels in dB.
pub fn band_power_sum_db(levels: &[f64]) -> f64 {
    power_to_db(
        levels
            .iter()
            .filter(|l| **l > LEVEL_FLOOR_DB)
            .map(|l| 10f64.powf(l / 10.0))
            .sum(),
    )
}

/// Octave-band levels (dBFS, 125 Hz to 8 kHz) of a block.
pub fn octave_band_levels(block: &[f64], sample_rate: f64) -> Result<BandLevels, DspError> {
    BandFilterBank::new(sample_rate).levels(block)
}

/// Butterworth band-pass between `f_lo` and `f_hi`, as cascaded biquads
/// normalized to unit gain at the band center.
fn design_band_pass(f_lo: f64, f_hi: f64, fs: f64) -> Vec<Biquad> {
    let n = PROTOTYPE_ORDER;
    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let (w1, w2) = (warp(f_lo), warp(f_hi));
    let w0 = (w1 * w2).sqrt();
    let bw = w2 - w1;
    let w_center = 2.0 * (w0 / (2.0 * fs)).atan();

    let mut sections = Vec::with_capacity(n);
    for k in 0..n {
        let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
        let p = Complex64::from_polar(1.0, theta);
        // s^2 - p·B·s + w0^2 = 0
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
        for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
            if s.im <= 0.0 {
                continue;
            }
            let z = (2.0 * fs + s) / (2.0 * fs - s);
            let mut bq = Biquad {
                b0: 1.0,
                b2: -1.0,
                a1: -2.0 * z.re,
                a2: z.norm_sqr(),
            };
            let g = bq.response(w_center).norm();
            bq.b0 /= g;
            bq.b2 /= g;
            sections.push(bq);
        }
    }
    debug_assert_eq!(sections.len(), n);
    sections
}
