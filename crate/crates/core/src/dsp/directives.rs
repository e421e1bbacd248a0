//! Signal-domain adaptation directives, executed once per stem at render time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{random_phase_allpass, FirFilter, FractionalDelay, DECORRELATOR_TAPS};

/// Frequencies between which a spectral tilt is specified.
pub const TILT_LOW_HZ: f64 = 250.0;
pub const TILT_HIGH_HZ: f64 = 4000.0;
/// Shelf transition frequency (geometric mean of the two reference points).
const TILT_CORNER_HZ: f64 = 1000.0;

/// Accumulated signal edits for one object.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalDirectives {
    /// Response at 4 kHz relative to 250 Hz, in dB.
    pub tilt_db: f64,
    /// Positive values delay the stem.
    pub time_shift_ms: f64,
    /// Decorrelation amount in [0, 1].
    pub decorrelate: f64,
}

impl SignalDirectives {
    pub fn is_identity(&self) -> bool {
        self.tilt_db == 0.0 && self.time_shift_ms == 0.0 && self.decorrelate == 0.0
    }
}

/// First-order shelving filter realizing a spectral tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltFilter {
    b0: f64,
    b1: f64,
    a1: f64,
    sample_rate: f64,
}

impl TiltFilter {
    /// Designs a shelf whose response at 4 kHz is `tilt_db` relative to its
    /// response at 250 Hz, with unity gain at 250 Hz.
    pub fn design(tilt_db: f64, sample_rate: f64) -> Self {
        // bisection on the asymptotic shelf ratio (in dB), which maps
        // monotonically onto the ratio between the two reference points
        let (mut lo, mut hi) = (-120.0, 120.0);
        let mut filt = Self::shelf(0.0, sample_rate);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            filt = Self::shelf(mid, sample_rate);
            let got = filt.tilt_db();
            if (got - tilt_db).abs() < 1e-12 {
                break;
            }
            if got < tilt_db {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let g = filt.magnitude(TILT_LOW_HZ);
        filt.b0 /= g;
        filt.b1 /= g;
        filt
    }

    /// Analog prototype (s + wz)/(s + wp) with HF/LF ratio `shelf_db`,
    /// bilinear-transformed with prewarping at the corner.
    fn shelf(shelf_db: f64, fs: f64) -> Self {
        let g = 10f64.powf(shelf_db / 20.0);
        let wc = 2.0 * fs * (PI * TILT_CORNER_HZ / fs).tan();
        let wz = wc / g.sqrt();
        let wp = wc * g.sqrt();
        let k = 2.0 * fs;
        let a0 = k + wp;
        Self {
            b0: (k + wz) / a0,
            b1: (wz - k) / a0,
            a1: (wp - k) / a0,
            sample_rate: fs,
        }
    }

    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.sample_rate);
        ((self.b0 + self.b1 * z1) / (1.0 + self.a1 * z1)).norm()
    }

    /// Realized tilt in dB.
    pub fn tilt_db(&self) -> f64 {
        20.0 * (self.magnitude(TILT_HIGH_HZ) / self.magnitude(TILT_LOW_HZ)).log10()
    }

    pub fn process(&self, x: &[f64]) -> Vec<f64> {
        let (mut x1, mut y1) = (0.0, 0.0);
        x.iter()
            .map(|&v| {
                let y = self.b0 * v + self.b1 * x1 - self.a1 * y1;
                x1 = v;
                y1 = y;
                y
            })
            .collect()
    }
}

pub fn spectral_tilt(x: &[f64], tilt_db: f64, sample_rate: f64) -> Vec<f64> {
    if tilt_db == 0.0 {
        return x.to_vec();
    }
    TiltFilter::design(tilt_db, sample_rate).process(x)
}

/// Shifts a whole stem by `shift_ms`; negative shifts advance it. The length
/// is preserved (zero-filled at the exposed end).
pub fn time_shift(x: &[f64], shift_ms: f64, sample_rate: f64) -> Vec<f64> {
    if shift_ms == 0.0 || x.is_empty() {
        return x.to_vec();
    }
    let shift = shift_ms * 1e-3 * sample_rate;
    let whole = shift.floor();
    let frac = shift - whole;
    let whole = whole as isize;
    let len = x.len() as isize;
    // integer part by indexing, fractional remainder through the delay line
    let moved: Vec<f64> = (0..len)
        .map(|n| {
            let src = n - whole;
            if (0..len).contains(&src) {
                x[src as usize]
            } else {
                0.0
            }
        })
        .collect();
    if frac == 0.0 {
        return moved;
    }
    let mut dl = FractionalDelay::new(sample_rate);
    let mut out = vec![0.0; moved.len()];
    dl.process(&moved, frac / sample_rate, &mut out)
        .expect("fractional part is non-negative");
    out
}

/// Mixes the stem with a seeded all-pass copy: `cos(θ)·x + sin(θ)·A(x)`,
/// θ = amount·π/2.
pub fn decorrelate(x: &[f64], amount: f64, seed: u64) -> Vec<f64> {
    let amount = amount.clamp(0.0, 1.0);
    if amount == 0.0 {
        return x.to_vec();
    }
    let theta = amount * PI / 2.0;
    let mut fir = FirFilter::new(random_phase_allpass(DECORRELATOR_TAPS, seed));
    let mut wet = vec![0.0; x.len()];
    fir.process(x, &mut wet);
    x.iter()
        .zip(&wet)
        .map(|(d, w)| theta.cos() * d + theta.sin() * w)
        .collect()
}

/// Applies tilt, then time shift, then decorrelation.
pub fn apply_directives(
    stem: &[f64],
    directives: &SignalDirectives,
    sample_rate: f64,
    seed: u64,
) -> Vec<f64> {
    if directives.is_identity() {
        return stem.to_vec();
    }
    let tilted = spectral_tilt(stem, directives.tilt_db, sample_rate);
    let shifted = time_shift(&tilted, directives.time_shift_ms, sample_rate);
    decorrelate(&shifted, directives.decorrelate, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 48_000.0;

    fn sine(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / FS).sin()).collect()
    }

    /// Steady-state amplitude via correlation with quadrature references.
    fn measured_gain(f: f64, tilt: f64) -> f64 {
        let n = 48_000;
        let y = spectral_tilt(&sine(f, n), tilt, FS);
        let (mut s, mut c) = (0.0, 0.0);
        for (i, v) in y.iter().enumerate().skip(n / 2) {
            let ph = 2.0 * PI * f * i as f64 / FS;
            s += v * ph.sin();
            c += v * ph.cos();
        }
        2.0 * (s * s + c * c).sqrt() / (n / 2) as f64
    }

    #[test]
    fn empty_directives_are_identity() {
        let x = sine(440.0, 1000);
        assert_eq!(apply_directives(&x, &SignalDirectives::default(), FS, 1), x);
    }

    #[test]
    fn tilt_minus_six_measured_with_sines() {
        let lo = measured_gain(TILT_LOW_HZ, -6.0);
        let hi = measured_gain(TILT_HIGH_HZ, -6.0);
        let db = 20.0 * (hi / lo).log10();
        assert!((db + 6.0).abs() < 0.5, "{db}");
        assert!((lo - 1.0).abs() < 0.01);
    }

    #[test]
    fn designed_tilt_is_exact_on_paper() {
        for t in [-12.0, -6.0, -1.0, 2.0, 6.0] {
            assert!((TiltFilter::design(t, FS).tilt_db() - t).abs() < 1e-6);
        }
    }

    #[test]
    fn ten_ms_shift_peaks_at_480() {
        let mut x = vec![0.0; 2048];
        x[0] = 1.0;
        let y = time_shift(&x, 10.0, FS);
        assert_eq!(y[480], 1.0);
        let back = time_shift(&y, -10.0, FS);
        assert_eq!(back[0], 1.0);
    }

    #[test]
    fn full_decorrelation_preserves_energy_roughly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..48_000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = decorrelate(&x, 1.0, 3);
        let ex = super::super::mean_square(&x);
        let ey = super::super::mean_square(&y);
        assert!((10.0 * (ey / ex).log10()).abs() < 0.5);
    }
}
