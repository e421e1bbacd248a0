use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Decorrelation filter length.
pub const DECORRELATOR_TAPS: usize = 1024;
/// Base seed for decorrelation filters; filter `i` uses `DECORRELATOR_SEED + i`.
pub const DECORRELATOR_SEED: u64 = 0x5EED_D1FF;

/// A random-phase all-pass FIR: unit magnitude on every DFT bin of length
/// `taps`, uniformly random phase, real-valued impulse response.
pub fn random_phase_allpass(taps: usize, seed: u64) -> Vec<f64> {
    assert!(taps >= 2 && taps.is_multiple_of(2), "all-pass length must be even");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = taps / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); taps];
    // DC and Nyquist must be real: pick a random sign
    spec[0] = Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0);
    spec[half] = Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0);
    for k in 1..half {
        let phase = rng.gen_range(-PI..PI);
        let c = Complex64::from_polar(1.0, phase);
        spec[k] = c;
        spec[taps - k] = c.conj();
    }
    FftPlanner::new().plan_fft_inverse(taps).process(&mut spec);
    spec.iter().map(|c| c.re / taps as f64).collect()
}
