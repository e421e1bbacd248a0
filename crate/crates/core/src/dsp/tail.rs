//! Late reverberation tails: synthesis from tail-band metadata and decay
//! estimation by backward integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::BandFilterBank;

/// Synthesizes a noise tail with onset, linear attack, peak amplitude
/// `amplitude_db` and exponential amplitude decay `exp(-t / decay_tau_s)`.
///
/// When `band` is given, the noise is restricted to that octave band.
pub fn render_tail(
    onset_s: f64,
    attack_s: f64,
    amplitude_db: f64,
    decay_tau_s: f64,
    band: Option<usize>,
    sample_rate: f64,
    len: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if let Some(b) = band {
        noise = BandFilterBank::new(sample_rate).filter_band(b, &noise);
    }
    let amp = 10f64.powf(amplitude_db / 20.0);
    noise
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let t = n as f64 / sample_rate - onset_s;
            if t < 0.0 {
                0.0
            } else if t < attack_s {
                v * amp * t / attack_s
            } else {
                v * amp * (-(t - attack_s) / decay_tau_s).exp()
            }
        })
        .collect()
}

/// Fits an exponential amplitude decay constant (seconds) from the
/// Schroeder energy decay curve between -5 and -25 dB.
pub fn fit_decay_tau(signal: &[f64], sample_rate: f64) -> Option<f64> {
    let mut edc = vec![0.0; signal.len()];
    let mut acc = 0.0;
    for (i, v) in signal.iter().enumerate().rev() {
        acc += v * v;
        edc[i] = acc;
    }
    let total = edc.first().copied().filter(|e| *e > 0.0)?;
    let (mut sx, mut sy, mut sxx, mut sxy, mut n) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, e) in edc.iter().enumerate() {
        let db = 10.0 * (e / total).log10();
        if (-25.0..=-5.0).contains(&db) {
            let t = i as f64 / sample_rate;
            sx += t;
            sy += db;
            sxx += t * t;
            sxy += t * db;
            n += 1.0;
        }
    }
    if n < 2.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    // energy falls as exp(-2t/τ): 10·log10 gives slope = -20 / (τ·ln 10)
    (slope < 0.0).then(|| -20.0 / (slope * std::f64::consts::LN_10))
}
