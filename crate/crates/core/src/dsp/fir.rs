use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Filters shorter than this are convolved directly.
const DIRECT_MAX_TAPS: usize = 64;

struct Spectral {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    taps_spectrum: Vec<Complex64>,
}

/// Streaming FIR filter (overlap-save for long filters).
pub struct FirFilter {
    taps: Vec<f64>,
    /// Last `taps.len() - 1` inputs, oldest first.
    history: Vec<f64>,
    spectral: Option<Spectral>,
}

impl Clone for FirFilter {
    fn clone(&self) -> Self {
        Self {
            taps: self.taps.clone(),
            history: self.history.clone(),
            spectral: None,
        }
    }
}

impl std::fmt::Debug for FirFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FirFilter").field("taps", &self.taps.len()).finish()
    }
}

impl FirFilter {
    pub fn new(taps: Vec<f64>) -> Self {
        assert!(!taps.is_empty(), "FIR filter needs at least one tap");
        let history = vec![0.0; taps.len() - 1];
        Self {
            taps,
            history,
            spectral: None,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn process(&mut self, input: &[f64], out: &mut [f64]) {
        debug_assert_eq!(input.len(), out.len());
        if input.is_empty() {
            return;
        }
        let t = self.taps.len();
        if t <= DIRECT_MAX_TAPS {
            self.process_direct(input, out);
        } else {
            self.process_fft(input, out);
        }
        // update history
        if t > 1 {
            let h = t - 1;
            if input.len() >= h {
                self.history.copy_from_slice(&input[input.len() - h..]);
            } else {
                self.history.drain(..input.len());
                self.history.extend_from_slice(input);
            }
        }
    }

    fn process_direct(&self, input: &[f64], out: &mut [f64]) {
        let h = self.history.len();
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, tap) in self.taps.iter().enumerate() {
                let idx = h as isize + k as isize - j as isize;
                let x = if idx >= h as isize {
                    input[idx as usize - h]
                } else {
                    self.history[idx as usize]
                };
                acc += tap * x;
            }
            *o = acc;
        }
    }

    fn process_fft(&mut self, input: &[f64], out: &mut [f64]) {
        let h = self.history.len();
        let need = h + input.len();
        let size = need.next_power_of_two();
        if self.spectral.as_ref().map(|s| s.size) != Some(size) {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut taps_spectrum: Vec<Complex64> = self
                .taps
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
                .take(size)
                .collect();
            forward.process(&mut taps_spectrum);
            self.spectral = Some(Spectral {
                size,
                forward,
                inverse,
                taps_spectrum,
            });
        }
        let sp = self.spectral.as_ref().expect("planned above");
        let mut buf: Vec<Complex64> = self
            .history
            .iter()
            .chain(input.iter())
            .map(|&v| Complex64::new(v, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(size)
            .collect();
        sp.forward.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&sp.taps_spectrum) {
            *b *= t;
        }
        sp.inverse.process(&mut buf);
        let scale = 1.0 / size as f64;
        // linear convolution samples h..h+len are free of circular wrap
        for (k, o) in out.iter_mut().enumerate() {
            *o = buf[h + k].re * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(taps: &[f64], x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|n| {
                taps.iter()
                    .enumerate()
                    .filter(|(j, _)| *j <= n)
                    .map(|(j, t)| t * x[n - j])
                    .sum()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 2654435761usize) % 1000) as f64 / 500.0 - 1.0).collect()
    }

    #[test]
    fn short_and_long_filters_match_naive_convolution() {
        let x = signal(3000);
        for len in [1usize, 5, 64, 65, 300, 1024] {
            let taps: Vec<f64> = (0..len).map(|i| ((i * 31) % 17) as f64 / 17.0 - 0.4).collect();
            let want = naive(&taps, &x);
            let mut f = FirFilter::new(taps);
            let mut got = Vec::new();
            for chunk in x.chunks(256) {
                let mut o = vec![0.0; chunk.len()];
                f.process(chunk, &mut o);
                got.extend(o);
            }
            for (a, b) in want.iter().zip(&got) {
                assert!((a - b).abs() < 1e-9, "len {len}");
            }
        }
    }

    #[test]
    fn unit_tap_is_identity() {
        let x = signal(100);
        let mut f = FirFilter::new(vec![1.0]);
        let mut o = vec![0.0; 100];
        f.process(&x, &mut o);
        assert_eq!(o, x);
    }
}
