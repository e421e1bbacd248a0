use super::DspError;

/// Number of interpolation points (third-order Lagrange).
const POINTS: usize = 4;

/// Lagrange weights for evaluating at offset `t` from four nodes at 0..4.
pub fn lagrange_weights(t: f64) -> [f64; POINTS] {
    let mut w = [1.0; POINTS];
    for (j, wj) in w.iter_mut().enumerate() {
        for m in 0..POINTS {
            if m != j {
                *wj *= (t - m as f64) / (j as f64 - m as f64);
            }
        }
    }
    w
}

/// A streaming delay line with 4-point Lagrange interpolation.
///
/// The nodes straddle the requested delay (`n - 1 ..= n + 2` for a delay of
/// `n + frac` samples); delays below one sample use the nodes `0..=3`.
/// Integer delays are reproduced exactly.
#[derive(Debug, Clone)]
pub struct FractionalDelay {
    sample_rate: f64,
    /// Past input, oldest first.
    tail: Vec<f64>,
}

impl FractionalDelay {
    pub fn new(sample_rate: f64) -> Self {
        Self {
            sample_rate,
            tail: Vec::new(),
        }
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn reset(&mut self) {
        self.tail.clear();
    }

    /// Delays `input` by `delay_s` seconds, writing into `out`.
    pub fn process(&mut self, input: &[f64], delay_s: f64, out: &mut [f64]) -> Result<(), DspError> {
        if delay_s < 0.0 || !delay_s.is_finite() {
            return Err(DspError::NegativeDelay(delay_s));
        }
        if input.len() != out.len() {
            return Err(DspError::LengthMismatch(input.len(), out.len()));
        }
        let d = delay_s * self.sample_rate;
        let whole = d.floor();
        // snap values within rounding noise of an integer
        let (n, frac) = if d - whole > 1.0 - 1e-9 {
            (whole as usize + 1, 0.0)
        } else if d - whole < 1e-9 {
            (whole as usize, 0.0)
        } else {
            (whole as usize, d - whole)
        };

        let need = n + POINTS;
        if self.tail.len() < need {
            let mut grown = vec![0.0; need - self.tail.len()];
            grown.extend_from_slice(&self.tail);
            self.tail = grown;
        }
        let hist = self.tail.len();
        let at = |idx: isize, tail: &[f64]| -> f64 {
            if idx < hist as isize {
                tail[idx as usize]
            } else {
                input[idx as usize - hist]
            }
        };

        if frac == 0.0 {
            for (k, o) in out.iter_mut().enumerate() {
                *o = at(hist as isize + k as isize - n as isize, &self.tail);
            }
        } else {
            let base = n.saturating_sub(1);
            let w = lagrange_weights(d - base as f64);
            for (k, o) in out.iter_mut().enumerate() {
                let now = hist as isize + k as isize;
                let mut acc = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * at(now - (base + j) as isize, &self.tail);
                }
                *o = acc;
            }
        }

        // keep exactly `hist` most recent samples
        if input.len() >= hist {
            self.tail.copy_from_slice(&input[input.len() - hist..]);
        } else {
            self.tail.drain(..input.len());
            self.tail.extend_from_slice(input);
        }
        Ok(())
    }
}

/// Convenience wrapper returning the delayed block.
pub fn fractional_delay(
    block: &[f64],
    state: &mut FractionalDelay,
    delay_s: f64,
) -> Result<Vec<f64>, DspError> {
    let mut out = vec![0.0; block.len()];
    state.process(block, delay_s, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const FS: f64 = 48_000.0;

    #[test]
    fn zero_delay_is_identity() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut st = FractionalDelay::new(FS);
        assert_eq!(fractional_delay(&x, &mut st, 0.0).unwrap(), x);
    }

    #[test]
    fn integer_delay_moves_impulse_exactly() {
        let mut x = vec![0.0; 1024];
        x[0] = 1.0;
        let mut st = FractionalDelay::new(FS);
        let y = fractional_delay(&x, &mut st, 480.0 / FS).unwrap();
        assert_eq!(y[480], 1.0);
        assert_eq!(y.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn negative_delay_rejected() {
        let mut st = FractionalDelay::new(FS);
        assert!(matches!(
            fractional_delay(&[0.0; 4], &mut st, -1e-3),
            Err(DspError::NegativeDelay(_))
        ));
    }

    #[test]
    fn half_sample_sine_matches_closed_form() {
        let f = 1000.0;
        let n = 4096;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 / FS).sin()).collect();
        let mut st = FractionalDelay::new(FS);
        let y = fractional_delay(&x, &mut st, 0.5 / FS).unwrap();
        let (mut err, mut sig) = (0.0, 0.0);
        for i in 64..n - 64 {
            let want = (2.0 * PI * f * (i as f64 - 0.5) / FS).sin();
            err += (y[i] - want).powi(2);
            sig += want * want;
        }
        let db = 10.0 * (err / sig).log10();
        assert!(db < -60.0, "error {db} dB");
    }

    #[test]
    fn blockwise_equals_one_pass() {
        let x: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let delay = 123.37 / FS;
        let mut one = FractionalDelay::new(FS);
        let whole = fractional_delay(&x, &mut one, delay).unwrap();
        let mut st = FractionalDelay::new(FS);
        let mut pieces = Vec::new();
        for chunk in x.chunks(97) {
            pieces.extend(fractional_delay(chunk, &mut st, delay).unwrap());
        }
        for (a, b) in whole.iter().zip(&pieces) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for t in [0.0, 0.25, 1.5, 2.9] {
            let s: f64 = lagrange_weights(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
