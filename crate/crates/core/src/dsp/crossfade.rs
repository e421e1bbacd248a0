use super::DspError;

/// Equal-power gains `(fade_out, fade_in)` at `position` in [0, 1].
pub fn equal_power_gains(position: f64) -> (f64, f64) {
    let p = position.clamp(0.0, 1.0);
    ((1.0 - p).sqrt(), p.sqrt())
}

/// Fade-out/fade-in weights over a fixed number of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossfadeEnvelope {
    pub duration_samples: usize,
}

impl CrossfadeEnvelope {
    pub fn new(duration_samples: usize) -> Self {
        Self {
            duration_samples: duration_samples.max(1),
        }
    }

    pub fn from_seconds(duration_s: f64, sample_rate: f64) -> Self {
        Self::new((duration_s * sample_rate).round() as usize)
    }

    /// Position of sample `n` counted from the start of the fade.
    pub fn position(&self, n: usize) -> f64 {
        (n as f64 / self.duration_samples as f64).min(1.0)
    }

    pub fn weights(&self, n: usize) -> (f64, f64) {
        equal_power_gains(self.position(n))
    }

    pub fn is_finished(&self, n: usize) -> bool {
        n >= self.duration_samples
    }
}

/// `a·√(1−p) + b·√p` at a constant position `p`.
pub fn equal_power_crossfade(a: &[f64], b: &[f64], position: f64) -> Result<Vec<f64>, DspError> {
    equal_power_crossfade_ramp(a, b, position, position)
}

/// Crossfade whose position moves linearly from `from` (first sample) towards
/// `to` (one past the last sample).
pub fn equal_power_crossfade_ramp(
    a: &[f64],
    b: &[f64],
    from: f64,
    to: f64,
) -> Result<Vec<f64>, DspError> {
    if a.len() != b.len() {
        return Err(DspError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len().max(1) as f64;
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| {
            let (ga, gb) = equal_power_gains(from + (to - from) * k as f64 / n);
            x * ga + y * gb
        })
        .collect())
}
