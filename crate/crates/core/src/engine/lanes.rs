//! Render lanes: one streaming renderer per voice, with crossfades between
//! successive lanes of the same voice.

use std::sync::Arc;

use crate::renderers::{render_block, DrivingFunction, RenderState};
use crate::router::RendererClass;

/// Lower bound on the squared norm used for coherence compensation.
const MIN_FADE_NORM: f64 = 0.25;

/// One voice rendered with one driving function and one signal.
pub(crate) struct Lane {
    pub signal: Arc<Vec<f64>>,
    pub signal_key: String,
    pub class: RendererClass,
    pub drive: DrivingFunction,
    /// Layout channel of each drive entry.
    pub channels: Vec<usize>,
    state: RenderState,
    gain_from: f64,
    pub gain: f64,
}

impl Lane {
    pub fn new(
        signal: Arc<Vec<f64>>,
        signal_key: String,
        class: RendererClass,
        drive: DrivingFunction,
        channels: Vec<usize>,
        gain: f64,
        sample_rate: f64,
        block: usize,
    ) -> Self {
        let state = RenderState::new(&drive, sample_rate, block);
        Self {
            signal,
            signal_key,
            class,
            drive,
            channels,
            state,
            gain_from: gain,
            gain,
        }
    }

    fn input(&self, start: isize, block: usize) -> Vec<f64> {
        (0..block as isize)
            .map(|k| {
                let i = start + k;
                if i >= 0 {
                    self.signal.get(i as usize).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Runs the lane over the samples preceding `start` so its delay lines
    /// and filters hold the signal's history.
    pub fn prime(&mut self, start: usize, sample_rate: f64) {
        let block = self.state.block_size();
        let span = self.drive.span_samples(sample_rate);
        if start == 0 || span == 0 {
            return;
        }
        let blocks = span.div_ceil(block);
        for b in (1..=blocks).rev() {
            let s = start as isize - (b * block) as isize;
            if s + (block as isize) <= 0 {
                continue;
            }
            let x = self.input(s, block);
            let _ = render_block(&x, &self.drive, &mut self.state);
        }
    }

    /// One block per drive entry, starting at sample `start`, with the lane
    /// gain ramped from its previous to its current value.
    pub fn render(&mut self, start: usize) -> Vec<Vec<f64>> {
        let block = self.state.block_size();
        let x = self.input(start as isize, block);
        let mut out = render_block(&x, &self.drive, &mut self.state).expect("lane state built for its drive");
        let (g0, g1) = (self.gain_from, self.gain);
        for ch in &mut out {
            for (k, v) in ch.iter_mut().enumerate() {
                *v *= g0 + (g1 - g0) * (k + 1) as f64 / block as f64;
            }
        }
        self.gain_from = g1;
        out
    }

    /// Normalized inner product of two lanes' multichannel impulse responses.
    pub fn coherence(&self, other: &Lane, channels: usize, sample_rate: f64) -> f64 {
        let len = self.drive.span_samples(sample_rate).max(other.drive.span_samples(sample_rate));
        let spread = |lane: &Lane| {
            let mut full = vec![vec![0.0; len]; channels];
            for (h, &c) in lane.drive.impulse_responses(sample_rate, len).iter().zip(&lane.channels) {
                for (f, v) in full[c].iter_mut().zip(h) {
                    *f += v;
                }
            }
            full
        };
        let (a, b) = (spread(self), spread(other));
        let dot = |x: &[Vec<f64>], y: &[Vec<f64>]| -> f64 {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.iter().zip(q).map(|(u, v)| u * v).sum::<f64>())
                .sum()
        };
        let (ea, eb) = (dot(&a, &a), dot(&b, &b));
        if ea <= 0.0 || eb <= 0.0 {
            return 0.0;
        }
        dot(&a, &b) / (ea * eb).sqrt()
    }
}

/// The outgoing side of a transition.
pub(crate) struct Outgoing {
    pub lane: Option<Lane>,
    pub start: usize,
    pub len: usize,
    pub rho: f64,
}

/// A voice's current lane and, during a transition, the lane it replaces.
#[derive(Default)]
pub(crate) struct Track {
    pub current: Option<Lane>,
    pub outgoing: Option<Outgoing>,
}

/// Equal-power weights `(out, in)` at fade position `p`, compensated for the
/// coherence `rho` between the two lanes so summed power stays constant.
pub fn fade_weights(p: f64, rho: f64) -> (f64, f64) {
    let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
    let c = 1.0 / (a * a + b * b + 2.0 * a * b * rho).max(MIN_FADE_NORM).sqrt();
    (c * a, c * b)
}

impl Track {
    /// Replaces the current lane; the old one fades out over `len` samples
    /// starting at `start`. A `len` of 0 switches immediately.
    pub fn switch(&mut self, next: Option<Lane>, start: usize, len: usize, channels: usize, sample_rate: f64) {
        let prev = std::mem::replace(&mut self.current, next);
        if len == 0 {
            self.outgoing = None;
            return;
        }
        let rho = match (&prev, &self.current) {
            (Some(p), Some(n)) if p.signal_key == n.signal_key => p.coherence(n, channels, sample_rate),
            _ => 0.0,
        };
        self.outgoing = Some(Outgoing {
            lane: prev,
            start,
            len,
            rho,
        });
    }

    pub fn is_idle(&self) -> bool {
        self.current.is_none() && self.outgoing.is_none()
    }

    /// Adds this block of the track into `mix` (layout channels).
    pub fn mix_into(&mut self, start: usize, block: usize, mix: &mut [Vec<f64>]) {
        let cur = self.current.as_mut().map(|l| (l.render(start), l.channels.clone()));
        let Some(out) = self.outgoing.as_mut() else {
            if let Some((y, chans)) = cur {
                for (ch, c) in y.iter().zip(&chans) {
                    for (m, v) in mix[*c].iter_mut().zip(ch) {
                        *m += v;
                    }
                }
            }
            return;
        };
        let prev = out.lane.as_mut().map(|l| (l.render(start), l.channels.clone()));
        let weights: Vec<(f64, f64)> = (0..block)
            .map(|k| {
                let p = ((start + k) as f64 - out.start as f64 + 1.0) / out.len as f64;
                let p = p.clamp(0.0, 1.0);
                // a side without a lane has no power to compensate for
                let rho = if prev.is_some() && cur.is_some() { out.rho } else { 0.0 };
                fade_weights(p, rho)
            })
            .collect();
        if let Some((y, chans)) = &cur {
            for (ch, c) in y.iter().zip(chans) {
                for ((m, v), w) in mix[*c].iter_mut().zip(ch).zip(&weights) {
                    *m += w.1 * v;
                }
            }
        }
        if let Some((y, chans)) = &prev {
            for (ch, c) in y.iter().zip(chans) {
                for ((m, v), w) in mix[*c].iter_mut().zip(ch).zip(&weights) {
                    *m += w.0 * v;
                }
            }
        }
        if start + block >= out.start + out.len {
            self.outgoing = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incoherent_weights_are_equal_power() {
        for p in [0.0, 0.3, 0.5, 1.0] {
            let (a, b) = fade_weights(p, 0.0);
            assert!((a * a + b * b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_weights_preserve_amplitude() {
        let (a, b) = fade_weights(0.5, 1.0);
        assert!((a + b - 1.0).abs() < 1e-12);
    }
}
