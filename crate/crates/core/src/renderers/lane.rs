use super::{DrivingFunction, RenderError};
use crate::dsp::{FirFilter, FractionalDelay};

/// Streaming state for one object rendered with one driving function.
#[derive(Debug, Clone)]
pub struct RenderState {
    delays: Vec<FractionalDelay>,
    filters: Vec<Option<FirFilter>>,
    block_size: usize,
    scratch: Vec<f64>,
}

impl RenderState {
    pub fn new(drive: &DrivingFunction, sample_rate: f64, block_size: usize) -> Self {
        Self {
            delays: drive.speakers.iter().map(|_| FractionalDelay::new(sample_rate)).collect(),
            filters: drive
                .speakers
                .iter()
                .map(|s| s.filter.as_ref().map(|h| FirFilter::new(h.clone())))
                .collect(),
            block_size,
            scratch: vec![0.0; block_size],
        }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn reset(&mut self) {
        self.delays.iter_mut().for_each(FractionalDelay::reset);
        self.filters.iter_mut().flatten().for_each(FirFilter::reset);
    }

    fn matches(&self, drive: &DrivingFunction) -> bool {
        self.delays.len() == drive.len()
            && self
                .filters
                .iter()
                .zip(&drive.speakers)
                .all(|(f, s)| match (f, &s.filter) {
                    (Some(f), Some(h)) => f.taps() == h.as_slice(),
                    (None, None) => true,
                    _ => false,
                })
    }
}

/// Renders one block of a mono stem into one output block per subset
/// speaker: gain, then fractional delay, then FIR.
pub fn render_block(
    block: &[f64],
    drive: &DrivingFunction,
    state: &mut RenderState,
) -> Result<Vec<Vec<f64>>, RenderError> {
    if block.len() != state.block_size || !state.matches(drive) {
        return Err(RenderError::StateMismatch);
    }
    let n = block.len();
    let mut out = Vec::with_capacity(drive.len());
    for (i, sp) in drive.speakers.iter().enumerate() {
        let mut y = vec![0.0; n];
        if sp.gain == 0.0 {
            out.push(y);
            continue;
        }
        for (s, x) in state.scratch.iter_mut().zip(block) {
            *s = sp.gain * x;
        }
        state.delays[i]
            .process(&state.scratch, sp.delay_s, &mut y)
            .map_err(|_| RenderError::StateMismatch)?;
        if let Some(f) = state.filters[i].as_mut() {
            state.scratch.copy_from_slice(&y);
            f.process(&state.scratch, &mut y);
        }
        out.push(y);
    }
    Ok(out)
}
