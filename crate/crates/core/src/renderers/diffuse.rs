use super::{DrivingFunction, RenderError, SpeakerDrive};
use crate::dsp::{random_phase_allpass, DECORRELATOR_SEED, DECORRELATOR_TAPS};

/// Equal gains `1/sqrt(L)` with a distinct seeded all-pass per speaker.
pub fn diffuse_gains(speakers: usize) -> Result<DrivingFunction, RenderError> {
    if speakers < 2 {
        return Err(RenderError::TooFewSpeakers(speakers));
    }
    let g = 1.0 / (speakers as f64).sqrt();
    Ok(DrivingFunction {
        speakers: (0..speakers)
            .map(|i| SpeakerDrive {
                gain: g,
                delay_s: 0.0,
                filter: Some(random_phase_allpass(DECORRELATOR_TAPS, DECORRELATOR_SEED + i as u64)),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_speaker_rejected() {
        assert_eq!(diffuse_gains(1).unwrap_err(), RenderError::TooFewSpeakers(1));
    }

    #[test]
    fn outputs_are_mutually_decorrelated() {
        let d = diffuse_gains(4).unwrap();
        let f: Vec<&Vec<f64>> = d.speakers.iter().map(|s| s.filter.as_ref().unwrap()).collect();
        for i in 0..4 {
            for j in i + 1..4 {
                let dot: f64 = f[i].iter().zip(f[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 0.2, "{i} {j} {dot}");
            }
        }
    }
}
