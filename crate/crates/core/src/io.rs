//! RIFF/WAVE reading and writing.

use std::path::{Path, PathBuf};

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("{path}: file not found")]
    NotFound { path: PathBuf },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: expected a mono file, found {channels} channels")]
    NotMono { path: PathBuf, channels: u16 },
}

/// A decoded mono file.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoWav {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

pub fn read_mono(path: &Path) -> Result<MonoWav, WavError> {
    if !path.exists() {
        return Err(WavError::NotFound {
            path: path.to_path_buf(),
        });
    }
    let fmt_err = |source| WavError::Format {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(fmt_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(WavError::NotMono {
            path: path.to_path_buf(),
            channels: spec.channels,
        });
    }
    let samples = match spec.sample_format {
        SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<Vec<_>, _>>(),
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<Vec<_>, _>>()
        }
    }
    .map_err(fmt_err)?;
    Ok(MonoWav {
        sample_rate: spec.sample_rate,
        samples,
    })
}

pub fn write_mono(path: &Path, sample_rate: u32, samples: &[f64]) -> Result<(), WavError> {
    write_multichannel(path, sample_rate, &[samples.to_vec()])
}

/// Writes an interleaved 32-bit float file, channel `i` taken from
/// `channels[i]`. All channels must have equal length.
pub fn write_multichannel(path: &Path, sample_rate: u32, channels: &[Vec<f64>]) -> Result<(), WavError> {
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let fmt_err = |source| WavError::Format {
        path: path.to_path_buf(),
        source,
    };
    let mut w = WavWriter::create(path, spec).map_err(fmt_err)?;
    let len = channels.first().map_or(0, Vec::len);
    for n in 0..len {
        for ch in channels {
            w.write_sample(ch[n] as f32).map_err(fmt_err)?;
        }
    }
    w.finalize().map_err(fmt_err)
}

/// Reads every channel of a file (de-interleaved).
pub fn read_multichannel(path: &Path) -> Result<(u32, Vec<Vec<f64>>), WavError> {
    let fmt_err = |source| WavError::Format {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = WavReader::open(path).map_err(fmt_err)?;
    let spec = reader.spec();
    let n = spec.channels as usize;
    let flat: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>(),
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<Result<_, _>>()
        }
    }
    .map_err(fmt_err)?;
    let mut out = vec![Vec::with_capacity(flat.len() / n.max(1)); n];
    for (i, v) in flat.into_iter().enumerate() {
        out[i % n].push(v);
    }
    Ok((spec.sample_rate, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mono_round_trip_is_exact_for_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.wav");
        let x: Vec<f64> = (0..100).map(|i| (i as f32 * 0.01).sin() as f64).collect();
        write_mono(&p, 48_000, &x).unwrap();
        let back = read_mono(&p).unwrap();
        assert_eq!(back.sample_rate, 48_000);
        assert_eq!(back.samples, x);
    }

    #[test]
    fn stereo_is_not_mono() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        write_multichannel(&p, 48_000, &[vec![0.0; 4], vec![0.0; 4]]).unwrap();
        assert!(matches!(read_mono(&p), Err(WavError::NotMono { channels: 2, .. })));
        let (_, chans) = read_multichannel(&p).unwrap();
        assert_eq!(chans.len(), 2);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_mono(Path::new("/definitely/not/here.wav")),
            Err(WavError::NotFound { .. })
        ));
    }
}
