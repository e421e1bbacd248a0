//! Single-zone pressure matching: Tikhonov-regularized least squares per
//! frequency, turned into FIR filters for rendering.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::RenderError;
use crate::geometry::Vec3;

pub const DEFAULT_BETA: f64 = 1e-3;
pub const PM_FIR_TAPS: usize = 1024;
const GRID_POINTS: usize = 129;
const GRID_LO_HZ: f64 = 50.0;
const GRID_HI_HZ: f64 = 16_000.0;
/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-12;

/// 129 log-spaced frequencies from 50 Hz to 16 kHz.
pub fn default_pm_grid() -> Vec<f64> {
    let ratio = (GRID_HI_HZ / GRID_LO_HZ).ln();
    (0..GRID_POINTS)
        .map(|i| GRID_LO_HZ * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Listener position plus ±5 cm along x and y.
pub fn default_control_points() -> Vec<Vec3> {
    let d = 0.05;
    vec![
        Vec3::ZERO,
        Vec3::new(d, 0.0, 0.0),
        Vec3::new(-d, 0.0, 0.0),
        Vec3::new(0.0, d, 0.0),
        Vec3::new(0.0, -d, 0.0),
    ]
}

/// Free-field Green's function `e^{-j2πfr/c} / (4πr)`.
pub fn green(freq_hz: f64, r: f64, c: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (4.0 * PI * r), -2.0 * PI * freq_hz * r / c)
}

/// Complex speaker weights on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmSolution {
    pub freqs: Vec<f64>,
    /// `q[k][l]`: weight of speaker `l` at `freqs[k]`.
    pub q: Vec<Vec<Complex64>>,
    /// `‖G·q − p‖ / ‖p‖` per frequency.
    pub relative_error: Vec<f64>,
}

fn transfer_matrix(speakers: &[Vec3], control: &[Vec3], f: f64, c: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(control.len(), speakers.len(), |m, l| {
        green(f, control[m].distance(&speakers[l]).max(1e-6), c)
    })
}

fn target_vector(target: Vec3, control: &[Vec3], f: f64, c: f64) -> DVector<Complex64> {
    DVector::from_fn(control.len(), |m, _| green(f, control[m].distance(&target).max(1e-6), c))
}

/// Regularized solve `q = (GᴴG + βI)⁻¹ Gᴴ p` through the SVD of G.
fn solve(g: &DMatrix<Complex64>, p: &DVector<Complex64>, beta: f64) -> Result<DVector<Complex64>, RenderError> {
    let (m, l) = g.shape();
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if beta == 0.0 {
        let rank = svd.singular_values.iter().filter(|s| **s > RANK_TOL * smax).count();
        if l > m || smax <= 0.0 || rank < l {
            return Err(RenderError::SingularSystem);
        }
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut coeffs = u.adjoint() * p;
    for (k, s) in svd.singular_values.iter().enumerate() {
        let w = if *s > 0.0 { s / (s * s + beta) } else { 0.0 };
        coeffs[k] *= Complex64::new(w, 0.0);
    }
    Ok(v_t.adjoint() * coeffs)
}

/// Per-frequency pressure-matching weights for reproducing a point source at
/// `target` over `control` points.
pub fn pm_filters(
    speakers: &[Vec3],
    control: &[Vec3],
    target: Vec3,
    freqs: &[f64],
    beta: f64,
    c: f64,
) -> Result<PmSolution, RenderError> {
    if speakers.is_empty() {
        return Err(RenderError::EmptySubset);
    }
    let mut q = Vec::with_capacity(freqs.len());
    let mut relative_error = Vec::with_capacity(freqs.len());
    for &f in freqs {
        let g = transfer_matrix(speakers, control, f, c);
        let p = target_vector(target, control, f, c);
        let qf = solve(&g, &p, beta)?;
        relative_error.push((&g * &qf - &p).norm() / p.norm().max(f64::MIN_POSITIVE));
        q.push(qf.iter().copied().collect());
    }
    Ok(PmSolution {
        freqs: freqs.to_vec(),
        q,
        relative_error,
    })
}

/// FIR filters (`taps` long, one per speaker) realizing the pressure-matching
/// solution.
///
/// The system is solved directly on the FFT bins. The target is re-timed so
/// its wavefront reaches the listener after the mean speaker travel time,
/// which keeps the filters compact; a bulk delay of `taps/2` makes them
/// causal, a Hann window tapers them, bins above 16 kHz are rolled off and
/// the set is scaled to unit total energy.
pub fn pm_fir(
    speakers: &[Vec3],
    control: &[Vec3],
    target: Vec3,
    beta: f64,
    c: f64,
    sample_rate: f64,
    taps: usize,
) -> Result<Vec<Vec<f64>>, RenderError> {
    if speakers.is_empty() {
        return Err(RenderError::EmptySubset);
    }
    let bins = taps / 2 + 1;
    let mean_travel = speakers.iter().map(|s| s.norm()).sum::<f64>() / speakers.len() as f64 / c;
    let target_travel = target.norm() / c;
    let bulk = (taps / 2) as f64 / sample_rate;
    let nyquist = sample_rate / 2.0;

    let mut spectra = vec![vec![Complex64::new(0.0, 0.0); taps]; speakers.len()];
    for k in 0..bins {
        let f = k as f64 * sample_rate / taps as f64;
        let g = transfer_matrix(speakers, control, f, c);
        let p = target_vector(target, control, f, c);
        let q = solve(&g, &p, beta)?;
        let retime = Complex64::from_polar(1.0, 2.0 * PI * f * (target_travel - mean_travel - bulk));
        let roll = if f <= GRID_HI_HZ {
            1.0
        } else {
            0.5 * (1.0 + (PI * (f - GRID_HI_HZ) / (nyquist - GRID_HI_HZ)).cos())
        };
        for (l, spec) in spectra.iter_mut().enumerate() {
            let mut v = q[l] * retime * roll;
            if k == 0 || (taps.is_multiple_of(2) && k == taps / 2) {
                v = Complex64::new(v.re, 0.0);
            }
            spec[k] = v;
            if k > 0 && k < taps - k {
                spec[taps - k] = v.conj();
            }
        }
    }

    let ifft = FftPlanner::new().plan_fft_inverse(taps);
    let window: Vec<f64> = (0..taps)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / taps as f64).cos())
        .collect();
    let mut firs: Vec<Vec<f64>> = spectra
        .into_iter()
        .map(|mut spec| {
            ifft.process(&mut spec);
            spec.iter()
                .zip(&window)
                .map(|(v, w)| v.re / taps as f64 * w)
                .collect()
        })
        .collect();
    let energy: f64 = firs.iter().flatten().map(|v| v * v).sum();
    if energy > 0.0 {
        let s = 1.0 / energy.sqrt();
        firs.iter_mut().flatten().for_each(|v| *v *= s);
    }
    Ok(firs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renderers::SPEED_OF_SOUND;

    #[test]
    fn colocated_single_speaker_is_identity() {
        let s = [Vec3::new(2.0, 0.0, 0.0)];
        let sol = pm_filters(&s, &[Vec3::ZERO], s[0], &default_pm_grid(), 0.0, SPEED_OF_SOUND).unwrap();
        for qk in &sol.q {
            assert!((qk[0] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn more_speakers_than_points_without_regularization_is_singular() {
        let s = [Vec3::new(2.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0)];
        let err = pm_filters(&s, &[Vec3::ZERO], Vec3::new(3.0, 0.0, 0.0), &[100.0], 0.0, SPEED_OF_SOUND);
        assert_eq!(err.unwrap_err(), RenderError::SingularSystem);
    }

    #[test]
    fn grid_endpoints() {
        let g = default_pm_grid();
        assert_eq!(g.len(), 129);
        assert!((g[0] - 50.0).abs() < 1e-9 && (g[128] - 16_000.0).abs() < 1e-6);
    }

    #[test]
    fn fir_set_has_unit_energy_and_peaks_near_centre() {
        let s: Vec<Vec3> = (0..8)
            .map(|i| {
                let a = (i as f64 * 45.0).to_radians();
                Vec3::new(2.0 * a.cos(), 2.0 * a.sin(), 0.0)
            })
            .collect();
        let firs = pm_fir(
            &s,
            &default_control_points(),
            Vec3::new(3.0, 0.0, 0.0),
            DEFAULT_BETA,
            SPEED_OF_SOUND,
            48_000.0,
            PM_FIR_TAPS,
        )
        .unwrap();
        let e: f64 = firs.iter().flatten().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-9);
        let (peak_idx, _) = firs[0]
            .iter()
            .enumerate()
            .fold((0, 0.0), |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b });
        assert!((400..700).contains(&peak_idx), "{peak_idx}");
    }
}
