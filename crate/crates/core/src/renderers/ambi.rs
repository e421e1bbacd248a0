//! Horizontal (2D) ambisonics with mode-matching decoding.

use nalgebra::{DMatrix, DVector};

use super::{GainVector, RenderError};
use crate::geometry::Direction3;

/// Circular-harmonic coefficients `[1, cos θ, sin θ, …, cos Nθ, sin Nθ]`.
pub type AmbiCoeffs = Vec<f64>;

/// Relative singular-value threshold for the rank check.
const RANK_TOL: f64 = 1e-10;

/// Encodes a direction (azimuth only) up to `order`.
pub fn ambi_encode(dir: &Direction3, order: u32) -> AmbiCoeffs {
    let theta = dir.azimuth_deg.to_radians();
    let mut y = Vec::with_capacity(2 * order as usize + 1);
    y.push(1.0);
    for m in 1..=order {
        let a = m as f64 * theta;
        y.push(a.cos());
        y.push(a.sin());
    }
    y
}

/// The (2N+1) × L matrix whose column `l` encodes speaker `l`.
pub fn encoding_matrix(subset: &[Direction3], order: u32) -> DMatrix<f64> {
    let m = 2 * order as usize + 1;
    let mut y = DMatrix::zeros(m, subset.len());
    for (l, s) in subset.iter().enumerate() {
        for (k, v) in ambi_encode(s, order).into_iter().enumerate() {
            y[(k, l)] = v;
        }
    }
    y
}

/// Mode-matching decoder: the pseudoinverse of the encoding matrix, returned
/// as an L × (2N+1) matrix so that `gains = D · y(dir)`.
pub fn ambi_mm_decode(subset: &[Direction3], order: u32) -> Result<DMatrix<f64>, RenderError> {
    let m = 2 * order as usize + 1;
    if subset.len() < m {
        return Err(RenderError::RankDeficient(order));
    }
    let y = encoding_matrix(subset, order);
    let svd = y.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < RANK_TOL {
        return Err(RenderError::RankDeficient(order));
    }
    let pinv = svd
        .pseudo_inverse(RANK_TOL * smax)
        .map_err(|_| RenderError::RankDeficient(order))?;
    Ok(pinv)
}

/// Raw decoder gains for `dir` (not power-normalized).
pub fn ambi_gains(decoder: &DMatrix<f64>, dir: &Direction3, order: u32) -> GainVector {
    let y = DVector::from_vec(ambi_encode(dir, order));
    GainVector((decoder * y).iter().copied().collect())
}

/// Frobenius norm of `Y·D − I`; zero for an exact mode-matching decoder.
pub fn mode_matching_residual(subset: &[Direction3], order: u32, decoder: &DMatrix<f64>) -> f64 {
    let y = encoding_matrix(subset, order);
    let m = y.nrows();
    (y * decoder - DMatrix::<f64>::identity(m, m)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Vec<Direction3> {
        (0..n)
            .map(|i| Direction3::with_distance(crate::geometry::wrap_azimuth(360.0 * i as f64 / n as f64), 0.0, 2.0))
            .collect()
    }

    #[test]
    fn square_first_order_closed_form() {
        let s = ring(4);
        let d = ambi_mm_decode(&s, 1).unwrap();
        for (i, sp) in s.iter().enumerate() {
            let phi = sp.azimuth_deg.to_radians();
            let want = [0.25, 0.5 * phi.cos(), 0.5 * phi.sin()];
            for k in 0..3 {
                assert!((d[(i, k)] - want[k]).abs() < 1e-12);
            }
        }
        assert!(mode_matching_residual(&s, 1, &d) < 1e-12);
    }

    #[test]
    fn too_few_speakers_is_rank_deficient() {
        assert_eq!(ambi_mm_decode(&ring(4), 2).unwrap_err(), RenderError::RankDeficient(2));
    }

    #[test]
    fn coincident_speakers_are_rank_deficient() {
        let s: Vec<Direction3> = (0..5).map(|_| Direction3::with_distance(0.0, 0.0, 2.0)).collect();
        assert!(matches!(ambi_mm_decode(&s, 1), Err(RenderError::RankDeficient(1))));
    }
}
