use super::GainVector;
use crate::geometry::Direction3;

/// Angles within this many radians of the minimum count as ties.
const TIE_EPS: f64 = 1e-12;

/// One-hot selection of the speaker closest (great-circle angle) to `dir`;
/// ties go to the lowest index.
pub fn nearest_speaker_gains(dir: &Direction3, subset: &[Direction3]) -> GainVector {
    let angles: Vec<f64> = subset.iter().map(|s| dir.angle_to(s)).collect();
    let min = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let pick = angles.iter().position(|a| *a <= min + TIE_EPS).unwrap_or(0);
    let mut g = vec![0.0; subset.len()];
    if !g.is_empty() {
        g[pick] = 1.0;
    }
    GainVector(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(az: &[f64]) -> Vec<Direction3> {
        az.iter().map(|a| Direction3::with_distance(*a, 0.0, 2.0)).collect()
    }

    #[test]
    fn picks_nearest_angle() {
        let g = nearest_speaker_gains(&Direction3::horizontal(85.0), &ring(&[0.0, 90.0, 180.0, -90.0]));
        assert_eq!(g.0, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let g = nearest_speaker_gains(&Direction3::horizontal(45.0), &ring(&[0.0, 90.0]));
        assert_eq!(g.0, vec![1.0, 0.0]);
    }

    #[test]
    fn single_speaker() {
        let g = nearest_speaker_gains(&Direction3::horizontal(0.0), &ring(&[0.0]));
        assert_eq!(g.0, vec![1.0]);
    }
}
