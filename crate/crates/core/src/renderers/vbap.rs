use super::{GainVector, RenderError};
use crate::geometry::{Direction3, Vec3};

/// Gains this far below zero still count as inside a pair or triplet.
const INSIDE_EPS: f64 = 1e-12;
/// Elevations (degrees) below this are treated as horizontal.
const FLAT_EPS_DEG: f64 = 1e-9;

/// Amplitude panning between the two (horizontal layouts) or three speakers
/// bracketing `dir`, power-normalized.
pub fn vbap_gains(dir: &Direction3, subset: &[Direction3]) -> Result<GainVector, RenderError> {
    match subset.len() {
        0 => return Err(RenderError::EmptySubset),
        1 => {
            return if dir.angle_to(&subset[0]) < 1e-9 {
                Ok(GainVector(vec![1.0]))
            } else {
                Err(RenderError::NotBracketed)
            }
        }
        _ => {}
    }
    let flat = subset.iter().all(|s| s.elevation_deg.abs() < FLAT_EPS_DEG);
    if flat {
        pairwise(dir, subset)
    } else {
        tripletwise(dir, subset)
    }
}

fn unit_2d(az_deg: f64) -> (f64, f64) {
    let a = az_deg.to_radians();
    (a.cos(), a.sin())
}

fn pairwise(dir: &Direction3, subset: &[Direction3]) -> Result<GainVector, RenderError> {
    let mut order: Vec<usize> = (0..subset.len()).collect();
    order.sort_by(|&a, &b| {
        subset[a]
            .azimuth_deg
            .partial_cmp(&subset[b].azimuth_deg)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let p = unit_2d(dir.azimuth_deg);
    let n = order.len();
    let pairs = if n == 2 { 1 } else { n };
    for k in 0..pairs {
        let (i, j) = (order[k], order[(k + 1) % n]);
        let (a, b) = (unit_2d(subset[i].azimuth_deg), unit_2d(subset[j].azimuth_deg));
        let det = a.0 * b.1 - a.1 * b.0;
        if det.abs() < 1e-12 {
            continue;
        }
        let gi = (p.0 * b.1 - p.1 * b.0) / det;
        let gj = (a.0 * p.1 - a.1 * p.0) / det;
        if gi >= -INSIDE_EPS && gj >= -INSIDE_EPS {
            let mut g = vec![0.0; subset.len()];
            g[i] = gi.max(0.0);
            g[j] = gj.max(0.0);
            return Ok(GainVector(g).normalized());
        }
    }
    Err(RenderError::NotBracketed)
}

fn solve3(a: Vec3, b: Vec3, c: Vec3, p: Vec3) -> Option<[f64; 3]> {
    let det = a.dot(&b.cross(&c));
    if det.abs() < 1e-9 {
        return None;
    }
    Some([
        p.dot(&b.cross(&c)) / det,
        a.dot(&p.cross(&c)) / det,
        a.dot(&b.cross(&p)) / det,
    ])
}

/// Among all non-degenerate triplets containing `dir`, the one whose smallest
/// gain is largest (most interior); ties go to the lexicographically first.
fn tripletwise(dir: &Direction3, subset: &[Direction3]) -> Result<GainVector, RenderError> {
    let units: Vec<Vec3> = subset.iter().map(Direction3::unit).collect();
    let p = dir.unit();
    let n = units.len();
    let mut best: Option<([usize; 3], [f64; 3], f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Some(g) = solve3(units[i], units[j], units[k], p) else {
                    continue;
                };
                let min = g[0].min(g[1]).min(g[2]);
                if min < -INSIDE_EPS {
                    continue;
                }
                if best.as_ref().is_none_or(|b| min > b.2 + 1e-12) {
                    best = Some(([i, j, k], g, min));
                }
            }
        }
    }
    if let Some((idx, g, _)) = best {
        let mut out = vec![0.0; n];
        for (slot, v) in idx.iter().zip(g) {
            out[*slot] = v.max(0.0);
        }
        return Ok(GainVector(out).normalized());
    }
    // elevated layouts whose speakers leave gaps: fall back to horizontal pairs
    // when the target itself is horizontal
    if dir.elevation_deg.abs() < FLAT_EPS_DEG {
        let flat: Vec<usize> = (0..n).filter(|&i| subset[i].elevation_deg.abs() < FLAT_EPS_DEG).collect();
        if flat.len() >= 2 {
            let sub: Vec<Direction3> = flat.iter().map(|&i| subset[i]).collect();
            let g = pairwise(dir, &sub)?;
            let mut out = vec![0.0; n];
            for (slot, v) in flat.iter().zip(g.0) {
                out[*slot] = v;
            }
            return Ok(GainVector(out));
        }
    }
    Err(RenderError::NotBracketed)
}
