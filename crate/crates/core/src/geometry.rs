//! Direction and position conventions shared by every module.
//!
//! Azimuth is measured in degrees counter-clockwise from the front (+90° is
//! left), elevation is positive upwards. Cartesian axes follow the same
//! convention: x points front, y points left, z points up.

use serde::{Deserialize, Serialize};

/// A direction from the reference point, optionally with a distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction3 {
    #[serde(rename = "az")]
    pub azimuth_deg: f64,
    #[serde(rename = "el", default)]
    pub elevation_deg: f64,
    /// Meters; `None` means far-field.
    #[serde(rename = "dist", default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
}

impl Direction3 {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            azimuth_deg,
            elevation_deg,
            distance_m: None,
        }
    }

    pub fn with_distance(azimuth_deg: f64, elevation_deg: f64, distance_m: f64) -> Self {
        Self {
            azimuth_deg,
            elevation_deg,
            distance_m: Some(distance_m),
        }
    }

    pub fn horizontal(azimuth_deg: f64) -> Self {
        Self::new(azimuth_deg, 0.0)
    }

    /// Unit vector pointing along this direction.
    pub fn unit(&self) -> Vec3 {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }

    /// Cartesian position. Far-field directions have no position.
    pub fn position(&self) -> Option<Vec3> {
        self.distance_m.map(|d| self.unit().scale(d))
    }

    /// Range checks for the direction invariants.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.azimuth_deg > -180.0 && self.azimuth_deg <= 180.0) {
            out.push(("position.az", "expected azimuth in (-180, 180]".to_string()));
        }
        if !(-90.0..=90.0).contains(&self.elevation_deg) {
            out.push(("position.el", "expected elevation in [-90, 90]".to_string()));
        }
        if let Some(d) = self.distance_m {
            if !(d > 0.0 && d.is_finite()) {
                out.push(("position.dist", "expected distance > 0".to_string()));
            }
        }
        out
    }

    /// Great-circle angle to `other` in radians.
    pub fn angle_to(&self, other: &Direction3) -> f64 {
        self.unit().angle_to(&other.unit())
    }

    /// Direction (with distance) of a Cartesian point.
    pub fn from_position(p: Vec3) -> Option<Self> {
        let r = p.norm();
        if r <= 0.0 {
            return None;
        }
        let el = (p.z / r).clamp(-1.0, 1.0).asin().to_degrees();
        let az = wrap_azimuth(p.y.atan2(p.x).to_degrees());
        Some(Self::with_distance(az, el, r))
    }

    /// Offsets azimuth and elevation, wrapping azimuth and clamping elevation.
    pub fn rotated(&self, d_az: f64, d_el: f64) -> Self {
        Self {
            azimuth_deg: wrap_azimuth(self.azimuth_deg + d_az),
            elevation_deg: (self.elevation_deg + d_el).clamp(-90.0, 90.0),
            distance_m: self.distance_m,
        }
    }
}

/// Wraps an azimuth into (-180, 180].
pub fn wrap_azimuth(az: f64) -> f64 {
    let mut a = az % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Signed azimuth difference `a - b` wrapped into (-180, 180].
pub fn azimuth_difference(a: f64, b: f64) -> f64 {
    wrap_azimuth(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn sub(&self, o: &Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn distance(&self, o: &Vec3) -> f64 {
        self.sub(o).norm()
    }

    pub fn normalized(&self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self.scale(1.0 / n)
        } else {
            *self
        }
    }

    /// Angle between two vectors in radians, robust near 0 and π.
    pub fn angle_to(&self, o: &Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vectors_follow_convention() {
        let front = Direction3::horizontal(0.0).unit();
        let left = Direction3::horizontal(90.0).unit();
        let up = Direction3::new(0.0, 90.0).unit();
        assert!((front.x - 1.0).abs() < 1e-12);
        assert!((left.y - 1.0).abs() < 1e-12);
        assert!((up.z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_keeps_half_open_range() {
        assert_eq!(wrap_azimuth(180.0), 180.0);
        assert_eq!(wrap_azimuth(-180.0), 180.0);
        assert_eq!(wrap_azimuth(270.0), -90.0);
        assert_eq!(wrap_azimuth(-190.0), 170.0);
    }

    #[test]
    fn position_round_trip() {
        let d = Direction3::with_distance(-110.0, 10.0, 2.5);
        let back = Direction3::from_position(d.position().unwrap()).unwrap();
        assert!((back.azimuth_deg - d.azimuth_deg).abs() < 1e-9);
        assert!((back.elevation_deg - d.elevation_deg).abs() < 1e-9);
        assert!((back.distance_m.unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn range_violations_are_reported() {
        assert!(Direction3::horizontal(0.0).violations().is_empty());
        assert_eq!(Direction3::horizontal(-180.0).violations().len(), 1);
        assert_eq!(Direction3::new(0.0, 91.0).violations().len(), 1);
        assert_eq!(
            Direction3::with_distance(0.0, 0.0, 0.0).violations().len(),
            1
        );
    }
}
