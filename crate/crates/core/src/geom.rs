//! Planar geometry on projected coordinates (meters).

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point (or displacement) in a projected planar coordinate system.
///
/// All distances in this crate are Euclidean distances between `GeoPoint`s,
/// so inputs must already be projected (see [`crate::projection`]).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeoPoint {
    pub easting: f64,
    pub northing: f64,
}

impl GeoPoint {
    pub const fn new(easting: f64, northing: f64) -> Self {
        Self { easting, northing }
    }

    pub fn is_finite(&self) -> bool {
        self.easting.is_finite() && self.northing.is_finite()
    }

    pub fn dot(self, other: GeoPoint) -> f64 {
        self.easting * other.easting + self.northing * other.northing
    }

    /// z-component of the 3D cross product. Positive when `other` lies
    /// counter-clockwise (to the left) of `self`.
    pub fn cross(self, other: GeoPoint) -> f64 {
        self.easting * other.northing - self.northing * other.easting
    }

    pub fn norm(self) -> f64 {
        self.easting.hypot(self.northing)
    }

    pub fn distance(self, other: GeoPoint) -> f64 {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: GeoPoint) -> f64 {
        let d = self - other;
        d.dot(d)
    }

    /// Unit vector in the same direction; `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<GeoPoint> {
        let n = self.norm();
        if n > f64::EPSILON {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Rotate counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> GeoPoint {
        let (s, c) = angle.sin_cos();
        GeoPoint::new(
            c * self.easting - s * self.northing,
            s * self.easting + c * self.northing,
        )
    }

    /// Left-hand perpendicular (counter-clockwise by 90°).
    pub fn perp_left(self) -> GeoPoint {
        GeoPoint::new(-self.northing, self.easting)
    }

    /// Right-hand perpendicular (clockwise by 90°).
    pub fn perp_right(self) -> GeoPoint {
        GeoPoint::new(self.northing, -self.easting)
    }

    pub fn lerp(self, other: GeoPoint, t: f64) -> GeoPoint {
        self + (other - self) * t
    }

    /// Unit vector pointing along a compass bearing (degrees clockwise from north).
    pub fn from_bearing(bearing_deg: f64) -> GeoPoint {
        let (s, c) = bearing_deg.to_radians().sin_cos();
        GeoPoint::new(s, c)
    }
}

impl Add for GeoPoint {
    type Output = GeoPoint;
    fn add(self, rhs: GeoPoint) -> GeoPoint {
        GeoPoint::new(self.easting + rhs.easting, self.northing + rhs.northing)
    }
}

impl Sub for GeoPoint {
    type Output = GeoPoint;
    fn sub(self, rhs: GeoPoint) -> GeoPoint {
        GeoPoint::new(self.easting - rhs.easting, self.northing - rhs.northing)
    }
}

impl Mul<f64> for GeoPoint {
    type Output = GeoPoint;
    fn mul(self, rhs: f64) -> GeoPoint {
        GeoPoint::new(self.easting * rhs, self.northing * rhs)
    }
}

impl Neg for GeoPoint {
    type Output = GeoPoint;
    fn neg(self) -> GeoPoint {
        GeoPoint::new(-self.easting, -self.northing)
    }
}

/// Compass bearing from `from` to `to`, degrees clockwise from north in `[0, 360)`.
/// Returns `None` when the two points coincide.
pub fn bearing(from: GeoPoint, to: GeoPoint) -> Option<f64> {
    let d = to - from;
    if d.norm() <= 1e-12 {
        return None;
    }
    Some(normalize_bearing(d.easting.atan2(d.northing).to_degrees()))
}

/// Map any angle in degrees onto `[0, 360)`.
pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    // rem_euclid can return 360.0 for tiny negative inputs
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Wrap an angle difference in degrees onto `(-180, 180]`.
pub fn wrap_degrees(delta: f64) -> f64 {
    let w = delta.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Signed curvature of the circle through three points (1/m). Positive for a
/// left (counter-clockwise) turn `a -> b -> c`; zero for collinear points.
pub fn circumcircle_curvature(a: GeoPoint, b: GeoPoint, c: GeoPoint) -> f64 {
    let ab = a.distance(b);
    let bc = b.distance(c);
    let ca = c.distance(a);
    let denom = ab * bc * ca;
    if denom <= f64::EPSILON {
        return 0.0;
    }
    2.0 * (b - a).cross(c - a) / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bearing_cardinal_directions() {
        let o = GeoPoint::new(0.0, 0.0);
        assert_eq!(bearing(o, GeoPoint::new(0.0, 10.0)), Some(0.0));
        assert_eq!(bearing(o, GeoPoint::new(10.0, 0.0)), Some(90.0));
        assert_eq!(bearing(o, GeoPoint::new(0.0, -10.0)), Some(180.0));
        assert_eq!(bearing(o, GeoPoint::new(-10.0, 0.0)), Some(270.0));
        assert_eq!(bearing(o, o), None);
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_degrees(180.0), 180.0);
        assert_eq!(wrap_degrees(-180.0), 180.0);
        assert_eq!(wrap_degrees(1.0 - 359.0), 2.0);
        assert_eq!(wrap_degrees(359.0 - 1.0), -2.0);
    }

    #[test]
    fn curvature_of_circle() {
        let r = 500.0;
        let p = |a: f64| GeoPoint::new(r * a.cos(), r * a.sin());
        let k = circumcircle_curvature(p(0.0), p(0.2), p(0.4));
        assert!((k - 1.0 / r).abs() < 1e-12);
        let k = circumcircle_curvature(p(0.4), p(0.2), p(0.0));
        assert!((k + 1.0 / r).abs() < 1e-12);
    }

    #[test]
    fn from_bearing_matches_bearing() {
        for deg in [0.0, 33.0, 90.0, 181.5, 359.0] {
            let v = GeoPoint::from_bearing(deg);
            let b = bearing(GeoPoint::default(), v).unwrap();
            assert!((b - deg).abs() < 1e-9);
        }
    }
}
