//! Flat-earth tangent plane in nautical miles: east = +x, north = +y,
//! bearings measured clockwise from north.

use serde::{Deserialize, Serialize};

/// Feet per nautical mile.
pub const FT_PER_NMI: f64 = 6076.12;
/// Meters per nautical mile.
pub const M_PER_NMI: f64 = 1852.0;
/// Meters per second per knot.
pub const MPS_PER_KT: f64 = 0.514444;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Displace by `distance` nmi along a bearing in radians.
    pub fn displaced(self, bearing_rad: f64, distance: f64) -> Point {
        let (s, c) = bearing_rad.sin_cos();
        Point::new(self.x + distance * s, self.y + distance * c)
    }

    /// Bearing from `self` to `other` in radians, clockwise from north, in (-π, π].
    pub fn bearing_to(self, other: Point) -> f64 {
        (other.x - self.x).atan2(other.y - self.y)
    }

    /// Azimuth from `self` to `other` in degrees, in [0, 360).
    pub fn azimuth_deg(self, other: Point) -> f64 {
        normalize_deg(self.bearing_to(other).to_degrees())
    }
}

/// Wrap degrees into [0, 360).
pub fn normalize_deg(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs.
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Wrap radians into (-π, π].
pub fn wrap_pi(rad: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let r = (rad + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn displacement_follows_compass_convention() {
        let south = Point::ORIGIN.displaced(PI, 50.0);
        assert!((south.x).abs() < 1e-12 && (south.y + 50.0).abs() < 1e-12);
        let east = Point::ORIGIN.displaced(PI / 2.0, 10.0);
        assert!((east.x - 10.0).abs() < 1e-12 && east.y.abs() < 1e-12);
    }

    #[test]
    fn azimuths() {
        let c = Point::ORIGIN;
        assert!((c.azimuth_deg(Point::new(0.0, 1.0)) - 0.0).abs() < 1e-12);
        assert!((c.azimuth_deg(Point::new(1.0, 0.0)) - 90.0).abs() < 1e-12);
        assert!((c.azimuth_deg(Point::new(-1.0, 0.0)) - 270.0).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert_eq!(normalize_deg(-88.5), 271.5);
        assert_eq!(normalize_deg(-1e-20), 0.0);
    }
}
