//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use astfalsify_core::geometry::FT_PER_NMI;
use astfalsify_core::trajectory::{ArcSegment, FlightPlan, Wind};
use astfalsify_core::Point;
use rand::Rng;

/// A three-waypoint plan with long legs so the turn always fits at the nominal
/// radius. Returns the plan and the signed heading change in radians.
pub fn random_feasible_turn(rng: &mut impl Rng) -> (FlightPlan, f64) {
    let h_in: f64 = rng.random_range(0.0..360.0f64).to_radians();
    let mag: f64 = rng.random_range(2.0..120.0f64).to_radians();
    let dpsi = if rng.random_bool(0.5) { mag } else { -mag };
    let p0 = Point::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
    let p1 = p0.displaced(h_in, rng.random_range(30.0..80.0));
    let p2 = p1.displaced(h_in + dpsi, rng.random_range(30.0..80.0));
    let winds = (0..3)
        .map(|_| Wind {
            dir_deg: rng.random_range(0.0..360.0),
            speed_kt: rng.random_range(0.0..120.0),
        })
        .collect();
    (FlightPlan::new(vec![p0, p1, p2], winds).unwrap(), dpsi)
}

/// Length in ft of a `n`-point polyline traced around the arc's center from its
/// start point through the heading change `dpsi`.
pub fn polyline_length_ft(arc: &ArcSegment, dpsi: f64, n: usize) -> (f64, Point) {
    let r = arc.radius.abs();
    let c = arc.center;
    let theta0 = (arc.start.x - c.x).atan2(arc.start.y - c.y);
    let step = arc.radius.signum() * dpsi.abs() / (n - 1) as f64;
    let mut prev = arc.start;
    let mut total = 0.0;
    for k in 1..n {
        let th = theta0 + step * k as f64;
        let p = Point::new(c.x + r * th.sin(), c.y + r * th.cos());
        total += prev.distance(p);
        prev = p;
    }
    (total * FT_PER_NMI, prev)
}
