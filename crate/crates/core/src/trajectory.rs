//! Reference lateral trajectory predictor.
//!
//! Builds a lateral packet of straight legs and fly-by turn arcs from a flight
//! plan. Each arc reports its own length `beta`; the analysis side recomputes
//! the swept angle from the arc's center/start/end points and flags a failure
//! when `|beta - alpha*r|` exceeds the threshold.
//!
//! Turn construction at an interior waypoint with heading change `dpsi`:
//!
//! - feasible: the nominal radius fits, `t = r*tan(|dpsi|/2)` is no longer
//!   than the leg length available to the turn. Exact tangent arc.
//! - tight: the radius is shrunk to fit the available length. The arc is exact;
//!   with the defect enabled the reported length carries a small curvature
//!   transition allowance that grows as the available length shrinks.
//! - clamped: the available length is below `min_share` (near-duplicate
//!   waypoints). The arc keeps the nominal radius and its sweep is cut to fit.
//!   With the defect enabled `beta` is still computed from the unclamped sweep.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blackbox::SystemUnderTest;
use crate::error::{AstError, Result};
use crate::geometry::{wrap_pi, Point, FT_PER_NMI, MPS_PER_KT, M_PER_NMI, STANDARD_GRAVITY};

/// Failure threshold on the arc-length discrepancy, ft.
pub const DEFAULT_THRESHOLD_FT: f64 = 10.0;
/// Miss-distance scale.
pub const DEFAULT_RHO: f64 = 100.0;
/// Miss distance reported when the discrepancy is exactly zero.
pub const MISS_SENTINEL: f64 = 1e6;
/// Ground-speed floor used for turn radii, kt.
pub const MIN_GROUND_SPEED: f64 = 60.0;
/// Heading changes below this (rad) are treated as straight.
pub const TURN_EPS: f64 = 1e-9;
/// Share of the threshold the tight-turn allowance approaches at `min_share`.
pub const ALLOWANCE_FRACTION: f64 = 0.5;

const LENGTH_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Flight plan

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wind {
    /// Direction the wind blows from, degrees.
    pub dir_deg: f64,
    pub speed_kt: f64,
}

impl Wind {
    pub const CALM: Wind = Wind {
        dir_deg: 0.0,
        speed_kt: 0.0,
    };

    /// Along-track component for a track heading in radians; positive = tailwind.
    pub fn tailwind(&self, heading_rad: f64) -> f64 {
        -self.speed_kt * (self.dir_deg.to_radians() - heading_rad).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightPlan {
    pub origin: Point,
    /// Waypoint 0 is the origin.
    pub waypoints: Vec<Point>,
    /// One wind per waypoint.
    pub winds: Vec<Wind>,
}

impl FlightPlan {
    pub fn new(waypoints: Vec<Point>, winds: Vec<Wind>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(AstError::TooFewWaypoints(waypoints.len()));
        }
        if winds.len() != waypoints.len() {
            return Err(AstError::InvalidConfig(format!(
                "{} winds for {} waypoints",
                winds.len(),
                waypoints.len()
            )));
        }
        if waypoints.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(AstError::InvalidConfig("non-finite waypoint".into()));
        }
        Ok(FlightPlan {
            origin: waypoints[0],
            waypoints,
            winds,
        })
    }

    pub fn calm(waypoints: Vec<Point>) -> Result<Self> {
        let winds = vec![Wind::CALM; waypoints.len()];
        FlightPlan::new(waypoints, winds)
    }
}

// ---------------------------------------------------------------------------
// Lateral packet

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StraightSegment {
    pub start: Point,
    pub end: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    pub center: Point,
    /// Signed radius, nmi. Negative for left turns.
    pub radius: f64,
    pub start: Point,
    pub end: Point,
    /// Arc length reported by the predictor, nmi.
    pub reported_beta: f64,
}

impl ArcSegment {
    /// Sweep angle recomputed from the arc's points, radians.
    pub fn geometric_sweep(&self) -> f64 {
        let zs = self.center.azimuth_deg(self.start);
        let ze = self.center.azimuth_deg(self.end);
        angular_extent(zs, ze, self.radius).unwrap_or(0.0)
    }

    /// `|beta - alpha*|r||`, nmi.
    pub fn discrepancy(&self) -> f64 {
        (self.reported_beta - self.geometric_sweep() * self.radius.abs()).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Straight(StraightSegment),
    Arc(ArcSegment),
}

impl Segment {
    pub fn start(&self) -> Point {
        match self {
            Segment::Straight(s) => s.start,
            Segment::Arc(a) => a.start,
        }
    }

    pub fn end(&self) -> Point {
        match self {
            Segment::Straight(s) => s.end,
            Segment::Arc(a) => a.end,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LateralPacket {
    pub segments: Vec<Segment>,
}

impl LateralPacket {
    pub fn arcs(&self) -> impl Iterator<Item = &ArcSegment> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Arc(a) => Some(a),
            Segment::Straight(_) => None,
        })
    }

    /// Largest gap between one segment's end and the next one's start, nmi.
    pub fn max_gap(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| w[0].end().distance(w[1].start()))
            .fold(0.0, f64::max)
    }

    /// One segment per line: `S x1 y1 x2 y2` or `A cx cy r sx sy ex ey beta`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Straight(s) => {
                    let _ = writeln!(
                        out,
                        "S {:.8e} {:.8e} {:.8e} {:.8e}",
                        s.start.x, s.start.y, s.end.x, s.end.y
                    );
                }
                Segment::Arc(a) => {
                    let _ = writeln!(
                        out,
                        "A {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e} {:.8e}",
                        a.center.x,
                        a.center.y,
                        a.radius,
                        a.start.x,
                        a.start.y,
                        a.end.x,
                        a.end.y,
                        a.reported_beta
                    );
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, String> {
        let mut segments = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let nums: Vec<f64> = parts
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let seg = match (tag, nums.as_slice()) {
                ("S", &[x1, y1, x2, y2]) => Segment::Straight(StraightSegment {
                    start: Point::new(x1, y1),
                    end: Point::new(x2, y2),
                }),
                ("A", &[cx, cy, r, sx, sy, ex, ey, beta]) => Segment::Arc(ArcSegment {
                    center: Point::new(cx, cy),
                    radius: r,
                    start: Point::new(sx, sy),
                    end: Point::new(ex, ey),
                    reported_beta: beta,
                }),
                _ => return Err(format!("line {}: malformed segment '{line}'", lineno + 1)),
            };
            segments.push(seg);
        }
        Ok(LateralPacket { segments })
    }
}

// ---------------------------------------------------------------------------
// Predictor configuration

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    pub enabled: bool,
    /// Degrees, in (0, 45].
    pub bank_angle: f64,
    /// True airspeed, kt.
    pub airspeed: f64,
    /// Shortest leg share a turn is fitted into before its sweep is clamped, nmi.
    pub min_share: f64,
}

impl Default for DefectConfig {
    fn default() -> Self {
        DefectConfig {
            enabled: true,
            bank_angle: 25.0,
            airspeed: 450.0,
            min_share: 0.05,
        }
    }
}

impl DefectConfig {
    pub fn with_enabled(enabled: bool) -> Self {
        DefectConfig {
            enabled,
            ..DefectConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bank_angle > 0.0 && self.bank_angle <= 45.0) {
            return Err(AstError::InvalidConfig(format!(
                "bank angle {} outside (0, 45]",
                self.bank_angle
            )));
        }
        if !(self.airspeed > 0.0 && self.airspeed.is_finite()) {
            return Err(AstError::InvalidConfig(format!(
                "airspeed {} must be positive",
                self.airspeed
            )));
        }
        if !(self.min_share > 0.0 && self.min_share.is_finite()) {
            return Err(AstError::InvalidConfig(format!(
                "min share {} must be positive",
                self.min_share
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Geometry and analysis

/// Coordinated-turn radius `V² / (g tan φ)`, nmi.
pub fn turn_radius(ground_speed_kt: f64, bank_angle_deg: f64) -> Result<f64> {
    if !(ground_speed_kt > 0.0) {
        return Err(AstError::InvalidConfig(format!(
            "ground speed {ground_speed_kt} must be positive"
        )));
    }
    if !(bank_angle_deg > 0.0 && bank_angle_deg <= 45.0) {
        return Err(AstError::InvalidConfig(format!(
            "bank angle {bank_angle_deg} outside (0, 45]"
        )));
    }
    let v = ground_speed_kt * MPS_PER_KT;
    Ok(v * v / (STANDARD_GRAVITY * bank_angle_deg.to_radians().tan()) / M_PER_NMI)
}

/// Sweep from azimuth `z_s` to `z_e` (degrees) in the turn direction given by
/// the sign of `r`, in radians within [0, 2π).
pub fn angular_extent(z_s: f64, z_e: f64, r: f64) -> Result<f64> {
    if r == 0.0 || r.is_nan() {
        return Err(AstError::InvalidConfig("turn radius must be nonzero".into()));
    }
    let tau = 2.0 * PI;
    let a = ((z_e - z_s) * r.signum()).to_radians().rem_euclid(tau);
    Ok(if a >= tau { 0.0 } else { a })
}

/// Max arc-length discrepancy over the packet, ft. Zero without arcs.
pub fn arc_discrepancy(packet: &LateralPacket) -> f64 {
    packet
        .arcs()
        .map(|a| a.discrepancy() * FT_PER_NMI)
        .fold(0.0, f64::max)
}

/// `rho * ln(h / maxdiff)`; [`MISS_SENTINEL`] when `maxdiff` is zero.
pub fn miss_distance(maxdiff_ft: f64, h_ft: f64, rho: f64) -> f64 {
    if maxdiff_ft <= 0.0 {
        MISS_SENTINEL
    } else {
        rho * (h_ft / maxdiff_ft).ln()
    }
}

pub fn is_event(maxdiff_ft: f64, h_ft: f64) -> bool {
    maxdiff_ft >= h_ft
}

fn tangent_arc(corner: Point, h_in: f64, h_out: f64, radius: f64, dir: f64, beta: f64) -> ArcSegment {
    let half = (wrap_pi(h_out - h_in).abs() / 2.0).tan();
    let t = radius * half;
    let start = corner.displaced(h_in + PI, t);
    let end = corner.displaced(h_out, t);
    ArcSegment {
        center: start.displaced(h_in + dir * FRAC_PI_2, radius),
        radius: dir * radius,
        start,
        end,
        reported_beta: beta,
    }
}

fn leg_headings(points: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let lengths: Vec<f64> = points.windows(2).map(|w| w[0].distance(w[1])).collect();
    let raw: Vec<Option<f64>> = points
        .windows(2)
        .zip(&lengths)
        .map(|(w, &l)| (l > LENGTH_EPS).then(|| w[0].bearing_to(w[1])))
        .collect();
    // Zero-length legs inherit the previous heading (the next one if leading).
    let first = raw.iter().flatten().next().copied().unwrap_or(0.0);
    let mut prev = first;
    let headings = raw
        .iter()
        .map(|h| {
            if let Some(h) = h {
                prev = *h;
            }
            prev
        })
        .collect();
    (headings, lengths)
}

/// Build the lateral packet for a flight plan.
pub fn predict_lateral(plan: &FlightPlan, cfg: &DefectConfig) -> Result<LateralPacket> {
    let pts = &plan.waypoints;
    if pts.len() < 2 {
        return Err(AstError::TooFewWaypoints(pts.len()));
    }
    cfg.validate()?;
    let (headings, lengths) = leg_headings(pts);
    let n = pts.len();

    // dpsi[j] for interior waypoint j lives at index j.
    let mut dpsi = vec![0.0; n];
    for j in 1..n - 1 {
        dpsi[j] = wrap_pi(headings[j] - headings[j - 1]);
    }
    let is_turn = |j: usize| j >= 1 && j + 1 < n && dpsi[j].abs() >= TURN_EPS;

    let h_nmi = DEFAULT_THRESHOLD_FT / FT_PER_NMI;
    let mut segments = Vec::new();
    let mut cursor = pts[0];
    let push_straight = |segments: &mut Vec<Segment>, from: Point, to: Point| {
        if from.distance(to) > LENGTH_EPS {
            segments.push(Segment::Straight(StraightSegment { start: from, end: to }));
        }
    };

    for j in 1..n - 1 {
        if !is_turn(j) {
            continue;
        }
        let (h_in, h_out) = (headings[j - 1], headings[j]);
        let turn = dpsi[j];
        let dir = turn.signum();
        let abs_turn = turn.abs();
        let share_in = lengths[j - 1] * if is_turn(j - 1) { 0.5 } else { 1.0 };
        let share_out = lengths[j] * if is_turn(j + 1) { 0.5 } else { 1.0 };
        let avail = share_in.min(share_out);

        let wind = plan.winds[j];
        let ground_speed = (cfg.airspeed + wind.tailwind(h_in)).max(MIN_GROUND_SPEED);
        let r_nom = turn_radius(ground_speed, cfg.bank_angle)?;
        let tan_half = (abs_turn / 2.0).tan();

        let arc = if r_nom * tan_half <= avail {
            tangent_arc(pts[j], h_in, h_out, r_nom, dir, abs_turn * r_nom)
        } else {
            let r_fit = avail / tan_half;
            if avail >= cfg.min_share {
                let mut beta = abs_turn * r_fit;
                if cfg.enabled {
                    let c = ALLOWANCE_FRACTION * h_nmi * cfg.min_share;
                    beta += c * (1.0 / avail - 1.0 / (r_nom * tan_half));
                }
                tangent_arc(pts[j], h_in, h_out, r_fit, dir, beta)
            } else {
                let start = pts[j].displaced(h_in + PI, avail);
                let center = start.displaced(h_in + dir * FRAC_PI_2, r_nom);
                let sweep = 2.0 * (avail / r_nom).atan();
                let end = if sweep < 1e-12 {
                    start
                } else {
                    center.displaced(h_in + dir * (sweep - FRAC_PI_2), r_nom)
                };
                let beta = if cfg.enabled { abs_turn } else { sweep } * r_nom;
                ArcSegment {
                    center,
                    radius: dir * r_nom,
                    start,
                    end,
                    reported_beta: beta,
                }
            }
        };
        push_straight(&mut segments, cursor, arc.start);
        segments.push(Segment::Arc(arc));
        cursor = arc.end;
    }
    push_straight(&mut segments, cursor, pts[n - 1]);
    Ok(LateralPacket { segments })
}

// ---------------------------------------------------------------------------
// SUT wrapper

/// Stateful wrapper around [`predict_lateral`] implementing the SUT contract.
#[derive(Debug, Clone)]
pub struct TrajectoryPredictor {
    pub cfg: DefectConfig,
    pub threshold_ft: f64,
    pub rho: f64,
    waypoints_held: usize,
    last: Option<(LateralPacket, f64)>,
}

impl TrajectoryPredictor {
    pub fn new(cfg: DefectConfig) -> Self {
        TrajectoryPredictor {
            cfg,
            threshold_ft: DEFAULT_THRESHOLD_FT,
            rho: DEFAULT_RHO,
            waypoints_held: 0,
            last: None,
        }
    }

    pub fn waypoints_held(&self) -> usize {
        self.waypoints_held
    }

    pub fn last_packet(&self) -> Option<&LateralPacket> {
        self.last.as_ref().map(|(p, _)| p)
    }

    /// Max discrepancy of the last executed plan, ft.
    pub fn last_maxdiff(&self) -> Option<f64> {
        self.last.as_ref().map(|(_, d)| *d)
    }
}

impl Default for TrajectoryPredictor {
    fn default() -> Self {
        TrajectoryPredictor::new(DefectConfig::default())
    }
}

impl SystemUnderTest for TrajectoryPredictor {
    type Input = FlightPlan;

    fn initialize(&mut self) {
        self.waypoints_held = 0;
        self.last = None;
    }

    fn execute(&mut self, plan: &FlightPlan) -> Result<()> {
        let packet = predict_lateral(plan, &self.cfg)?;
        let maxdiff = arc_discrepancy(&packet);
        self.waypoints_held = plan.waypoints.len();
        self.last = Some((packet, maxdiff));
        Ok(())
    }

    fn miss_distance(&self) -> f64 {
        match self.last {
            Some((_, m)) => miss_distance(m, self.threshold_ft, self.rho),
            None => MISS_SENTINEL,
        }
    }

    fn is_event(&self) -> bool {
        matches!(self.last, Some((_, m)) if is_event(m, self.threshold_ft))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(enabled: bool) -> DefectConfig {
        DefectConfig::with_enabled(enabled)
    }

    #[test]
    fn turn_radius_examples() {
        // Hand evaluation: (450*0.514444)^2 / (9.80665*tan 25°) / 1852.
        let v = 450.0 * 0.514444;
        let oracle = v * v / (9.80665 * 0.466_307_658_154_998_6) / 1852.0;
        let r = turn_radius(450.0, 25.0).unwrap();
        assert!((r - oracle).abs() < 1e-12);
        assert!((r - 6.32).abs() < 0.02, "{r}");
        assert!(turn_radius(450.0, 45.0).unwrap() < r);
        assert!((turn_radius(900.0, 25.0).unwrap() / r - 4.0).abs() < 1e-12);
        assert!(turn_radius(0.0, 25.0).is_err());
        assert!(turn_radius(-5.0, 25.0).is_err());
    }

    #[test]
    fn angular_extent_examples() {
        let quarter = std::f64::consts::FRAC_PI_4;
        assert!((angular_extent(90.0, 135.0, 1.0).unwrap() - quarter).abs() < 1e-12);
        assert!((angular_extent(90.0, 45.0, -1.0).unwrap() - quarter).abs() < 1e-12);
        assert_eq!(angular_extent(42.0, 42.0, 3.0).unwrap(), 0.0);
        assert_eq!(angular_extent(42.0, 42.0, -3.0).unwrap(), 0.0);
        assert!(angular_extent(0.0, 10.0, 0.0).is_err());
        // Crossing north.
        let a = angular_extent(350.0, 10.0, 1.0).unwrap();
        assert!((a - 20f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn miss_and_event_examples() {
        assert!(miss_distance(10.0, 10.0, 100.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((miss_distance(10.0 * e, 10.0, 100.0) + 100.0).abs() < 1e-9);
        assert!((miss_distance(10.0 / e, 10.0, 100.0) - 100.0).abs() < 1e-9);
        assert_eq!(miss_distance(0.0, 10.0, 100.0), MISS_SENTINEL);
        assert!(is_event(10.0, 10.0));
        assert!(!is_event(9.999, 10.0));
        assert!(is_event(486.0, 10.0));
    }

    #[test]
    fn collinear_plan_has_no_arcs() {
        let plan = FlightPlan::calm(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, -20.0),
            Point::new(0.0, -50.0),
        ])
        .unwrap();
        let p = predict_lateral(&plan, &cfg(true)).unwrap();
        assert_eq!(p.arcs().count(), 0);
        assert_eq!(arc_discrepancy(&p), 0.0);
        assert_eq!(p.segments.len(), 1);
    }

    #[test]
    fn feasible_right_angle_is_defect_free() {
        let plan = FlightPlan::calm(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, -50.0),
            Point::new(50.0, -50.0),
        ])
        .unwrap();
        for enabled in [false, true] {
            let p = predict_lateral(&plan, &cfg(enabled)).unwrap();
            let arcs: Vec<_> = p.arcs().collect();
            assert_eq!(arcs.len(), 1);
            let a = arcs[0];
            // South to east is a left turn.
            assert!(a.radius < 0.0);
            assert!(a.discrepancy() < 1e-6);
            assert!((a.center.distance(a.start) - a.radius.abs()).abs() < 1e-9);
            assert!((a.center.distance(a.end) - a.radius.abs()).abs() < 1e-9);
            assert!(p.max_gap() < 1e-9);
        }
    }

    #[test]
    fn near_duplicate_pair_triggers_defect() {
        // A 90 degree south-to-east turn split over two waypoints 0.08 nmi apart.
        let a = Point::new(0.0, -50.0);
        let b = a.displaced(135f64.to_radians(), 0.08);
        let c = b.displaced(90f64.to_radians(), 50.0);
        let plan = FlightPlan::calm(vec![Point::ORIGIN, a, b, c]).unwrap();
        let on = predict_lateral(&plan, &cfg(true)).unwrap();
        let diff_on = arc_discrepancy(&on);
        assert!(is_event(diff_on, 10.0), "{diff_on}");
        assert!(on.max_gap() < 1e-9);
        let off = predict_lateral(&plan, &cfg(false)).unwrap();
        assert!(arc_discrepancy(&off) < 1e-6);
    }

    #[test]
    fn tight_turn_allowance_stays_below_threshold() {
        // Short outbound leg: tight turn, share above min_share.
        let plan = FlightPlan::calm(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, -50.0),
            Point::new(0.5, -50.0),
        ])
        .unwrap();
        let p = predict_lateral(&plan, &cfg(true)).unwrap();
        let d = arc_discrepancy(&p);
        assert!(d > 0.0 && d < 10.0, "{d}");
        let off = predict_lateral(&plan, &cfg(false)).unwrap();
        assert!(arc_discrepancy(&off) < 1e-6);
    }

    #[test]
    fn duplicate_waypoints_do_not_crash() {
        let plan = FlightPlan::calm(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, -50.0),
            Point::new(0.0, -50.0),
            Point::new(40.0, -80.0),
        ])
        .unwrap();
        let on = predict_lateral(&plan, &cfg(true)).unwrap();
        assert!(is_event(arc_discrepancy(&on), 10.0));
        assert!(on.max_gap() < 1e-9);
        let off = predict_lateral(&plan, &cfg(false)).unwrap();
        assert!(!is_event(arc_discrepancy(&off), 10.0));
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(arc_discrepancy(&LateralPacket::default()), 0.0);
        let c = Point::ORIGIN;
        let start = Point::new(0.0, 1.0);
        let end = c.displaced(1.0, 1.0);
        let mut arc = ArcSegment {
            center: c,
            radius: 1.0,
            start,
            end,
            reported_beta: 1.0,
        };
        let packet = |a| LateralPacket {
            segments: vec![Segment::Arc(a)],
        };
        assert!(arc_discrepancy(&packet(arc)) < 1e-9);
        arc.reported_beta = 1.0 + 10.0 / FT_PER_NMI;
        assert!((arc_discrepancy(&packet(arc)) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn too_few_waypoints() {
        assert!(FlightPlan::calm(vec![Point::ORIGIN]).is_err());
        let plan = FlightPlan {
            origin: Point::ORIGIN,
            waypoints: vec![Point::ORIGIN],
            winds: vec![Wind::CALM],
        };
        assert!(matches!(
            predict_lateral(&plan, &cfg(true)),
            Err(AstError::TooFewWaypoints(1))
        ));
    }

    #[test]
    fn text_round_trip() {
        let plan = FlightPlan::calm(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, -50.0),
            Point::new(50.0, -50.0),
        ])
        .unwrap();
        let p = predict_lateral(&plan, &cfg(true)).unwrap();
        let text = p.to_text();
        assert!(text.starts_with("S "));
        assert_eq!(text.lines().count(), 3);
        let back = LateralPacket::from_text(&text).unwrap();
        assert_eq!(back.segments.len(), 3);
        assert_eq!(back.to_text(), text);
        assert!(LateralPacket::from_text("Q 1 2").is_err());
    }

    #[test]
    fn tailwind_convention() {
        let from_north = Wind {
            dir_deg: 0.0,
            speed_kt: 20.0,
        };
        assert!((from_north.tailwind(PI) - 20.0).abs() < 1e-12);
        assert!((from_north.tailwind(0.0) + 20.0).abs() < 1e-12);
    }

    #[test]
    fn sut_reset() {
        let mut sut = TrajectoryPredictor::default();
        let plan = FlightPlan::calm(vec![Point::ORIGIN, Point::new(0.0, -3.0)]).unwrap();
        sut.execute(&plan).unwrap();
        assert_eq!(sut.waypoints_held(), 2);
        sut.initialize();
        assert_eq!(sut.waypoints_held(), 0);
        sut.initialize();
        assert_eq!(sut.waypoints_held(), 0);
        assert!(sut.last_packet().is_none());
    }
}
