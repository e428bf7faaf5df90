//! Seeded disturbance sampling, Gaussian log-likelihoods and flight-plan
//! construction from seed paths.
//!
//! A disturbance is the 4-vector `[waypoint bearing (deg), waypoint distance
//! (nmi), wind direction (deg), wind speed (kt)]`, drawn from independent
//! normals. Each seed owns a fresh generator, so a seed path replays exactly.

use std::f64::consts::PI;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{AstError, Result};
use crate::geometry::{normalize_deg, Point};
use crate::trajectory::{FlightPlan, Wind};

/// An AST action: one 64-bit generator seed.
pub type Seed = u64;

/// Smallest waypoint distance a disturbance can produce, nmi.
pub const MIN_WPT_DISTANCE: f64 = 0.01;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Independent normal distribution over the four disturbance components.
/// `sigma` holds standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvDistribution {
    pub mu: [f64; 4],
    pub sigma: [f64; 4],
}

impl Default for EnvDistribution {
    fn default() -> Self {
        EnvDistribution {
            mu: [180.0, 50.0, -88.5, 66.8],
            sigma: [45.0, 30.0, 39.5, 24.4],
        }
    }
}

impl EnvDistribution {
    pub fn new(mu: [f64; 4], sigma: [f64; 4]) -> Result<Self> {
        let d = EnvDistribution { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.iter().any(|m| !m.is_finite()) {
            return Err(AstError::InvalidConfig("mu must be finite".into()));
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(AstError::InvalidConfig(
                "sigma components must be finite and strictly positive".into(),
            ));
        }
        Ok(())
    }

    /// Log-density of a raw 4-vector sample (natural log).
    pub fn log_density_raw(&self, x: &[f64; 4]) -> f64 {
        (0..4)
            .map(|i| {
                let z = (x[i] - self.mu[i]) / self.sigma[i];
                -0.5 * z * z - self.sigma[i].ln() - LN_SQRT_2PI
            })
            .sum()
    }

    /// Draw the raw normal 4-vector for a seed.
    pub fn sample_raw(&self, seed: Seed) -> [f64; 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = [0.0; 4];
        for (i, xi) in x.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *xi = self.mu[i] + self.sigma[i] * z;
        }
        x
    }
}

/// One sampled disturbance. The public fields are the effective values used
/// to build geometry; `raw` keeps the untransformed normal sample that the
/// likelihood is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    /// Degrees in [0, 360), clockwise from true north.
    pub wpt_bearing: f64,
    /// Nautical miles, at least [`MIN_WPT_DISTANCE`].
    pub wpt_distance: f64,
    /// Degrees, direction the wind blows from. Any real value.
    pub wind_dir: f64,
    /// Knots, non-negative.
    pub wind_speed: f64,
    pub raw: [f64; 4],
}

impl Disturbance {
    /// Build a disturbance whose raw sample equals its fields.
    pub fn new(wpt_bearing: f64, wpt_distance: f64, wind_dir: f64, wind_speed: f64) -> Self {
        Disturbance {
            wpt_bearing,
            wpt_distance,
            wind_dir,
            wind_speed,
            raw: [wpt_bearing, wpt_distance, wind_dir, wind_speed],
        }
    }

    /// Map a raw normal sample to effective values. A negative distance is
    /// folded onto the reciprocal bearing before the distance floor applies.
    pub fn from_raw(raw: [f64; 4]) -> Self {
        let [mut bearing, mut distance, wind_dir, wind_speed] = raw;
        if distance < 0.0 {
            distance = -distance;
            bearing += 180.0;
        }
        Disturbance {
            wpt_bearing: normalize_deg(bearing),
            wpt_distance: distance.max(MIN_WPT_DISTANCE),
            wind_dir,
            wind_speed: wind_speed.max(0.0),
            raw,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.wpt_bearing, self.wpt_distance, self.wind_dir, self.wind_speed]
    }

    pub fn wind(&self) -> Wind {
        Wind {
            dir_deg: self.wind_dir,
            speed_kt: self.wind_speed,
        }
    }
}

/// The AST state payload: every action taken so far, plus the fixed origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPath {
    pub seeds: Vec<Seed>,
    pub origin: Point,
}

impl SeedPath {
    pub fn new(origin: Point) -> Self {
        SeedPath {
            seeds: Vec::new(),
            origin,
        }
    }

    pub fn from_seeds(origin: Point, seeds: Vec<Seed>) -> Self {
        SeedPath { seeds, origin }
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn pushed(&self, seed: Seed) -> SeedPath {
        let mut seeds = Vec::with_capacity(self.seeds.len() + 1);
        seeds.extend_from_slice(&self.seeds);
        seeds.push(seed);
        SeedPath {
            seeds,
            origin: self.origin,
        }
    }
}

pub fn sample_disturbance(seed: Seed, dist: &EnvDistribution) -> Disturbance {
    Disturbance::from_raw(dist.sample_raw(seed))
}

/// Σᵢ log N(wᵢ; μᵢ, σᵢ²) over the raw sample.
pub fn log_density(w: &Disturbance, dist: &EnvDistribution) -> f64 {
    dist.log_density_raw(&w.raw)
}

pub fn disturbances_log_likelihood(ws: &[Disturbance], dist: &EnvDistribution) -> f64 {
    ws.iter().map(|w| log_density(w, dist)).sum()
}

pub fn path_disturbances(path: &SeedPath, dist: &EnvDistribution) -> Vec<Disturbance> {
    path.seeds
        .iter()
        .map(|&s| sample_disturbance(s, dist))
        .collect()
}

pub fn path_log_likelihood(path: &SeedPath, dist: &EnvDistribution) -> Result<f64> {
    if path.is_empty() {
        return Err(AstError::EmptyPath);
    }
    Ok(disturbances_log_likelihood(
        &path_disturbances(path, dist),
        dist,
    ))
}

/// Chain disturbances from `origin` into a flight plan. The origin carries
/// calm wind; waypoint k carries the wind of disturbance k.
pub fn plan_from_disturbances(origin: Point, ws: &[Disturbance]) -> Result<FlightPlan> {
    if ws.is_empty() {
        return Err(AstError::EmptyPath);
    }
    let mut waypoints = Vec::with_capacity(ws.len() + 1);
    let mut winds = Vec::with_capacity(ws.len() + 1);
    waypoints.push(origin);
    winds.push(Wind::CALM);
    let mut p = origin;
    for w in ws {
        p = p.displaced(w.wpt_bearing * PI / 180.0, w.wpt_distance);
        waypoints.push(p);
        winds.push(w.wind());
    }
    FlightPlan::new(waypoints, winds)
}

pub fn build_flight_plan(path: &SeedPath, dist: &EnvDistribution) -> Result<FlightPlan> {
    plan_from_disturbances(path.origin, &path_disturbances(path, dist))
}

// ---------------------------------------------------------------------------
// Origin presets and configuration

/// Named origins on the local plane, nmi from the KSFO reference.
pub const ORIGIN_PRESETS: &[(&str, Point)] = &[
    ("KSFO", Point::new(0.0, 0.0)),
    ("KLAX", Point::new(193.3, -220.9)),
];

pub fn origin_preset(name: &str) -> Option<Point> {
    ORIGIN_PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, p)| *p)
}

/// Environment file contents (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    #[serde(default = "default_mu")]
    pub mu: [f64; 4],
    #[serde(default = "default_sigma")]
    pub sigma: [f64; 4],
    #[serde(default = "default_origin")]
    pub origin: String,
}

fn default_mu() -> [f64; 4] {
    EnvDistribution::default().mu
}
fn default_sigma() -> [f64; 4] {
    EnvDistribution::default().sigma
}
fn default_origin() -> String {
    "KSFO".to_string()
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            mu: default_mu(),
            sigma: default_sigma(),
            origin: default_origin(),
        }
    }
}

impl EnvConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AstError::io(path, e))?;
        let cfg: EnvConfig = toml::from_str(&text).map_err(|e| AstError::parse(path, e))?;
        cfg.environment()
            .map_err(|e| AstError::parse(path, e))?;
        Ok(cfg)
    }

    pub fn environment(&self) -> Result<FlightEnvironment> {
        let dist = EnvDistribution::new(self.mu, self.sigma)?;
        let origin = origin_preset(&self.origin).ok_or_else(|| {
            AstError::InvalidConfig(format!("unknown origin preset '{}'", self.origin))
        })?;
        Ok(FlightEnvironment { dist, origin })
    }
}

/// The simulation environment: turns seed paths into flight plans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightEnvironment {
    pub dist: EnvDistribution,
    pub origin: Point,
}

impl Default for FlightEnvironment {
    fn default() -> Self {
        FlightEnvironment {
            dist: EnvDistribution::default(),
            origin: Point::ORIGIN,
        }
    }
}

impl FlightEnvironment {
    pub fn root(&self) -> SeedPath {
        SeedPath::new(self.origin)
    }
}
