//! Parametric river fixtures with an analytic chainage, and seeded traffic.
//!
//! A river is a centerline in a local frame (`x` downstream-to-upstream
//! along increasing km, `y` to the left) that is rotated and translated into
//! projected coordinates. Profiles are perpendicular to the centerline every
//! `profile_spacing_m`; fairway boundaries lie at `±width_m / 2`.
//!
//! Traffic is generated from `ChaCha8Rng`, one stream per vessel, so the
//! output depends only on the seed and the specs.

use crate::domain::{AisRecord, BoundarySamples, Direction, ProfileLine, Side, Track, WaterwayAxis};
use crate::error::{Error, Result};
use crate::geom::{bearing, GeoPoint};
use crate::io::{write_ais, write_axis, write_boundaries};
use crate::kilometer::{KmShiftMap, HECTOMETER_KM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Centerline {
    Straight,
    /// Left-turning circular arc.
    Arc { radius: f64 },
    /// `y = amplitude · sin(2π x / wavelength)`.
    Sinusoid { amplitude: f64, wavelength: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiverSpec {
    pub waterway_id: String,
    pub centerline: Centerline,
    pub length_km: f64,
    pub width_m: f64,
    pub profile_spacing_m: f64,
    /// Half length of each profile line; the kilometerization corridor.
    pub corridor_m: f64,
    pub boundary_spacing_m: f64,
    /// `(along_km, extra)`: official labels of profiles more than `along_km`
    /// from the start are raised by `extra`.
    pub gaps: Vec<(f64, f64)>,
    pub start_km: f64,
    pub origin: GeoPoint,
    /// Bearing of increasing km at the start, degrees.
    pub bearing_deg: f64,
}

impl Default for RiverSpec {
    fn default() -> Self {
        RiverSpec {
            waterway_id: "SYN".into(),
            centerline: Centerline::Straight,
            length_km: 5.0,
            width_m: 120.0,
            profile_spacing_m: 100.0,
            corridor_m: 150.0,
            boundary_spacing_m: 20.0,
            gaps: Vec::new(),
            start_km: 100.0,
            origin: GeoPoint::new(420_000.0, 5_540_000.0),
            bearing_deg: 20.0,
        }
    }
}

impl RiverSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.length_km > 0.0 && self.width_m > 0.0 && self.profile_spacing_m > 0.0) {
            return bad("length, width and profile spacing must be positive".into());
        }
        if self.corridor_m < self.width_m / 2.0 {
            return bad("corridor must contain the fairway".into());
        }
        if !(self.boundary_spacing_m > 0.0) {
            return bad("boundary spacing must be positive".into());
        }
        let n = self.length_km * 1000.0 / self.profile_spacing_m;
        if (n - n.round()).abs() > 1e-9 || n.round() < 2.0 {
            return bad(format!(
                "profile spacing {} m must divide the length {} km into at least 2 parts",
                self.profile_spacing_m, self.length_km
            ));
        }
        let tenths = self.start_km * 10.0;
        if (tenths - tenths.round()).abs() > 1e-9 {
            return bad("start km must be a whole hectometer".into());
        }
        match self.centerline {
            Centerline::Straight => {}
            Centerline::Arc { radius } => {
                if radius <= self.width_m || radius <= self.corridor_m {
                    return bad(format!("radius {radius} m must exceed width and corridor"));
                }
                if self.length_km * 1000.0 / radius >= 1.8 * PI {
                    return bad("arc must stay below 324 degrees".into());
                }
            }
            Centerline::Sinusoid { amplitude, wavelength } => {
                if amplitude < 0.0 || wavelength <= 0.0 {
                    return bad("sinusoid needs amplitude >= 0 and wavelength > 0".into());
                }
                let k = 2.0 * PI / wavelength;
                if amplitude * k * k * self.corridor_m >= 1.0 {
                    return bad("sinusoid is too tight for the corridor".into());
                }
            }
        }
        if self.gaps.iter().any(|g| !(g.1 > 0.0)) {
            return bad("gap sizes must be positive".into());
        }
        Ok(())
    }
}

// Gauss–Legendre 5-point nodes and weights on [-1, 1].
const GL_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];
const TABLE_DX: f64 = 5.0;

/// Sinusoid arc length by tabulated Gauss–Legendre quadrature.
#[derive(Debug, Clone)]
struct SineArc {
    a: f64,
    k: f64,
    cumulative: Vec<f64>,
}

impl SineArc {
    fn new(a: f64, wavelength: f64, length: f64) -> SineArc {
        let k = 2.0 * PI / wavelength;
        let mut s = SineArc { a, k, cumulative: vec![0.0] };
        // the x extent is at most the arc length
        let cells = (length / TABLE_DX).ceil() as usize + 2;
        for i in 0..cells {
            let x0 = i as f64 * TABLE_DX;
            let next = s.cumulative[i] + s.integral(x0, x0 + TABLE_DX);
            s.cumulative.push(next);
        }
        s
    }

    fn speed(&self, x: f64) -> f64 {
        let d = self.a * self.k * (self.k * x).cos();
        (1.0 + d * d).sqrt()
    }

    fn integral(&self, x0: f64, x1: f64) -> f64 {
        let (m, h) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
        GL_X.iter().zip(GL_W).map(|(&t, w)| w * self.speed(m + h * t)).sum::<f64>() * h
    }

    fn arc(&self, x: f64) -> f64 {
        let i = ((x / TABLE_DX).floor().max(0.0) as usize).min(self.cumulative.len() - 2);
        let x0 = i as f64 * TABLE_DX;
        self.cumulative[i] + self.integral(x0, x)
    }

    fn x_at(&self, s: f64) -> f64 {
        let mut x = s;
        for _ in 0..50 {
            let dx = (self.arc(x) - s) / self.speed(x);
            x -= dx;
            if dx.abs() < 1e-12 {
                break;
            }
        }
        x
    }

    fn y(&self, x: f64) -> (f64, f64, f64) {
        let (s, c) = (self.k * x).sin_cos();
        (self.a * s, self.a * self.k * c, -self.a * self.k * self.k * s)
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Straight,
    Arc(f64),
    Sine(SineArc),
}

/// Exact chainage of the synthetic centerline.
#[derive(Debug, Clone)]
pub struct ChainageOracle {
    shape: Shape,
    origin: GeoPoint,
    u: GeoPoint,
    v: GeoPoint,
    length_m: f64,
    spacing_m: f64,
    start_km: f64,
    shift: KmShiftMap,
}

impl ChainageOracle {
    fn to_world(&self, x: f64, y: f64) -> GeoPoint {
        self.origin + self.u * x + self.v * y
    }

    fn to_local(&self, p: GeoPoint) -> (f64, f64) {
        let d = p - self.origin;
        (d.dot(self.u), d.dot(self.v))
    }

    fn rotate(&self, x: f64, y: f64) -> GeoPoint {
        self.u * x + self.v * y
    }

    /// Centerline point and unit left normal at arc length `s`.
    fn frame(&self, s: f64) -> (GeoPoint, GeoPoint) {
        match &self.shape {
            Shape::Straight => (self.to_world(s, 0.0), self.v),
            Shape::Arc(r) => {
                let (sn, cs) = (s / r).sin_cos();
                (self.to_world(r * sn, r * (1.0 - cs)), self.rotate(-sn, cs))
            }
            Shape::Sine(sa) => {
                let x = sa.x_at(s);
                let (y, dy, _) = sa.y(x);
                let norm = (1.0 + dy * dy).sqrt();
                (self.to_world(x, y), self.rotate(-dy / norm, 1.0 / norm))
            }
        }
    }

    pub fn km_of_arc(&self, s: f64) -> f64 {
        self.start_km + HECTOMETER_KM * s / self.spacing_m
    }

    pub fn arc_of_km(&self, km: f64) -> f64 {
        (km - self.start_km) * self.spacing_m / HECTOMETER_KM
    }

    /// Internal km range of the centerline.
    pub fn coverage(&self) -> (f64, f64) {
        (self.start_km, self.km_of_arc(self.length_m))
    }

    pub fn shift_map(&self) -> &KmShiftMap {
        &self.shift
    }

    /// Position at internal `km` with `offset` meters to the right of increasing km.
    pub fn point(&self, km: f64, offset: f64) -> GeoPoint {
        let (c, n) = self.frame(self.arc_of_km(km));
        c - n * offset
    }

    /// Unit direction of increasing km at internal `km`.
    pub fn tangent(&self, km: f64) -> GeoPoint {
        let (_, n) = self.frame(self.arc_of_km(km));
        n.perp_right()
    }

    /// Internal km of the foot point on the centerline and the signed offset
    /// (right of increasing km positive).
    pub fn chainage(&self, p: GeoPoint) -> (f64, f64) {
        let (px, py) = self.to_local(p);
        let (s, left) = match &self.shape {
            Shape::Straight => (px, py),
            Shape::Arc(r) => {
                let phi = px.atan2(r - py);
                (r * phi, r - (px * px + (r - py) * (r - py)).sqrt())
            }
            Shape::Sine(sa) => {
                let mut x = px;
                for _ in 0..100 {
                    let (y, dy, ddy) = sa.y(x);
                    let g = (px - x) + (py - y) * dy;
                    let dg = -1.0 - dy * dy + (py - y) * ddy;
                    let step = g / dg;
                    x -= step;
                    if step.abs() < 1e-12 {
                        break;
                    }
                }
                let (y, dy, _) = sa.y(x);
                let left = ((px - x) * -dy + (py - y)) / (1.0 + dy * dy).sqrt();
                (sa.arc(x), left)
            }
        };
        (self.km_of_arc(s), -left)
    }
}

/// A generated river with its analytic oracle.
#[derive(Debug, Clone)]
pub struct SyntheticRiver {
    pub spec: RiverSpec,
    pub axis: WaterwayAxis,
    pub right: BoundarySamples,
    pub left: BoundarySamples,
    pub oracle: ChainageOracle,
}

impl SyntheticRiver {
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_axis(dir.join("axis.csv"), &self.axis)?;
        write_boundaries(dir.join("boundaries.csv"), &self.right, &self.left)
    }
}

pub fn gen_river(spec: &RiverSpec) -> Result<SyntheticRiver> {
    spec.validate()?;
    let length_m = spec.length_km * 1000.0;
    let nprof = (length_m / spec.profile_spacing_m).round() as usize;
    let b = spec.bearing_deg.to_radians();
    let u = GeoPoint::new(b.sin(), b.cos());
    let shape = match spec.centerline {
        Centerline::Straight => Shape::Straight,
        Centerline::Arc { radius } => Shape::Arc(radius),
        Centerline::Sinusoid { amplitude, wavelength } => {
            Shape::Sine(SineArc::new(amplitude, wavelength, length_m))
        }
    };
    let official: Vec<f64> = (0..=nprof)
        .map(|i| {
            let along = i as f64 * spec.profile_spacing_m / 1000.0;
            let extra: f64 = spec.gaps.iter().filter(|g| along > g.0 + 1e-9).map(|g| g.1).sum();
            round_label(spec.start_km + along + extra)
        })
        .collect();
    let oracle = ChainageOracle {
        shape,
        origin: spec.origin,
        u,
        v: u.perp_left(),
        length_m,
        spacing_m: spec.profile_spacing_m,
        start_km: spec.start_km,
        shift: KmShiftMap::from_labels(&official)?,
    };

    let profiles = (0..=nprof)
        .map(|i| {
            let (c, n) = oracle.frame(i as f64 * spec.profile_spacing_m);
            ProfileLine::new(
                official[i],
                vec![c + n * spec.corridor_m, c, c - n * spec.corridor_m],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let axis = WaterwayAxis::new(spec.waterway_id.clone(), profiles)?;

    let nb = (length_m / spec.boundary_spacing_m - 1e-9).ceil() as usize;
    let half = spec.width_m / 2.0;
    let mut right = Vec::with_capacity(nb + 1);
    let mut left = Vec::with_capacity(nb + 1);
    for j in 0..=nb {
        let s = (j as f64 * spec.boundary_spacing_m).min(length_m);
        let km = oracle.shift.to_official(oracle.km_of_arc(s));
        let (c, n) = oracle.frame(s);
        right.push((km, c - n * half));
        left.push((km, c + n * half));
    }
    Ok(SyntheticRiver {
        spec: spec.clone(),
        axis,
        right: BoundarySamples::new(Side::Right, right)?,
        left: BoundarySamples::new(Side::Left, left)?,
        oracle,
    })
}

fn round_label(km: f64) -> f64 {
    (km * 1e9).round() / 1e9
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSpec {
    pub vessels: usize,
    /// Share of vessels travelling upstream (increasing km).
    pub up_share: f64,
    /// Lateral offset from the centerline, meters to starboard.
    pub offset_mean_m: f64,
    pub offset_std_m: f64,
    /// Centerline speed in internal km per minute before the deviation.
    pub base_speed: f64,
    pub speed_dev_mean: f64,
    pub speed_dev_std: f64,
    pub report_interval_s: f64,
    pub jitter_s: f64,
    pub noise_std_m: f64,
    pub start_time: f64,
    pub departure_spacing_s: f64,
    /// Distance kept from both ends of the river, km.
    pub margin_km: f64,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            vessels: 40,
            up_share: 0.5,
            offset_mean_m: 10.0,
            offset_std_m: 4.0,
            base_speed: 0.2,
            speed_dev_mean: 0.0,
            speed_dev_std: 0.01,
            report_interval_s: 10.0,
            jitter_s: 3.0,
            noise_std_m: 1.0,
            start_time: 1_700_000_000.0,
            departure_spacing_s: 300.0,
            margin_km: 0.05,
        }
    }
}

impl TrafficSpec {
    pub fn validate(&self) -> Result<()> {
        let stds = [self.offset_std_m, self.speed_dev_std, self.jitter_s, self.noise_std_m];
        if stds.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidInput("standard deviations and jitter must be >= 0".into()));
        }
        if !(self.base_speed > 0.0) || !(self.report_interval_s > 0.0) {
            return Err(Error::InvalidInput("speed and report interval must be positive".into()));
        }
        if self.jitter_s >= self.report_interval_s {
            return Err(Error::InvalidInput("jitter must stay below the report interval".into()));
        }
        if !(0.0..=1.0).contains(&self.up_share) {
            return Err(Error::InvalidInput("up_share must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Per-vessel parameters drawn by [`gen_traffic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VesselPlan {
    pub direction: Direction,
    pub offset_m: f64,
    pub speed: f64,
    pub departure: f64,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn vessel_rng(seed: u64, vessel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vessel as u64 + 1);
    rng
}

pub fn vessel_id(i: usize) -> String {
    format!("V{:04}", i + 1)
}

fn draw_plan(spec: &TrafficSpec, i: usize, rng: &mut ChaCha8Rng) -> VesselPlan {
    let ups = (spec.vessels as f64 * spec.up_share).round() as usize;
    let direction = if i < ups { Direction::Up } else { Direction::Down };
    let offset_m = spec.offset_mean_m + spec.offset_std_m * normal(rng);
    let speed = spec.base_speed + spec.speed_dev_mean + spec.speed_dev_std * normal(rng);
    let departure = spec.start_time + i as f64 * spec.departure_spacing_s + rng.gen_range(0.0..60.0);
    VesselPlan {
        direction,
        offset_m,
        speed,
        departure,
    }
}

/// Direction, offset, speed and departure of vessel `i`.
pub fn plan_vessel(spec: &TrafficSpec, seed: u64, i: usize) -> VesselPlan {
    draw_plan(spec, i, &mut vessel_rng(seed, i))
}

/// Seeded AIS tracks following constant centerline offsets at constant km speed.
pub fn gen_traffic(river: &SyntheticRiver, spec: &TrafficSpec, seed: u64) -> Result<Vec<Track>> {
    spec.validate()?;
    let (lo, hi) = river.oracle.coverage();
    let (a, b) = (lo + spec.margin_km, hi - spec.margin_km);
    if b <= a {
        return Err(Error::InvalidInput("river too short for the margin".into()));
    }
    (0..spec.vessels)
        .into_par_iter()
        .map(|i| {
            let mut rng = vessel_rng(seed, i);
            let plan = draw_plan(spec, i, &mut rng);
            if plan.speed <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "vessel {} drew a non-positive speed",
                    vessel_id(i)
                )));
            }

            let sign = plan.direction.km_sign();
            let (km0, km1) = if sign > 0.0 { (a, b) } else { (b, a) };
            let side_offset = sign * plan.offset_m;
            let id = vessel_id(i);
            let mut records = Vec::new();
            let mut t = plan.departure;
            loop {
                let km = km0 + sign * plan.speed * (t - plan.departure) / 60.0;
                if (km - km1) * sign > 0.0 {
                    break;
                }
                let exact = river.oracle.point(km, side_offset);
                let eps = 1e-4;
                let ahead = river.oracle.point(km + sign * eps, side_offset);
                let behind = river.oracle.point(km - sign * eps, side_offset);
                let cog = bearing(behind, ahead).unwrap_or(0.0);
                let sog = ahead.distance(behind) / (2.0 * eps) * plan.speed / 60.0;
                let noise = GeoPoint::new(normal(&mut rng), normal(&mut rng)) * spec.noise_std_m;
                records.push(AisRecord {
                    vessel_id: id.clone(),
                    timestamp: round_to(t, 1e3),
                    position: round_point(exact + noise),
                    cog: crate::geom::normalize_bearing(round_to(cog, 1e2)),
                    sog: Some(round_to(sog, 1e3)),
                    direction: plan.direction,
                });
                let jitter = if spec.jitter_s > 0.0 {
                    rng.gen_range(-spec.jitter_s..spec.jitter_s)
                } else {
                    0.0
                };
                t += spec.report_interval_s + jitter;
            }
            Ok(Track {
                vessel_id: id,
                direction: plan.direction,
                records,
            })
        })
        .collect()
}

fn round_to(v: f64, scale: f64) -> f64 {
    (v * scale).round() / scale
}

// millimeter resolution keeps the CSV compact and round-trippable
fn round_point(p: GeoPoint) -> GeoPoint {
    GeoPoint::new(round_to(p.easting, 1e3), round_to(p.northing, 1e3))
}

/// Write `axis.csv`, `boundaries.csv` and `ais.csv` into `dir`.
pub fn write_dataset(dir: impl AsRef<Path>, river: &SyntheticRiver, tracks: &[Track]) -> Result<()> {
    let dir = dir.as_ref();
    river.write(dir)?;
    write_ais(dir.join("ais.csv"), tracks)
}
