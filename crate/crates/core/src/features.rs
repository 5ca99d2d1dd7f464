//! Dislocation features in the global, river and navigation reference
//! systems, their inverse, and class discretization.
//!
//! A feature step describes the motion from `p_t` to `p_{t+1}` as a
//! `(longitudinal, lateral)` pair:
//!
//! | system | longitudinal | lateral |
//! |--------|--------------|---------|
//! | `glob` | `‖p_{t+1} − p_t‖` (m) | heading change (deg) |
//! | `riv`  | progress `k_t` (km) | change of the relative fairway offset |
//! | `nav`  | `k_t − z(h(p_t))` (km) | change of the route offset `s` (m) |
//!
//! Progress `k_t` is measured in the direction of travel, so it is positive
//! for both upstream and downstream vessels.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::Direction;
use crate::error::{Error, Result};
use crate::fairway::Fairway;
use crate::geom::{bearing, normalize_bearing, wrap_degrees, GeoPoint};
use crate::io::create;
use crate::kilometer::KilometerIndex;
use crate::navstats::{RouteContext, SpeedProfile, TypicalRoute};
use crate::preprocess::{SequenceSample, HORIZON, T_OBS};

/// Margin of a codebook range beyond the training extremes, in resolutions.
pub const CODEBOOK_MARGIN: i64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Glob,
    Riv,
    Nav,
}

impl System {
    pub const ALL: [System; 3] = [System::Glob, System::Riv, System::Nav];

    pub fn as_str(self) -> &'static str {
        match self {
            System::Glob => "glob",
            System::Riv => "riv",
            System::Nav => "nav",
        }
    }

    /// Default `(longitudinal, lateral)` class resolutions.
    pub fn resolution(self) -> [f64; 2] {
        match self {
            System::Glob => [1.0, 0.5],
            System::Riv => [0.001, 0.005],
            System::Nav => [0.001, 1.0],
        }
    }

    /// Longitudinal resolution in meters.
    pub fn longitudinal_resolution_m(self) -> f64 {
        match self {
            System::Glob => self.resolution()[0],
            System::Riv | System::Nav => self.resolution()[0] * 1000.0,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for System {
    type Err = Error;
    fn from_str(s: &str) -> Result<System> {
        match s.trim().to_ascii_lowercase().as_str() {
            "glob" | "g" => Ok(System::Glob),
            "riv" | "r" => Ok(System::Riv),
            "nav" | "n" => Ok(System::Nav),
            other => Err(Error::InvalidInput(format!("unknown feature system '{other}'"))),
        }
    }
}

/// Everything needed to encode and decode features of one travel direction.
#[derive(Debug, Clone)]
pub struct Geometry<'a> {
    pub direction: Direction,
    pub index: &'a KilometerIndex,
    /// Fairway oriented for `direction`.
    pub fairway: Fairway,
    pub route: &'a TypicalRoute,
    pub speed: &'a SpeedProfile,
    pub context: &'a RouteContext,
}

impl<'a> Geometry<'a> {
    /// `fairway` carries boundaries labeled for upstream travel.
    pub fn new(
        index: &'a KilometerIndex,
        fairway: &Fairway,
        route: &'a TypicalRoute,
        speed: &'a SpeedProfile,
        context: &'a RouteContext,
    ) -> Result<Geometry<'a>> {
        let direction = route.direction;
        if speed.direction != direction || context.direction != direction {
            return Err(Error::Validation(format!(
                "route ({}), speed profile ({}) and context ({}) directions differ",
                direction, speed.direction, context.direction
            )));
        }
        let geo = Geometry {
            direction,
            index,
            fairway: fairway.oriented(direction),
            route,
            speed,
            context,
        };
        geo.check_route_normal()?;
        Ok(geo)
    }

    // a point displaced along the normal must lie further left in the fairway
    fn check_route_normal(&self) -> Result<()> {
        let (lo, hi) = self.route.coverage();
        let km = 0.5 * (lo + hi);
        let q = self.route.eval(km)?;
        let probe = q + self.route_normal(km)?;
        let f_q = self.fairway.frame(q, km)?.f;
        let f_probe = self.fairway.frame(probe, km)?.f;
        if f_probe > f_q {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "route normal at km {km:.3} does not point to the left of travel"
            )))
        }
    }

    /// Unit normal of the typical route along which `s` grows.
    pub fn route_normal(&self, km: f64) -> Result<GeoPoint> {
        Ok(self.index.profile_direction(km)? * -self.direction.km_sign())
    }

    /// Signed offset `s` of `p` from the typical route at `km`.
    pub fn route_offset(&self, p: GeoPoint, km: f64) -> Result<f64> {
        let q = self.route.eval(km)?;
        let d = q.distance(p);
        let f_p = self.fairway.frame(p, km)?.f;
        let f_nav = self.fairway.frame(q, km)?.f;
        Ok(if f_p > f_nav { d } else { -d })
    }

    /// Context vector for a sample whose last observed position lies at `km`.
    pub fn context_vector(&self, system: System, km: f64) -> Vec<f64> {
        let Some(c) = self.context.at(km) else {
            return vec![0.0; context_len(system)];
        };
        match system {
            System::Glob => vec![c.curvature],
            System::Riv => vec![c.curvature, c.orientation.code()],
            System::Nav => vec![c.curvature, c.orientation.code(), c.hecto_euclid],
        }
    }
}

pub fn context_len(system: System) -> usize {
    match system {
        System::Glob => 1,
        System::Riv => 2,
        System::Nav => 3,
    }
}

/// Kinematic state at one position; the starting point of decoding.
///
/// Fields not used by a system are absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub position: [f64; 2],
    /// Internal km.
    pub km: f64,
    /// Heading of the segment arriving at the position, degrees.
    pub heading: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
}

impl Anchor {
    pub fn point(&self) -> GeoPoint {
        GeoPoint::new(self.position[0], self.position[1])
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    km: f64,
    rel: f64,
    f: f64,
    width: f64,
    s: f64,
}

fn state(system: System, p: GeoPoint, geo: &Geometry) -> Result<State> {
    let km = geo.index.kilometrize(p)?.km;
    let mut st = State {
        km,
        rel: f64::NAN,
        f: f64::NAN,
        width: f64::NAN,
        s: f64::NAN,
    };
    match system {
        System::Glob => {}
        System::Riv => {
            let fr = geo.fairway.frame(p, km)?;
            (st.rel, st.f, st.width) = (fr.rel, fr.f, fr.width);
        }
        System::Nav => {
            let fr = geo.fairway.frame(p, km)?;
            (st.rel, st.f, st.width) = (fr.rel, fr.f, fr.width);
            st.s = geo.route_offset(p, km)?;
        }
    }
    Ok(st)
}

fn anchor_of(system: System, p: GeoPoint, heading: f64, st: &State) -> Anchor {
    let some = |v: f64, used: bool| if used { Some(v) } else { None };
    Anchor {
        position: [p.easting, p.northing],
        km: st.km,
        heading,
        rel: some(st.rel, system != System::Glob),
        f: some(st.f, system != System::Glob),
        width: some(st.width, system != System::Glob),
        s: some(st.s, system == System::Nav),
    }
}

/// Arrival headings: `lead_heading` at the first position, then the bearing
/// of each segment. A zero-length segment keeps the previous heading.
pub fn arrival_headings(positions: &[GeoPoint], lead_heading: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(positions.len());
    h.push(normalize_bearing(lead_heading));
    for w in positions.windows(2) {
        let last = *h.last().expect("non-empty");
        h.push(bearing(w[0], w[1]).unwrap_or(last));
    }
    h
}

/// Feature steps along `positions` and the anchor at position `anchor_at`.
///
/// Errors name the position that could not be referenced.
pub fn encode_path(
    system: System,
    positions: &[GeoPoint],
    lead_heading: f64,
    anchor_at: usize,
    geo: &Geometry,
) -> Result<(Vec<[f64; 2]>, Anchor)> {
    if anchor_at >= positions.len() {
        return Err(Error::InvalidInput(format!(
            "anchor {anchor_at} outside a path of {} positions",
            positions.len()
        )));
    }
    let headings = arrival_headings(positions, lead_heading);
    let sign = geo.direction.km_sign();
    let states = match system {
        System::Glob => {
            let st = state(system, positions[anchor_at], geo).map_err(|e| Error::at_step(anchor_at, e))?;
            vec![st; positions.len()]
        }
        _ => positions
            .iter()
            .enumerate()
            .map(|(t, &p)| state(system, p, geo).map_err(|e| Error::at_step(t, e)))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut steps = Vec::with_capacity(positions.len().saturating_sub(1));
    for t in 0..positions.len().saturating_sub(1) {
        let (a, b) = (&states[t], &states[t + 1]);
        let step = match system {
            System::Glob => [
                positions[t].distance(positions[t + 1]),
                wrap_degrees(headings[t + 1] - headings[t]),
            ],
            System::Riv => [sign * (b.km - a.km), b.rel - a.rel],
            System::Nav => {
                let z = geo.speed.eval(a.km).map_err(|e| Error::at_step(t, e))?;
                [sign * (b.km - a.km) - z, b.s - a.s]
            }
        };
        steps.push(step);
    }
    let anchor = anchor_of(system, positions[anchor_at], headings[anchor_at], &states[anchor_at]);
    Ok((steps, anchor))
}

/// Observed and future feature steps of one sequence sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    pub system: System,
    pub observed: Vec<[f64; 2]>,
    pub future: Vec<[f64; 2]>,
    /// State at the last observed position.
    pub anchor: Anchor,
}

pub fn encode(system: System, sample: &SequenceSample, geo: &Geometry) -> Result<Encoded> {
    let (mut steps, anchor) = encode_path(system, &sample.positions, sample.lead_heading, T_OBS, geo)?;
    let future = steps.split_off(T_OBS);
    Ok(Encoded {
        system,
        observed: steps,
        future,
        anchor,
    })
}

/// Positions reconstructed from feature steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub positions: Vec<GeoPoint>,
    /// The decoded km left the covered range; `positions` stops there.
    pub truncated: bool,
}

/// Rebuild positions step by step from `anchor`.
pub fn decode(system: System, anchor: &Anchor, steps: &[[f64; 2]], geo: &Geometry) -> Result<Decoded> {
    let sign = geo.direction.km_sign();
    let mut positions = Vec::with_capacity(steps.len());
    let mut p = anchor.point();
    let mut heading = anchor.heading;
    let mut km = anchor.km;
    let missing = |name: &str| Error::InvalidInput(format!("{system} anchor has no '{name}'"));
    let mut rel = match system {
        System::Riv => anchor.rel.ok_or_else(|| missing("rel"))?,
        _ => 0.0,
    };
    let mut s = match system {
        System::Nav => anchor.s.ok_or_else(|| missing("s"))?,
        _ => 0.0,
    };
    for &[long, lat] in steps {
        let next = match system {
            System::Glob => {
                heading = normalize_bearing(heading + lat);
                Ok(p + GeoPoint::from_bearing(heading) * long)
            }
            System::Riv => {
                km += sign * long;
                rel += lat;
                geo.fairway.right.eval(km).and_then(|r| {
                    let l = geo.fairway.left.eval(km)?;
                    Ok(r + (l - r) * rel)
                })
            }
            System::Nav => geo.speed.eval(km).and_then(|z| {
                km += sign * (long + z);
                s += lat;
                Ok(geo.route.eval(km)? + geo.route_normal(km)? * s)
            }),
        };
        match next {
            Ok(q) => {
                p = q;
                positions.push(q);
            }
            Err(Error::OutOfCoverage { .. }) => {
                return Ok(Decoded {
                    positions,
                    truncated: true,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Decoded {
        positions,
        truncated: false,
    })
}

/// Class ranges and resolutions of one feature system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub system: System,
    pub resolution: [f64; 2],
    /// Smallest class per component (classes are signed multiples of the resolution).
    pub min_class: [i64; 2],
    pub max_class: [i64; 2],
}

fn nearest_class(v: f64, res: f64) -> i64 {
    let c = (v / res).round() as i64;
    (c - 1..=c + 1)
        .min_by(|&a, &b| (a as f64 * res - v).abs().total_cmp(&(b as f64 * res - v).abs()))
        .expect("non-empty")
}

impl Codebook {
    /// Range spanning `values` plus [`CODEBOOK_MARGIN`] classes on each side.
    pub fn fit(system: System, resolution: [f64; 2], values: &[[f64; 2]]) -> Result<Codebook> {
        if resolution.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidInput(format!("invalid resolution {resolution:?}")));
        }
        if values.is_empty() {
            return Err(Error::Validation(format!("no {system} feature values to fit a codebook")));
        }
        let mut min_class = [i64::MAX; 2];
        let mut max_class = [i64::MIN; 2];
        for v in values {
            for c in 0..2 {
                if !v[c].is_finite() {
                    return Err(Error::Validation(format!("non-finite {system} feature value")));
                }
                let k = nearest_class(v[c], resolution[c]);
                min_class[c] = min_class[c].min(k);
                max_class[c] = max_class[c].max(k);
            }
        }
        Ok(Codebook {
            system,
            resolution,
            min_class: min_class.map(|k| k - CODEBOOK_MARGIN),
            max_class: max_class.map(|k| k + CODEBOOK_MARGIN),
        })
    }

    /// Number of classes per component.
    pub fn vocab_sizes(&self) -> [usize; 2] {
        [0, 1].map(|c| (self.max_class[c] - self.min_class[c] + 1) as usize)
    }

    /// Class of `v` in component `c` and whether it had to be clamped.
    pub fn class_of(&self, c: usize, v: f64) -> (i64, bool) {
        let k = nearest_class(v, self.resolution[c]);
        let clamped = k.clamp(self.min_class[c], self.max_class[c]);
        (clamped, clamped != k)
    }

    pub fn value_of(&self, c: usize, class: i64) -> f64 {
        class as f64 * self.resolution[c]
    }

    /// Classes of `steps`; clamped components are added to `saturated`.
    pub fn discretize(&self, steps: &[[f64; 2]], saturated: &mut usize) -> Vec<[i64; 2]> {
        steps
            .iter()
            .map(|v| {
                [0, 1].map(|c| {
                    let (k, clamped) = self.class_of(c, v[c]);
                    *saturated += clamped as usize;
                    k
                })
            })
            .collect()
    }

    pub fn undiscretize(&self, classes: &[[i64; 2]]) -> Vec<[f64; 2]> {
        classes.iter().map(|k| [0, 1].map(|c| self.value_of(c, k[c]))).collect()
    }

    /// Validate that `classes` lie inside the codebook.
    pub fn check_classes(&self, classes: &[[i64; 2]]) -> Result<()> {
        for (t, k) in classes.iter().enumerate() {
            for ((&kc, &lo), &hi) in k.iter().zip(&self.min_class).zip(&self.max_class) {
                if kc < lo || kc > hi {
                    return Err(Error::at_step(
                        t,
                        Error::Validation(format!(
                            "class {kc} outside [{lo}, {hi}]"
                        )),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Codebook> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Distance between the true position after the horizon and the one decoded
/// from the future features, optionally passed through `codebook`.
pub fn reconstruction_error(
    sample: &SequenceSample,
    encoded: &Encoded,
    codebook: Option<&Codebook>,
    geo: &Geometry,
) -> Result<f64> {
    let steps = match codebook {
        Some(cb) => cb.undiscretize(&cb.discretize(&encoded.future, &mut 0)),
        None => encoded.future.clone(),
    };
    let decoded = decode(encoded.system, &encoded.anchor, &steps, geo)?;
    if decoded.truncated {
        return Err(Error::Validation(format!(
            "sample {}-{}: decoding left the covered range",
            sample.track_id, sample.start
        )));
    }
    let last = *decoded.positions.last().expect("horizon is non-empty");
    Ok(last.distance(sample.positions[T_OBS + HORIZON]))
}

fn km_rate(f: impl Fn(f64) -> Result<GeoPoint>, km: f64) -> Result<f64> {
    let h = 1e-4;
    let d = match (f(km - h), f(km), f(km + h)) {
        (Ok(a), _, Ok(b)) => (b - a).norm() / (2.0 * h),
        (_, Ok(m), Ok(b)) => (b - m).norm() / h,
        (Ok(a), Ok(m), _) => (m - a).norm() / h,
        (_, Err(e), _) | (Err(e), ..) => return Err(e),
    };
    Ok(d)
}

/// First-order worst-case distance between the position decoded from the
/// continuous future steps and the one decoded from their classes, after the
/// full horizon.
///
/// Every component is off by at most half a resolution per step, and the
/// offsets add up along the horizon. Glob turns heading errors into chord
/// errors, riv and nav scale km errors by the rate of the decoded position
/// along km; nav also carries km errors through the slope of `z`.
pub fn discretization_bound(encoded: &Encoded, codebook: &Codebook, geo: &Geometry) -> Result<f64> {
    let [h0, h1] = codebook.resolution.map(|r| r / 2.0);
    let steps = &encoded.future;
    let n = steps.len() as f64;
    let sign = geo.direction.km_sign();
    match encoded.system {
        System::Glob => Ok(steps
            .iter()
            .enumerate()
            .map(|(k, st)| h0 + st[0].abs() * ((k + 1) as f64 * h1).to_radians())
            .sum()),
        System::Riv => {
            let mut km = encoded.anchor.km;
            let mut rel = encoded.anchor.rel.unwrap_or(0.0);
            let (mut rate, mut width) = (0.0f64, 0.0f64);
            for st in steps {
                km += sign * st[0];
                rel += st[1];
                let at = |k: f64| -> Result<GeoPoint> {
                    let r = geo.fairway.right.eval(k)?;
                    Ok(r + (geo.fairway.left.eval(k)? - r) * rel)
                };
                rate = rate.max(km_rate(at, km)?);
                width = width.max(geo.fairway.width(km)?);
            }
            Ok(rate * n * h0 + width * n * h1)
        }
        System::Nav => {
            let mut km = encoded.anchor.km;
            let mut s = encoded.anchor.s.unwrap_or(0.0);
            let (mut rate, mut km_err) = (0.0f64, 0.0f64);
            for st in steps {
                let dz = km_rate(|k| Ok(GeoPoint::new(geo.speed.eval(k)?, 0.0)), km)?;
                km_err = km_err * (1.0 + dz) + h0;
                km += sign * (st[0] + geo.speed.eval(km)?);
                s += st[1];
                let at = |k: f64| -> Result<GeoPoint> { Ok(geo.route.eval(k)? + geo.route_normal(k)? * s) };
                rate = rate.max(km_rate(at, km)?);
            }
            Ok(rate * km_err + n * h1)
        }
    }
}

/// Mean position error after the horizon caused by discretizing the future
/// features with `codebook`.
pub fn measure_discretization_error(
    samples: &[SequenceSample],
    codebook: &Codebook,
    geo: &Geometry,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples to measure".into()));
    }
    let errors = samples
        .par_iter()
        .map(|s| {
            let enc = encode(codebook.system, s, geo)?;
            reconstruction_error(s, &enc, Some(codebook), geo)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One line of a feature file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub system: System,
    pub track_id: String,
    pub vessel_id: String,
    pub direction: Direction,
    pub split: Split,
    pub t_start: f64,
    pub observed_classes: Vec<[i64; 2]>,
    pub future_classes: Vec<[i64; 2]>,
    pub observed_features: Vec<[f64; 2]>,
    pub future_features: Vec<[f64; 2]>,
    pub context: Vec<f64>,
    pub anchor: Anchor,
    pub lead_heading: f64,
    pub observed_positions: Vec<[f64; 2]>,
    pub future_positions: Vec<[f64; 2]>,
}

pub fn sample_id(sample: &SequenceSample) -> String {
    format!("{}-{}", sample.track_id, sample.start)
}

fn xy(p: &GeoPoint) -> [f64; 2] {
    [p.easting, p.northing]
}

impl FeatureRecord {
    pub fn new(
        sample: &SequenceSample,
        split: Split,
        encoded: &Encoded,
        codebook: &Codebook,
        context: Vec<f64>,
        saturated: &mut usize,
    ) -> FeatureRecord {
        FeatureRecord {
            id: sample_id(sample),
            system: encoded.system,
            track_id: sample.track_id.clone(),
            vessel_id: sample.vessel_id.clone(),
            direction: sample.direction,
            split,
            t_start: sample.t_start,
            observed_classes: codebook.discretize(&encoded.observed, saturated),
            future_classes: codebook.discretize(&encoded.future, saturated),
            observed_features: encoded.observed.clone(),
            future_features: encoded.future.clone(),
            context,
            anchor: encoded.anchor,
            lead_heading: sample.lead_heading,
            observed_positions: sample.observed().iter().map(xy).collect(),
            future_positions: sample.future().iter().map(xy).collect(),
        }
    }

    pub fn future_points(&self) -> Vec<GeoPoint> {
        self.future_positions.iter().map(|p| GeoPoint::new(p[0], p[1])).collect()
    }

    pub fn observed_points(&self) -> Vec<GeoPoint> {
        self.observed_positions.iter().map(|p| GeoPoint::new(p[0], p[1])).collect()
    }
}

/// Write any serializable records as JSON lines.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read JSON lines, reporting the line of the first malformed record.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}
