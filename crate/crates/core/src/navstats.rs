//! Direction-specific navigation statistics: the typical route `q(km)`, the
//! typical speed profile `z(km)` and per-hectometer route context.
//!
//! Observations are grouped by internal waterway decameter. Route samples
//! are first moved along their kilometer offset onto the profile line through
//! the bin center, so that the bin median does not mix positions from
//! different kilometers on curves.

use crate::domain::{Direction, Track};
use crate::error::{Error, Result};
use crate::fairway::Fairway;
use crate::geom::{circumcircle_curvature, GeoPoint};
use crate::io::{read_numeric_table, write_lines};
use crate::kilometer::{KilometerIndex, HECTOMETER_KM};
use crate::preprocess::ResampledTrack;
use crate::savgol::{smooth, SavGolConfig};
use crate::spline::Pchip;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const DECAMETER_KM: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub sgf: SavGolConfig,
    /// Longest run of empty bins bridged by linear interpolation.
    pub max_gap_bins: usize,
    /// Curvatures below this magnitude (1/m) count as straight.
    pub straight_threshold: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            sgf: SavGolConfig::default(),
            max_gap_bins: 10,
            straight_threshold: 1e-4,
        }
    }
}

/// Median of `values` (mean of the two middle values for even counts).
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

pub fn decameter_bin(km: f64) -> i64 {
    (km / DECAMETER_KM + 1e-9).floor() as i64
}

pub fn bin_center(bin: i64) -> f64 {
    (2 * bin + 1) as f64 / 200.0
}

/// Smoothed knots of one contiguous run of bins, one interpolant per channel.
#[derive(Debug, Clone)]
struct Segment {
    km: Vec<f64>,
    values: Vec<Vec<f64>>,
    curves: Vec<Pchip>,
}

impl Segment {
    fn new(km: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Segment> {
        let curves = values
            .iter()
            .map(|v| Pchip::new(&km, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Segment { km, values, curves })
    }

    fn contains(&self, km: f64) -> bool {
        km >= self.km[0] && km <= self.km[self.km.len() - 1]
    }
}

/// Piecewise monotone-cubic curve over km, possibly with coverage holes.
#[derive(Debug, Clone)]
struct Curve {
    segments: Vec<Segment>,
}

impl Curve {
    /// Fill short gaps, split at long ones, smooth each channel and fit.
    fn from_bins(bins: &BTreeMap<i64, Vec<f64>>, cfg: &StatsConfig) -> Result<Curve> {
        let mut runs: Vec<Vec<(i64, &Vec<f64>)>> = Vec::new();
        for (&b, v) in bins {
            match runs.last_mut() {
                Some(run) if b - run.last().expect("non-empty run").0 <= cfg.max_gap_bins as i64 + 1 => {
                    run.push((b, v))
                }
                _ => runs.push(vec![(b, v)]),
            }
        }
        let mut segments = Vec::new();
        for run in runs.into_iter().filter(|r| r.len() >= 2) {
            let channels = run[0].1.len();
            let (b0, b1) = (run[0].0, run[run.len() - 1].0);
            let mut filled: Vec<Vec<f64>> = vec![Vec::new(); channels];
            for w in run.windows(2) {
                let (a, va) = w[0];
                let (b, vb) = w[1];
                for k in a..b {
                    let t = (k - a) as f64 / (b - a) as f64;
                    for (f, (a, b)) in filled.iter_mut().zip(va.iter().zip(vb.iter())) {
                        f.push(a + t * (b - a));
                    }
                }
            }
            for (f, v) in filled.iter_mut().zip(run[run.len() - 1].1.iter()) {
                f.push(*v);
            }
            let smoothed = filled
                .iter()
                .map(|v| smooth(v, &cfg.sgf))
                .collect::<Result<Vec<_>>>()?;
            let km = (b0..=b1).map(bin_center).collect();
            segments.push(Segment::new(km, smoothed)?);
        }
        if segments.is_empty() {
            return Err(Error::Validation("not enough populated decameter bins".into()));
        }
        Ok(Curve { segments })
    }

    fn from_knots(km: &[f64], values: &[Vec<f64>]) -> Result<Curve> {
        let mut segments = Vec::new();
        let mut start = 0;
        for i in 1..=km.len() {
            let split = i == km.len() || km[i] - km[i - 1] > 1.5 * DECAMETER_KM;
            if split {
                if i - start >= 2 {
                    segments.push(Segment::new(
                        km[start..i].to_vec(),
                        values.iter().map(|v| v[start..i].to_vec()).collect(),
                    )?);
                }
                start = i;
            }
        }
        if segments.is_empty() {
            return Err(Error::Validation("curve needs at least 2 knots".into()));
        }
        Ok(Curve { segments })
    }

    fn coverage(&self) -> (f64, f64) {
        let last = &self.segments[self.segments.len() - 1];
        (self.segments[0].km[0], last.km[last.km.len() - 1])
    }

    fn holes(&self) -> Vec<(f64, f64)> {
        self.segments
            .windows(2)
            .map(|w| (w[0].km[w[0].km.len() - 1], w[1].km[0]))
            .collect()
    }

    fn segment(&self, km: f64) -> Result<&Segment> {
        self.segments.iter().find(|s| s.contains(km)).ok_or_else(|| {
            let (min, max) = self.coverage();
            Error::OutOfCoverage { km, min, max }
        })
    }

    fn eval(&self, km: f64, channel: usize) -> Result<f64> {
        Ok(self.segment(km)?.curves[channel].eval(km).expect("inside segment"))
    }

    fn derivative(&self, km: f64, channel: usize) -> Result<f64> {
        Ok(self.segment(km)?.curves[channel].derivative(km).expect("inside segment"))
    }

    fn knots(&self) -> impl Iterator<Item = (f64, Vec<f64>)> + '_ {
        self.segments.iter().flat_map(|s| {
            s.km
                .iter()
                .enumerate()
                .map(move |(i, &k)| (k, s.values.iter().map(|v| v[i]).collect()))
        })
    }
}

/// The typical route `q`: km to position, for one direction.
#[derive(Debug, Clone)]
pub struct TypicalRoute {
    pub direction: Direction,
    curve: Curve,
}

impl TypicalRoute {
    pub fn eval(&self, km: f64) -> Result<GeoPoint> {
        Ok(GeoPoint::new(self.curve.eval(km, 0)?, self.curve.eval(km, 1)?))
    }

    /// Unit tangent in the direction of increasing km.
    pub fn tangent(&self, km: f64) -> Result<GeoPoint> {
        GeoPoint::new(self.curve.derivative(km, 0)?, self.curve.derivative(km, 1)?)
            .normalized()
            .ok_or_else(|| Error::Validation(format!("typical route is stationary at km {km}")))
    }

    pub fn coverage(&self) -> (f64, f64) {
        self.curve.coverage()
    }

    /// Km ranges between covered segments.
    pub fn holes(&self) -> Vec<(f64, f64)> {
        self.curve.holes()
    }

    pub fn knots(&self) -> Vec<(f64, GeoPoint)> {
        self.curve
            .knots()
            .map(|(k, v)| (k, GeoPoint::new(v[0], v[1])))
            .collect()
    }

    pub fn from_knots(direction: Direction, knots: &[(f64, GeoPoint)]) -> Result<TypicalRoute> {
        let km: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let values = vec![
            knots.iter().map(|k| k.1.easting).collect(),
            knots.iter().map(|k| k.1.northing).collect(),
        ];
        Ok(TypicalRoute {
            direction,
            curve: Curve::from_knots(&km, &values)?,
        })
    }

    /// CSV `km,easting,northing`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_lines(
            path.as_ref(),
            "km,easting,northing",
            self.knots()
                .into_iter()
                .map(|(k, p)| format!("{k},{},{}", p.easting, p.northing)),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>, direction: Direction) -> Result<TypicalRoute> {
        let rows = read_numeric_table(path.as_ref(), &["km", "easting", "northing"])?;
        let knots: Vec<(f64, GeoPoint)> = rows
            .iter()
            .map(|r| (r[0], GeoPoint::new(r[1], r[2])))
            .collect();
        TypicalRoute::from_knots(direction, &knots)
    }
}

/// The typical speed profile `z`: km to waterway km travelled per minute.
#[derive(Debug, Clone)]
pub struct SpeedProfile {
    pub direction: Direction,
    curve: Curve,
}

impl SpeedProfile {
    pub fn eval(&self, km: f64) -> Result<f64> {
        self.curve.eval(km, 0)
    }

    pub fn coverage(&self) -> (f64, f64) {
        self.curve.coverage()
    }

    pub fn holes(&self) -> Vec<(f64, f64)> {
        self.curve.holes()
    }

    pub fn knots(&self) -> Vec<(f64, f64)> {
        self.curve.knots().map(|(k, v)| (k, v[0])).collect()
    }

    pub fn from_knots(direction: Direction, knots: &[(f64, f64)]) -> Result<SpeedProfile> {
        if let Some(&(km, z)) = knots.iter().find(|k| !(k.1 > 0.0)) {
            return Err(Error::Validation(format!(
                "typical speed must be positive, got {z} at km {km}"
            )));
        }
        let km: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let z: Vec<f64> = knots.iter().map(|k| k.1).collect();
        Ok(SpeedProfile {
            direction,
            curve: Curve::from_knots(&km, &[z])?,
        })
    }

    /// CSV `km,z`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_lines(
            path.as_ref(),
            "km,z",
            self.knots().into_iter().map(|(k, z)| format!("{k},{z}")),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>, direction: Direction) -> Result<SpeedProfile> {
        let rows = read_numeric_table(path.as_ref(), &["km", "z"])?;
        let knots: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        SpeedProfile::from_knots(direction, &knots)
    }
}

fn tracks_in<T, F>(tracks: &[T], direction: Direction, dir_of: F) -> Result<Vec<&T>>
where
    F: Fn(&T) -> Direction,
{
    let picked: Vec<&T> = tracks.iter().filter(|t| dir_of(t) == direction).collect();
    if picked.is_empty() {
        return Err(Error::InvalidInput(format!("no {direction} tracks")));
    }
    Ok(picked)
}

/// Extract `q` from the raw positions of all tracks in `direction`.
pub fn extract_typical_route(
    tracks: &[Track],
    direction: Direction,
    index: &KilometerIndex,
    cfg: &StatsConfig,
) -> Result<TypicalRoute> {
    let picked = tracks_in(tracks, direction, |t| t.direction)?;
    let (lo, hi) = index.coverage();
    let samples: Vec<Vec<(i64, GeoPoint)>> = picked
        .par_iter()
        .map(|t| {
            t.records
                .iter()
                .filter_map(|r| {
                    let fix = index.kilometrize(r.position).ok()?;
                    let bin = decameter_bin(fix.km);
                    let center = bin_center(bin);
                    if center < lo || center > hi {
                        return None;
                    }
                    let p = index.inverse_kilometrize(center, fix.signed_offset()).ok()?;
                    Some((bin, p))
                })
                .collect()
        })
        .collect();
    let mut grouped: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (bin, p) in samples.into_iter().flatten() {
        let e = grouped.entry(bin).or_default();
        e.0.push(p.easting);
        e.1.push(p.northing);
    }
    let bins: BTreeMap<i64, Vec<f64>> = grouped
        .into_iter()
        .map(|(b, (mut e, mut n))| {
            let me = median(&mut e).expect("non-empty bin");
            let mn = median(&mut n).expect("non-empty bin");
            (b, vec![me, mn])
        })
        .collect();
    Ok(TypicalRoute {
        direction,
        curve: Curve::from_bins(&bins, cfg)?,
    })
}

/// Extract `z` from resampled tracks in `direction`. Each step contributes
/// the km advanced per minute, binned by the km at its start.
pub fn extract_speed_profile(
    tracks: &[ResampledTrack],
    direction: Direction,
    index: &KilometerIndex,
    cfg: &StatsConfig,
) -> Result<SpeedProfile> {
    let picked = tracks_in(tracks, direction, |t| t.direction)?;
    let sign = direction.km_sign();
    let samples: Vec<Vec<(i64, f64)>> = picked
        .par_iter()
        .map(|t| {
            let per_minute = 60.0 / t.step;
            let kms: Vec<Option<f64>> = t
                .positions
                .iter()
                .map(|p| index.kilometrize(*p).ok().map(|f| f.km))
                .collect();
            kms.windows(2)
                .filter_map(|w| {
                    let (a, b) = (w[0]?, w[1]?);
                    Some((decameter_bin(a), sign * (b - a) * per_minute))
                })
                .collect()
        })
        .collect();
    let mut grouped: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (bin, k) in samples.into_iter().flatten() {
        grouped.entry(bin).or_default().push(k);
    }
    let bins: BTreeMap<i64, Vec<f64>> = grouped
        .into_iter()
        .map(|(b, mut v)| (b, vec![median(&mut v).expect("non-empty bin")]))
        .collect();
    let curve = Curve::from_bins(&bins, cfg)?;
    let profile = SpeedProfile { direction, curve };
    SpeedProfile::from_knots(direction, &profile.knots())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
    Straight,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Left => "left",
            Orientation::Right => "right",
            Orientation::Straight => "straight",
        }
    }

    /// `+1` left, `-1` right, `0` straight.
    pub fn code(self) -> f64 {
        match self {
            Orientation::Left => 1.0,
            Orientation::Right => -1.0,
            Orientation::Straight => 0.0,
        }
    }
}

/// Route context at one hectometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HectoContext {
    pub km: f64,
    /// Signed curvature (1/m), positive for a left turn in travel direction.
    pub curvature: f64,
    pub orientation: Orientation,
    /// `‖q(km + 0.1) − q(km)‖`, meters.
    pub hecto_euclid: f64,
    /// Fairway offset of the typical route.
    pub f_nav: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteContext {
    pub direction: Direction,
    pub entries: Vec<HectoContext>,
}

impl RouteContext {
    /// Entry at the hectometer nearest to `km`.
    pub fn at(&self, km: f64) -> Option<&HectoContext> {
        let i = self.entries.partition_point(|e| e.km < km);
        match (i.checked_sub(1).map(|j| &self.entries[j]), self.entries.get(i)) {
            (Some(a), Some(b)) => Some(if km - a.km <= b.km - km { a } else { b }),
            (a, b) => a.or(b),
        }
    }

    /// CSV `km,curvature,orientation,hecto_euclid,f_nav`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_lines(
            path.as_ref(),
            "km,curvature,orientation,hecto_euclid,f_nav",
            self.entries.iter().map(|e| {
                format!(
                    "{},{},{},{},{}",
                    e.km,
                    e.curvature,
                    e.orientation.as_str(),
                    e.hecto_euclid,
                    e.f_nav
                )
            }),
        )
    }
}

/// Per-hectometer curvature, orientation, hectometer distance and route
/// fairway offset. `fairway` must already be oriented for the route direction.
pub fn route_context(route: &TypicalRoute, fairway: &Fairway, cfg: &StatsConfig) -> Result<RouteContext> {
    let (lo, hi) = route.coverage();
    let sign = route.direction.km_sign();
    let first = (lo / HECTOMETER_KM - 1e-9).ceil() as i64;
    let last = (hi / HECTOMETER_KM + 1e-9).floor() as i64;
    let mut entries = Vec::new();
    for k in first..=last {
        let km = k as f64 / 10.0;
        let Ok(q) = route.eval(km) else { continue };
        let at = |d: f64| route.eval(km + d * HECTOMETER_KM).ok();
        let triple = [(-1.0, 0.0, 1.0), (0.0, 1.0, 2.0), (-2.0, -1.0, 0.0)]
            .iter()
            .find_map(|&(a, b, c)| Some((at(a)?, at(b)?, at(c)?)));
        let curvature = triple.map_or(0.0, |(a, b, c)| sign * circumcircle_curvature(a, b, c));
        let hecto_euclid = at(1.0)
            .or_else(|| at(-1.0))
            .map_or(0.0, |p| p.distance(q));
        let orientation = if curvature.abs() < cfg.straight_threshold {
            Orientation::Straight
        } else if curvature > 0.0 {
            Orientation::Left
        } else {
            Orientation::Right
        };
        let f_nav = fairway.frame(q, km)?.f;
        entries.push(HectoContext {
            km,
            curvature,
            orientation,
            hecto_euclid,
            f_nav,
        });
    }
    if entries.is_empty() {
        return Err(Error::Validation("typical route covers no hectometer".into()));
    }
    Ok(RouteContext {
        direction: route.direction,
        entries,
    })
}
