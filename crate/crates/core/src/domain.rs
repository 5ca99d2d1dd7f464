//! Core waterway and AIS domain types.

use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::projection::Zone;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Navigation direction of a vessel.
///
/// `Up` is the direction of increasing waterway kilometers, `Down` the
/// direction of decreasing kilometers. Left/right in "navigation-direction
/// perspective" are taken facing the direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    /// +1 for `Up`, -1 for `Down`: converts signed km differences into progress.
    pub fn km_sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" | "upstream" => Ok(Direction::Up),
            "down" | "downstream" => Ok(Direction::Down),
            other => Err(Error::InvalidInput(format!("unknown direction '{other}'"))),
        }
    }
}

/// Side of a line, seen facing along it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Side::Left),
            "right" | "r" => Ok(Side::Right),
            other => Err(Error::InvalidInput(format!("unknown side '{other}'"))),
        }
    }
}

/// A river cross-profile line. Every point on it carries the same kilometer label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileLine {
    pub km: f64,
    pub points: Vec<GeoPoint>,
}

impl ProfileLine {
    pub fn new(km: f64, points: Vec<GeoPoint>) -> Result<Self> {
        let line = ProfileLine { km, points };
        line.validate()?;
        Ok(line)
    }

    fn validate(&self) -> Result<()> {
        if !self.km.is_finite() {
            return Err(Error::Validation("profile km is not finite".into()));
        }
        if self.points.len() < 2 {
            return Err(Error::Validation(format!(
                "profile at km {} has {} point(s), need at least 2",
                self.km,
                self.points.len()
            )));
        }
        for w in self.points.windows(2) {
            if !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::Validation(format!(
                    "profile at km {} has a non-finite coordinate",
                    self.km
                )));
            }
            if w[0] == w[1] {
                return Err(Error::Validation(format!(
                    "profile at km {} has repeated consecutive points",
                    self.km
                )));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Point halfway along the polyline by arc length.
    pub fn midpoint(&self) -> GeoPoint {
        let half = 0.5 * self.length();
        let mut acc = 0.0;
        for w in self.points.windows(2) {
            let seg = w[0].distance(w[1]);
            if acc + seg >= half {
                return w[0].lerp(w[1], (half - acc) / seg);
            }
            acc += seg;
        }
        *self.points.last().expect("validated profile has points")
    }

    /// Unit vector from the first to the last profile point.
    pub fn chord_direction(&self) -> GeoPoint {
        let first = self.points[0];
        let last = *self.points.last().expect("validated profile has points");
        (last - first)
            .normalized()
            .unwrap_or_else(|| (self.points[1] - first).normalized().unwrap_or(GeoPoint::new(1.0, 0.0)))
    }
}

/// Ordered set of cross profiles for one waterway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterwayAxis {
    pub waterway_id: String,
    pub profiles: Vec<ProfileLine>,
    /// Projection zone of the coordinates when known.
    #[serde(default)]
    pub zone: Option<Zone>,
}

impl WaterwayAxis {
    /// Sort profiles by km and validate the axis invariants.
    pub fn new(waterway_id: impl Into<String>, mut profiles: Vec<ProfileLine>) -> Result<Self> {
        profiles.sort_by(|a, b| a.km.total_cmp(&b.km));
        let axis = WaterwayAxis {
            waterway_id: waterway_id.into(),
            profiles,
            zone: None,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return Err(Error::Validation("axis has no profiles".into()));
        }
        for p in &self.profiles {
            p.validate()?;
        }
        for w in self.profiles.windows(2) {
            if w[1].km <= w[0].km {
                return Err(Error::Validation(format!(
                    "profile km labels not strictly increasing: {} then {}",
                    w[0].km, w[1].km
                )));
            }
        }
        Ok(())
    }

    pub fn km_range(&self) -> (f64, f64) {
        (
            self.profiles[0].km,
            self.profiles[self.profiles.len() - 1].km,
        )
    }
}

/// Fairway boundary samples of one side.
///
/// Sides are labeled from the `Up` (increasing km) navigation perspective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    pub side: Side,
    pub samples: Vec<(f64, GeoPoint)>,
}

impl BoundarySamples {
    pub fn new(side: Side, mut samples: Vec<(f64, GeoPoint)>) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let b = BoundarySamples { side, samples };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::Validation(format!("{} boundary has no samples", self.side)));
        }
        for (km, p) in &self.samples {
            if !km.is_finite() || !p.is_finite() {
                return Err(Error::Validation(format!(
                    "{} boundary has a non-finite sample",
                    self.side
                )));
            }
        }
        for w in self.samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Validation(format!(
                    "{} boundary km not strictly increasing: {} then {}",
                    self.side, w[0].0, w[1].0
                )));
            }
        }
        Ok(())
    }

    pub fn km_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Relabel sample kms with `f` (used to move official labels to internal ones).
    pub fn map_km(&self, f: impl Fn(f64) -> f64) -> Result<BoundarySamples> {
        BoundarySamples::new(
            self.side,
            self.samples.iter().map(|(km, p)| (f(*km), *p)).collect(),
        )
    }
}

/// Check that a right/left boundary pair covers the same km range.
pub fn check_boundary_pair(right: &BoundarySamples, left: &BoundarySamples) -> Result<()> {
    if right.side != Side::Right || left.side != Side::Left {
        return Err(Error::Validation("boundary pair must be (right, left)".into()));
    }
    let (r0, r1) = right.km_range();
    let (l0, l1) = left.km_range();
    if (r0 - l0).abs() > 1e-9 || (r1 - l1).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "boundaries cover different km ranges: right [{r0}, {r1}], left [{l0}, {l1}]"
        )));
    }
    Ok(())
}

/// One AIS position report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AisRecord {
    pub vessel_id: String,
    /// Epoch seconds.
    pub timestamp: f64,
    pub position: GeoPoint,
    /// Course over ground, degrees clockwise from north in `[0, 360)`.
    pub cog: f64,
    /// Speed over ground in m/s. Carried for diagnostics only.
    pub sog: Option<f64>,
    pub direction: Direction,
}

/// Time-ordered reports of one vessel travelling in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub vessel_id: String,
    pub direction: Direction,
    pub records: Vec<AisRecord>,
}

impl Track {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = GeoPoint> + '_ {
        self.records.iter().map(|r| r.position)
    }

    /// True when timestamps are strictly increasing.
    pub fn is_time_ordered(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].timestamp > w[0].timestamp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(km: f64, y: f64) -> ProfileLine {
        ProfileLine::new(km, vec![GeoPoint::new(-50.0, y), GeoPoint::new(50.0, y)]).unwrap()
    }

    #[test]
    fn axis_sorts_and_validates() {
        let axis = WaterwayAxis::new("w", vec![profile(10.1, 100.0), profile(10.0, 0.0)]).unwrap();
        assert_eq!(axis.km_range(), (10.0, 10.1));
        assert!(WaterwayAxis::new("w", vec![profile(10.0, 0.0), profile(10.0, 100.0)]).is_err());
    }

    #[test]
    fn degenerate_profile_rejected() {
        let p = GeoPoint::new(1.0, 1.0);
        assert!(ProfileLine::new(1.0, vec![p, p]).is_err());
        assert!(ProfileLine::new(1.0, vec![p]).is_err());
        assert!(ProfileLine::new(f64::NAN, vec![p, GeoPoint::new(2.0, 2.0)]).is_err());
    }

    #[test]
    fn profile_midpoint_by_arc_length() {
        let p = ProfileLine::new(
            0.0,
            vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(10.0, 0.0), GeoPoint::new(10.0, 30.0)],
        )
        .unwrap();
        assert_eq!(p.midpoint(), GeoPoint::new(10.0, 10.0));
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("up".parse::<Direction>().unwrap(), Direction::Up);
        assert_eq!("Down".parse::<Direction>().unwrap(), Direction::Down);
        assert!("sideways".parse::<Direction>().is_err());
    }

    #[test]
    fn boundary_pair_ranges() {
        let r = BoundarySamples::new(Side::Right, vec![(0.0, GeoPoint::new(1.0, 0.0)), (1.0, GeoPoint::new(1.0, 1.0))]).unwrap();
        let l = BoundarySamples::new(Side::Left, vec![(0.0, GeoPoint::new(0.0, 0.0)), (1.0, GeoPoint::new(0.0, 1.0))]).unwrap();
        check_boundary_pair(&r, &l).unwrap();
        let l2 = BoundarySamples::new(Side::Left, vec![(0.0, GeoPoint::new(0.0, 0.0)), (2.0, GeoPoint::new(0.0, 1.0))]).unwrap();
        assert!(check_boundary_pair(&r, &l2).is_err());
    }
}
