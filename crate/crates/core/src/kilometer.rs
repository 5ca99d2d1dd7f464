//! Kilometerization: mapping planar points to waterway kilometers and back.
//!
//! The index stores one representative point per cross profile in a k-d
//! tree. A query finds the nearest representative, then locates the pair of
//! enclosing profiles and interpolates between their profile lines.
//!
//! Between two profiles the profile lines are blended into a continuous
//! family of lines: the direction, position and axis point of the line are
//! interpolated over a stencil of six profiles around the cell. A query
//! point belongs to the line of the family that passes through it. Every
//! point of a profile line keeps that profile's kilometer, circular and
//! straight reaches are reproduced exactly, and reaches of varying curvature
//! to sixth order in the profile spacing.
//!
//! All kilometers handled here are *internal* kilometers: official labels
//! with gaps are remapped to a uniform 0.1 km spacing by [`KmShiftMap`].

use crate::domain::{Side, WaterwayAxis};
use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::kdtree::{nearest_linear, KdTree};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Uniform spacing of internal kilometers between consecutive profiles.
pub const HECTOMETER_KM: f64 = 0.1;

const T_EPS: f64 = 1e-9;
const PARALLEL_EPS: f64 = 1e-9;
/// Enclosing lines meeting farther away than this are treated as parallel.
const FAN_LIMIT_M: f64 = 1e7;
const STENCIL: usize = 6;
const MAX_NEWTON: usize = 20;
/// Largest distance, in profile spacings, at which the meeting point of the
/// enclosing lines serves as the interpolation origin.
const ORIGIN_SPACINGS: f64 = 10.0;
/// Neighbouring cells scanned when the nearest profile's own cells do not
/// enclose the query (hairpin bends).
const NEIGHBOUR_SCAN: usize = 3;

/// Monotone piecewise-linear map between official and internal kilometers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmShiftMap {
    official: Vec<f64>,
    internal: Vec<f64>,
}

impl KmShiftMap {
    /// Assign internal labels with exactly 0.1 km spacing, starting at the
    /// first official label.
    pub fn from_labels(official: &[f64]) -> Result<KmShiftMap> {
        if official.is_empty() {
            return Err(Error::Validation("no kilometer labels".into()));
        }
        if official.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("kilometer labels must increase strictly".into()));
        }
        let first = official[0];
        let tenths = first * 10.0;
        let on_grid = (tenths - tenths.round()).abs() < 1e-9;
        let internal = (0..official.len())
            .map(|i| {
                if on_grid {
                    (tenths.round() + i as f64) / 10.0
                } else {
                    first + HECTOMETER_KM * i as f64
                }
            })
            .collect();
        Ok(KmShiftMap {
            official: official.to_vec(),
            internal,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.official == self.internal
    }

    pub fn internal_labels(&self) -> &[f64] {
        &self.internal
    }

    pub fn official_labels(&self) -> &[f64] {
        &self.official
    }

    /// Positions where consecutive official labels are not 0.1 km apart, as
    /// `(profile index before the jump, official spacing)`.
    pub fn gaps(&self) -> Vec<(usize, f64)> {
        self.official
            .windows(2)
            .enumerate()
            .filter_map(|(i, w)| {
                let d = w[1] - w[0];
                ((d - HECTOMETER_KM).abs() > 1e-9).then_some((i, d))
            })
            .collect()
    }

    pub fn to_internal(&self, official_km: f64) -> f64 {
        map_piecewise(&self.official, &self.internal, official_km)
    }

    pub fn to_official(&self, internal_km: f64) -> f64 {
        map_piecewise(&self.internal, &self.official, internal_km)
    }
}

fn map_piecewise(from: &[f64], to: &[f64], x: f64) -> f64 {
    let n = from.len();
    if n == 1 {
        return to[0] + (x - from[0]);
    }
    match from.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => to[i],
        Err(0) => to[0] + (x - from[0]),
        Err(i) if i >= n => to[n - 1] + (x - from[n - 1]),
        Err(i) => {
            let t = (x - from[i - 1]) / (from[i] - from[i - 1]);
            to[i - 1] + t * (to[i] - to[i - 1])
        }
    }
}

/// Result of kilometerizing a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KmFix {
    /// Internal (gap-free) kilometer.
    pub km: f64,
    /// Official kilometer label for reporting.
    pub official_km: f64,
    /// Distance from the river axis along the profile line, meters.
    pub axis_distance: f64,
    /// Side of the axis, facing the direction of increasing km.
    pub axis_side: Side,
}

impl KmFix {
    /// Offset from the axis, positive to the right of increasing km.
    pub fn signed_offset(&self) -> f64 {
        match self.axis_side {
            Side::Right => self.axis_distance,
            Side::Left => -self.axis_distance,
        }
    }
}

/// Two-profile pencil: the first guess for [`Cell::locate`].
#[derive(Debug, Clone, Copy)]
enum Pencil {
    /// Profile lines parallel: `p = a0 + t*e + lambda*n`.
    Parallel { a0: GeoPoint, e: GeoPoint, n: GeoPoint },
    /// Profile lines meet at `center`, `sweep` radians apart.
    Fan { center: GeoPoint, n0: GeoPoint, sweep: f64 },
}

impl Pencil {
    fn guess(&self, p: GeoPoint) -> f64 {
        match *self {
            Pencil::Parallel { a0, e, n } => (p - a0).cross(n) / e.cross(n),
            Pencil::Fan { center, n0, sweep } => {
                let v = p - center;
                let mut phi = n0.cross(v).atan2(n0.dot(v));
                if phi > FRAC_PI_2 {
                    phi -= PI;
                } else if phi < -FRAC_PI_2 {
                    phi += PI;
                }
                phi / sweep
            }
        }
    }
}

/// Polynomial through up to four `(t, value)` knots, in Lagrange form.
#[derive(Debug, Clone, Copy)]
struct Lagrange {
    t: [f64; STENCIL],
    v: [f64; STENCIL],
    len: usize,
}

impl Lagrange {
    fn eval(&self, x: f64) -> (f64, f64) {
        let (mut y, mut dy) = (0.0, 0.0);
        for i in 0..self.len {
            let mut l = 1.0;
            let mut dl = 0.0;
            for j in (0..self.len).filter(|&j| j != i) {
                let d = self.t[i] - self.t[j];
                dl = dl * (x - self.t[j]) / d + l / d;
                l *= (x - self.t[j]) / d;
            }
            y += self.v[i] * l;
            dy += self.v[i] * dl;
        }
        (y, dy)
    }
}

/// The family of profile lines between two consecutive profiles.
///
/// Line `t` passes through `origin + rho(t) m(t)` with direction `n(t)`,
/// where `n(t)` is `n0` rotated by `phi(t)` and `m(t)` is its left normal.
/// The axis point on the line sits at `sigma(t)` along `n(t)`. `phi`, `rho`
/// and `sigma` interpolate up to six profiles around the cell, shifted
/// inwards at the ends of the axis, so the family follows changes of
/// curvature. When the
/// enclosing lines meet, `origin` is their intersection, which makes the
/// family exact on circular reaches.
#[derive(Debug, Clone)]
struct Cell {
    origin: GeoPoint,
    n0: GeoPoint,
    phi: Lagrange,
    rho: Lagrange,
    sigma: Lagrange,
    pencil: Pencil,
}

impl Cell {
    /// Cell between profiles `i` and `i + 1`.
    fn new(reps: &[GeoPoint], dirs: &[GeoPoint], i: usize) -> Result<Cell> {
        let (a0, n0, a1, n1) = (reps[i], dirs[i], reps[i + 1], dirs[i + 1]);
        let e = a1 - a0;
        let sin = n0.cross(n1);
        let alpha = if sin.abs() < PARALLEL_EPS { f64::INFINITY } else { e.cross(n1) / sin };
        let (origin, pencil) = if alpha.abs() < FAN_LIMIT_M && n0.dot(n1) > 0.0 {
            let center = a0 + n0 * alpha;
            let sweep = sin.atan2(n0.dot(n1));
            let fan = Pencil::Fan { center, n0, sweep };
            // a distant center is a poor origin: its lever arm amplifies
            // interpolation errors of the line direction
            if alpha.abs() <= ORIGIN_SPACINGS * e.norm() {
                (center, fan)
            } else {
                (a0.lerp(a1, 0.5), fan)
            }
        } else {
            let n = (n0 + n1).normalized().unwrap_or(n0);
            if e.cross(n).abs() < 1e-9 * e.norm().max(1.0) {
                return Err(Error::Validation("profile line runs along the axis".into()));
            }
            (a0, Pencil::Parallel { a0, e, n })
        };
        let width = STENCIL.min(reps.len());
        let lo = (i + 1).saturating_sub(STENCIL / 2).min(reps.len() - width);
        let hi = lo + width - 1;
        let mut phi = Lagrange { t: [0.0; STENCIL], v: [0.0; STENCIL], len: 0 };
        let (mut rho, mut sigma) = (phi, phi);
        for j in lo..=hi {
            let k = phi.len;
            let t = j as f64 - i as f64;
            let n = dirs[j];
            let d = reps[j] - origin;
            phi.t[k] = t;
            phi.v[k] = n0.cross(n).atan2(n0.dot(n));
            rho.t[k] = t;
            rho.v[k] = d.dot(n.perp_left());
            sigma.t[k] = t;
            sigma.v[k] = d.dot(n);
            phi.len += 1;
            rho.len += 1;
            sigma.len += 1;
        }
        Ok(Cell { origin, n0, phi, rho, sigma, pencil })
    }

    fn n(&self, t: f64) -> (GeoPoint, f64) {
        let (phi, dphi) = self.phi.eval(t);
        (self.n0.rotated(phi), dphi)
    }

    /// Fraction between the two profiles and signed offset along the profile line.
    fn locate(&self, p: GeoPoint) -> (f64, f64) {
        let v = p - self.origin;
        let mut t = self.pencil.guess(p);
        if !t.is_finite() {
            return (f64::NAN, f64::NAN);
        }
        for _ in 0..MAX_NEWTON {
            let (n, dphi) = self.n(t);
            let (rho, drho) = self.rho.eval(t);
            let f = v.dot(n.perp_left()) - rho;
            let df = -v.dot(n) * dphi - drho;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            t -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        let (n, _) = self.n(t);
        (t, v.dot(n) - self.sigma.eval(t).0)
    }

    fn point(&self, t: f64, offset: f64) -> GeoPoint {
        let (n, _) = self.n(t);
        self.origin + n.perp_left() * self.rho.eval(t).0 + n * (self.sigma.eval(t).0 + offset)
    }

    /// Unit direction of the profile line at fraction `t`, pointing right.
    fn direction(&self, t: f64) -> GeoPoint {
        self.n(t).0
    }
}

/// Summary of an index, used for build reports.
#[derive(Debug, Clone, Serialize)]
pub struct IndexStats {
    pub waterway_id: String,
    pub profile_count: usize,
    pub official_range: (f64, f64),
    pub internal_range: (f64, f64),
    pub gaps: Vec<(f64, f64)>,
    pub min_spacing_m: f64,
    pub max_spacing_m: f64,
    pub tree_depth: usize,
    pub max_lateral_m: f64,
}

/// Queryable kilometerization index over one waterway axis.
#[derive(Debug, Clone)]
pub struct KilometerIndex {
    axis: WaterwayAxis,
    reps: Vec<GeoPoint>,
    tree: KdTree,
    cells: Vec<Cell>,
    shift_map: KmShiftMap,
    max_lateral: f64,
}

impl KilometerIndex {
    /// Build the index. The lateral corridor defaults to the longest profile line.
    pub fn build(axis: WaterwayAxis) -> Result<KilometerIndex> {
        axis.validate()?;
        let n = axis.profiles.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "kilometerization needs at least 2 profiles, got {n}"
            )));
        }
        let reps: Vec<GeoPoint> = axis.profiles.iter().map(|p| p.midpoint()).collect();
        for (i, w) in reps.windows(2).enumerate() {
            if w[0].distance(w[1]) < 1e-6 {
                return Err(Error::Validation(format!(
                    "profiles {} and {} share a representative point",
                    axis.profiles[i].km,
                    axis.profiles[i + 1].km
                )));
            }
        }
        let dirs: Vec<GeoPoint> = (0..n)
            .map(|i| {
                let tangent = reps[(i + 1).min(n - 1)] - reps[i.saturating_sub(1)];
                let d = axis.profiles[i].chord_direction();
                // orient to the right of increasing km
                if tangent.cross(d) > 0.0 {
                    -d
                } else {
                    d
                }
            })
            .collect();
        let cells = (0..n - 1)
            .map(|i| Cell::new(&reps, &dirs, i))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<f64> = axis.profiles.iter().map(|p| p.km).collect();
        let shift_map = KmShiftMap::from_labels(&labels)?;
        let max_lateral = axis
            .profiles
            .iter()
            .map(|p| p.length())
            .fold(0.0, f64::max);
        let tree = KdTree::build(&reps);
        Ok(KilometerIndex {
            axis,
            reps,
            tree,
            cells,
            shift_map,
            max_lateral,
        })
    }

    /// Override the maximum accepted distance from the axis (meters).
    pub fn with_max_lateral(mut self, meters: f64) -> Self {
        self.max_lateral = meters;
        self
    }

    pub fn max_lateral(&self) -> f64 {
        self.max_lateral
    }

    pub fn axis(&self) -> &WaterwayAxis {
        &self.axis
    }

    pub fn shift_map(&self) -> &KmShiftMap {
        &self.shift_map
    }

    pub fn waterway_id(&self) -> &str {
        &self.axis.waterway_id
    }

    pub fn representative_points(&self) -> &[GeoPoint] {
        &self.reps
    }

    /// Internal km range covered by the profiles.
    pub fn coverage(&self) -> (f64, f64) {
        let l = self.shift_map.internal_labels();
        (l[0], l[l.len() - 1])
    }

    /// Index of the profile with the nearest representative point (k-d tree).
    pub fn nearest_profile(&self, p: GeoPoint) -> usize {
        self.tree.nearest(p).expect("index has profiles").0
    }

    /// Same as [`nearest_profile`](Self::nearest_profile) by linear scan.
    pub fn nearest_profile_linear(&self, p: GeoPoint) -> usize {
        nearest_linear(&self.reps, p).expect("index has profiles").0
    }

    fn cell_km(&self, cell: usize, t: f64) -> f64 {
        let l = self.shift_map.internal_labels();
        l[cell] + t * (l[cell + 1] - l[cell])
    }

    /// Map a point to its internal kilometer, axis distance and side.
    pub fn kilometrize(&self, p: GeoPoint) -> Result<KmFix> {
        if !p.is_finite() {
            return Err(Error::InvalidInput("non-finite point".into()));
        }
        let nearest = self.nearest_profile(p);
        let ncell = self.cells.len();
        let within = |t: f64, lam: f64| {
            (-T_EPS..=1.0 + T_EPS).contains(&t) && lam.abs() <= self.max_lateral
        };

        // cells touching the nearest profile first, then the wider neighbourhood
        let mut order: Vec<usize> = Vec::with_capacity(2 * NEIGHBOUR_SCAN + 2);
        if nearest < ncell {
            order.push(nearest);
        }
        if nearest > 0 {
            order.push(nearest - 1);
        }
        for d in 1..=NEIGHBOUR_SCAN {
            if nearest + d < ncell {
                order.push(nearest + d);
            }
            if nearest > d {
                order.push(nearest - d - 1);
            }
        }
        for &c in &order {
            let (t, lam) = self.cells[c].locate(p);
            if within(t, lam) {
                return Ok(self.fix(c, t.clamp(0.0, 1.0), lam));
            }
        }

        // up to one hectometer beyond either end of the axis
        let (t, lam) = self.cells[0].locate(p);
        if (-1.0..0.0).contains(&t) && lam.abs() <= self.max_lateral {
            return Ok(self.fix(0, t, lam));
        }
        let last = ncell - 1;
        let (t, lam) = self.cells[last].locate(p);
        if t > 1.0 && t <= 2.0 && lam.abs() <= self.max_lateral {
            return Ok(self.fix(last, t, lam));
        }

        let c = nearest.min(last);
        let (t, lam) = self.cells[c].locate(p);
        Err(Error::OutOfCorridor {
            nearest_km: self.shift_map.internal_labels()[nearest],
            lateral: if t.is_finite() { lam } else { f64::INFINITY },
        })
    }

    fn fix(&self, cell: usize, t: f64, lam: f64) -> KmFix {
        let km = self.cell_km(cell, t);
        KmFix {
            km,
            official_km: self.shift_map.to_official(km),
            axis_distance: lam.abs(),
            axis_side: if lam >= 0.0 { Side::Right } else { Side::Left },
        }
    }

    fn cell_for_km(&self, km: f64) -> Result<(usize, f64)> {
        let (lo, hi) = self.coverage();
        if !km.is_finite() || km < lo - T_EPS || km > hi + T_EPS {
            return Err(Error::OutOfCoverage { km, min: lo, max: hi });
        }
        let labels = self.shift_map.internal_labels();
        let idx = labels.partition_point(|&l| l <= km);
        let cell = idx.saturating_sub(1).min(self.cells.len() - 1);
        let t = (km - labels[cell]) / (labels[cell + 1] - labels[cell]);
        Ok((cell, t.clamp(0.0, 1.0)))
    }

    /// Point at internal `km` with signed `lateral_offset` from the axis
    /// (positive to the right of increasing km), measured along the profile line.
    pub fn inverse_kilometrize(&self, km: f64, lateral_offset: f64) -> Result<GeoPoint> {
        let (cell, t) = self.cell_for_km(km)?;
        Ok(self.cells[cell].point(t, lateral_offset))
    }

    /// Unit direction of the profile line through internal `km`, pointing to
    /// the right of increasing km.
    pub fn profile_direction(&self, km: f64) -> Result<GeoPoint> {
        let (cell, t) = self.cell_for_km(km)?;
        Ok(self.cells[cell].direction(t))
    }

    pub fn stats(&self) -> IndexStats {
        let spacing: Vec<f64> = self.reps.windows(2).map(|w| w[0].distance(w[1])).collect();
        let off = self.shift_map.official_labels();
        IndexStats {
            waterway_id: self.axis.waterway_id.clone(),
            profile_count: self.reps.len(),
            official_range: (off[0], off[off.len() - 1]),
            internal_range: self.coverage(),
            gaps: self
                .shift_map
                .gaps()
                .into_iter()
                .map(|(i, d)| (off[i], d))
                .collect(),
            min_spacing_m: spacing.iter().copied().fold(f64::INFINITY, f64::min),
            max_spacing_m: spacing.iter().copied().fold(0.0, f64::max),
            tree_depth: self.tree.depth(),
            max_lateral_m: self.max_lateral,
        }
    }
}
