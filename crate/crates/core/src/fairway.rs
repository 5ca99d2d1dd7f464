//! Fairway boundary curves and the signed fairway offset.

use crate::domain::{check_boundary_pair, BoundarySamples, Direction, Side};
use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::spline::QuadraticSpline;

const COVERAGE_EPS: f64 = 1e-9;

/// Continuous boundary `km -> position`, a quadratic spline per coordinate.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub side: Side,
    easting: QuadraticSpline,
    northing: QuadraticSpline,
}

impl BoundaryCurve {
    pub fn coverage(&self) -> (f64, f64) {
        self.easting.domain()
    }

    fn clamp_km(&self, km: f64) -> Result<f64> {
        let (lo, hi) = self.coverage();
        if km.is_finite() && km >= lo - COVERAGE_EPS && km <= hi + COVERAGE_EPS {
            Ok(km.clamp(lo, hi))
        } else {
            Err(Error::OutOfCoverage { km, min: lo, max: hi })
        }
    }

    pub fn eval(&self, km: f64) -> Result<GeoPoint> {
        let km = self.clamp_km(km)?;
        Ok(GeoPoint::new(
            self.easting.eval(km).expect("clamped into domain"),
            self.northing.eval(km).expect("clamped into domain"),
        ))
    }

    /// Derivative of the boundary position with respect to km (meters per km).
    pub fn tangent(&self, km: f64) -> Result<GeoPoint> {
        let km = self.clamp_km(km)?;
        Ok(GeoPoint::new(
            self.easting.derivative(km).expect("clamped into domain"),
            self.northing.derivative(km).expect("clamped into domain"),
        ))
    }
}

/// Fit a boundary curve through its samples (at least three, km increasing).
pub fn fit_boundary(samples: &BoundarySamples) -> Result<BoundaryCurve> {
    samples.validate()?;
    if samples.samples.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "{} boundary needs at least 3 samples, got {}",
            samples.side,
            samples.samples.len()
        )));
    }
    let km: Vec<f64> = samples.samples.iter().map(|s| s.0).collect();
    let e: Vec<f64> = samples.samples.iter().map(|s| s.1.easting).collect();
    let n: Vec<f64> = samples.samples.iter().map(|s| s.1.northing).collect();
    Ok(BoundaryCurve {
        side: samples.side,
        easting: QuadraticSpline::new(&km, &e)?,
        northing: QuadraticSpline::new(&km, &n)?,
    })
}

/// Position of a point relative to the fairway at one km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairwayFrame {
    pub r_pt: GeoPoint,
    pub l_pt: GeoPoint,
    /// Fairway width `‖r − l‖`.
    pub width: f64,
    /// Signed offset from the right boundary: positive left of it, negative right of it.
    pub f: f64,
    /// `f / width`.
    pub rel: f64,
}

/// Signed offset of `p` from the right fairway boundary at `km`.
///
/// With `d_r = ‖r(km) − p‖`, `d_l = ‖l(km) − p‖` and `w = ‖r(km) − l(km)‖`,
/// the offset is `−d_r` when `w < d_l` and `d_r < d_l` (the point lies beyond
/// the right boundary) and `+d_r` otherwise.
pub fn fairway_frame(
    right: &BoundaryCurve,
    left: &BoundaryCurve,
    p: GeoPoint,
    km: f64,
) -> Result<FairwayFrame> {
    let r_pt = right.eval(km)?;
    let l_pt = left.eval(km)?;
    let width = r_pt.distance(l_pt);
    if width <= 0.0 {
        return Err(Error::Validation(format!("zero fairway width at km {km}")));
    }
    let d_rp = r_pt.distance(p);
    let d_lp = l_pt.distance(p);
    let f = if width < d_lp && d_rp < d_lp { -d_rp } else { d_rp };
    Ok(FairwayFrame {
        r_pt,
        l_pt,
        width,
        f,
        rel: f / width,
    })
}

/// Right and left boundary curves as seen from one navigation direction.
#[derive(Debug, Clone)]
pub struct Fairway {
    pub right: BoundaryCurve,
    pub left: BoundaryCurve,
}

impl Fairway {
    /// Fit both boundaries. Samples are labeled from the `Up` perspective.
    pub fn fit(right: &BoundarySamples, left: &BoundarySamples) -> Result<Fairway> {
        check_boundary_pair(right, left)?;
        Ok(Fairway {
            right: fit_boundary(right)?,
            left: fit_boundary(left)?,
        })
    }

    /// Boundaries relabeled for `direction`: downstream travel swaps the sides.
    pub fn oriented(&self, direction: Direction) -> Fairway {
        match direction {
            Direction::Up => self.clone(),
            Direction::Down => Fairway {
                right: BoundaryCurve {
                    side: Side::Right,
                    ..self.left.clone()
                },
                left: BoundaryCurve {
                    side: Side::Left,
                    ..self.right.clone()
                },
            },
        }
    }

    pub fn coverage(&self) -> (f64, f64) {
        let (a0, a1) = self.right.coverage();
        let (b0, b1) = self.left.coverage();
        (a0.max(b0), a1.min(b1))
    }

    pub fn frame(&self, p: GeoPoint, km: f64) -> Result<FairwayFrame> {
        fairway_frame(&self.right, &self.left, p, km)
    }

    pub fn width(&self, km: f64) -> Result<f64> {
        Ok(self.right.eval(km)?.distance(self.left.eval(km)?))
    }

    /// Unit vector from the right to the left boundary at `km`.
    pub fn cross_direction(&self, km: f64) -> Result<GeoPoint> {
        let r = self.right.eval(km)?;
        let l = self.left.eval(km)?;
        (l - r)
            .normalized()
            .ok_or_else(|| Error::Validation(format!("zero fairway width at km {km}")))
    }

    /// Largest width over `samples + 1` evenly spaced kms.
    pub fn max_width(&self, samples: usize) -> f64 {
        let (lo, hi) = self.coverage();
        (0..=samples)
            .filter_map(|i| self.width(lo + (hi - lo) * i as f64 / samples as f64).ok())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight fairway along northing, km = northing / 1000, width 100 m,
    /// right boundary at easting +50 for upstream travel.
    fn straight() -> Fairway {
        let r = BoundarySamples::new(
            Side::Right,
            (0..=10).map(|i| (i as f64 * 0.1, GeoPoint::new(50.0, i as f64 * 100.0))).collect(),
        )
        .unwrap();
        let l = BoundarySamples::new(
            Side::Left,
            (0..=10).map(|i| (i as f64 * 0.1, GeoPoint::new(-50.0, i as f64 * 100.0))).collect(),
        )
        .unwrap();
        Fairway::fit(&r, &l).unwrap()
    }

    #[test]
    fn collinear_samples_stay_on_line() {
        let fw = straight();
        for i in 0..=100 {
            let km = i as f64 / 100.0;
            let p = fw.right.eval(km).unwrap();
            assert!((p.easting - 50.0).abs() < 1e-9);
            assert!((p.northing - km * 1000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn knot_evaluation_is_exact() {
        let fw = straight();
        assert_eq!(fw.left.eval(3.0 * 0.1).unwrap(), GeoPoint::new(-50.0, 300.0));
    }

    #[test]
    fn too_few_samples() {
        let s = BoundarySamples::new(
            Side::Right,
            vec![(0.0, GeoPoint::new(0.0, 0.0)), (0.1, GeoPoint::new(0.0, 100.0))],
        )
        .unwrap();
        assert!(fit_boundary(&s).is_err());
    }

    #[test]
    fn frame_examples() {
        let fw = straight();
        let on_right = fw.frame(GeoPoint::new(50.0, 250.0), 0.25).unwrap();
        assert_eq!(on_right.f, 0.0);
        let mid = fw.frame(GeoPoint::new(0.0, 250.0), 0.25).unwrap();
        assert!((mid.f - 50.0).abs() < 1e-9);
        assert!((mid.rel - 0.5).abs() < 1e-12);
        assert!((mid.width - 100.0).abs() < 1e-9);
        let outside = fw.frame(GeoPoint::new(60.0, 250.0), 0.25).unwrap();
        assert!((outside.f + 10.0).abs() < 1e-9);
    }

    #[test]
    fn sign_property_lateral_sweep() {
        let fw = straight();
        for i in -400..=400 {
            let x = i as f64 * 0.5;
            let f = fw.frame(GeoPoint::new(x, 500.0), 0.5).unwrap().f;
            // left of the right boundary (x < 50) must be positive
            if x < 50.0 {
                assert!(f > 0.0, "x={x} f={f}");
            } else if x > 50.0 {
                assert!(f < 0.0, "x={x} f={f}");
            } else {
                assert_eq!(f, 0.0);
            }
            // on straight fixtures the offset equals the perpendicular distance
            assert!((f.abs() - (x - 50.0).abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn downstream_swaps_sides() {
        let fw = straight().oriented(Direction::Down);
        let f = fw.frame(GeoPoint::new(-40.0, 500.0), 0.5).unwrap();
        assert!((f.f - 10.0).abs() < 1e-9);
        assert!(fw.frame(GeoPoint::new(0.0, 500.0), 1.5).is_err());
    }

    #[test]
    fn width_positive_everywhere() {
        let fw = straight();
        assert!((fw.max_width(50) - 100.0).abs() < 1e-9);
        for i in 0..=100 {
            assert!(fw.width(i as f64 / 100.0).unwrap() > 0.0);
        }
    }
}
