//! One-dimensional interpolants used across the toolkit.
//!
//! * [`QuadraticSpline`]: C1 piecewise quadratic through every knot.
//! * [`Pchip`]: monotone piecewise cubic Hermite (Fritsch–Carlson).
//! * [`CubicHermite`]: cubic Hermite with three-point finite-difference
//!   tangents on a non-uniform grid (Catmull–Rom style).

use crate::error::{Error, Result};

fn check_knots(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "knot arrays differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(Error::InvalidInput(format!(
            "need at least {min} knots, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite knot".into()));
    }
    if x.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("knots must increase strictly".into()));
    }
    Ok(())
}

/// Index of the interval `[x[i], x[i+1]]` holding `v`, or `None` outside the knots.
fn interval(x: &[f64], v: f64) -> Option<usize> {
    let n = x.len();
    if !(v >= x[0] && v <= x[n - 1]) {
        return None;
    }
    let i = x.partition_point(|&k| k <= v);
    Some(i.saturating_sub(1).min(n - 2))
}

/// Knot-interpolating C1 quadratic spline.
///
/// The free end condition makes the first two pieces the same parabola (the
/// one through the first three knots), so data sampled from any quadratic is
/// reproduced exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// First derivative at each knot.
    slope: Vec<f64>,
}

impl QuadraticSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<QuadraticSpline> {
        check_knots(x, y, 3)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|j| (y[j + 1] - y[j]) / h[j]).collect();
        let mut slope = vec![0.0; n];
        slope[0] = delta[0] - h[0] * (delta[1] - delta[0]) / (h[0] + h[1]);
        for j in 0..n - 1 {
            slope[j + 1] = 2.0 * delta[j] - slope[j];
        }
        Ok(QuadraticSpline {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn piece(&self, j: usize) -> (f64, f64, f64) {
        let h = self.x[j + 1] - self.x[j];
        let c = ((self.y[j + 1] - self.y[j]) / h - self.slope[j]) / h;
        (self.y[j], self.slope[j], c)
    }

    pub fn eval(&self, v: f64) -> Option<f64> {
        let j = interval(&self.x, v)?;
        if v == self.x[j + 1] {
            return Some(self.y[j + 1]);
        }
        let (a, b, c) = self.piece(j);
        let d = v - self.x[j];
        Some(a + d * (b + d * c))
    }

    pub fn derivative(&self, v: f64) -> Option<f64> {
        let j = interval(&self.x, v)?;
        let (_, b, c) = self.piece(j);
        Some(b + 2.0 * c * (v - self.x[j]))
    }
}

/// Monotonicity-preserving piecewise cubic Hermite interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Pchip> {
        check_knots(x, y, 2)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|j| (y[j + 1] - y[j]) / h[j]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (a, b) = (delta[k - 1], delta[k]);
                if a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0) {
                    d[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = Self::end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = Self::end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    // shape-preserving three-point end condition
    fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() || m0 == 0.0 {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn eval(&self, v: f64) -> Option<f64> {
        let j = interval(&self.x, v)?;
        Some(hermite(
            self.x[j],
            self.x[j + 1],
            self.y[j],
            self.y[j + 1],
            self.d[j],
            self.d[j + 1],
            v,
        ))
    }

    pub fn derivative(&self, v: f64) -> Option<f64> {
        let j = interval(&self.x, v)?;
        Some(hermite_derivative(
            self.x[j],
            self.x[j + 1],
            self.y[j],
            self.y[j + 1],
            self.d[j],
            self.d[j + 1],
            v,
        ))
    }
}

/// Cubic Hermite interpolant whose tangents are the derivatives of the
/// parabola through each knot and its two neighbours. Exact on linear and
/// quadratic data for any knot spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicHermite {
    pub fn new(x: &[f64], y: &[f64]) -> Result<CubicHermite> {
        check_knots(x, y, 2)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|j| (y[j + 1] - y[j]) / h[j]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                m[i] = (h[i] * delta[i - 1] + h[i - 1] * delta[i]) / (h[i - 1] + h[i]);
            }
            m[0] = delta[0] - h[0] * (delta[1] - delta[0]) / (h[0] + h[1]);
            m[n - 1] =
                delta[n - 2] + h[n - 2] * (delta[n - 2] - delta[n - 3]) / (h[n - 3] + h[n - 2]);
        }
        Ok(CubicHermite {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, v: f64) -> Option<f64> {
        let j = interval(&self.x, v)?;
        Some(hermite(
            self.x[j],
            self.x[j + 1],
            self.y[j],
            self.y[j + 1],
            self.m[j],
            self.m[j + 1],
            v,
        ))
    }
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, v: f64) -> f64 {
    let h = x1 - x0;
    let s = (v - x0) / h;
    if s == 0.0 {
        return y0;
    }
    if s == 1.0 {
        return y1;
    }
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * m0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * m1
}

fn hermite_derivative(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, v: f64) -> f64 {
    let h = x1 - x0;
    let s = (v - x0) / h;
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
        + (3.0 * s2 - 4.0 * s + 1.0) * m0
        + (3.0 * s2 - 2.0 * s) * m1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_reproduces_lines_and_knots() {
        let x = [0.0, 0.1, 0.25, 0.3, 0.5];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let s = QuadraticSpline::new(&x, &y).unwrap();
        for i in 0..=100 {
            let v = 0.5 * i as f64 / 100.0;
            assert!((s.eval(v).unwrap() - (3.0 * v - 1.0)).abs() < 1e-12);
        }
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(s.eval(*xi).unwrap(), *yi);
        }
        assert!(s.eval(0.6).is_none());
    }

    #[test]
    fn quadratic_reproduces_parabola() {
        // oracle: closed-form parabola through the samples
        let f = |v: f64| 2.0 * v * v - 5.0 * v + 1.0;
        let x = [0.0, 1.0, 1.5, 3.0, 4.0, 7.0];
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let s = QuadraticSpline::new(&x, &y).unwrap();
        for w in x.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            assert!((s.eval(mid).unwrap() - f(mid)).abs() < 1e-6);
            assert!((s.derivative(mid).unwrap() - (4.0 * mid - 5.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn quadratic_is_c1() {
        let x = [0.0, 1.0, 2.0, 3.5, 4.0];
        let y = [0.0, 2.0, -1.0, 0.5, 3.0];
        let s = QuadraticSpline::new(&x, &y).unwrap();
        for &k in &x[1..4] {
            let l = s.derivative(k - 1e-9).unwrap();
            let r = s.derivative(k + 1e-9).unwrap();
            assert!((l - r).abs() < 1e-6);
        }
    }

    #[test]
    fn quadratic_needs_three_knots() {
        assert!(QuadraticSpline::new(&[0.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(QuadraticSpline::new(&[0.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn hermite_exact_on_quadratic_nonuniform() {
        let f = |t: f64| 0.5 * 0.02 * t * t + 3.0 * t + 7.0;
        let x = [0.0, 20.0, 45.0, 130.0, 150.0, 240.0];
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let h = CubicHermite::new(&x, &y).unwrap();
        for i in 0..=240 {
            let t = i as f64;
            assert!((h.eval(t).unwrap() - f(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn pchip_preserves_monotone_step() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let p = Pchip::new(&x, &y).unwrap();
        let mut last = -1.0;
        for i in 0..=900 {
            let v = p.eval(i as f64 / 100.0).unwrap();
            assert!(v >= last - 1e-15 && (0.0..=1.0).contains(&v));
            last = v;
        }
    }

    proptest! {
        #[test]
        fn pchip_monotone_data_gives_monotone_curve(
            steps in proptest::collection::vec(0.0f64..5.0, 3..20),
            gaps in proptest::collection::vec(0.1f64..3.0, 20),
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                x.push(x[i] + gaps[i]);
                y.push(y[i] + s);
            }
            let p = Pchip::new(&x, &y).unwrap();
            let (a, b) = p.domain();
            let mut last = f64::NEG_INFINITY;
            for i in 0..=500 {
                let v = p.eval((a + (b - a) * i as f64 / 500.0).min(b)).unwrap();
                prop_assert!(v >= last - 1e-9);
                last = v;
            }
        }
    }
}
