//! Savitzky–Golay smoothing of uniformly spaced series.

use crate::error::{Error, Result};

/// How the filter treats the first and last `window / 2` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    /// Evaluate the polynomial fitted to the first (last) full window.
    /// Exact for polynomial data of degree <= order everywhere.
    #[default]
    Fit,
    /// Reflect the series about its end samples (`d c b | a b c d`).
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavGolConfig {
    /// Odd window length in samples.
    pub window: usize,
    pub order: usize,
    pub edge: EdgeMode,
    /// Limit each output to the range of raw samples inside its window.
    /// Removes the overshoot of the filter at steps.
    pub clamp_to_window: bool,
}

impl Default for SavGolConfig {
    fn default() -> Self {
        SavGolConfig {
            window: 21,
            order: 3,
            edge: EdgeMode::Fit,
            clamp_to_window: true,
        }
    }
}

impl SavGolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window.is_multiple_of(2) || self.window < 3 {
            return Err(Error::InvalidInput(format!(
                "Savitzky-Golay window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if self.order >= self.window {
            return Err(Error::InvalidInput(format!(
                "polynomial order {} must be below the window {}",
                self.order, self.window
            )));
        }
        Ok(())
    }
}

/// Weights that evaluate the least-squares polynomial of degree `order`,
/// fitted to samples at offsets `-half..=half`, at offset `at`.
pub fn weights(half: usize, order: usize, at: f64) -> Vec<f64> {
    let scale = half.max(1) as f64;
    let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|j| j as f64 / scale).collect();
    let k = order + 1;
    // normal matrix A^T A
    let mut m = vec![vec![0.0; k]; k];
    for &x in &offsets {
        let mut pows = vec![1.0; 2 * k];
        for i in 1..2 * k {
            pows[i] = pows[i - 1] * x;
        }
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v += pows[r + c];
            }
        }
    }
    let at = at / scale;
    let mut rhs: Vec<f64> = (0..k).map(|i| at.powi(i as i32)).collect();
    solve_in_place(&mut m, &mut rhs);
    offsets
        .iter()
        .map(|&x| {
            let mut p = 1.0;
            let mut acc = 0.0;
            for z in &rhs {
                acc += z * p;
                p *= x;
            }
            acc
        })
        .collect()
}

// Gaussian elimination with partial pivoting on a small dense system.
fn solve_in_place(m: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))
            .expect("non-empty");
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            let pivot = m[col].clone();
            for (x, p) in m[r][col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= m[r][c] * b[c];
        }
        b[r] = s / m[r][r];
    }
}

/// Smooth `data` with a Savitzky–Golay filter.
///
/// Series shorter than the window use the largest odd window that fits;
/// series with no more samples than `order` are returned unchanged.
pub fn smooth(data: &[f64], cfg: &SavGolConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = data.len();
    let mut window = cfg.window.min(if n % 2 == 1 { n } else { n.saturating_sub(1) });
    if window <= cfg.order || window < 3 {
        return Ok(data.to_vec());
    }
    if window % 2 == 0 {
        window -= 1;
    }
    let half = window / 2;
    let center = weights(half, cfg.order, 0.0);

    let sample = |i: i64| -> f64 {
        // mirror index into 0..n
        let last = n as i64 - 1;
        let j = if i < 0 {
            -i
        } else if i > last {
            2 * last - i
        } else {
            i
        };
        data[j as usize]
    };

    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let interior = i >= half && i + half < n;
        let (value, lo_idx, hi_idx) = if interior || cfg.edge == EdgeMode::Mirror {
            let v = center
                .iter()
                .enumerate()
                .map(|(j, w)| w * sample(i as i64 + j as i64 - half as i64))
                .sum::<f64>();
            (v, i as i64 - half as i64, i as i64 + half as i64)
        } else {
            // fit the nearest full window and evaluate off-center
            let start = if i < half { 0 } else { n - window };
            let at = i as f64 - (start + half) as f64;
            let w = weights(half, cfg.order, at);
            let v = w.iter().zip(&data[start..start + window]).map(|(a, b)| a * b).sum::<f64>();
            (v, start as i64, (start + window - 1) as i64)
        };
        *o = if cfg.clamp_to_window {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for k in lo_idx..=hi_idx {
                let s = sample(k);
                lo = lo.min(s);
                hi = hi.max(s);
            }
            value.clamp(lo, hi)
        } else {
            value
        };
    }
    Ok(out)
}
