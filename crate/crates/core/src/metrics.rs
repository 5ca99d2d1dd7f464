//! Trajectory error, ensemble uncertainty and their calibration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::System;
use crate::geom::GeoPoint;
use crate::io::write_lines;

/// Horizons (steps) of the ATE table.
pub const ATE_HORIZONS: [usize; 4] = [1, 3, 5, 10];
/// Width of a normalized-ATU calibration bin.
pub const BIN_WIDTH: f64 = 0.1;
pub const BIN_COUNT: usize = 10;

/// Published reference values of the Rhine and Danube studies, meters.
/// They come from proprietary data and are reported for comparison only.
pub const REFERENCE_VALUES: [(&str, f64); 7] = [
    ("rhine_baseline_ate10_mean", 46.89),
    ("rhine_baseline_ate10_std", 41.13),
    ("danube_baseline_ate10_mean", 52.36),
    ("danube_baseline_ate10_std", 61.08),
    ("rhine_discretization_error_glob", 5.15),
    ("rhine_discretization_error_riv", 1.00),
    ("rhine_discretization_error_nav", 1.19),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// Feature values in the system's physical units.
    Continuous,
    /// Signed codebook classes.
    Classes,
}

/// One line of a prediction file: `N` predicted sequences of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub system: System,
    pub units: Units,
    pub mc_samples: Vec<Vec<[f64; 2]>>,
}

/// Componentwise mean of `N` equally long sequences.
pub fn aggregate(mc: &[Vec<[f64; 2]>]) -> Result<Vec<[f64; 2]>> {
    let first = mc.first().ok_or_else(|| Error::InvalidInput("no sequences to aggregate".into()))?;
    if let Some(bad) = mc.iter().find(|s| s.len() != first.len()) {
        return Err(Error::Validation(format!(
            "ragged ensemble: sequence lengths {} and {}",
            first.len(),
            bad.len()
        )));
    }
    let n = mc.len() as f64;
    Ok((0..first.len())
        .map(|t| {
            let (a, b) = mc.iter().fold((0.0, 0.0), |(a, b), s| (a + s[t][0], b + s[t][1]));
            [a / n, b / n]
        })
        .collect())
}

/// Root mean square position error over the first `horizon` steps.
pub fn ate(pred: &[GeoPoint], truth: &[GeoPoint], horizon: usize) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Validation(format!(
            "{} predicted positions for {} true positions",
            pred.len(),
            truth.len()
        )));
    }
    if horizon == 0 || horizon > pred.len() {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} outside 1..={}",
            pred.len()
        )));
    }
    let sum: f64 = pred.iter().zip(truth).take(horizon).map(|(a, b)| a.distance_sq(*b)).sum();
    Ok((sum / horizon as f64).sqrt())
}

/// Spread of the ensemble at step `t`: the norm of the per-axis population
/// standard deviations.
pub fn uncertainty(mc_positions: &[Vec<GeoPoint>], t: usize) -> f64 {
    let n = mc_positions.len() as f64;
    if mc_positions.len() < 2 {
        return 0.0;
    }
    let (se, sn) = mc_positions
        .iter()
        .fold((0.0, 0.0), |(e, m), s| (e + s[t].easting, m + s[t].northing));
    let (me, mn) = (se / n, sn / n);
    let (ve, vn) = mc_positions.iter().fold((0.0, 0.0), |(e, m), s| {
        (e + (s[t].easting - me).powi(2), m + (s[t].northing - mn).powi(2))
    });
    (ve / n + vn / n).sqrt()
}

/// Root mean square of the per-step uncertainty.
pub fn atu(mc_positions: &[Vec<GeoPoint>]) -> f64 {
    let steps = mc_positions.iter().map(Vec::len).min().unwrap_or(0);
    if steps == 0 {
        return 0.0;
    }
    let sum: f64 = (0..steps).map(|t| uncertainty(mc_positions, t).powi(2)).sum();
    (sum / steps as f64).sqrt()
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Min-max normalization onto `[0, 1]`.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Validation(format!(
            "cannot normalize: value range [{lo}, {hi}] is empty"
        )));
    }
    Ok(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

/// Bin of a normalized value: edges `0.1 k`, with 1.0 in the last bin.
pub fn bin_index(x: f64) -> usize {
    (1..BIN_COUNT).filter(|&k| x >= k as f64 * BIN_WIDTH).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Mean normalized ATE of the bin (NaN when empty).
    pub ate_mean: f64,
    pub ate_std: f64,
}

/// Normalized `(ATE, ATU)` pairs and the bins.
pub type Calibration = (Vec<(f64, f64)>, Vec<CalibrationBin>);

/// Normalized samples and normalized-ATE statistics per normalized-ATU bin.
pub fn calibration_bins(samples: &[(f64, f64)]) -> Result<Calibration> {
    if samples.len() < 2 {
        return Err(Error::Validation(format!(
            "calibration needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let ate_n = normalize(&samples.iter().map(|s| s.0).collect::<Vec<_>>())?;
    let atu_n = normalize(&samples.iter().map(|s| s.1).collect::<Vec<_>>())?;
    let mut groups = vec![Vec::new(); BIN_COUNT];
    for (&e, &u) in ate_n.iter().zip(&atu_n) {
        groups[bin_index(u)].push(e);
    }
    let bins = groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let (ate_mean, ate_std) = mean_std(g);
            CalibrationBin {
                lo: k as f64 * BIN_WIDTH,
                hi: (k + 1) as f64 * BIN_WIDTH,
                count: g.len(),
                ate_mean,
                ate_std,
            }
        })
        .collect();
    Ok((ate_n.into_iter().zip(atu_n).collect(), bins))
}

/// Metrics of one predicted sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMetrics {
    pub id: String,
    /// ATE at each of [`ATE_HORIZONS`].
    pub ate: [f64; 4],
    /// Per-step uncertainty.
    pub u: Vec<f64>,
    pub atu: f64,
}

/// Metrics of a sample from its decoded ensemble mean and members.
pub fn sample_metrics(
    id: &str,
    mean_positions: &[GeoPoint],
    mc_positions: &[Vec<GeoPoint>],
    truth: &[GeoPoint],
) -> Result<SampleMetrics> {
    let mut a = [0.0; 4];
    for (v, h) in a.iter_mut().zip(ATE_HORIZONS) {
        *v = ate(mean_positions, truth, h)?;
    }
    let steps = truth.len();
    if mc_positions.iter().any(|m| m.len() != steps) {
        return Err(Error::Validation(format!("{id}: ensemble member of the wrong length")));
    }
    Ok(SampleMetrics {
        id: id.to_string(),
        ate: a,
        u: (0..steps).map(|t| uncertainty(mc_positions, t)).collect(),
        atu: atu(mc_positions),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonRow {
    pub horizon: usize,
    pub mean: f64,
    pub std: f64,
}

/// Aggregated evaluation of one model run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model: String,
    pub system: System,
    pub ate: Vec<HorizonRow>,
    pub mean_u: Vec<f64>,
    pub samples: Vec<SampleMetrics>,
    /// Normalized `(ATE, ATU)` per sample, absent when a range is zero.
    pub normalized: Option<Vec<(f64, f64)>>,
    pub bins: Option<Vec<CalibrationBin>>,
    /// Why calibration was not computed.
    pub calibration_note: Option<String>,
    /// Samples whose decoding left the covered range.
    pub skipped: usize,
}

impl EvalReport {
    pub fn new(model: &str, system: System, samples: Vec<SampleMetrics>, skipped: usize) -> Result<EvalReport> {
        if samples.is_empty() {
            return Err(Error::Validation("no evaluable samples".into()));
        }
        let ate = ATE_HORIZONS
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let (mean, std) = mean_std(&samples.iter().map(|s| s.ate[i]).collect::<Vec<_>>());
                HorizonRow { horizon: h, mean, std }
            })
            .collect();
        let steps = samples[0].u.len();
        let mean_u = (0..steps)
            .map(|t| samples.iter().map(|s| s.u[t]).sum::<f64>() / samples.len() as f64)
            .collect();
        let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.ate[3], s.atu)).collect();
        let (normalized, bins, calibration_note) = match calibration_bins(&pairs) {
            Ok((n, b)) => (Some(n), Some(b), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        Ok(EvalReport {
            model: model.to_string(),
            system,
            ate,
            mean_u,
            samples,
            normalized,
            bins,
            calibration_note,
            skipped,
        })
    }

    /// Write `ate_table.csv`, `uncertainty_per_step.csv`, `samples.csv`,
    /// `calibration_bins.csv` and `reference.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_lines(
            &dir.join("ate_table.csv"),
            "model,system,horizon_min,ate_mean_m,ate_std_m,samples",
            self.ate.iter().map(|r| {
                format!(
                    "{},{},{},{:.6},{:.6},{}",
                    self.model,
                    self.system,
                    r.horizon,
                    r.mean,
                    r.std,
                    self.samples.len()
                )
            }),
        )?;
        write_lines(
            &dir.join("uncertainty_per_step.csv"),
            "step,mean_u_m",
            self.mean_u.iter().enumerate().map(|(t, u)| format!("{},{:.6}", t + 1, u)),
        )?;
        write_lines(
            &dir.join("samples.csv"),
            "id,ate1_m,ate3_m,ate5_m,ate10_m,atu_m,ate_norm,atu_norm",
            self.samples.iter().enumerate().map(|(i, s)| {
                let (en, un) = match &self.normalized {
                    Some(n) => (format!("{:.6}", n[i].0), format!("{:.6}", n[i].1)),
                    None => (String::new(), String::new()),
                };
                format!(
                    "{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
                    s.id, s.ate[0], s.ate[1], s.ate[2], s.ate[3], s.atu, en, un
                )
            }),
        )?;
        write_lines(
            &dir.join("calibration_bins.csv"),
            "atu_norm_lo,atu_norm_hi,count,ate_norm_mean,ate_norm_std",
            self.bins.iter().flatten().map(|b| {
                let f = |v: f64| if v.is_nan() { String::new() } else { format!("{v:.6}") };
                format!("{:.1},{:.1},{},{},{}", b.lo, b.hi, b.count, f(b.ate_mean), f(b.ate_std))
            }),
        )?;
        write_lines(
            &dir.join("reference.csv"),
            "name,value_m",
            REFERENCE_VALUES.iter().map(|(k, v)| format!("{k},{v:.2}")),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[(f64, f64)]) -> Vec<GeoPoint> {
        v.iter().map(|&(e, n)| GeoPoint::new(e, n)).collect()
    }

    #[test]
    fn aggregate_examples() {
        let a = vec![[0.0, 0.0]; 10];
        assert_eq!(aggregate(std::slice::from_ref(&a)).unwrap(), a);
        let b = vec![[2.0, 2.0]; 10];
        assert_eq!(aggregate(&[a.clone(), b.clone()]).unwrap(), vec![[1.0, 1.0]; 10]);
        assert_eq!(aggregate(&[b.clone(), a.clone()]).unwrap(), aggregate(&[a.clone(), b]).unwrap());
        assert!(aggregate(&[a, vec![[0.0, 0.0]; 9]]).is_err());
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn ate_examples() {
        let truth = pts(&[(0.0, 0.0), (10.0, 0.0), (20.0, 0.0)]);
        assert_eq!(ate(&truth, &truth, 3).unwrap(), 0.0);
        let shifted: Vec<GeoPoint> = truth.iter().map(|p| *p + GeoPoint::new(0.0, 3.0)).collect();
        for h in 1..=3 {
            assert!((ate(&shifted, &truth, h).unwrap() - 3.0).abs() < 1e-12);
        }
        let pred = pts(&[(3.0, 0.0), (10.0, 4.0), (0.0, 0.0)]);
        assert!((ate(&pred, &truth, 2).unwrap() - 3.5355339059327378).abs() < 1e-9);
        assert!(ate(&pred, &truth[..2], 2).is_err());
        assert!(ate(&pred, &truth, 4).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let same = vec![pts(&[(1.0, 2.0)]); 4];
        assert_eq!(uncertainty(&same, 0), 0.0);
        let two = vec![pts(&[(-1.0, 5.0)]), pts(&[(1.0, 5.0)])];
        assert!((uncertainty(&two, 0) - 1.0).abs() < 1e-12);
        let four = vec![pts(&[(1.0, 1.0)]), pts(&[(1.0, -1.0)]), pts(&[(-1.0, 1.0)]), pts(&[(-1.0, -1.0)])];
        assert!((uncertainty(&four, 0) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(uncertainty(&[pts(&[(4.0, 4.0)])], 0), 0.0);
    }

    #[test]
    fn atu_examples() {
        assert_eq!(atu(&vec![pts(&[(0.0, 0.0), (1.0, 1.0)]); 3]), 0.0);
        // u = 1 at step 1 and sqrt(3) at step 2
        let a = pts(&[(-1.0, 0.0), (-3f64.sqrt(), 0.0)]);
        let b = pts(&[(1.0, 0.0), (3f64.sqrt(), 0.0)]);
        assert!((atu(&[a, b]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bin_edges() {
        assert_eq!(bin_index(0.0), 0);
        assert_eq!(bin_index(0.0999), 0);
        assert_eq!(bin_index(0.1), 1);
        assert_eq!(bin_index(0.95), 9);
        assert_eq!(bin_index(1.0), 9);
    }

    #[test]
    fn correlated_bins_increase() {
        let s: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, i as f64)).collect();
        let (_, bins) = calibration_bins(&s).unwrap();
        assert!(bins.windows(2).all(|w| w[1].ate_mean > w[0].ate_mean));
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), 100);
    }

    #[test]
    fn constant_ate_has_zero_range() {
        let s: Vec<(f64, f64)> = (0..50).map(|i| (2.0, i as f64)).collect();
        assert!(calibration_bins(&s).is_err());
        assert!(calibration_bins(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn bins_match_grouping_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<(f64, f64)> = (0..500)
            .map(|_| {
                let u: f64 = rng.gen_range(0.0..5.0);
                (u * rng.gen_range(0.5..1.5), u)
            })
            .collect();
        let (norm, bins) = calibration_bins(&s).unwrap();
        let mut order: Vec<usize> = (0..norm.len()).collect();
        order.sort_by(|&a, &b| norm[a].1.total_cmp(&norm[b].1));
        let mut rest = &order[..];
        for (k, b) in bins.iter().enumerate() {
            let take = if k + 1 == bins.len() {
                rest.len()
            } else {
                rest.iter().take_while(|&&i| norm[i].1 < b.hi).count()
            };
            let mut members = rest[..take].to_vec();
            rest = &rest[take..];
            assert!(members.iter().all(|&i| norm[i].1 >= b.lo));
            members.sort_unstable();
            let ate: Vec<f64> = members.iter().map(|&i| norm[i].0).collect();
            assert_eq!(ate.len(), b.count);
            if !ate.is_empty() {
                assert_eq!(mean_std(&ate), (b.ate_mean, b.ate_std));
            }
        }
        assert!(rest.is_empty());
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let truth = pts(&[(0.0, 0.0); 10]);
        let samples: Vec<SampleMetrics> = (0..3)
            .map(|i| {
                let pred = vec![GeoPoint::new(i as f64, 0.0); 10];
                sample_metrics(&format!("s{i}"), &pred, std::slice::from_ref(&pred), &truth).unwrap()
            })
            .collect();
        let r = EvalReport::new("baseline", System::Nav, samples, 0).unwrap();
        assert!((r.ate[3].mean - 1.0).abs() < 1e-12);
        assert!(r.bins.is_none() && r.calibration_note.is_some());
        r.write(dir.path()).unwrap();
        let bins = std::fs::read_to_string(dir.path().join("calibration_bins.csv")).unwrap();
        assert_eq!(bins.lines().count(), 1);
        let table = std::fs::read_to_string(dir.path().join("ate_table.csv")).unwrap();
        assert_eq!(table.lines().count(), 5);
    }

    proptest! {
        #[test]
        fn uncertainty_is_translation_and_rotation_invariant(
            pts_in in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..12),
            shift in (-1e3f64..1e3, -1e3f64..1e3),
            angle in 0.0f64..6.3,
        ) {
            let mc: Vec<Vec<GeoPoint>> = pts_in.iter().map(|&(e, n)| vec![GeoPoint::new(e, n)]).collect();
            let u = uncertainty(&mc, 0);
            let moved: Vec<Vec<GeoPoint>> = mc.iter().map(|m| vec![m[0] + GeoPoint::new(shift.0, shift.1)]).collect();
            prop_assert!((uncertainty(&moved, 0) - u).abs() < 1e-9);
            let n = mc.len() as f64;
            let c = mc.iter().fold(GeoPoint::default(), |a, m| a + m[0]) * (1.0 / n);
            let rotated: Vec<Vec<GeoPoint>> = mc.iter().map(|m| vec![c + (m[0] - c).rotated(angle)]).collect();
            prop_assert!((uncertainty(&rotated, 0) - u).abs() < 1e-9);
        }

        #[test]
        fn ate_scales_linearly(
            errs in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 10),
            k in 0.0f64..10.0,
        ) {
            let truth = vec![GeoPoint::default(); 10];
            let pred: Vec<GeoPoint> = errs.iter().map(|&(e, n)| GeoPoint::new(e, n)).collect();
            let scaled: Vec<GeoPoint> = pred.iter().map(|p| *p * k).collect();
            let a = ate(&pred, &truth, 10).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((ate(&scaled, &truth, 10).unwrap() - k * a).abs() < 1e-9 * (1.0 + k * a));
        }
    }
}
