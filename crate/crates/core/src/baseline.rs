//! Statistical extrapolation baseline.
//!
//! The vessel keeps the mean deviation from the typical speed and the mean
//! signed offset from the typical route that it showed while observed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{decode, encode_path, Anchor, Decoded, Geometry, System};
use crate::geom::GeoPoint;
use crate::metrics::{PredictionRecord, Units};
use crate::preprocess::{HORIZON, T_OBS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineState {
    /// Mean of `k_t − z(h(p_t))` over the observed steps, km per step.
    pub mean_dev: f64,
    /// Mean signed route offset `s` over the observed positions after the first.
    pub mean_off: f64,
    pub km_last: f64,
    pub s_last: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePrediction {
    pub state: BaselineState,
    pub anchor: Anchor,
    /// Navigation-system feature steps that reproduce the extrapolation.
    pub steps: Vec<[f64; 2]>,
    pub decoded: Decoded,
}

/// Baseline state from the `T_OBS + 1` observed positions.
pub fn baseline_state(observed: &[GeoPoint], lead_heading: f64, geo: &Geometry) -> Result<(BaselineState, Anchor)> {
    if observed.len() != T_OBS + 1 {
        return Err(Error::InvalidInput(format!(
            "baseline needs {} observed positions, got {}",
            T_OBS + 1,
            observed.len()
        )));
    }
    let (steps, anchor) = encode_path(System::Nav, observed, lead_heading, T_OBS, geo)?;
    let s_last = anchor.s.expect("nav anchor has s");
    // offsets at p_1..p_T_OBS, rebuilt backwards from the anchor
    let mut s = s_last;
    let mut sum_off = s;
    for st in steps[1..].iter().rev() {
        s -= st[1];
        sum_off += s;
    }
    let n = steps.len() as f64;
    let state = BaselineState {
        mean_dev: steps.iter().map(|st| st[0]).sum::<f64>() / n,
        mean_off: sum_off / n,
        km_last: anchor.km,
        s_last,
    };
    Ok((state, anchor))
}

/// Feature steps of the extrapolation: constant deviation, offset moved to
/// the mean in the first step and then held.
pub fn baseline_steps(state: &BaselineState) -> Vec<[f64; 2]> {
    (0..HORIZON)
        .map(|t| [state.mean_dev, if t == 0 { state.mean_off - state.s_last } else { 0.0 }])
        .collect()
}

pub fn baseline_predict(observed: &[GeoPoint], lead_heading: f64, geo: &Geometry) -> Result<BaselinePrediction> {
    let (state, anchor) = baseline_state(observed, lead_heading, geo)?;
    let steps = baseline_steps(&state);
    let decoded = decode(System::Nav, &anchor, &steps, geo)?;
    Ok(BaselinePrediction {
        state,
        anchor,
        steps,
        decoded,
    })
}

impl BaselinePrediction {
    /// Single-member prediction record in continuous navigation features.
    pub fn record(&self, id: &str) -> PredictionRecord {
        PredictionRecord {
            id: id.to_string(),
            system: System::Nav,
            units: Units::Continuous,
            mc_samples: vec![self.steps.clone()],
        }
    }
}
