//! Track splitting, uniform-grid resampling and sequence windows.

use crate::domain::{AisRecord, Direction, Track};
use crate::geom::{bearing, GeoPoint};
use crate::spline::CubicHermite;
use serde::Serialize;

/// Resampling step, seconds.
pub const STEP_S: f64 = 60.0;
/// Largest raw gap kept inside one track, seconds.
pub const GAP_LIMIT_S: f64 = 300.0;
/// Observed steps per sample.
pub const T_OBS: usize = 5;
/// Predicted steps per sample.
pub const HORIZON: usize = 10;
/// Steps per sample window.
pub const WINDOW_STEPS: usize = T_OBS + HORIZON;

/// A track on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResampledTrack {
    pub vessel_id: String,
    pub direction: Direction,
    /// Index of the gap-free piece of the raw track.
    pub segment: usize,
    pub t0: f64,
    pub step: f64,
    pub positions: Vec<GeoPoint>,
    /// `cogs[t]` is the bearing from `positions[t]` to `positions[t + 1]`;
    /// the last entry repeats the previous one.
    pub cogs: Vec<f64>,
}

impl ResampledTrack {
    pub fn track_id(&self) -> String {
        format!("{}-{}-{}", self.vessel_id, self.direction, self.segment)
    }

    /// Number of steps between grid positions.
    pub fn steps(&self) -> usize {
        self.positions.len().saturating_sub(1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.step * i as f64
    }
}

/// Split a track wherever consecutive records are more than `gap_limit` seconds apart.
pub fn split_gaps(track: &Track, gap_limit: f64) -> Vec<Track> {
    let mut out: Vec<Track> = Vec::new();
    let mut current: Vec<AisRecord> = Vec::new();
    for r in &track.records {
        if let Some(last) = current.last() {
            if r.timestamp - last.timestamp > gap_limit {
                out.push(Track {
                    vessel_id: track.vessel_id.clone(),
                    direction: track.direction,
                    records: std::mem::take(&mut current),
                });
            }
        }
        current.push(r.clone());
    }
    if !current.is_empty() {
        out.push(Track {
            vessel_id: track.vessel_id.clone(),
            direction: track.direction,
            records: current,
        });
    }
    out
}

fn cogs_of(positions: &[GeoPoint]) -> Vec<f64> {
    let mut cogs = Vec::with_capacity(positions.len());
    let mut last = 0.0;
    for w in positions.windows(2) {
        last = bearing(w[0], w[1]).unwrap_or(last);
        cogs.push(last);
    }
    if !positions.is_empty() {
        cogs.push(last);
    }
    cogs
}

/// Resample a gap-free track at `t0 + k * step`, where `t0` is the first
/// timestamp rounded up to a whole step. Grid times after the last record
/// are not emitted.
pub fn resample(track: &Track, step: f64, segment: usize) -> ResampledTrack {
    let mut rt = ResampledTrack {
        vessel_id: track.vessel_id.clone(),
        direction: track.direction,
        segment,
        t0: f64::NAN,
        step,
        positions: Vec::new(),
        cogs: Vec::new(),
    };
    if track.records.len() < 2 {
        return rt;
    }
    let t: Vec<f64> = track.records.iter().map(|r| r.timestamp).collect();
    let e: Vec<f64> = track.records.iter().map(|r| r.position.easting).collect();
    let n: Vec<f64> = track.records.iter().map(|r| r.position.northing).collect();
    let (Ok(he), Ok(hn)) = (CubicHermite::new(&t, &e), CubicHermite::new(&t, &n)) else {
        return rt;
    };
    let first = t[0];
    let last = t[t.len() - 1];
    let t0 = (first / step).ceil() * step;
    rt.t0 = t0;
    let mut k = 0usize;
    loop {
        let tk = t0 + step * k as f64;
        if tk > last {
            break;
        }
        // domain checked above
        rt.positions.push(GeoPoint::new(
            he.eval(tk).expect("inside span"),
            hn.eval(tk).expect("inside span"),
        ));
        k += 1;
    }
    rt.cogs = cogs_of(&rt.positions);
    rt
}

/// Split every track at gaps and resample each piece.
pub fn resample_tracks(tracks: &[Track], step: f64, gap_limit: f64) -> Vec<ResampledTrack> {
    use rayon::prelude::*;
    tracks
        .par_iter()
        .flat_map_iter(|t| {
            split_gaps(t, gap_limit)
                .into_iter()
                .enumerate()
                .map(|(i, piece)| resample(&piece, step, i))
                .filter(|rt| !rt.positions.is_empty())
                .collect::<Vec<_>>()
        })
        .collect()
}

/// One window of `WINDOW_STEPS + 1` consecutive grid positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceSample {
    pub track_id: String,
    pub vessel_id: String,
    pub direction: Direction,
    /// Grid index of the first position.
    pub start: usize,
    pub t_start: f64,
    /// Heading of the segment arriving at the first position (its own
    /// departure heading at the start of a track).
    pub lead_heading: f64,
    pub positions: Vec<GeoPoint>,
}

impl SequenceSample {
    /// Positions up to and including the last observed one.
    pub fn observed(&self) -> &[GeoPoint] {
        &self.positions[..=T_OBS]
    }

    /// The `HORIZON` positions to predict.
    pub fn future(&self) -> &[GeoPoint] {
        &self.positions[T_OBS + 1..]
    }

    pub fn last_observed(&self) -> GeoPoint {
        self.positions[T_OBS]
    }
}

/// Sliding windows of `WINDOW_STEPS` steps, `stride` steps apart.
pub fn extract_sequences(rt: &ResampledTrack, stride: usize) -> Vec<SequenceSample> {
    let stride = stride.max(1);
    let steps = rt.steps();
    if steps < WINDOW_STEPS {
        return Vec::new();
    }
    let id = rt.track_id();
    (0..=steps - WINDOW_STEPS)
        .step_by(stride)
        .map(|start| SequenceSample {
            track_id: id.clone(),
            vessel_id: rt.vessel_id.clone(),
            direction: rt.direction,
            start,
            t_start: rt.time(start),
            lead_heading: rt.cogs[start.saturating_sub(1)],
            positions: rt.positions[start..=start + WINDOW_STEPS].to_vec(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(samples: &[(f64, f64, f64)]) -> Track {
        Track {
            vessel_id: "v".into(),
            direction: Direction::Up,
            records: samples
                .iter()
                .map(|&(t, e, n)| AisRecord {
                    vessel_id: "v".into(),
                    timestamp: t,
                    position: GeoPoint::new(e, n),
                    cog: 0.0,
                    sog: None,
                    direction: Direction::Up,
                })
                .collect(),
        }
    }

    fn grid_track(steps: usize) -> ResampledTrack {
        let positions: Vec<GeoPoint> = (0..=steps).map(|i| GeoPoint::new(0.0, i as f64 * 100.0)).collect();
        ResampledTrack {
            vessel_id: "v".into(),
            direction: Direction::Up,
            segment: 0,
            t0: 0.0,
            step: 60.0,
            cogs: cogs_of(&positions),
            positions,
        }
    }

    #[test]
    fn on_grid_linear_motion_is_unchanged() {
        let raw: Vec<_> = (0..10).map(|i| (60.0 * i as f64, 3.0 * i as f64, 100.0 * i as f64)).collect();
        let rt = resample(&track(&raw), 60.0, 0);
        assert_eq!(rt.positions.len(), 10);
        for (p, r) in rt.positions.iter().zip(&raw) {
            assert_eq!(*p, GeoPoint::new(r.1, r.2));
        }
    }

    #[test]
    fn irregular_linear_motion_is_exact() {
        let ts = [3.0, 17.0, 55.0, 61.0, 130.0, 149.5, 222.0, 290.0, 301.0];
        let raw: Vec<_> = ts.iter().map(|&t| (t, 1000.0 + 2.5 * t, -4.0 * t)).collect();
        let rt = resample(&track(&raw), 60.0, 0);
        assert_eq!(rt.t0, 60.0);
        assert_eq!(rt.positions.len(), 5);
        for (k, p) in rt.positions.iter().enumerate() {
            let t = 60.0 + 60.0 * k as f64;
            assert!((p.easting - (1000.0 + 2.5 * t)).abs() < 1e-6);
            assert!((p.northing + 4.0 * t).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_acceleration_within_half_meter() {
        let mut t = 0.0;
        let mut raw = Vec::new();
        let gaps = [20.0, 90.0, 45.0, 33.0, 70.0, 25.0, 88.0, 60.0, 41.0, 90.0];
        let path = |t: f64| (5.0 * t + 0.004 * t * t, 0.5 * t - 0.002 * t * t);
        for g in gaps.iter().cycle().take(40) {
            let (e, n) = path(t);
            raw.push((t, e, n));
            t += g;
        }
        let rt = resample(&track(&raw), 60.0, 0);
        for (k, p) in rt.positions.iter().enumerate() {
            let (e, n) = path(rt.time(k));
            assert!(p.distance(GeoPoint::new(e, n)) < 0.5);
        }
    }

    #[test]
    fn short_tracks_give_empty_result() {
        assert!(resample(&track(&[(5.0, 0.0, 0.0)]), 60.0, 0).positions.is_empty());
        // span inside one minute without a grid time
        assert!(resample(&track(&[(61.0, 0.0, 0.0), (100.0, 1.0, 1.0)]), 60.0, 0).positions.is_empty());
    }

    #[test]
    fn gaps_split_tracks() {
        let t = track(&[(0.0, 0.0, 0.0), (100.0, 0.0, 1.0), (500.0, 0.0, 2.0), (560.0, 0.0, 3.0)]);
        let parts = split_gaps(&t, GAP_LIMIT_S);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[1].records.len(), 2);
        assert_eq!(split_gaps(&t, 1000.0).len(), 1);
    }

    #[test]
    fn window_counts() {
        assert_eq!(extract_sequences(&grid_track(15), 1).len(), 1);
        assert_eq!(extract_sequences(&grid_track(17), 1).len(), 3);
        assert_eq!(extract_sequences(&grid_track(14), 1).len(), 0);
        assert_eq!(extract_sequences(&grid_track(30), 5).len(), 4);
        let s = &extract_sequences(&grid_track(17), 1)[2];
        assert_eq!(s.positions.len(), 16);
        assert_eq!(s.observed().len(), 6);
        assert_eq!(s.future().len(), 10);
        assert_eq!(s.start, 2);
    }

    #[test]
    fn cog_is_departure_bearing() {
        let rt = grid_track(3);
        assert_eq!(rt.cogs, vec![0.0; 4]);
        let p = [GeoPoint::new(0.0, 0.0), GeoPoint::new(100.0, 0.0), GeoPoint::new(100.0, 100.0)];
        assert_eq!(cogs_of(&p), vec![90.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn shift_equivariant_and_knot_exact(
            dts in proptest::collection::vec(5.0f64..120.0, 4..30),
            shift in 0u32..1000,
        ) {
            let mut t = 1_000.0;
            let mut raw = Vec::new();
            for (i, dt) in dts.iter().enumerate() {
                raw.push((t, (i as f64 * 1.3).sin() * 50.0, i as f64 * 37.0));
                t += dt;
            }
            let a = resample(&track(&raw), 60.0, 0);
            let delta = 60.0 * shift as f64;
            let moved: Vec<_> = raw.iter().map(|&(t, e, n)| (t + delta, e, n)).collect();
            let b = resample(&track(&moved), 60.0, 0);
            prop_assert_eq!(a.t0 + delta, b.t0);
            prop_assert_eq!(a.positions.len(), b.positions.len());
            for (p, q) in a.positions.iter().zip(&b.positions) {
                prop_assert!(p.distance(*q) < 1e-6);
            }
            let last = raw.last().unwrap().0;
            prop_assert!(a.time(a.positions.len().saturating_sub(1)) <= last);
            // knot interpolation: a record exactly on the grid is reproduced
            let on_grid: Vec<_> = raw.iter().map(|&(t, e, n)| ((t / 60.0).round() * 60.0, e, n)).collect();
            let mut dedup = on_grid.clone();
            dedup.dedup_by(|x, y| x.0 == y.0);
            if dedup.len() >= 2 {
                let c = resample(&track(&dedup), 60.0, 0);
                for (k, p) in c.positions.iter().enumerate() {
                    if let Some(r) = dedup.iter().find(|r| r.0 == c.time(k)) {
                        prop_assert_eq!(*p, GeoPoint::new(r.1, r.2));
                    }
                }
            }
        }
    }
}
