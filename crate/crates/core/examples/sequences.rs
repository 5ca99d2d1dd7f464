//! Resample irregular AIS reports onto a one-minute grid, split at gaps and
//! cut sliding windows of observed and future positions.

use waterway::domain::{AisRecord, Direction, Track};
use waterway::geom::GeoPoint;
use waterway::preprocess::{extract_sequences, resample_tracks, GAP_LIMIT_S, STEP_S, T_OBS};

fn main() {
    let mut records = Vec::new();
    let mut t = 0.0;
    for i in 0..150 {
        // ten minutes of silence after the 80th report
        if i == 80 {
            t += 600.0;
        }
        records.push(AisRecord {
            vessel_id: "V1".into(),
            timestamp: t,
            position: GeoPoint::new(0.0, t * 3.0),
            cog: 0.0,
            sog: Some(3.0),
            direction: Direction::Up,
        });
        t += 9.0 + (i % 3) as f64 * 3.0;
    }
    let track = Track { vessel_id: "V1".into(), direction: Direction::Up, records };

    let resampled = resample_tracks(&[track], STEP_S, GAP_LIMIT_S);
    for rt in &resampled {
        let windows = extract_sequences(rt, 1);
        println!("{}: {} grid positions from t = {:.0} s, {} windows", rt.track_id(), rt.positions.len(), rt.t0, windows.len());
        if let Some(w) = windows.first() {
            let obs: Vec<String> = w.observed().iter().map(|p| format!("{:.0}", p.northing)).collect();
            let fut: Vec<String> = w.future().iter().map(|p| format!("{:.0}", p.northing)).collect();
            println!("  first window {}: observed [{}] (anchor index {T_OBS}), future [{}]", w.track_id, obs.join(", "), fut.join(", "));
        }
    }
}
