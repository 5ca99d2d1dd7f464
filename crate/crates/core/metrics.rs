//! Trajectory error, ensemble uncertainty and calibration bins.

use waterway::geom::GeoPoint;
use waterway::metrics::{atu, ate, calibration_bins, uncertainty};

fn main() -> waterway::error::Result<()> {
    let truth = [GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 0.0)];
    let pred = [GeoPoint::new(3.0, 0.0), GeoPoint::new(0.0, 4.0)];
    println!("ATE of errors 3 m and 4 m: {:.5} m", ate(&pred, &truth, 2)?);

    let members = vec![
        vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(-1.0, 0.0)],
        vec![GeoPoint::new(0.0, 0.0), GeoPoint::new(1.0, 0.0)],
    ];
    println!("u_1 = {}, u_2 = {}, ATU = {:.4}", uncertainty(&members, 0), uncertainty(&members, 1), atu(&members));

    // a well calibrated toy model: errors grow with the spread
    let samples: Vec<(f64, f64)> = (0..200)
        .map(|i| {
            let u = 1.0 + (i % 50) as f64 * 0.4;
            (u * 1.5 + (i % 7) as f64 * 0.3, u)
        })
        .collect();
    let (_, bins) = calibration_bins(&samples)?;
    println!("{:>12} {:>6} {:>10} {:>10}", "ATU range", "count", "ATE mean", "ATE std");
    for b in bins {
        println!("{:>5.1}-{:<6.1} {:>6} {:>10.2} {:>10.2}", b.lo, b.hi, b.count, b.ate_mean, b.ate_std);
    }
    Ok(())
}
