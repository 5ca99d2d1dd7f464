//! Kilometerize points around a meandering river and compare with the
//! analytic chainage of the generated centerline.

use waterway::geom::GeoPoint;
use waterway::kilometer::KilometerIndex;
use waterway::synthetic::{gen_river, Centerline, RiverSpec};

fn main() -> waterway::error::Result<()> {
    let river = gen_river(&RiverSpec {
        centerline: Centerline::Sinusoid { amplitude: 300.0, wavelength: 4000.0 },
        length_km: 6.0,
        ..RiverSpec::default()
    })?;
    let index = KilometerIndex::build(river.axis.clone())?;
    let o = &river.oracle;

    println!("{:>9} {:>8} | {:>10} {:>9} {:>5} | {:>10} {:>9}", "km", "offset", "kilometrize", "distance", "side", "oracle km", "offset");
    for (km, offset) in [(100.25, 0.0), (101.3, 40.0), (102.05, -75.0), (103.777, 120.0), (105.5, -140.0)] {
        let p = o.point(km, offset);
        let fix = index.kilometrize(p)?;
        let (ok, ooff) = o.chainage(p);
        println!(
            "{km:>9.3} {offset:>8.1} | {:>11.6} {:>9.3} {:>5} | {ok:>10.6} {ooff:>9.3}",
            fix.km,
            fix.axis_distance,
            fix.axis_side.as_str()
        );
    }

    let far = o.point(103.0, 400.0);
    match index.kilometrize(far) {
        Ok(f) => println!("400 m off axis: km {:.4}", f.km),
        Err(e) => println!("400 m off axis: {e}"),
    }

    let p = index.inverse_kilometrize(102.5, 30.0)?;
    let back = index.kilometrize(p)?;
    println!("inverse of (102.5, 30 m right) = {:.2} {:.2}, kilometrized again: {:.6} / {:.4} m", p.easting, p.northing, back.km, back.signed_offset());

    let q = GeoPoint::new(p.easting + 1.0, p.northing);
    assert_eq!(index.nearest_profile(q), index.nearest_profile_linear(q));
    Ok(())
}
