//! Official kilometer labels with a historical gap, and the gap-free
//! internal kilometers used for all distance arithmetic.

use waterway::kilometer::{KilometerIndex, KmShiftMap};
use waterway::synthetic::{gen_river, RiverSpec};

fn main() -> waterway::error::Result<()> {
    let labels = [10.0, 10.1, 10.2, 10.4, 10.5, 10.6];
    let map = KmShiftMap::from_labels(&labels)?;
    println!("official  internal");
    for (o, i) in map.official_labels().iter().zip(map.internal_labels()) {
        println!("{o:>8.1}  {i:>8.1}");
    }
    for (at, size) in map.gaps() {
        println!("labels {size:.1} km apart after profile {at}");
    }
    for official in [10.15, 10.45, 10.6] {
        let internal = map.to_internal(official);
        println!("official {official} -> internal {internal:.3} -> official {:.3}", map.to_official(internal));
    }

    // a generated river with the same kind of gap
    let river = gen_river(&RiverSpec { gaps: vec![(2.05, 0.1)], ..RiverSpec::default() })?;
    let index = KilometerIndex::build(river.axis)?;
    let p = river.oracle.point(102.5, 0.0);
    let fix = index.kilometrize(p)?;
    println!("point 2.5 km along: internal km {:.3}, official km {:.3}", fix.km, fix.official_km);
    Ok(())
}
