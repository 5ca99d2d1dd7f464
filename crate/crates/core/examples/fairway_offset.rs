//! Relative position of points across the fairway, seen from both
//! directions of travel.

use waterway::domain::Direction;
use waterway::fairway::Fairway;
use waterway::kilometer::KilometerIndex;
use waterway::synthetic::{gen_river, Centerline, RiverSpec};

fn main() -> waterway::error::Result<()> {
    let river = gen_river(&RiverSpec { centerline: Centerline::Arc { radius: 800.0 }, length_km: 2.0, ..RiverSpec::default() })?;
    let index = KilometerIndex::build(river.axis.clone())?;
    let fairway = Fairway::fit(&river.right, &river.left)?;
    println!("fairway width at km 101.0: {:.2} m", fairway.width(101.0)?);

    println!("{:>10} | {:>8} {:>6} | {:>8} {:>6}", "offset", "f up", "rel", "f down", "rel");
    for offset in [-80.0, -60.0, -30.0, 0.0, 30.0, 60.0] {
        let p = river.oracle.point(101.0, offset);
        let km = index.kilometrize(p)?.km;
        let up = fairway.oriented(Direction::Up).frame(p, km)?;
        let down = fairway.oriented(Direction::Down).frame(p, km)?;
        println!("{offset:>10.1} | {:>8.2} {:>6.3} | {:>8.2} {:>6.3}", up.f, up.rel, down.f, down.rel);
    }
    Ok(())
}
