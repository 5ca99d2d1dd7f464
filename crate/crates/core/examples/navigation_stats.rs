//! Typical route, typical speed profile and route context extracted from
//! generated traffic that keeps 10 m to starboard at a fixed speed.

use waterway::config::PipelineConfig;
use waterway::domain::Direction;
use waterway::pipeline::{DirectionStats, Network};
use waterway::synthetic::{gen_river, gen_traffic, Centerline, RiverSpec, TrafficSpec};

fn main() -> waterway::error::Result<()> {
    let river = gen_river(&RiverSpec {
        centerline: Centerline::Sinusoid { amplitude: 200.0, wavelength: 3000.0 },
        length_km: 4.0,
        ..RiverSpec::default()
    })?;
    let traffic = TrafficSpec {
        vessels: 30,
        up_share: 1.0,
        offset_std_m: 0.0,
        speed_dev_mean: 0.05,
        speed_dev_std: 0.0,
        noise_std_m: 0.5,
        ..TrafficSpec::default()
    };
    let tracks = gen_traffic(&river, &traffic, 7)?;
    let net = Network::new(river.axis.clone(), &river.right, &river.left, 2.0)?;
    let stats = DirectionStats::extract(&net, &tracks, Direction::Up, &PipelineConfig::default())?;

    let (lo, hi) = stats.route.coverage();
    println!("route covers km {lo:.2}..{hi:.2}");
    println!("{:>8} {:>10} {:>10} {:>8} {:>10} {:>10}", "km", "q error m", "z km/min", "bend", "curv 1/m", "hecto m");
    let mut km = 100.5;
    while km < 103.6 {
        let q = stats.route.eval(km)?;
        let truth = river.oracle.point(km, traffic.offset_mean_m);
        let c = stats.context.at(km).expect("context covers the route");
        println!(
            "{km:>8.2} {:>10.3} {:>10.4} {:>8} {:>10.6} {:>10.2}",
            q.distance(truth),
            stats.speed.eval(km)?,
            c.orientation.as_str(),
            c.curvature,
            c.hecto_euclid
        );
        km += 0.25;
    }
    println!("generated speed: {:.4} km/min", traffic.base_speed + traffic.speed_dev_mean);
    Ok(())
}
