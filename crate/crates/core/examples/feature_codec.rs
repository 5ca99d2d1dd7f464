//! Encode generated windows in the three reference systems, decode them back,
//! and measure what class discretization costs after ten steps.

use waterway::config::PipelineConfig;
use waterway::domain::Direction;
use waterway::features::{decode, discretization_bound, encode, reconstruction_error, Codebook, System};
use waterway::pipeline::{DirectionStats, Network};
use waterway::preprocess::{extract_sequences, resample_tracks, SequenceSample, HORIZON, T_OBS};
use waterway::synthetic::{gen_river, gen_traffic, Centerline, RiverSpec, TrafficSpec};

fn main() -> waterway::error::Result<()> {
    let river = gen_river(&RiverSpec { centerline: Centerline::Arc { radius: 1200.0 }, length_km: 4.0, ..RiverSpec::default() })?;
    let tracks = gen_traffic(&river, &TrafficSpec { vessels: 20, up_share: 1.0, ..TrafficSpec::default() }, 3)?;
    let cfg = PipelineConfig::default();
    let net = Network::new(river.axis.clone(), &river.right, &river.left, cfg.lateral_factor)?;
    let stats = DirectionStats::extract(&net, &tracks, Direction::Up, &cfg)?;
    let geo = stats.geometry(&net)?;
    let windows: Vec<SequenceSample> = resample_tracks(&tracks, cfg.step_s, cfg.gap_limit_s)
        .iter()
        .flat_map(|rt| extract_sequences(rt, 3))
        .collect();

    let w = &windows[windows.len() / 2];
    for system in System::ALL {
        let enc = encode(system, w, &geo)?;
        let first = enc.future[0];
        let back = decode(system, &enc.anchor, &enc.future, &geo)?;
        let err = back.positions[HORIZON - 1].distance(w.positions[T_OBS + HORIZON]);
        println!("{system}: first future step ({:.5}, {:.5}), continuous round trip error {err:.2e} m", first[0], first[1]);
    }

    println!("\n{} windows", windows.len());
    println!("{:>5} {:>12} {:>14} {:>14} {:>12}", "sys", "vocab", "mean error m", "mean bound m", "resolution");
    for system in System::ALL {
        let encoded: Vec<_> = windows.iter().filter_map(|w| encode(system, w, &geo).ok().map(|e| (w, e))).collect();
        let values: Vec<[f64; 2]> = encoded.iter().flat_map(|(_, e)| e.observed.iter().chain(&e.future).copied()).collect();
        let cb = Codebook::fit(system, system.resolution(), &values)?;
        let mut err = 0.0;
        let mut bound = 0.0;
        for (w, e) in &encoded {
            err += reconstruction_error(w, e, Some(&cb), &geo)?;
            bound += discretization_bound(e, &cb, &geo)?;
        }
        let n = encoded.len() as f64;
        let v = cb.vocab_sizes();
        println!("{system:>5} {:>12} {:>14.3} {:>14.3} {:>12}", format!("{}x{}", v[0], v[1]), err / n, bound / n, format!("{:?}", cb.resolution));
    }
    Ok(())
}
