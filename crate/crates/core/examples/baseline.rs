//! The statistical baseline: keep the observed deviation from the typical
//! speed and the observed offset from the typical route.

use waterway::baseline::baseline_predict;
use waterway::config::PipelineConfig;
use waterway::domain::Direction;
use waterway::metrics::{ate, ATE_HORIZONS};
use waterway::pipeline::{DirectionStats, Network};
use waterway::preprocess::{extract_sequences, resample_tracks};
use waterway::synthetic::{gen_river, gen_traffic, plan_vessel, Centerline, RiverSpec, TrafficSpec};

fn main() -> waterway::error::Result<()> {
    let river = gen_river(&RiverSpec {
        centerline: Centerline::Sinusoid { amplitude: 250.0, wavelength: 3500.0 },
        length_km: 5.0,
        ..RiverSpec::default()
    })?;
    let spec = TrafficSpec { vessels: 24, up_share: 0.0, noise_std_m: 0.0, ..TrafficSpec::default() };
    let tracks = gen_traffic(&river, &spec, 11)?;
    let cfg = PipelineConfig::default();
    let net = Network::new(river.axis.clone(), &river.right, &river.left, cfg.lateral_factor)?;
    let stats = DirectionStats::extract(&net, &tracks, Direction::Down, &cfg)?;
    let geo = stats.geometry(&net)?;

    let rt = &resample_tracks(&tracks[..1], cfg.step_s, cfg.gap_limit_s)[0];
    let plan = plan_vessel(&spec, 11, 0);
    println!("vessel {}: {:.1} m from the centerline at {:.4} km/min", rt.vessel_id, plan.offset_m, plan.speed);
    println!("typical speed near km 102.5: {:.4} km/min", stats.speed.eval(102.5)?);

    for w in extract_sequences(rt, 4).iter().take(4) {
        let p = baseline_predict(w.observed(), w.lead_heading, &geo)?;
        let ates = ATE_HORIZONS
            .iter()
            .map(|&h| ate(&p.decoded.positions, w.future(), h).map(|e| format!("{e:.2}")))
            .collect::<waterway::error::Result<Vec<_>>>()?;
        println!(
            "{}: mean deviation {:+.5} km/step, mean offset {:+.2} m, ATE@{ATE_HORIZONS:?} = [{}] m",
            w.track_id,
            p.state.mean_dev,
            p.state.mean_off,
            ates.join(", ")
        );
    }
    Ok(())
}
