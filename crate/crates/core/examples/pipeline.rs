//! The whole chain on files: generate a river with traffic, extract the
//! navigation statistics and features, run the baseline and write the
//! evaluation report. Pass an output directory or use the temp directory.

use std::collections::BTreeMap;
use std::path::PathBuf;

use waterway::config::{KeyValues, PipelineConfig, SyntheticSpec};
use waterway::features::{read_jsonl, write_jsonl, FeatureRecord, System};
use waterway::io::load_ais;
use waterway::pipeline::{baseline_predictions, evaluate, extract_features, gen_synthetic, DirectionStats, Network, DIRECTIONS};

const SPEC: &str = "centerline = sinusoid
amplitude = 250
wavelength = 3500
length_km = 6
vessels = 40
";

fn main() -> waterway::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("waterway-pipeline"));
    let spec = SyntheticSpec::from_key_values(&KeyValues::parse(SPEC, "inline spec")?)?;
    let cfg = PipelineConfig::default();
    let summary = gen_synthetic(&spec, cfg.seed, out.join("data"))?;
    println!("generated {} tracks with {} reports", summary.tracks, summary.records);

    let net = Network::load(out.join("data/axis.csv"), out.join("data/boundaries.csv"), cfg.lateral_factor)?;
    let tracks = load_ais(out.join("data/ais.csv"))?.tracks;
    let mut stats = BTreeMap::new();
    for d in DIRECTIONS {
        let s = DirectionStats::extract(&net, &tracks, d, &cfg)?;
        s.write(out.join("stats"))?;
        stats.insert(d, s);
    }

    for system in System::ALL {
        let fs = extract_features(&net, &stats, &tracks, system, &cfg)?;
        fs.write(out.join("features"))?;
        let s = &fs.summary;
        println!("{system}: {} train / {} test windows, discretization error {:.3} m", s.train, s.test, s.discretization_error_m);
    }

    let records: Vec<FeatureRecord> = read_jsonl(out.join("features/features_nav.jsonl"))?;
    let (preds, _) = baseline_predictions(&net, &stats, &records)?;
    write_jsonl(out.join("predictions.jsonl"), &preds)?;
    let report = evaluate(&net, &stats, &records, &preds, &[], "baseline")?;
    report.write(out.join("report"))?;
    for row in &report.ate {
        println!("ATE@{:<2} {:>7.2} ± {:.2} m", row.horizon, row.mean, row.std);
    }
    println!("files under {}", out.display());
    Ok(())
}
