//! End-to-end stages: synthetic data, statistics, features, baseline and
//! evaluation. Each stage reads and writes the file formats of its module.
//!
//! Output files:
//!
//! ```text
//! gen-synthetic     axis.csv boundaries.csv ais.csv
//! extract-stats     route_<dir>.csv speed_<dir>.csv context_<dir>.csv
//! extract-features  features_<sys>.jsonl codebook_<sys>.json features_<sys>_summary.json
//! baseline-predict  predictions.jsonl
//! evaluate          ate_table.csv uncertainty_per_step.csv samples.csv
//!                   calibration_bins.csv reference.csv
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::baseline::baseline_predict;
use crate::config::{PipelineConfig, SyntheticSpec};
use crate::domain::{BoundarySamples, Direction, Side, Track, WaterwayAxis};
use crate::error::{Error, Result};
use crate::fairway::Fairway;
use crate::features::{
    decode, encode, encode_path, reconstruction_error, Codebook, Encoded, FeatureRecord, Geometry, Split, System,
};
use crate::io::{create, load_axis, load_boundaries, write_lines};
use crate::kilometer::KilometerIndex;
use crate::metrics::{aggregate, sample_metrics, EvalReport, PredictionRecord, SampleMetrics, Units};
use crate::navstats::{
    extract_speed_profile, extract_typical_route, route_context, RouteContext, SpeedProfile, StatsConfig,
    TypicalRoute,
};
use crate::preprocess::{extract_sequences, resample_tracks, SequenceSample, T_OBS};
use crate::synthetic::{gen_river, gen_traffic, write_dataset};

pub const DIRECTIONS: [Direction; 2] = [Direction::Up, Direction::Down];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenSummary {
    pub profiles: usize,
    pub tracks: usize,
    pub records: usize,
    pub seed: u64,
}

/// Generate a synthetic river and its traffic into `out`.
pub fn gen_synthetic(spec: &SyntheticSpec, seed: u64, out: impl AsRef<Path>) -> Result<GenSummary> {
    let river = gen_river(&spec.river)?;
    let tracks = gen_traffic(&river, &spec.traffic, seed)?;
    write_dataset(out, &river, &tracks)?;
    Ok(GenSummary {
        profiles: river.axis.profiles.len(),
        tracks: tracks.len(),
        records: tracks.iter().map(Track::len).sum(),
        seed,
    })
}

/// Kilometerization index and fairway of one waterway.
#[derive(Debug, Clone)]
pub struct Network {
    pub index: KilometerIndex,
    /// Boundaries labeled for upstream travel.
    pub fairway: Fairway,
}

impl Network {
    /// Load axis and boundaries. Boundary kms are official labels; they are
    /// mapped to internal kms. The corridor becomes `lateral_factor` times
    /// the widest fairway.
    pub fn load(axis: impl AsRef<Path>, boundaries: impl AsRef<Path>, lateral_factor: f64) -> Result<Network> {
        let right = load_boundaries(boundaries.as_ref(), Side::Right)?;
        let left = load_boundaries(boundaries.as_ref(), Side::Left)?;
        Network::new(load_axis(axis)?, &right, &left, lateral_factor)
    }

    /// Same as [`Network::load`] for data already in memory.
    pub fn new(axis: WaterwayAxis, right: &BoundarySamples, left: &BoundarySamples, lateral_factor: f64) -> Result<Network> {
        let index = KilometerIndex::build(axis)?;
        let map = index.shift_map().clone();
        let right = right.map_km(|k| map.to_internal(k))?;
        let left = left.map_km(|k| map.to_internal(k))?;
        let fairway = Fairway::fit(&right, &left)?;
        let corridor = lateral_factor * fairway.max_width(200);
        Ok(Network {
            index: index.with_max_lateral(corridor),
            fairway,
        })
    }
}

/// Typical route, speed profile and route context of one direction.
#[derive(Debug, Clone)]
pub struct DirectionStats {
    pub route: TypicalRoute,
    pub speed: SpeedProfile,
    pub context: RouteContext,
}

fn stats_file(dir: &Path, kind: &str, direction: Direction) -> PathBuf {
    dir.join(format!("{kind}_{}.csv", direction.as_str()))
}

impl DirectionStats {
    pub fn extract(net: &Network, tracks: &[Track], direction: Direction, cfg: &PipelineConfig) -> Result<DirectionStats> {
        let own: Vec<Track> = tracks.iter().filter(|t| t.direction == direction).cloned().collect();
        if own.is_empty() {
            return Err(Error::Validation(format!("no {direction} tracks")));
        }
        let route = extract_typical_route(&own, direction, &net.index, &cfg.stats)?;
        let resampled = resample_tracks(&own, cfg.step_s, cfg.gap_limit_s);
        let speed = extract_speed_profile(&resampled, direction, &net.index, &cfg.stats)?;
        let context = route_context(&route, &net.fairway.oriented(direction), &cfg.stats)?;
        Ok(DirectionStats { route, speed, context })
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let d = self.route.direction;
        self.route.write_csv(stats_file(dir, "route", d))?;
        self.speed.write_csv(stats_file(dir, "speed", d))?;
        self.context.write_csv(stats_file(dir, "context", d))
    }

    /// Read route and speed profile; the context is recomputed.
    pub fn load(dir: impl AsRef<Path>, direction: Direction, net: &Network, stats: &StatsConfig) -> Result<DirectionStats> {
        let dir = dir.as_ref();
        let route = TypicalRoute::read_csv(stats_file(dir, "route", direction), direction)?;
        let speed = SpeedProfile::read_csv(stats_file(dir, "speed", direction), direction)?;
        let context = route_context(&route, &net.fairway.oriented(direction), stats)?;
        Ok(DirectionStats { route, speed, context })
    }

    pub fn geometry<'a>(&'a self, net: &'a Network) -> Result<Geometry<'a>> {
        Geometry::new(&net.index, &net.fairway, &self.route, &self.speed, &self.context)
    }
}

/// Statistics of every direction whose files exist in `dir`.
pub fn load_all_stats(dir: impl AsRef<Path>, net: &Network, stats: &StatsConfig) -> Result<BTreeMap<Direction, DirectionStats>> {
    let dir = dir.as_ref();
    let mut out = BTreeMap::new();
    for d in DIRECTIONS {
        if stats_file(dir, "route", d).exists() {
            out.insert(d, DirectionStats::load(dir, d, net, stats)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no route_up.csv or route_down.csv",
            dir.display()
        )));
    }
    Ok(out)
}

/// Combined per-hectometer curve data for plotting: route, speed and context.
pub fn plot_data(stats: &DirectionStats, path: impl AsRef<Path>) -> Result<usize> {
    let rows: Vec<String> = stats
        .context
        .entries
        .iter()
        .filter_map(|c| {
            let q = stats.route.eval(c.km).ok()?;
            let z = stats.speed.eval(c.km).map_or(String::new(), |z| format!("{z:.6}"));
            Some(format!(
                "{:.1},{:.3},{:.3},{},{:.8},{},{:.3},{:.3}",
                c.km,
                q.easting,
                q.northing,
                z,
                c.curvature,
                c.orientation.as_str(),
                c.hecto_euclid,
                c.f_nav
            ))
        })
        .collect();
    let n = rows.len();
    write_lines(
        path.as_ref(),
        "km,route_easting,route_northing,z,curvature,orientation,hecto_euclid,f_nav",
        rows,
    )?;
    Ok(n)
}

/// Split tracks into train and test by whole `(vessel, direction)` track.
pub fn assign_splits(tracks: &[Track], ratio: f64, seed: u64) -> BTreeMap<(String, Direction), Split> {
    let mut keys: Vec<(String, Direction)> = tracks.iter().map(|t| (t.vessel_id.clone(), t.direction)).collect();
    keys.sort();
    keys.dedup();
    keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((keys.len() as f64) * ratio).round() as usize;
    keys.into_iter()
        .enumerate()
        .map(|(i, k)| (k, if i < n_train { Split::Train } else { Split::Test }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub system: System,
    pub tracks: usize,
    pub windows: usize,
    pub train: usize,
    pub test: usize,
    /// Windows that could not be encoded (outside corridor or coverage).
    pub dropped: usize,
    pub saturated_components: usize,
    pub vocab_sizes: [usize; 2],
    /// Mean position error after the horizon from discretization alone.
    pub discretization_error_m: f64,
    /// Largest position error of the continuous round trip.
    pub max_roundtrip_error_m: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub records: Vec<FeatureRecord>,
    pub codebook: Codebook,
    pub summary: FeatureSummary,
}

impl FeatureSet {
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let sys = self.summary.system;
        crate::features::write_jsonl(dir.join(format!("features_{sys}.jsonl")), &self.records)?;
        self.codebook.write_json(dir.join(format!("codebook_{sys}.json")))?;
        let path = dir.join(format!("features_{sys}_summary.json"));
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &self.summary)?;
        use std::io::Write;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))
    }
}

/// Resample, split, window and encode `tracks`, then fit the codebook on the
/// training windows.
pub fn extract_features(
    net: &Network,
    stats: &BTreeMap<Direction, DirectionStats>,
    tracks: &[Track],
    system: System,
    cfg: &PipelineConfig,
) -> Result<FeatureSet> {
    let splits = assign_splits(tracks, cfg.split_ratio, cfg.seed);
    let geos: BTreeMap<Direction, Geometry> = stats
        .iter()
        .map(|(d, s)| Ok((*d, s.geometry(net)?)))
        .collect::<Result<_>>()?;
    let resampled = resample_tracks(tracks, cfg.step_s, cfg.gap_limit_s);
    let windows: Vec<(SequenceSample, Split)> = resampled
        .iter()
        .filter(|rt| geos.contains_key(&rt.direction))
        .flat_map(|rt| {
            let split = splits[&(rt.vessel_id.clone(), rt.direction)];
            extract_sequences(rt, cfg.stride).into_iter().map(move |s| (s, split))
        })
        .collect();
    let encoded: Vec<Option<(Encoded, f64)>> = windows
        .par_iter()
        .map(|(s, _)| {
            let geo = &geos[&s.direction];
            let enc = encode(system, s, geo).ok()?;
            let err = reconstruction_error(s, &enc, None, geo).ok()?;
            Some((enc, err))
        })
        .collect();
    let train_values: Vec<[f64; 2]> = windows
        .iter()
        .zip(&encoded)
        .filter(|((_, split), _)| *split == Split::Train)
        .filter_map(|(_, e)| e.as_ref())
        .flat_map(|(e, _)| e.observed.iter().chain(&e.future).copied())
        .collect();
    let codebook = Codebook::fit(system, cfg.resolution(system), &train_values)?;
    let disc_errors: Vec<Option<f64>> = windows
        .par_iter()
        .zip(&encoded)
        .map(|((s, _), e)| {
            let (enc, _) = e.as_ref()?;
            reconstruction_error(s, enc, Some(&codebook), &geos[&s.direction]).ok()
        })
        .collect();
    let mut saturated = 0;
    let mut records = Vec::new();
    let mut disc = Vec::new();
    let mut max_rt: f64 = 0.0;
    for (((s, split), e), d) in windows.iter().zip(&encoded).zip(&disc_errors) {
        let (Some((enc, rt)), Some(d)) = (e, d) else { continue };
        let context = geos[&s.direction].context_vector(system, enc.anchor.km);
        records.push(FeatureRecord::new(s, *split, enc, &codebook, context, &mut saturated));
        disc.push(*d);
        max_rt = max_rt.max(*rt);
    }
    let train = records.iter().filter(|r| r.split == Split::Train).count();
    let summary = FeatureSummary {
        system,
        tracks: resampled.len(),
        windows: windows.len(),
        train,
        test: records.len() - train,
        dropped: windows.len() - records.len(),
        saturated_components: saturated,
        vocab_sizes: codebook.vocab_sizes(),
        discretization_error_m: if disc.is_empty() { f64::NAN } else { disc.iter().sum::<f64>() / disc.len() as f64 },
        max_roundtrip_error_m: max_rt,
        seed: cfg.seed,
    };
    Ok(FeatureSet {
        records,
        codebook,
        summary,
    })
}

/// Baseline predictions for the test records. Records whose prediction
/// cannot be formed are counted, not fatal.
pub fn baseline_predictions(
    net: &Network,
    stats: &BTreeMap<Direction, DirectionStats>,
    records: &[FeatureRecord],
) -> Result<(Vec<PredictionRecord>, usize)> {
    let geos: BTreeMap<Direction, Geometry> = stats
        .iter()
        .map(|(d, s)| Ok((*d, s.geometry(net)?)))
        .collect::<Result<_>>()?;
    let out: Vec<Option<PredictionRecord>> = records
        .par_iter()
        .filter(|r| r.split == Split::Test)
        .map(|r| {
            let geo = geos.get(&r.direction)?;
            let p = baseline_predict(&r.observed_points(), r.lead_heading, geo).ok()?;
            (!p.decoded.truncated).then(|| p.record(&r.id))
        })
        .collect();
    let failed = out.iter().filter(|p| p.is_none()).count();
    Ok((out.into_iter().flatten().collect(), failed))
}

/// ATE, uncertainty and calibration of `predictions` against the feature
/// records they refer to. Each ensemble is averaged in feature space and the
/// mean sequence is decoded; members are decoded for the uncertainty.
pub fn evaluate(
    net: &Network,
    stats: &BTreeMap<Direction, DirectionStats>,
    records: &[FeatureRecord],
    predictions: &[PredictionRecord],
    codebooks: &[Codebook],
    model: &str,
) -> Result<EvalReport> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::Validation("prediction file is empty".into()))?;
    let system = first.system;
    if let Some(p) = predictions.iter().find(|p| p.system != system) {
        return Err(Error::Validation(format!(
            "prediction {} uses system {} but {} was expected",
            p.id, p.system, system
        )));
    }
    let geos: BTreeMap<Direction, Geometry> = stats
        .iter()
        .map(|(d, s)| Ok((*d, s.geometry(net)?)))
        .collect::<Result<_>>()?;
    let by_id: HashMap<&str, &FeatureRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let codebook = codebooks.iter().find(|c| c.system == system);
    let results: Vec<Option<SampleMetrics>> = predictions
        .par_iter()
        .map(|p| -> Result<Option<SampleMetrics>> {
            let r = by_id
                .get(p.id.as_str())
                .ok_or_else(|| Error::Validation(format!("prediction {} has no feature record", p.id)))?;
            let geo = geos
                .get(&r.direction)
                .ok_or_else(|| Error::Validation(format!("no statistics for direction {}", r.direction)))?;
            let members: Vec<Vec<[f64; 2]>> = match p.units {
                Units::Continuous => p.mc_samples.clone(),
                Units::Classes => {
                    let cb = codebook.ok_or_else(|| {
                        Error::Validation(format!("class predictions need the {system} codebook"))
                    })?;
                    p.mc_samples
                        .iter()
                        .map(|m| {
                            let k: Vec<[i64; 2]> = m.iter().map(|v| [v[0].round() as i64, v[1].round() as i64]).collect();
                            cb.check_classes(&k)?;
                            Ok(cb.undiscretize(&k))
                        })
                        .collect::<Result<_>>()?
                }
            };
            let truth = r.future_points();
            if members.iter().any(|m| m.len() != truth.len()) {
                return Err(Error::Validation(format!("prediction {}: expected {} steps", p.id, truth.len())));
            }
            let anchor = if r.system == system {
                r.anchor
            } else {
                encode_path(system, &r.observed_points(), r.lead_heading, T_OBS, geo)
                    .map_err(|e| Error::Validation(format!("{}: {e}", p.id)))?
                    .1
            };
            let mean = decode(system, &anchor, &aggregate(&members)?, geo)?;
            if mean.truncated {
                return Ok(None);
            }
            let mut decoded = Vec::with_capacity(members.len());
            for m in &members {
                let d = decode(system, &anchor, m, geo)?;
                if d.truncated {
                    return Ok(None);
                }
                decoded.push(d.positions);
            }
            sample_metrics(&p.id, &mean.positions, &decoded, &truth).map(Some)
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    EvalReport::new(model, system, results.into_iter().flatten().collect(), skipped)
}

/// Run `f` on a thread pool of `jobs` workers (all cores when 0).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
