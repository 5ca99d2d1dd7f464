//! Flat `key = value` configuration files.
//!
//! ```text
//! # pipeline settings
//! seed = 42
//! split_ratio = 0.87
//! sgf_window = 21
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique and
//! unknown keys are rejected, so typos surface as errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::System;
use crate::geom::GeoPoint;
use crate::navstats::StatsConfig;
use crate::preprocess::{GAP_LIMIT_S, STEP_S};
use crate::savgol::{EdgeMode, SavGolConfig};
use crate::synthetic::{Centerline, RiverSpec, TrafficSpec};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    path: PathBuf,
    entries: BTreeMap<String, (String, u64)>,
}

impl KeyValues {
    pub fn parse(text: &str, path: impl Into<PathBuf>) -> Result<KeyValues> {
        let path = path.into();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.clone(),
                line: line_no,
                message,
            };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            if entries.insert(key.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }
        Ok(KeyValues { path, entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<KeyValues> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KeyValues::parse(&text, path)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Typed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|_| Error::Parse {
                path: self.path.clone(),
                line: *line,
                message: format!("invalid value '{v}' for '{key}'"),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Fail on the first key outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            None => Ok(()),
            Some((k, (_, line))) => Err(Error::Parse {
                path: self.path.clone(),
                line: *line,
                message: format!("unknown key '{k}'"),
            }),
        }
    }
}

/// Pipeline settings. Every field has a config key of the same name.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
    /// Share of tracks assigned to training.
    pub split_ratio: f64,
    pub stride: usize,
    pub step_s: f64,
    pub gap_limit_s: f64,
    /// Kilometerization corridor as a multiple of the widest fairway.
    pub lateral_factor: f64,
    pub stats: StatsConfig,
    pub resolution_glob: [f64; 2],
    pub resolution_riv: [f64; 2],
    pub resolution_nav: [f64; 2],
    pub axis: Option<PathBuf>,
    pub boundaries: Option<PathBuf>,
    pub ais: Option<PathBuf>,
    pub stats_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            jobs: 0,
            split_ratio: 0.87,
            stride: 1,
            step_s: STEP_S,
            gap_limit_s: GAP_LIMIT_S,
            lateral_factor: 2.0,
            stats: StatsConfig::default(),
            resolution_glob: System::Glob.resolution(),
            resolution_riv: System::Riv.resolution(),
            resolution_nav: System::Nav.resolution(),
            axis: None,
            boundaries: None,
            ais: None,
            stats_dir: None,
        }
    }
}

pub const PIPELINE_KEYS: [&str; 20] = [
    "seed",
    "jobs",
    "split_ratio",
    "stride",
    "step_s",
    "gap_limit_s",
    "lateral_factor",
    "sgf_window",
    "sgf_order",
    "sgf_edge",
    "sgf_clamp",
    "max_gap_bins",
    "straight_threshold",
    "resolution_glob",
    "resolution_riv",
    "resolution_nav",
    "axis",
    "boundaries",
    "ais",
    "stats_dir",
];

fn parse_pair(kv: &KeyValues, key: &str, default: [f64; 2]) -> Result<[f64; 2]> {
    let Some(raw) = kv.raw(key) else { return Ok(default) };
    let bad = || Error::InvalidInput(format!("'{key}' expects two positive numbers 'long,lat', got '{raw}'"));
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts[..] {
        [a, b] if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => Ok([a, b]),
        _ => Err(bad()),
    }
}

impl PipelineConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<PipelineConfig> {
        kv.check_keys(&PIPELINE_KEYS)?;
        let d = PipelineConfig::default();
        let edge = match kv.raw("sgf_edge") {
            None => d.stats.sgf.edge,
            Some("fit") => EdgeMode::Fit,
            Some("mirror") => EdgeMode::Mirror,
            Some(other) => return Err(Error::InvalidInput(format!("sgf_edge must be fit or mirror, got '{other}'"))),
        };
        let cfg = PipelineConfig {
            seed: kv.get_or("seed", d.seed)?,
            jobs: kv.get_or("jobs", d.jobs)?,
            split_ratio: kv.get_or("split_ratio", d.split_ratio)?,
            stride: kv.get_or("stride", d.stride)?,
            step_s: kv.get_or("step_s", d.step_s)?,
            gap_limit_s: kv.get_or("gap_limit_s", d.gap_limit_s)?,
            lateral_factor: kv.get_or("lateral_factor", d.lateral_factor)?,
            stats: StatsConfig {
                sgf: SavGolConfig {
                    window: kv.get_or("sgf_window", d.stats.sgf.window)?,
                    order: kv.get_or("sgf_order", d.stats.sgf.order)?,
                    edge,
                    clamp_to_window: kv.get_or("sgf_clamp", d.stats.sgf.clamp_to_window)?,
                },
                max_gap_bins: kv.get_or("max_gap_bins", d.stats.max_gap_bins)?,
                straight_threshold: kv.get_or("straight_threshold", d.stats.straight_threshold)?,
            },
            resolution_glob: parse_pair(kv, "resolution_glob", d.resolution_glob)?,
            resolution_riv: parse_pair(kv, "resolution_riv", d.resolution_riv)?,
            resolution_nav: parse_pair(kv, "resolution_nav", d.resolution_nav)?,
            axis: kv.get("axis")?,
            boundaries: kv.get("boundaries")?,
            ais: kv.get("ais")?,
            stats_dir: kv.get("stats_dir")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        PipelineConfig::from_key_values(&KeyValues::load(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidInput(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio)));
        }
        if self.stride == 0 || !(self.step_s > 0.0) || !(self.gap_limit_s >= self.step_s) {
            return Err(Error::InvalidInput(
                "stride and step_s must be positive and gap_limit_s >= step_s".into(),
            ));
        }
        if !(self.lateral_factor > 0.0) {
            return Err(Error::InvalidInput("lateral_factor must be positive".into()));
        }
        self.stats.sgf.validate()
    }

    pub fn resolution(&self, system: System) -> [f64; 2] {
        match system {
            System::Glob => self.resolution_glob,
            System::Riv => self.resolution_riv,
            System::Nav => self.resolution_nav,
        }
    }
}

/// A synthetic dataset description: river, traffic and an optional seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub river: RiverSpec,
    pub traffic: TrafficSpec,
    pub seed: Option<u64>,
}

pub const SYNTHETIC_KEYS: [&str; 29] = [
    "seed",
    "waterway_id",
    "centerline",
    "radius",
    "amplitude",
    "wavelength",
    "length_km",
    "width_m",
    "profile_spacing_m",
    "corridor_m",
    "boundary_spacing_m",
    "gaps",
    "start_km",
    "origin_easting",
    "origin_northing",
    "bearing_deg",
    "vessels",
    "up_share",
    "offset_mean_m",
    "offset_std_m",
    "base_speed",
    "speed_dev_mean",
    "speed_dev_std",
    "report_interval_s",
    "jitter_s",
    "noise_std_m",
    "start_time",
    "departure_spacing_s",
    "margin_km",
];

impl SyntheticSpec {
    /// `centerline` is `straight`, `arc` (with `radius`) or `sinusoid` (with
    /// `amplitude` and `wavelength`); `gaps` lists `along_km:extra` pairs
    /// separated by `;`.
    pub fn from_key_values(kv: &KeyValues) -> Result<SyntheticSpec> {
        kv.check_keys(&SYNTHETIC_KEYS)?;
        let r = RiverSpec::default();
        let t = TrafficSpec::default();
        let need = |key: &str| -> Result<f64> {
            kv.get(key)?
                .ok_or_else(|| Error::InvalidInput(format!("centerline needs '{key}'")))
        };
        let centerline = match kv.raw("centerline").unwrap_or("straight") {
            "straight" => Centerline::Straight,
            "arc" => Centerline::Arc { radius: need("radius")? },
            "sinusoid" | "sine" => Centerline::Sinusoid {
                amplitude: need("amplitude")?,
                wavelength: need("wavelength")?,
            },
            other => return Err(Error::InvalidInput(format!("unknown centerline '{other}'"))),
        };
        let gaps = match kv.raw("gaps") {
            None | Some("") => Vec::new(),
            Some(raw) => raw
                .split(';')
                .map(|g| {
                    let bad = || Error::InvalidInput(format!("gap '{g}' is not 'along_km:extra'"));
                    let (a, b) = g.split_once(':').ok_or_else(bad)?;
                    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let river = RiverSpec {
            waterway_id: kv.get_or("waterway_id", r.waterway_id)?,
            centerline,
            length_km: kv.get_or("length_km", r.length_km)?,
            width_m: kv.get_or("width_m", r.width_m)?,
            profile_spacing_m: kv.get_or("profile_spacing_m", r.profile_spacing_m)?,
            corridor_m: kv.get_or("corridor_m", r.corridor_m)?,
            boundary_spacing_m: kv.get_or("boundary_spacing_m", r.boundary_spacing_m)?,
            gaps,
            start_km: kv.get_or("start_km", r.start_km)?,
            origin: GeoPoint::new(
                kv.get_or("origin_easting", r.origin.easting)?,
                kv.get_or("origin_northing", r.origin.northing)?,
            ),
            bearing_deg: kv.get_or("bearing_deg", r.bearing_deg)?,
        };
        let traffic = TrafficSpec {
            vessels: kv.get_or("vessels", t.vessels)?,
            up_share: kv.get_or("up_share", t.up_share)?,
            offset_mean_m: kv.get_or("offset_mean_m", t.offset_mean_m)?,
            offset_std_m: kv.get_or("offset_std_m", t.offset_std_m)?,
            base_speed: kv.get_or("base_speed", t.base_speed)?,
            speed_dev_mean: kv.get_or("speed_dev_mean", t.speed_dev_mean)?,
            speed_dev_std: kv.get_or("speed_dev_std", t.speed_dev_std)?,
            report_interval_s: kv.get_or("report_interval_s", t.report_interval_s)?,
            jitter_s: kv.get_or("jitter_s", t.jitter_s)?,
            noise_std_m: kv.get_or("noise_std_m", t.noise_std_m)?,
            start_time: kv.get_or("start_time", t.start_time)?,
            departure_spacing_s: kv.get_or("departure_spacing_s", t.departure_spacing_s)?,
            margin_km: kv.get_or("margin_km", t.margin_km)?,
        };
        river.validate()?;
        traffic.validate()?;
        Ok(SyntheticSpec {
            river,
            traffic,
            seed: kv.get("seed")?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SyntheticSpec> {
        SyntheticSpec::from_key_values(&KeyValues::load(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_types() {
        let kv = KeyValues::parse("# c\n\nseed = 7\nsplit_ratio=0.8\n", "cfg").unwrap();
        let cfg = PipelineConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.split_ratio, 0.8);
        assert_eq!(cfg.stride, 1);
    }

    #[test]
    fn rejects_bad_lines() {
        for (text, line) in [("seed 4", 1), ("a = 1\na = 2", 2), ("\nbogus = 1", 2), ("seed = x", 1)] {
            let err = KeyValues::parse(text, "cfg").and_then(|kv| PipelineConfig::from_key_values(&kv));
            match err {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        let kv = KeyValues::parse("split_ratio = 1.5", "cfg").unwrap();
        assert!(PipelineConfig::from_key_values(&kv).is_err());
        let kv = KeyValues::parse("resolution_nav = 0.001", "cfg").unwrap();
        assert!(PipelineConfig::from_key_values(&kv).is_err());
    }

    #[test]
    fn resolution_override() {
        let kv = KeyValues::parse("resolution_riv = 0.002, 0.01\nsgf_edge = mirror", "cfg").unwrap();
        let cfg = PipelineConfig::from_key_values(&kv).unwrap();
        assert_eq!(cfg.resolution(System::Riv), [0.002, 0.01]);
        assert_eq!(cfg.resolution(System::Nav), [0.001, 1.0]);
        assert_eq!(cfg.stats.sgf.edge, EdgeMode::Mirror);
    }

    #[test]
    fn synthetic_spec() {
        let text = "centerline = arc\nradius = 800\nlength_km = 3\ngaps = 1.5:0.1; 2.5:0.2\nvessels = 12\nseed = 9\n";
        let spec = SyntheticSpec::from_key_values(&KeyValues::parse(text, "spec").unwrap()).unwrap();
        assert_eq!(spec.river.centerline, Centerline::Arc { radius: 800.0 });
        assert_eq!(spec.river.gaps, vec![(1.5, 0.1), (2.5, 0.2)]);
        assert_eq!(spec.traffic.vessels, 12);
        assert_eq!(spec.seed, Some(9));
        let missing = KeyValues::parse("centerline = sinusoid\namplitude = 50", "spec").unwrap();
        assert!(SyntheticSpec::from_key_values(&missing).is_err());
    }
}
