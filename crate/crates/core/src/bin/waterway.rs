use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use waterway::config::{PipelineConfig, SyntheticSpec};
use waterway::domain::Direction;
use waterway::error::{Error, Result};
use waterway::features::{read_jsonl, write_jsonl, Codebook, FeatureRecord, System};
use waterway::io::{load_ais, load_axis, load_points, write_km_fixes};
use waterway::kilometer::KilometerIndex;
use waterway::metrics::PredictionRecord;
use waterway::pipeline::{
    baseline_predictions, evaluate, extract_features, gen_synthetic, load_all_stats, plot_data, with_jobs,
    DirectionStats, Network, DIRECTIONS,
};

#[derive(Parser)]
#[command(name = "waterway", version, about = "Waterway-referenced trajectory features and evaluation")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Up,
    Down,
    Both,
}

impl DirArg {
    fn directions(self) -> Vec<Direction> {
        match self {
            DirArg::Up => vec![Direction::Up],
            DirArg::Down => vec![Direction::Down],
            DirArg::Both => DIRECTIONS.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Glob,
    Riv,
    Nav,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> System {
        match s {
            SystemArg::Glob => System::Glob,
            SystemArg::Riv => System::Riv,
            SystemArg::Nav => System::Nav,
        }
    }
}

#[derive(clap::Args)]
struct Geo {
    /// Profile CSV.
    #[arg(long)]
    axis: Option<PathBuf>,
    /// Fairway boundary CSV.
    #[arg(long)]
    boundaries: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic river with traffic.
    GenSynthetic {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report profile count, km ranges and label gaps of an axis.
    BuildIndex {
        #[arg(long)]
        axis: Option<PathBuf>,
        /// JSON report path; printed to stdout when absent.
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Kilometerize a point list.
    Kilometrize {
        #[arg(long)]
        axis: Option<PathBuf>,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Typical route, speed profile and route context per direction.
    ExtractStats {
        #[command(flatten)]
        geo: Geo,
        #[arg(long)]
        ais: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "both")]
        direction: DirArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Curve data of the statistics for plotting.
    PlotData {
        #[command(flatten)]
        geo: Geo,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "up")]
        direction: DirArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Feature file and codebook of one reference system.
    ExtractFeatures {
        #[command(flatten)]
        geo: Geo,
        #[arg(long)]
        ais: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum)]
        system: SystemArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Statistical baseline for the test records of a feature file.
    BaselinePredict {
        #[command(flatten)]
        geo: Geo,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// ATE, uncertainty and calibration report.
    Evaluate {
        #[command(flatten)]
        geo: Geo,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Codebook for class predictions [default: codebook_<system>.json next to the features].
        #[arg(long)]
        codebook: Option<PathBuf>,
        #[arg(long, default_value = "baseline")]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn required(flag: Option<PathBuf>, from_config: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| from_config.clone())
        .ok_or_else(|| Error::InvalidInput(format!("--{name} is required (or set '{name}' in the config)")))
}

fn network(geo: Geo, cfg: &PipelineConfig) -> Result<Network> {
    let axis = required(geo.axis, &cfg.axis, "axis")?;
    let boundaries = required(geo.boundaries, &cfg.boundaries, "boundaries")?;
    Network::load(axis, boundaries, cfg.lateral_factor)
}

fn stats_dir(flag: Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf> {
    required(flag, &cfg.stats_dir, "stats_dir")
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    let seed_flag = cli.seed;
    if let Some(s) = seed_flag {
        cfg.seed = s;
    }
    let jobs = cfg.jobs;
    with_jobs(jobs, move || dispatch(cli.command, cfg, seed_flag))?
}

fn dispatch(command: Command, cfg: PipelineConfig, seed_flag: Option<u64>) -> Result<()> {
    match command {
        Command::GenSynthetic { spec, out } => {
            let spec = SyntheticSpec::load(&spec)?;
            let seed = seed_flag.or(spec.seed).unwrap_or(cfg.seed);
            let s = gen_synthetic(&spec, seed, &out)?;
            println!(
                "wrote {}: {} profiles, {} tracks, {} records (seed {})",
                out.display(),
                s.profiles,
                s.tracks,
                s.records,
                s.seed
            );
        }
        Command::BuildIndex { axis, out_report } => {
            let index = KilometerIndex::build(load_axis(required(axis, &cfg.axis, "axis")?)?)?;
            let report = serde_json::to_string_pretty(&index.stats())?;
            match out_report {
                Some(p) => write_text(&p, &report)?,
                None => println!("{report}"),
            }
        }
        Command::Kilometrize { axis, points, out } => {
            let index = KilometerIndex::build(load_axis(required(axis, &cfg.axis, "axis")?)?)?;
            let pts = load_points(&points)?;
            let rows: Vec<_> = pts.into_iter().map(|(id, p)| (id, index.kilometrize(p))).collect();
            let failed = rows.iter().filter(|r| r.1.is_err()).count();
            write_km_fixes(&out, &rows)?;
            println!("wrote {}: {} points, {} outside the corridor", out.display(), rows.len(), failed);
        }
        Command::ExtractStats { geo, ais, direction, out } => {
            let net = network(geo, &cfg)?;
            let data = load_ais(required(ais, &cfg.ais, "ais")?)?;
            for d in direction.directions() {
                let s = DirectionStats::extract(&net, &data.tracks, d, &cfg)?;
                s.write(&out)?;
                let (lo, hi) = s.route.coverage();
                println!("{d}: route km {lo:.2}..{hi:.2}, {} holes", s.route.holes().len());
            }
        }
        Command::PlotData { geo, stats, direction, out } => {
            let net = network(geo, &cfg)?;
            let dir = stats_dir(stats, &cfg)?;
            for d in direction.directions() {
                let s = DirectionStats::load(&dir, d, &net, &cfg.stats)?;
                let path = if matches!(direction, DirArg::Both) {
                    out.join(format!("plot_{d}.csv"))
                } else {
                    out.clone()
                };
                let n = plot_data(&s, &path)?;
                println!("wrote {}: {n} rows", path.display());
            }
        }
        Command::ExtractFeatures { geo, ais, stats, system, out } => {
            let net = network(geo, &cfg)?;
            let stats = load_all_stats(stats_dir(stats, &cfg)?, &net, &cfg.stats)?;
            let data = load_ais(required(ais, &cfg.ais, "ais")?)?;
            let fs = extract_features(&net, &stats, &data.tracks, system.into(), &cfg)?;
            fs.write(&out)?;
            let s = &fs.summary;
            println!(
                "{}: {} train, {} test, {} dropped, {} saturated, discretization error {:.3} m",
                s.system, s.train, s.test, s.dropped, s.saturated_components, s.discretization_error_m
            );
        }
        Command::BaselinePredict { geo, stats, features, out } => {
            let net = network(geo, &cfg)?;
            let stats = load_all_stats(stats_dir(stats, &cfg)?, &net, &cfg.stats)?;
            let records: Vec<FeatureRecord> = read_jsonl(&features)?;
            let (preds, failed) = baseline_predictions(&net, &stats, &records)?;
            write_jsonl(&out, &preds)?;
            println!("wrote {}: {} predictions, {} not predictable", out.display(), preds.len(), failed);
        }
        Command::Evaluate {
            geo,
            stats,
            predictions,
            features,
            codebook,
            model,
            out,
        } => {
            let net = network(geo, &cfg)?;
            let stats = load_all_stats(stats_dir(stats, &cfg)?, &net, &cfg.stats)?;
            let records: Vec<FeatureRecord> = read_jsonl(&features)?;
            let preds: Vec<PredictionRecord> = read_jsonl(&predictions)?;
            let codebooks = load_codebooks(codebook, &features, &preds)?;
            let report = evaluate(&net, &stats, &records, &preds, &codebooks, &model)?;
            report.write(&out)?;
            let r10 = &report.ate[report.ate.len() - 1];
            println!(
                "{model} ({}): {} samples, ATE10 {:.2} ± {:.2} m, {} skipped",
                report.system,
                report.samples.len(),
                r10.mean,
                r10.std,
                report.skipped
            );
            if let Some(note) = &report.calibration_note {
                println!("calibration not computed: {note}");
            }
        }
    }
    Ok(())
}

fn load_codebooks(flag: Option<PathBuf>, features: &Path, preds: &[PredictionRecord]) -> Result<Vec<Codebook>> {
    if let Some(p) = flag {
        return Ok(vec![Codebook::read_json(p)?]);
    }
    let Some(system) = preds.first().map(|p| p.system) else { return Ok(Vec::new()) };
    let path = features
        .parent()
        .unwrap_or(Path::new("."))
        .join(format!("codebook_{system}.json"));
    if path.exists() {
        Ok(vec![Codebook::read_json(path)?])
    } else {
        Ok(Vec::new())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    }
    std::fs::write(path, format!("{text}\n")).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
