//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use waterway::baseline::baseline_predict;
use waterway::config::PipelineConfig;
use waterway::domain::{Direction, Track};
use waterway::features::{discretization_bound, encode, reconstruction_error, Codebook, Geometry, System};
use waterway::geom::GeoPoint;
use waterway::kilometer::{KilometerIndex, HECTOMETER_KM};
use waterway::metrics::{ate, atu, bin_index, calibration_bins, mean_std, uncertainty, BIN_COUNT, BIN_WIDTH};
use waterway::pipeline::{DirectionStats, Network, DIRECTIONS};
use waterway::preprocess::{extract_sequences, resample_tracks, SequenceSample, HORIZON};
use waterway::synthetic::{gen_river, gen_traffic, Centerline, RiverSpec, SyntheticRiver, TrafficSpec};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sine_river(amplitude: f64, wavelength: f64, length_km: f64) -> SyntheticRiver {
    gen_river(&RiverSpec {
        centerline: Centerline::Sinusoid { amplitude, wavelength },
        length_km,
        ..RiverSpec::default()
    })
    .expect("valid river")
}

fn network(river: &SyntheticRiver) -> Network {
    Network::new(river.axis.clone(), &river.right, &river.left, PipelineConfig::default().lateral_factor).expect("network")
}

fn all_stats(net: &Network, tracks: &[Track]) -> BTreeMap<Direction, DirectionStats> {
    let cfg = PipelineConfig::default();
    DIRECTIONS
        .iter()
        .map(|&d| (d, DirectionStats::extract(net, tracks, d, &cfg).expect("stats")))
        .collect()
}

fn kilometerization_oracle() -> Outcome {
    let start = Instant::now();
    let fixtures = [
        ("straight", RiverSpec::default()),
        (
            "arc R=500",
            RiverSpec {
                centerline: Centerline::Arc { radius: 500.0 },
                length_km: 1.5,
                ..RiverSpec::default()
            },
        ),
        (
            "sinusoid 300/4000",
            RiverSpec {
                centerline: Centerline::Sinusoid { amplitude: 300.0, wavelength: 4000.0 },
                length_km: 8.0,
                ..RiverSpec::default()
            },
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, spec) in fixtures {
        let river = gen_river(&spec).map_err(|e| e.to_string())?;
        let index = KilometerIndex::build(river.axis.clone()).map_err(|e| e.to_string())?;
        let (lo, hi) = river.oracle.coverage();
        let (mut dkm, mut dlat, mut mismatches, mut points) = (0.0f64, 0.0f64, 0, 0);
        for i in 0..100 {
            let km = lo + (hi - lo) * i as f64 / 99.0;
            for j in 0..100 {
                let offset = -140.0 + 280.0 * j as f64 / 99.0;
                let p = river.oracle.point(km, offset);
                let (okm, ooff) = river.oracle.chainage(p);
                let fix = index.kilometrize(p).map_err(|e| format!("{name}: {e}"))?;
                dkm = dkm.max((fix.km - okm).abs());
                dlat = dlat.max((fix.signed_offset() - ooff).abs());
                mismatches += (index.nearest_profile(p) != index.nearest_profile_linear(p)) as usize;
                points += 1;
            }
        }
        let good = dkm <= 1e-4 && dlat <= 0.01 && mismatches == 0;
        ok &= good;
        parts.push(format!("{name}: {points} pts, max |dkm| {dkm:.1e}, max |dlat| {dlat:.1e} m, {mismatches} tree mismatches"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs < 10.0, format!("{}; {secs:.2} s", parts.join("; ")))
}

fn shift_map() -> Outcome {
    let river = gen_river(&RiverSpec {
        gaps: vec![(2.05, 0.1)],
        ..RiverSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let index = KilometerIndex::build(river.axis.clone()).map_err(|e| e.to_string())?;
    let map = index.shift_map();
    let internal = map.internal_labels();
    let spacing_dev = internal
        .windows(2)
        .map(|w| (w[1] - w[0] - HECTOMETER_KM).abs())
        .fold(0.0, f64::max);
    let labels_back = map
        .official_labels()
        .iter()
        .zip(internal)
        .all(|(&o, &i)| map.to_internal(o) == i && map.to_official(i) == o);
    let mut worst = 0.0f64;
    for i in 0..=1000 {
        let o = map.official_labels()[0] + i as f64 * 0.005;
        worst = worst.max((map.to_official(map.to_internal(o)) - o).abs());
    }
    let official = map.official_labels();
    let gaps = map.gaps();
    let jump_ok = gaps.len() == 1 && (gaps[0].1 - 0.2).abs() < 1e-9 && official[official.len() - 1] - official[0] > internal[internal.len() - 1] - internal[0];
    let p = river.oracle.point(103.0, 20.0);
    let fix = index.kilometrize(p).map_err(|e| e.to_string())?;
    let fix_ok = (fix.km - 103.0).abs() < 1e-9 && (fix.official_km - 103.1).abs() < 1e-9;
    check(
        spacing_dev < 1e-12 && labels_back && worst < 1e-12 && jump_ok && fix_ok,
        format!(
            "internal spacing deviation {spacing_dev:.1e}, label round trips exact: {labels_back}, dense round trip max {worst:.1e}, official km past the gap {:.4}",
            fix.official_km
        ),
    )
}

struct CodecFixture {
    net: Network,
    stats: BTreeMap<Direction, DirectionStats>,
    windows: Vec<SequenceSample>,
}

fn codec_fixture() -> CodecFixture {
    let river = sine_river(250.0, 3500.0, 7.0);
    let tracks = gen_traffic(
        &river,
        &TrafficSpec {
            vessels: 60,
            ..TrafficSpec::default()
        },
        5,
    )
    .expect("traffic");
    let net = network(&river);
    let stats = all_stats(&net, &tracks);
    let cfg = PipelineConfig::default();
    let windows = resample_tracks(&tracks, cfg.step_s, cfg.gap_limit_s)
        .iter()
        .flat_map(|rt| extract_sequences(rt, 1))
        .collect();
    CodecFixture { net, stats, windows }
}

fn encode_decode(fx: &CodecFixture) -> Outcome {
    let geos: BTreeMap<Direction, Geometry> = fx
        .stats
        .iter()
        .map(|(d, s)| (*d, s.geometry(&fx.net).expect("geometry")))
        .collect();
    let usable: Vec<&SequenceSample> = fx
        .windows
        .iter()
        .filter(|w| System::ALL.iter().all(|&s| encode(s, w, &geos[&w.direction]).is_ok()))
        .take(1000)
        .collect();
    if usable.len() < 1000 {
        return Err(format!("only {} usable windows", usable.len()));
    }
    let mut parts = Vec::new();
    let mut ok = true;
    let mut disc = BTreeMap::new();
    for system in System::ALL {
        let encoded: Vec<_> = usable.iter().map(|w| encode(system, w, &geos[&w.direction]).expect("encodes")).collect();
        let values: Vec<[f64; 2]> = encoded.iter().flat_map(|e| e.observed.iter().chain(&e.future).copied()).collect();
        let cb = Codebook::fit(system, system.resolution(), &values).map_err(|e| e.to_string())?;
        let (mut max_cont, mut sum_disc, mut sum_bound, mut over) = (0.0f64, 0.0, 0.0, 0);
        for (w, e) in usable.iter().zip(&encoded) {
            let geo = &geos[&w.direction];
            let cont = reconstruction_error(w, e, None, geo).map_err(|e| e.to_string())?;
            let d = reconstruction_error(w, e, Some(&cb), geo).map_err(|e| e.to_string())?;
            let b = discretization_bound(e, &cb, geo).map_err(|e| e.to_string())?;
            max_cont = max_cont.max(cont);
            sum_disc += d;
            sum_bound += b;
            over += (d > b) as usize;
        }
        let n = usable.len() as f64;
        let (mean_disc, mean_bound) = (sum_disc / n, sum_bound / n);
        ok &= max_cont < 1.5 && mean_disc <= mean_bound;
        disc.insert(system, mean_disc);
        parts.push(format!(
            "{system}: max continuous {max_cont:.2e} m, discretized mean {mean_disc:.3} m <= bound {mean_bound:.3} m ({over} samples above their own bound)"
        ));
    }
    let order = disc[&System::Riv] < disc[&System::Glob];
    check(ok && order, format!("{} windows; {}; riv < glob: {order}", usable.len(), parts.join("; ")))
}

fn quantization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    let n = 1_000_000;
    for i in 0..n {
        let system = System::ALL[i % 3];
        let res = system.resolution();
        let c = (i / 3) % 2;
        let span = res[c] * 400.0;
        let v: f64 = rng.gen_range(-span..span);
        let cb = Codebook {
            system,
            resolution: res,
            min_class: [-1000, -1000],
            max_class: [1000, 1000],
        };
        let mut steps = [[0.0, 0.0]];
        steps[0][c] = v;
        let back = cb.undiscretize(&cb.discretize(&steps, &mut 0))[0][c];
        let err = (back - v).abs();
        worst = worst.max(err / res[c]);
        violations += (err > res[c] / 2.0) as usize;
    }
    check(violations == 0, format!("{n} values, {violations} violations, worst error {worst:.6} resolutions"))
}

fn route_speed_recovery() -> Outcome {
    let river = sine_river(250.0, 3500.0, 6.0);
    let delta = 0.03;
    let spec = TrafficSpec {
        vessels: 60,
        offset_mean_m: 10.0,
        offset_std_m: 0.0,
        speed_dev_mean: delta,
        speed_dev_std: 0.0,
        noise_std_m: 0.5,
        ..TrafficSpec::default()
    };
    let tracks = gen_traffic(&river, &spec, 9).map_err(|e| e.to_string())?;
    let net = network(&river);
    let stats = all_stats(&net, &tracks);
    let z_true = spec.base_speed + delta;
    let (lo, hi) = river.oracle.coverage();
    let (mut dq, mut dz) = (0.0f64, 0.0f64);
    for (d, s) in &stats {
        let (rlo, rhi) = s.route.coverage();
        let (slo, shi) = s.speed.coverage();
        let (a, b) = (rlo.max(slo).max(lo + 0.3), rhi.min(shi).min(hi - 0.3));
        let mut km = a;
        while km <= b {
            let q = s.route.eval(km).map_err(|e| e.to_string())?;
            dq = dq.max(q.distance(river.oracle.point(km, d.km_sign() * 10.0)));
            dz = dz.max((s.speed.eval(km).map_err(|e| e.to_string())? - z_true).abs());
            km += 0.01;
        }
    }
    check(
        dq <= 1.0 && dz <= 0.001,
        format!("both directions, 0.5 m position noise, interior sampled every 10 m: max |q - truth| {dq:.3} m, max |z - z0 - delta| {dz:.2e} km/min"),
    )
}

fn baseline_exactness() -> Outcome {
    let unit = ate(&[GeoPoint::new(3.0, 0.0), GeoPoint::new(0.0, 4.0)], &[GeoPoint::new(0.0, 0.0); 2], 2)
        .map_err(|e| e.to_string())?;
    let unit_ok = (unit - 3.5355339059327378).abs() < 1e-9;

    let river = sine_river(250.0, 3500.0, 6.0);
    let typical = TrafficSpec {
        vessels: 40,
        offset_std_m: 0.0,
        speed_dev_std: 0.0,
        noise_std_m: 0.0,
        ..TrafficSpec::default()
    };
    let net = network(&river);
    let stats = all_stats(&net, &gen_traffic(&river, &typical, 1).map_err(|e| e.to_string())?);
    // every test vessel keeps its own speed deviation and offset
    let test = TrafficSpec {
        vessels: 30,
        offset_std_m: 5.0,
        speed_dev_std: 0.015,
        noise_std_m: 0.0,
        ..TrafficSpec::default()
    };
    let tracks = gen_traffic(&river, &test, 77).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    let mut ates = Vec::new();
    for rt in resample_tracks(&tracks, cfg.step_s, cfg.gap_limit_s) {
        let geo = stats[&rt.direction].geometry(&net).map_err(|e| e.to_string())?;
        for w in extract_sequences(&rt, 3) {
            let Ok(p) = baseline_predict(w.observed(), w.lead_heading, &geo) else { continue };
            if p.decoded.truncated {
                continue;
            }
            ates.push(ate(&p.decoded.positions, w.future(), HORIZON).map_err(|e| e.to_string())?);
        }
    }
    let (mean, _) = mean_std(&ates);
    let max = ates.iter().copied().fold(0.0, f64::max);
    check(
        unit_ok && !ates.is_empty() && max < 1.0,
        format!("ATE of (3, 4) = {unit:.9}; {} samples, 10-step ATE mean {mean:.3} m, max {max:.3} m", ates.len()),
    )
}

fn uncertainty_math() -> Outcome {
    let p = GeoPoint::new;
    let same = vec![vec![p(5.0, 5.0)]; 4];
    let one = vec![vec![p(-1.0, 3.0)], vec![p(1.0, 3.0)]];
    let root2 = vec![vec![p(-1.0, -1.0)], vec![p(1.0, 1.0)]];
    let cases = [uncertainty(&same, 0), uncertainty(&one, 0), uncertainty(&root2, 0)];
    let cases_ok = (cases[0] - 0.0).abs() <= 1e-12 && (cases[1] - 1.0).abs() <= 1e-12 && (cases[2] - 2f64.sqrt()).abs() <= 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut pairs = Vec::new();
    let mut atu_mismatch = 0;
    for _ in 0..500 {
        let members = rng.gen_range(2..=30);
        let spread = rng.gen_range(0.1..20.0);
        let mc: Vec<Vec<GeoPoint>> = (0..members)
            .map(|_| (0..HORIZON).map(|t| p(rng.gen_range(-spread..spread) * t as f64, rng.gen_range(-spread..spread))).collect())
            .collect();
        let lib = atu(&mc);
        if (lib - brute_atu(&mc)).abs() > 1e-12 * lib.max(1.0) {
            atu_mismatch += 1;
        }
        pairs.push((rng.gen_range(0.0..100.0) + lib, lib));
    }
    let (normalized, bins) = calibration_bins(&pairs).map_err(|e| e.to_string())?;
    let oracle = brute_bins(&pairs);
    let bins_exact = bins.len() == oracle.len()
        && bins.iter().zip(&oracle).all(|(b, o)| {
            b.count == o.0 && (b.count == 0 || (b.ate_mean == o.1 && b.ate_std == o.2))
        });
    let index_exact = normalized.iter().all(|&(_, u)| {
        let b = bin_index(u);
        let lo = b as f64 * BIN_WIDTH;
        let hi = (b + 1) as f64 * BIN_WIDTH;
        u >= lo && (u < hi || b == BIN_COUNT - 1)
    });
    check(
        cases_ok && atu_mismatch == 0 && bins_exact && index_exact,
        format!(
            "u = {:?}; 500 ensembles, {atu_mismatch} ATU mismatches; bins equal to grouping oracle: {bins_exact}; counts {:?}",
            cases,
            bins.iter().map(|b| b.count).collect::<Vec<_>>()
        ),
    )
}

fn brute_atu(mc: &[Vec<GeoPoint>]) -> f64 {
    let steps = mc[0].len();
    let n = mc.len() as f64;
    let mut total = 0.0;
    for t in 0..steps {
        let me = mc.iter().map(|s| s[t].easting).sum::<f64>() / n;
        let mn = mc.iter().map(|s| s[t].northing).sum::<f64>() / n;
        let var: f64 = mc
            .iter()
            .map(|s| (s[t].easting - me).powi(2) + (s[t].northing - mn).powi(2))
            .sum::<f64>()
            / n;
        total += var;
    }
    (total / steps as f64).sqrt()
}

// (count, mean, population std) of normalized ATE per normalized-ATU interval
fn brute_bins(pairs: &[(f64, f64)]) -> Vec<(usize, f64, f64)> {
    let minmax = |f: fn(&(f64, f64)) -> f64| {
        let v: Vec<f64> = pairs.iter().map(f).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.into_iter().map(|x| (x - lo) / (hi - lo)).collect::<Vec<_>>()
    };
    let e = minmax(|p| p.0);
    let u = minmax(|p| p.1);
    (0..BIN_COUNT)
        .map(|k| {
            let lo = k as f64 * BIN_WIDTH;
            let hi = (k + 1) as f64 * BIN_WIDTH;
            let last = k == BIN_COUNT - 1;
            let members: Vec<f64> = e
                .iter()
                .zip(&u)
                .filter(|(_, &x)| x >= lo && (x < hi || last))
                .map(|(&a, _)| a)
                .collect();
            if members.is_empty() {
                return (0, f64::NAN, f64::NAN);
            }
            let n = members.len() as f64;
            let mean = members.iter().sum::<f64>() / n;
            let var = members.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            (members.len(), mean, var.sqrt())
        })
        .collect()
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_waterway"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("waterway {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn pipeline_run(dir: &Path, spec: &Path) -> Result<(), String> {
    let d = |p: &str| dir.join(p).to_string_lossy().into_owned();
    let spec = spec.to_string_lossy().into_owned();
    let (data, axis, bounds, ais, stats) = (d("data"), d("data/axis.csv"), d("data/boundaries.csv"), d("data/ais.csv"), d("stats"));
    run_cli(&["--seed", "42", "gen-synthetic", "--spec", &spec, "--out", &data])?;
    run_cli(&["extract-stats", "--axis", &axis, "--boundaries", &bounds, "--ais", &ais, "--out", &stats])?;
    for system in ["glob", "riv", "nav"] {
        run_cli(&[
            "--seed", "42", "extract-features", "--axis", &axis, "--boundaries", &bounds, "--ais", &ais, "--stats", &stats,
            "--system", system, "--out", &d("features"),
        ])?;
    }
    let (features, preds) = (d("features/features_nav.jsonl"), d("predictions.jsonl"));
    run_cli(&["baseline-predict", "--axis", &axis, "--boundaries", &bounds, "--stats", &stats, "--features", &features, "--out", &preds])?;
    run_cli(&[
        "evaluate", "--axis", &axis, "--boundaries", &bounds, "--stats", &stats, "--features", &features, "--predictions", &preds,
        "--out", &d("report"),
    ])
}

fn files_under(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).expect("inside").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(suite_start: Instant) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = tmp.path().join("spec.txt");
    std::fs::write(&spec, "centerline = sinusoid\namplitude = 250\nwavelength = 3500\nlength_km = 5\nvessels = 30\ngaps = 2.55:0.1\n")
        .map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    pipeline_run(&a, &spec)?;
    pipeline_run(&b, &spec)?;
    let files = files_under(&a);
    let differing: Vec<String> = files
        .iter()
        .filter(|f| std::fs::read(a.join(f)).ok() != std::fs::read(b.join(f)).ok())
        .map(|f| f.display().to_string())
        .collect();
    let same_set = files == files_under(&b);
    let has_reports = ["report/ate_table.csv", "report/calibration_bins.csv", "features/features_riv.jsonl"]
        .iter()
        .all(|f| files.contains(&Path::new(f).to_path_buf()));
    let secs = suite_start.elapsed().as_secs_f64();
    check(
        differing.is_empty() && same_set && has_reports && secs < 120.0,
        format!("{} files compared, differing {:?}; suite time {secs:.1} s", files.len(), differing),
    )
}

fn main() {
    let start = Instant::now();
    let fx = codec_fixture();
    let criteria: Vec<Criterion> = vec![
        ("kilometerization oracle equivalence", Box::new(kilometerization_oracle)),
        ("shift map", Box::new(shift_map)),
        ("encode/decode inverses", Box::new(|| encode_decode(&fx))),
        ("quantization property", Box::new(quantization)),
        ("typical route/speed recovery", Box::new(route_speed_recovery)),
        ("baseline exactness", Box::new(baseline_exactness)),
        ("uncertainty math", Box::new(uncertainty_math)),
        ("end-to-end determinism", Box::new(move || determinism(start))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
