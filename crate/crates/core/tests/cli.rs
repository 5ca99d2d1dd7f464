use std::path::Path;
use std::process::{Command, Output};

fn waterway(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waterway")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

const SPEC: &str = "centerline = arc\nradius = 1500\nlength_km = 4\nvessels = 16\n";

fn generate(dir: &Path) -> String {
    std::fs::write(dir.join("spec.txt"), SPEC).unwrap();
    let data = dir.join("data");
    let o = waterway(&["gen-synthetic", "--spec", &s(&dir.join("spec.txt")), "--out", &s(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    s(&data)
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(waterway(&[]).status.code(), Some(1));
    assert_eq!(waterway(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(waterway(&["extract-features", "--system", "polar", "--out", "x"]).status.code(), Some(1));
    assert_eq!(waterway(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_required_path_is_a_usage_error() {
    let o = waterway(&["build-index"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--axis"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere/axis.csv");
    let o = waterway(&["build-index", "--axis", &s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&s(&missing)), "{}", stderr(&o));
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "seed = 1\nsplit_ration = 0.5\n").unwrap();
    let o = waterway(&["--config", &s(&cfg), "build-index", "--axis", "a.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("split_ration") && stderr(&o).contains('2'), "{}", stderr(&o));
}

#[test]
fn malformed_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let axis = dir.path().join("axis.csv");
    std::fs::write(&axis, "this,is\nnot,an axis\n").unwrap();
    let o = waterway(&["build-index", "--axis", &s(&axis)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn kilometrize_points_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let axis = format!("{data}/axis.csv");
    let report = dir.path().join("index.json");
    assert!(waterway(&["build-index", "--axis", &axis, "--out-report", &s(&report)]).status.success());
    let stats: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(stats["profile_count"], 41);

    let points = dir.path().join("points.csv");
    // far outside the corridor: reported in the error column, not fatal
    std::fs::write(&points, "id,easting,northing\na,1,1\n").unwrap();
    let out = dir.path().join("fixes.csv");
    let o = waterway(&["kilometrize", "--axis", &axis, "--points", &s(&points), "--out", &s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("id,km,official_km,axis_distance,axis_side,error"), "{text}");
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn config_supplies_paths_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let stats = dir.path().join("stats");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "axis = {data}/axis.csv\nboundaries = {data}/boundaries.csv\nais = {data}/ais.csv\nstats_dir = {}\nseed = 5\n",
            s(&stats)
        ),
    )
    .unwrap();
    let c = s(&cfg);
    assert!(waterway(&["--config", &c, "extract-stats", "--out", &s(&stats)]).status.success());
    let feats = dir.path().join("features");
    let o = waterway(&["--config", &c, "--seed", "9", "extract-features", "--system", "riv", "--out", &s(&feats)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(feats.join("features_riv_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 9);
}

#[test]
fn full_pipeline_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let (axis, bounds, ais) = (format!("{data}/axis.csv"), format!("{data}/boundaries.csv"), format!("{data}/ais.csv"));
    let stats = s(&dir.path().join("stats"));
    let geo = ["--axis", &axis, "--boundaries", &bounds];
    let run = |extra: &[&str]| {
        let o = waterway(extra);
        assert!(o.status.success(), "{:?}: {}", extra, stderr(&o));
    };
    run(&[&["extract-stats"], &geo[..], &["--ais", &ais, "--out", &stats]].concat());
    let plot = s(&dir.path().join("plot"));
    run(&[&["plot-data"], &geo[..], &["--stats", &stats, "--direction", "both", "--out", &plot]].concat());
    let feats = s(&dir.path().join("features"));
    for system in ["glob", "riv", "nav"] {
        run(&[&["extract-features"], &geo[..], &["--ais", &ais, "--stats", &stats, "--system", system, "--out", &feats]].concat());
    }
    let nav = format!("{feats}/features_nav.jsonl");
    let preds = s(&dir.path().join("pred.jsonl"));
    run(&[&["baseline-predict"], &geo[..], &["--stats", &stats, "--features", &nav, "--out", &preds]].concat());
    let report = dir.path().join("report");
    run(&[&["evaluate"], &geo[..], &["--stats", &stats, "--features", &nav, "--predictions", &preds, "--out", &s(&report)]].concat());

    for f in ["ate_table.csv", "uncertainty_per_step.csv", "samples.csv", "calibration_bins.csv", "reference.csv"] {
        assert!(report.join(f).is_file(), "missing {f}");
    }
    for f in ["route_up.csv", "speed_down.csv", "context_up.csv"] {
        assert!(dir.path().join("stats").join(f).is_file(), "missing {f}");
    }
    for sys in ["glob", "riv", "nav"] {
        assert!(Path::new(&format!("{feats}/codebook_{sys}.json")).is_file());
    }
    assert!(Path::new(&format!("{plot}/plot_up.csv")).is_file());
    let table = std::fs::read_to_string(report.join("ate_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 5, "{table}");
}

#[test]
fn features_from_another_system_are_evaluated_in_their_own_units() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path());
    let (axis, bounds, ais) = (format!("{data}/axis.csv"), format!("{data}/boundaries.csv"), format!("{data}/ais.csv"));
    let stats = s(&dir.path().join("stats"));
    let geo = ["--axis", &axis, "--boundaries", &bounds];
    let ok = |args: Vec<&str>| assert!(waterway(&args).status.success());
    ok([&["extract-stats"], &geo[..], &["--ais", &ais, "--out", &stats]].concat());
    let feats = s(&dir.path().join("f"));
    ok([&["extract-features"], &geo[..], &["--ais", &ais, "--stats", &stats, "--system", "riv", "--out", &feats]].concat());
    let riv = format!("{feats}/features_riv.jsonl");
    let preds = s(&dir.path().join("p.jsonl"));
    ok([&["baseline-predict"], &geo[..], &["--stats", &stats, "--features", &riv, "--out", &preds]].concat());
    let o = waterway(
        &[&["evaluate"], &geo[..], &["--stats", &stats, "--features", &riv, "--predictions", &preds, "--out", &s(&dir.path().join("r"))]]
            .concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
}
