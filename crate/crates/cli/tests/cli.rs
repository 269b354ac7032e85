use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn liquid(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liquid"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = liquid(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn header_index(path: &Path, name: &str) -> usize {
    let mut rd = csv::Reader::from_path(path).unwrap();
    rd.headers().unwrap().iter().position(|h| h == name).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let i = header_index(path, name);
    read_csv(path).iter().map(|r| r[i].to_string()).collect()
}

fn scene_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("scene-"))
        .collect();
    names.sort();
    names
}

/// Fast unfiltered scenes for tests that only need inputs.
fn quick_scenes(dir: &Path, count: usize) {
    ok(
        &[
            "scene-gen",
            "--count",
            &count.to_string(),
            "--seed",
            "1",
            "--filter",
            "off",
            "--out",
            "s",
        ],
        dir,
    );
}

#[test]
fn scene_gen_writes_the_requested_count_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        &[
            "scene-gen",
            "--style",
            "voronoi",
            "--count",
            "10",
            "--seed",
            "3",
            "--out",
            "a",
        ],
        d,
    );
    ok(
        &[
            "--jobs",
            "1",
            "scene-gen",
            "--style",
            "voronoi",
            "--count",
            "10",
            "--seed",
            "3",
            "--out",
            "b",
        ],
        d,
    );
    let a = scene_files(&d.join("a"));
    assert_eq!(a.len(), 10);
    assert_eq!(a, scene_files(&d.join("b")));
    for name in a.iter().chain(["index.json".to_string()].iter()) {
        assert_eq!(
            fs::read(d.join("a").join(name)).unwrap(),
            fs::read(d.join("b").join(name)).unwrap(),
            "{name} differs"
        );
    }
    ok(&["verify-manifest", "a"], d);
}

#[test]
fn shape_scenes_generate() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        &["scene-gen", "--style", "shapes", "--count", "2", "--out", "s"],
        tmp.path(),
    );
    assert_eq!(scene_files(&tmp.path().join("s")).len(), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for args in [
        &["scene-gen", "--style", "hexagons"][..],
        &["scene-gen", "--count", "0"],
        &["scene-gen", "--k", "3"],
        &["predict", "--scenes", "missing-dir", "--preset", "water-ife"],
        &["frobnicate"],
    ] {
        assert_eq!(liquid(args, d).status.code(), Some(2), "{args:?}");
    }
    quick_scenes(d, 1);
    for args in [
        &["predict", "--scenes", "s", "--preset", "no-such-preset"][..],
        &["predict", "--scenes", "s", "--model", "ife", "--g", "0.3"],
        &["predict", "--scenes", "s", "--zeta", "3"],
        &["predict", "--scenes", "s"],
    ] {
        let out = liquid(args, d);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn predict_one_scene_with_a_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["scene-gen", "--count", "1", "--seed", "5", "--out", "s"], d);
    ok(&["predict", "--scenes", "s", "--preset", "water-ife", "--out", "p"], d);
    let js = column(&d.join("p/results.csv"), "j");
    assert_eq!(js.len(), 1);
    let j: f64 = js[0].parse().unwrap();
    assert!((0.0..=1.0).contains(&j));
    ok(&["verify-manifest", "p"], d);
}

#[test]
fn ground_truth_preset_expands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ok(&["presets", "ground-truth-water"], tmp.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["model"], "ife");
    assert_eq!(v["n_particles"], 200);
    assert_eq!(v["alpha"], 0.01);
    assert_eq!(v["zeta"], 0.0);
    assert_eq!(v["sigma"], 0.0);
    assert!(v["sticky"].is_null());
}

#[test]
fn gravity_rows_equal_simplesim_without_noise_or_carry() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 6);
    ok(&["predict", "--scenes", "s", "--model", "gravity", "--out", "g"], d);
    ok(
        &[
            "predict",
            "--scenes",
            "s",
            "--model",
            "simplesim",
            "--g",
            "0",
            "--carry",
            "0",
            "--out",
            "m",
        ],
        d,
    );
    for col in ["scene_id", "j", "n_stuck"] {
        assert_eq!(
            column(&d.join("g/results.csv"), col),
            column(&d.join("m/results.csv"), col)
        );
    }
}

#[test]
fn failed_cells_are_flagged_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 2);
    fs::write(d.join("tight.json"), r#"{"model":"simplesim","max_segments":1}"#).unwrap();
    let out = liquid(&["predict", "--scenes", "s", "--spec", "tight.json", "--out", "p"], d);
    assert_eq!(out.status.code(), Some(1));
    let errors = column(&d.join("p/results.csv"), "error");
    assert_eq!(errors.len(), 2);
    assert!(errors.iter().all(|e| e.contains("segments")));
}

#[test]
fn json_format_and_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 3);
    ok(
        &[
            "predict",
            "--scenes",
            "s",
            "--preset",
            "water-simplesim",
            "--uncertain",
            "--format",
            "json",
            "--out",
            "p",
        ],
        d,
    );
    let first = fs::read(d.join("p/results.json")).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&first).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["sigma"], 0.04);
    ok(
        &[
            "predict",
            "--scenes",
            "s",
            "--preset",
            "water-simplesim",
            "--uncertain",
            "--format",
            "json",
            "--out",
            "p",
        ],
        d,
    );
    assert_eq!(first, fs::read(d.join("p/results.json")).unwrap());
}

#[test]
fn simplesim_sweep_has_121_settings_per_scene() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 2);
    ok(
        &["sweep", "--scenes", "s", "--base", "water-simplesim", "--out", "w"],
        d,
    );
    let rows = read_csv(&d.join("w/results.csv"));
    assert_eq!(rows.len(), 2 * 121);
    let g = header_index(&d.join("w/results.csv"), "g");
    let c = header_index(&d.join("w/results.csv"), "carry");
    let settings: std::collections::BTreeSet<(String, String)> =
        rows.iter().map(|r| (r[g].to_string(), r[c].to_string())).collect();
    assert_eq!(settings.len(), 121);
}

#[test]
fn simulate_writes_paths_and_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 1);
    let scene = format!("s/{}", scene_files(&d.join("s"))[0]);
    ok(&["simulate", "--scene", &scene, "--spec", "gravity", "--out", "g"], d);
    assert_eq!(
        fs::read_to_string(d.join("g/paths.csv")).unwrap().lines().next(),
        Some("path,seq,x,y,against_gravity")
    );
    fs::write(
        d.join("short.json"),
        r#"{"model":"ife","n_particles":10,"alpha":0.01,"zeta":5,"duration":0.1}"#,
    )
    .unwrap();
    ok(
        &["simulate", "--scene", &scene, "--spec", "short.json", "--out", "t"],
        d,
    );
    let times = column(&d.join("t/trajectory.csv"), "time");
    // Initial state plus five samples at 0.02 s spacing, ten particles each.
    assert_eq!(times.len(), 60);
}

fn write_responses(path: &Path, scenes: &[String], js: &[f64]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["subject_id", "scene_id", "condition", "response"])
        .unwrap();
    for s in 0..6 {
        for (k, (scene, j)) in scenes.iter().zip(js).enumerate() {
            let wobble = ((s * 7 + k * 3) % 5) as f64 * 0.02;
            let r = (j * 0.8 + 0.1 + wobble).clamp(0.0, 1.0);
            w.write_record([format!("p{s}"), scene.clone(), "water".into(), format!("{r}")])
                .unwrap();
        }
    }
    w.flush().unwrap();
}

#[test]
fn analyze_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        &[
            "scene-gen",
            "--count",
            "12",
            "--seed",
            "1",
            "--filter",
            "off",
            "--out",
            "s",
        ],
        d,
    );
    ok(
        &[
            "predict",
            "--scenes",
            "s",
            "--model",
            "simplesim",
            "--g",
            "0",
            "--carry",
            "0.1",
            "--preset",
            "gravity",
            "--out",
            "p",
        ],
        d,
    );
    ok(
        &[
            "analyze",
            "--results",
            "p/results.csv",
            "--results",
            "p/results.csv",
            "--resamples",
            "500",
            "--out",
            "self",
        ],
        d,
    );
    let rows = read_csv(&d.join("self/correlations.csv"));
    // Two models from each of two files: all six pairs.
    assert_eq!(rows.len(), 6);
    let (l, r, rr) = (0, 1, 4);
    let same: Vec<&csv::StringRecord> = rows
        .iter()
        .filter(|x| x[l].split_once(':').unwrap().1 == x[r].split_once(':').unwrap().1)
        .collect();
    assert_eq!(same.len(), 2);
    for x in same {
        assert_eq!(x[rr].parse::<f64>().unwrap(), 1.0);
    }

    let results = d.join("p/results.csv");
    let ids = column(&results, "scene_id");
    let models = column(&results, "model_id");
    let js = column(&results, "j");
    let (scenes, sim_js): (Vec<String>, Vec<f64>) = ids
        .iter()
        .zip(&models)
        .zip(&js)
        .filter(|((_, m), _)| *m == "simplesim")
        .map(|((i, _), j)| (i.clone(), j.parse::<f64>().unwrap()))
        .unzip();
    write_responses(&d.join("responses.csv"), &scenes, &sim_js);
    let reference = "simplesim[n=100,sigma=0,g=0,carry=0.1]";
    ok(
        &[
            "analyze",
            "--results",
            "p/results.csv",
            "--responses",
            "responses.csv",
            "--reference",
            reference,
            "--resamples",
            "500",
            "--split-iters",
            "50",
            "--null-sets",
            "5",
            "--out",
            "a",
        ],
        d,
    );
    let mut rd = csv::Reader::from_path(d.join("a/model_table.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["model".to_string(), "data:water".into(), format!("ref:{reference}")]
    );
    assert_eq!(rd.records().count(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["conditions"][0]["n_subjects"], 6);
    assert!(summary["conditions"][0]["split_half"]["mean_r"].as_f64().unwrap() > 0.9);
    let kinds = column(&d.join("a/individuals.csv"), "kind");
    assert_eq!(kinds.iter().filter(|k| *k == "subject").count(), 6);
    assert_eq!(kinds.iter().filter(|k| *k == "null").count(), 30);
    assert!(d.join("a/scatter.csv").exists());
    ok(&["verify-manifest", "a"], d);
}

#[test]
fn analyze_rejects_mismatched_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("bad.csv"), "scene,value\na,1\n").unwrap();
    let out = liquid(&["analyze", "--results", "bad.csv", "--out", "a"], d);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lacks a `scene_id` column"));
}

#[test]
fn pipeline_is_byte_identical_across_runs_and_widths() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for (run, jobs) in [("one", "1"), ("two", "2")] {
        ok(
            &[
                "--jobs",
                jobs,
                "scene-gen",
                "--count",
                "8",
                "--seed",
                "11",
                "--filter",
                "off",
                "--out",
                &format!("{run}/s"),
            ],
            d,
        );
        ok(
            &[
                "--jobs",
                jobs,
                "predict",
                "--scenes",
                &format!("{run}/s"),
                "--preset",
                "water-simplesim",
                "--uncertain",
                "--preset",
                "gravity",
                "--out",
                &format!("{run}/p"),
            ],
            d,
        );
        ok(
            &[
                "--jobs",
                jobs,
                "analyze",
                "--results",
                &format!("{run}/p/results.csv"),
                "--resamples",
                "300",
                "--seed",
                "4",
                "--out",
                &format!("{run}/a"),
            ],
            d,
        );
    }
    for f in ["p/results.csv", "a/correlations.csv", "a/scatter.csv", "a/summary.json"] {
        assert_eq!(
            fs::read(d.join("one").join(f)).unwrap(),
            fs::read(d.join("two").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn verify_manifest_detects_edits() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    quick_scenes(d, 2);
    let first = scene_files(&d.join("s"))[0].clone();
    fs::write(d.join("s").join(first), "{}").unwrap();
    assert_eq!(liquid(&["verify-manifest", "s"], d).status.code(), Some(1));
}
