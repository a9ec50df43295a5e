use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fastumap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

/// Three separated 3-D clusters with a label column.
fn small_csv(dir: &Path) -> PathBuf {
    let path = dir.join("small.csv");
    let mut text = String::from("a,b,c,label\n");
    for i in 0..90 {
        let c = i % 3;
        let t = i as f64 * 0.37;
        text.push_str(&format!(
            "{},{},{},{}\n",
            10.0 * c as f64 + t.sin(),
            (1.7 * t).cos(),
            (0.3 * t).sin() - 5.0 * c as f64,
            ["x", "y", "z"][c]
        ));
    }
    std::fs::write(&path, text).unwrap();
    path
}

/// TOML has no null; absent keys mean the same thing.
fn strip_nulls(v: &mut serde_json::Value) {
    if let serde_json::Value::Object(map) = v {
        map.retain(|_, x| !x.is_null());
        map.values_mut().for_each(strip_nulls);
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn conflicting_landmark_flags_exit_2() {
    let o = run(&["embed", "--input", "x.csv", "--landmarks", "10", "--landmark-ratio", "0.5"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_input_is_config_error_and_unreadable_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["embed", "-o", s(dir.path())])), 2);
    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&run(&["embed", "-i", s(&missing), "-o", s(dir.path())])), 1);
}

#[test]
fn embed_writes_coordinates_and_meta_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let o = run(&["embed", "-i", s(&input), "--label-col", "label", "--epochs", "50", "--seed", "9", "-o", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(out_a.join("coordinates.csv")).unwrap();
    assert_eq!(a, std::fs::read(out_b.join("coordinates.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next(), Some("index,x,y"));
    assert_eq!(text.lines().count(), 91);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["config"]["pipeline"]["seed"], 9);
    assert_eq!(meta["config"]["pipeline"]["optimizer"]["epochs"], 50);
    assert_eq!(meta["landmarks"], 45);
    assert!(meta["timings"]["total_s"].as_f64().unwrap() >= 0.0);
    assert!(meta["version"].is_string());
}

#[test]
fn meta_config_replays_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let first = dir.path().join("first");
    let o = run(&["embed", "-i", s(&input), "--label-col", "label", "--epochs", "30", "--init", "random", "-o", s(&first)]);
    assert_eq!(code(&o), 0);
    // turn the recorded config into a config file and run from it alone
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.join("meta.json")).unwrap()).unwrap();
    let mut config = meta["config"].clone();
    let second = dir.path().join("second");
    config["output_dir"] = serde_json::Value::String(s(&second).into());
    strip_nulls(&mut config);
    let cfg: toml::Value = serde_json::from_value(config).unwrap();
    let cfg_path = dir.path().join("replay.toml");
    std::fs::write(&cfg_path, toml::to_string(&cfg).unwrap()).unwrap();
    let o = run(&["embed", "--config", s(&cfg_path)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(first.join("coordinates.csv")).unwrap(),
        std::fs::read(second.join("coordinates.csv")).unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "output_dir = \"{}\"\n[dataset]\npath = \"{}\"\nlabel_col = \"label\"\n[pipeline]\nseed = 3\n[pipeline.optimizer]\nepochs = 20\n",
            s(&dir.path().join("from-file")),
            s(&input)
        ),
    )
    .unwrap();
    let out = dir.path().join("from-flag");
    let o = run(&["embed", "--config", s(&cfg), "--seed", "5", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert_eq!(meta["config"]["pipeline"]["optimizer"]["epochs"], 20);
    assert!(!dir.path().join("from-file").exists());

    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(code(&run(&["embed", "--config", s(&cfg)])), 2);
}

#[test]
fn embed_wine_with_defaults() {
    let wine = data("wine.csv");
    if !wine.exists() {
        eprintln!("wine.csv not present; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["embed", "-i", s(&wine), "--label-col", "label", "-o", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("coordinates.csv")).unwrap();
    assert_eq!(text.lines().count(), 179);
}

#[test]
fn bench_single_dataset_and_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let out = dir.path().join("bench");
    let o = run(&[
        "bench", "-i", s(&input), "--label-col", "label", "--epochs", "20", "--repeats", "3", "-o", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("dataset,n,d,m,r,k,epochs,seed,knn_acc,graph_s,spectral_s,sgd_s,total_s"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(json["repeats"], 3);

    let manifest = dir.path().join("empty.toml");
    std::fs::write(&manifest, "").unwrap();
    let out = dir.path().join("empty");
    let o = run(&["bench", "--manifest", s(&manifest), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(out.join("results.csv")).unwrap_or_default().lines().count(), 0);

    // missing files in a manifest are skipped
    std::fs::write(&manifest, "[[dataset]]\nname = \"ghost\"\npath = \"ghost.csv\"\n").unwrap();
    assert_eq!(code(&run(&["bench", "--manifest", s(&manifest), "-o", s(&out)])), 0);
}

#[test]
fn sweep_and_ablate_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let out = dir.path().join("o");
    let common = ["-i", s(&input), "--label-col", "label", "--epochs", "20", "-o", s(&out)];
    let o = run(&[&["sweep", "--rs", "0.3,0.7"][..], &common].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("r,m,knn_accuracy,total_s"));
    assert_eq!(sweep.lines().count(), 3);
    assert_eq!(code(&run(&[&["sweep", "--rs", "0.7,0.3"][..], &common].concat())), 2);

    let o = run(&[&["ablate", "--trace", "0,0.5,1"][..], &common].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(out.join("ablation.csv")).unwrap().lines().count(), 5);
    assert_eq!(std::fs::read_to_string(out.join("ablation_trace.csv")).unwrap().lines().count(), 4);
}

#[test]
fn check_equivalence_reports_zero_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check-equivalence", "--n", "300", "-k", "10", "-o", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("equivalence.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["directed_symmetric_difference"], 0);
    assert_eq!(code(&run(&["check-equivalence", "--n", "50", "-k", "1", "-o", s(dir.path())])), 2);
}

#[test]
fn threads_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let input = small_csv(dir.path());
    let o = run(&["--threads", "2", "embed", "-i", s(&input), "--label-col", "label", "--epochs", "5", "-o", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let o = bin()
        .env("FASTUMAP_THREADS", "0")
        .args(["embed", "-i", s(&input), "--label-col", "label", "--epochs", "5", "-o", s(dir.path())])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
