//! End-to-end checks of the command-line surface, driving the built
//! binary through synth -> extract -> train/eval/explain/ablate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_voxscreen")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn small_cohort_spec(dir: &Path) -> PathBuf {
    let spec = serde_json::json!({
        "classes": [
            {"label": "NonPd", "n": 12, "f0_mean": 126.0, "f0_sd": 10.0,
             "jitter": 0.007, "jitter_sd": 0.003, "shimmer": 0.02, "shimmer_sd": 0.008,
             "snr_db": 27.0, "snr_sd": 3.0, "duration": 2.0},
            {"label": "Pd", "n": 12, "f0_mean": 114.0, "f0_sd": 10.0,
             "jitter": 0.02, "jitter_sd": 0.006, "shimmer": 0.05, "shimmer_sd": 0.015,
             "snr_db": 20.0, "snr_sd": 3.0, "duration": 2.0}
        ],
        "sample_rate": 16000,
        "silence_pad": 0.25
    });
    let path = dir.join("cohort.json");
    fs::write(&path, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    path
}

#[test]
fn full_pipeline_through_the_binary() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let spec = small_cohort_spec(dir);
    let cohort = dir.join("cohort");
    let features = dir.join("features.csv");

    // synth twice with the same seed: identical bytes
    assert_ok(
        &run(&["synth", "--out-dir", cohort.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--seed", "9"]),
        "synth",
    );
    let cohort2 = dir.join("cohort2");
    assert_ok(
        &run(&["synth", "--out-dir", cohort2.to_str().unwrap(), "--spec", spec.to_str().unwrap(), "--seed", "9"]),
        "synth again",
    );
    assert_eq!(
        fs::read(cohort.join("manifest.csv")).unwrap(),
        fs::read(cohort2.join("manifest.csv")).unwrap()
    );
    assert_eq!(
        fs::read(cohort.join("expected.json")).unwrap(),
        fs::read(cohort2.join("expected.json")).unwrap()
    );
    assert_eq!(
        fs::read(cohort.join("c0-non-pd-000.wav")).unwrap(),
        fs::read(cohort2.join("c0-non-pd-000.wav")).unwrap()
    );

    // extract: 24 rows, 44-feature header, trim bounds in the report
    assert_ok(
        &run(&[
            "extract",
            "--manifest",
            cohort.join("manifest.csv").to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
        ]),
        "extract",
    );
    let text = fs::read_to_string(&features).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 6 + 44);
    assert_eq!(text.lines().count(), 1 + 24);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("features.extract.json")).unwrap())
            .unwrap();
    assert_eq!(report["version"], "extract-report/1");
    assert!(report["fingerprint"].as_str().unwrap().len() == 64);
    let first = &report["records"][0];
    assert_eq!(first["status"], "ok");
    assert!(first["trim_end"].as_u64().unwrap() > first["trim_start"].as_u64().unwrap());

    // train twice with one seed: byte-identical models
    let model1 = dir.join("m1.json");
    let model2 = dir.join("m2.json");
    for (out, seed) in [(&model1, "5"), (&model2, "5")] {
        assert_ok(
            &run(&[
                "train",
                "--matrix",
                features.to_str().unwrap(),
                "--model",
                out.to_str().unwrap(),
                "--n-rounds",
                "40",
                "--max-depth",
                "3",
                "--seed",
                seed,
            ]),
            "train",
        );
    }
    assert_eq!(fs::read(&model1).unwrap(), fs::read(&model2).unwrap());
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model1).unwrap()).unwrap();
    assert_eq!(model["version"], "voxscreen-model/1");
    assert_eq!(model["kind"], "boosted");
    assert_eq!(model["seed"], 5);

    // eval twice with one seed: byte-identical reports with 5 strata
    let report1 = dir.join("r1.json");
    let report2 = dir.join("r2.json");
    for out in [&report1, &report2] {
        let run_out = run(&[
            "eval",
            "--matrix",
            features.to_str().unwrap(),
            "--report",
            out.to_str().unwrap(),
            "--n-rounds",
            "40",
            "--max-depth",
            "3",
            "--strata",
            "gender,age50,environment",
            "--seed",
            "5",
        ]);
        assert_ok(&run_out, "eval");
        let stdout = String::from_utf8_lossy(&run_out.stdout);
        assert!(stdout.contains("Algorithm | AUC | Accuracy"), "{stdout}");
        assert!(stdout.contains("BoostedTrees | "), "{stdout}");
    }
    assert_eq!(fs::read(&report1).unwrap(), fs::read(&report2).unwrap());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report1).unwrap()).unwrap();
    assert_eq!(report["version"], "report/1");
    assert_eq!(report["strata"].as_object().unwrap().len(), 5);
    assert_eq!(report["seed"], 5);

    // explain: attributions, importance, curve files
    let explain_dir = dir.join("explain");
    assert_ok(
        &run(&[
            "explain",
            "--matrix",
            features.to_str().unwrap(),
            "--out-dir",
            explain_dir.to_str().unwrap(),
            "--n-rounds",
            "40",
            "--max-depth",
            "3",
            "--curve-k",
            "4",
            "--seed",
            "5",
        ]),
        "explain",
    );
    let attributions = fs::read_to_string(explain_dir.join("attributions.csv")).unwrap();
    assert!(attributions.starts_with("id,base,"));
    assert_eq!(attributions.lines().count(), 1 + 24);
    let importance: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(explain_dir.join("importance.json")).unwrap())
            .unwrap();
    assert_eq!(importance["version"], "importance/1");
    let curve = fs::read_to_string(explain_dir.join("curve.tsv")).unwrap();
    assert_eq!(curve.lines().count(), 1 + 4);
    assert!(curve.starts_with("k\tauc\taccuracy\tauc_ma3\n"));

    // ablate: remove-lab (synth marks every 15th per class as lab)
    let ablate_out = dir.join("ablation.json");
    assert_ok(
        &run(&[
            "ablate",
            "--matrix",
            features.to_str().unwrap(),
            "--out",
            ablate_out.to_str().unwrap(),
            "--mode",
            "remove-lab",
            "--n-rounds",
            "40",
            "--max-depth",
            "3",
            "--seed",
            "5",
        ]),
        "ablate",
    );
    let ablation: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&ablate_out).unwrap()).unwrap();
    assert_eq!(ablation["version"], "ablation/1");
    assert_eq!(ablation["noop"], false);
    assert_eq!(ablation["runs"][0]["report"]["n"], 22); // 2 lab rows dropped

    // ablate: remove-random fraction
    let ablate_rand = dir.join("ablation-random.json");
    assert_ok(
        &run(&[
            "ablate",
            "--matrix",
            features.to_str().unwrap(),
            "--out",
            ablate_rand.to_str().unwrap(),
            "--mode",
            "remove-random",
            "--fraction",
            "0.1",
            "--runs",
            "2",
            "--n-rounds",
            "40",
            "--max-depth",
            "3",
            "--seed",
            "5",
        ]),
        "ablate random",
    );
    let ablation: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&ablate_rand).unwrap()).unwrap();
    assert_eq!(ablation["runs"].as_array().unwrap().len(), 2);
    // floor(0.1 * 24) = 2 home rows dropped each run
    assert_eq!(ablation["runs"][0]["report"]["n"], 22);
    assert_eq!(ablation["runs"][1]["report"]["n"], 22);
}

#[test]
fn extract_skips_corrupt_files_but_fails_on_empty_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // a valid single-class cohort of 3 plus one corrupt file
    let spec = serde_json::json!({
        "classes": [
            {"label": "Pd", "n": 3, "f0_mean": 130.0, "f0_sd": 5.0,
             "jitter": 0.01, "shimmer": 0.02, "snr_db": 30.0, "duration": 1.5}
        ]
    });
    fs::write(dir.join("spec.json"), spec.to_string()).unwrap();
    let cohort = dir.join("cohort");
    assert_ok(
        &run(&["synth", "--out-dir", cohort.to_str().unwrap(), "--spec", dir.join("spec.json").to_str().unwrap()]),
        "synth",
    );
    fs::write(cohort.join("broken.wav"), b"RIFX not a wav").unwrap();
    let manifest = cohort.join("manifest.csv");
    let mut text = fs::read_to_string(&manifest).unwrap();
    text.push_str("broken,broken.wav,PD,male,60,home,US\n");
    fs::write(&manifest, text).unwrap();

    let features = dir.join("features.csv");
    let out = run(&[
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
    ]);
    assert_ok(&out, "extract with corrupt file");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipping broken"), "{stderr}");
    let text = fs::read_to_string(&features).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("features.extract.json")).unwrap())
            .unwrap();
    let broken = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["id"] == "broken")
        .unwrap();
    assert_eq!(broken["status"], "error");

    // --all-features emits the 52-column variant set
    let all_features = dir.join("all.csv");
    let out = run(&[
        "extract",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        all_features.to_str().unwrap(),
        "--all-features",
    ]);
    assert_ok(&out, "extract --all-features");
    let text = fs::read_to_string(&all_features).unwrap();
    assert_eq!(text.lines().next().unwrap().split(',').count(), 6 + 52);

    // empty manifest is fatal
    let empty = dir.join("empty.csv");
    fs::write(&empty, "id,path,label,gender,age,environment,country\n").unwrap();
    let out = run(&[
        "extract",
        "--manifest",
        empty.to_str().unwrap(),
        "--out",
        dir.join("none.csv").to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "empty manifest must be fatal");
}

#[test]
fn synth_rejects_zero_count_class() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let spec = serde_json::json!({
        "classes": [
            {"label": "Pd", "n": 0, "f0_mean": 130.0, "f0_sd": 5.0,
             "jitter": 0.01, "shimmer": 0.02, "snr_db": 30.0, "duration": 1.5}
        ]
    });
    fs::write(dir.join("spec.json"), spec.to_string()).unwrap();
    let out = run(&[
        "synth",
        "--out-dir",
        dir.join("cohort").to_str().unwrap(),
        "--spec",
        dir.join("spec.json").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
}

#[test]
fn forest_trainer_is_selectable() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let spec = small_cohort_spec(dir);
    let cohort = dir.join("cohort");
    assert_ok(
        &run(&["synth", "--out-dir", cohort.to_str().unwrap(), "--spec", spec.to_str().unwrap()]),
        "synth",
    );
    let features = dir.join("features.csv");
    let overrides = dir.join("feature-config.json");
    fs::write(
        &overrides,
        r#"{"embed": {"t_max": 800}, "dfa": {"min_window": 40}}"#,
    )
    .unwrap();
    assert_ok(
        &run(&[
            "extract",
            "--manifest",
            cohort.join("manifest.csv").to_str().unwrap(),
            "--out",
            features.to_str().unwrap(),
            "--config",
            overrides.to_str().unwrap(),
        ]),
        "extract with config overrides",
    );
    let model = dir.join("forest.json");
    assert_ok(
        &run(&[
            "train",
            "--matrix",
            features.to_str().unwrap(),
            "--model",
            model.to_str().unwrap(),
            "--trainer",
            "forest",
            "--n-trees",
            "20",
        ]),
        "train forest",
    );
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(parsed["kind"], "forest");
}
