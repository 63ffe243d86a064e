mod common;

use std::fs;
use std::path::{Path, PathBuf};

use common::{run, run_ok, s};
use decafbench::error::exit;
use decafbench::report_io::read_report;
use serde_json::json;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden").join(name)
}

fn synth_spec(dir: &Path, network: &str, dimension: u32, seed: u64, bg: u32) -> PathBuf {
    let path = dir.join(format!("{network}.json"));
    let spec = json!({
        "network": network,
        "dimension": dimension,
        "seed": seed,
        "centroid_scale": 3.0,
        "within_class_sigma": 1.0,
        "bg_patches_per_sample": bg,
    });
    fs::write(&path, spec.to_string()).unwrap();
    path
}

fn sample(dir: &Path, plan: &str) -> PathBuf {
    let out = dir.join(format!("samples_{}.json", plan.replace(':', "")));
    run_ok(&["sample", "--catalog", s(&golden("catalog.json")), "--plan", plan, "--out", s(&out)]);
    out
}

fn embed(dir: &Path, samples: &Path, network: &str, seed: u64, bg: u32) -> PathBuf {
    let out = dir.join(format!("{network}.dcf"));
    let spec = synth_spec(dir, network, 8, seed, bg);
    run_ok(&["synth-embed", "--samples", s(samples), "--spec", s(&spec), "--out", s(&out)]);
    out
}

fn analyze(embeddings: &[&Path], extra: &[&str], out: &Path) -> std::process::Output {
    let catalog = golden("catalog.json");
    let mut args = vec!["analyze", "--catalog", s(&catalog)];
    for e in embeddings {
        args.extend(["--embeddings", s(e)]);
    }
    args.extend(extra);
    args.extend(["--out", s(out)]);
    run(&args)
}

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn six_networks_give_six_entries_and_36_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "first:10");
    let files: Vec<PathBuf> = (0..6).map(|k| embed(dir.path(), &samples, &format!("net{k}"), k, 4)).collect();
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let report = dir.path().join("report.json");
    let out = analyze(&refs, &["--samples", s(&samples)], &report);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed = read_report(&report).unwrap();
    assert_eq!(parsed.networks.len(), 6);
    assert_eq!(parsed.plan, "first:10");

    let csv = dir.path().join("report.csv");
    run_ok(&["export-csv", "--report", s(&report), "--out", s(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "network,dataset,plan,metric,cell,value,n_pairs");
    assert_eq!(lines.len(), 37);
    assert!(lines[1].starts_with("net0,VOT2015,first:10,cosine,TG-TG,"));
    assert!(lines[2].ends_with(",9"));

    for metric in ["cosine", "mahalanobis"] {
        let svg = dir.path().join(format!("{metric}.svg"));
        run_ok(&["render", "--report", s(&report), "--metric", metric, "--out", s(&svg)]);
        let text = fs::read_to_string(&svg).unwrap();
        assert_eq!(text.matches("class=\"network\"").count(), 6);
        assert_eq!(text.matches("class=\"empty\"").count(), 0);
    }
}

#[test]
fn missing_sequence_is_a_validation_error_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "first:10");
    let mut file: serde_json::Value = serde_json::from_slice(&fs::read(&samples).unwrap()).unwrap();
    file["sample_sets"].as_array_mut().unwrap().retain(|set| set["sequence"] != "bravo");
    fs::write(&samples, file.to_string()).unwrap();
    let dcf = embed(dir.path(), &samples, "partial", 1, 4);

    let report = dir.path().join("report.json");
    let out = analyze(&[&dcf], &[], &report);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&out).contains("\"bravo\""), "{}", stderr(&out));

    let out = analyze(&[&dcf], &["--allow-missing"], &report);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed = read_report(&report).unwrap();
    assert_eq!(parsed.networks[0].cosine.pair_counts.tg_bg, 4);
    assert_eq!(parsed.networks[0].cosine.pair_counts.tg_tg, 1);
}

#[test]
fn degenerate_manifolds_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let one = sample(dir.path(), "first:1");
    let dcf = embed(dir.path(), &one, "tiny", 1, 4);
    let out = analyze(&[&dcf], &[], &dir.path().join("r.json"));
    assert_eq!(out.status.code(), Some(exit::DEGENERATE));
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));

    let ten = sample(dir.path(), "first:10");
    let tg_only = embed(dir.path(), &ten, "tgonly", 1, 0);
    let out = analyze(&[&tg_only], &[], &dir.path().join("r.json"));
    assert_eq!(out.status.code(), Some(exit::DEGENERATE));
    assert!(stderr(&out).contains("/BG"), "{}", stderr(&out));
}

#[test]
fn input_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = analyze(&[&dir.path().join("absent.dcf")], &[], &report);
    assert_eq!(out.status.code(), Some(exit::IO));

    let bogus = dir.path().join("bogus.dcf");
    fs::write(&bogus, b"XXXX not a real file").unwrap();
    let out = analyze(&[&bogus], &[], &report);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&out).contains("not an embedding interchange file"));

    let out = run(&["sample", "--catalog", s(&golden("catalog.json")), "--plan", "every:3", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    let out = run(&["sample", "--catalog", s(&golden("catalog.json")), "--plan", "first:0", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));

    let samples = sample(dir.path(), "first:10");
    let dcf = embed(dir.path(), &samples, "dup", 1, 4);
    let out = analyze(&[&dcf, &dcf], &[], &report);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&out).contains("more than one"));

    let out = analyze(&[&dcf], &["--epsilon", "0"], &report);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(!report.exists());
}

#[test]
fn dataset_mismatch_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "first:10");
    let mut file: serde_json::Value = serde_json::from_slice(&fs::read(&samples).unwrap()).unwrap();
    file["dataset"] = json!("UAV123");
    fs::write(&samples, file.to_string()).unwrap();
    let dcf = embed(dir.path(), &samples, "other", 1, 4);
    let out = analyze(&[&dcf], &[], &dir.path().join("r.json"));
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&out).contains("does not match catalog dataset"));
}

#[test]
fn compare_flags_perturbed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "first:10");
    let dcf = embed(dir.path(), &samples, "net", 3, 4);
    let a = dir.path().join("a.json");
    assert!(analyze(&[&dcf], &[], &a).status.success());
    let out = run_ok(&["compare", s(&a), s(&a), "--tolerance", "0"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("pass: max relative difference 0e0"));

    let mut value: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let cell = &mut value["networks"][0]["mahalanobis_sq"]["cells"]["TG-BG"];
    *cell = json!(cell.as_f64().unwrap() * 1.01);
    let b = dir.path().join("b.json");
    fs::write(&b, value.to_string()).unwrap();
    let out = run(&["compare", s(&a), s(&b), "--tolerance", "1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("net mahalanobis_sq TG-BG"), "{text}");
    assert!(run(&["compare", s(&a), s(&b), "--tolerance", "0.02"]).status.success());
}

#[test]
fn pair_values_and_stats_dump() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "first:10");
    let dcf = embed(dir.path(), &samples, "net", 3, 4);
    let report = dir.path().join("r.json");
    let stats = dir.path().join("stats.json");
    let out = analyze(&[&dcf], &["--pair-values", "--pooling", "same-sequence", "--stats-out", s(&stats)], &report);
    assert!(out.status.success(), "{}", stderr(&out));
    let parsed = read_report(&report).unwrap();
    let m = &parsed.networks[0].cosine;
    assert_eq!(m.pair_counts.tg_bg, 3);
    assert_eq!(m.per_pair_values.as_ref().unwrap().len(), 3 + 3 + 3);

    let dump: serde_json::Value = serde_json::from_slice(&fs::read(&stats).unwrap()).unwrap();
    let classes = dump[0]["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 6);
    assert_eq!(classes[0]["class"], json!({"seq": "alpha", "metaclass": "TG"}));
    assert_eq!(classes[0]["n"], 10);
    assert_eq!(classes[1]["n"], 40);
    assert_eq!(classes[0]["variance"].as_array().unwrap().len(), 8);
}

#[test]
fn invert_flips_cosine_gray() {
    let dir = tempfile::tempdir().unwrap();
    let samples = sample(dir.path(), "full");
    let dcf = embed(dir.path(), &samples, "net", 3, 4);
    let report = dir.path().join("r.json");
    assert!(analyze(&[&dcf], &[], &report).status.success());
    let fills = |invert: bool| {
        let svg = dir.path().join("c.svg");
        let mut args = vec!["render", "--report", s(&report), "--metric", "cosine", "--out", s(&svg)];
        if invert {
            args.push("--invert");
        }
        run_ok(&args);
        let text = fs::read_to_string(&svg).unwrap();
        text.split("fill=\"rgb(")
            .skip(1)
            .map(|t| t[..t.find(',').unwrap()].parse::<u32>().unwrap())
            .collect::<Vec<_>>()
    };
    let (plain, inverted) = (fills(false), fills(true));
    assert_eq!(plain.len(), 4);
    assert!(plain.iter().zip(&inverted).all(|(a, b)| a + b == 255));
}

fn write_suite(dir: &Path, plans: &[&str]) -> PathBuf {
    fs::copy(golden("catalog.json"), dir.join("catalog.json")).unwrap();
    let config = json!({
        "catalog": "catalog.json",
        "out_dir": "out",
        "plans": plans,
        "noise_px": 3,
        "seed": 11,
        "synthetic": {"networks": [
            {"network": "SynthNetA", "dimension": 8, "seed": 1, "centroid_scale": 3.0, "within_class_sigma": 1.0},
            {"network": "SynthNetB", "dimension": 12, "seed": 2, "centroid_scale": 2.0, "within_class_sigma": 0.5}
        ]}
    });
    let path = dir.join("suite.json");
    fs::write(&path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn suite_writes_one_report_per_plan() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_suite(dir.path(), &["full", "first:10", "first:100", "random:1000"]);
    run_ok(&["suite", "--config", s(&config)]);
    let out = dir.path().join("out");
    let mut reports: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".report.json"))
        .collect();
    reports.sort();
    assert_eq!(
        reports,
        [
            "VOT2015_first10.report.json",
            "VOT2015_first100.report.json",
            "VOT2015_full.report.json",
            "VOT2015_random1000_noise3.report.json",
        ]
    );
    let random = read_report(&out.join("VOT2015_random1000_noise3.report.json")).unwrap();
    assert_eq!(random.plan, "random:1000 noise_px:3 seed:11");
    assert_eq!(random.config.seed, Some(11));
    assert_eq!(random.networks.len(), 2);
    assert!(out.join("VOT2015_full.mahalanobis_sq.svg").is_file());
    assert!(out.join("VOT2015_full.cosine.svg").is_file());

    let snapshot: Vec<(String, Vec<u8>)> = {
        let mut v: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
            })
            .filter(|(n, _)| !n.ends_with(".samples.json"))
            .collect();
        v.sort();
        v
    };
    run_ok(&["suite", "--config", s(&config)]);
    for (name, bytes) in snapshot {
        assert_eq!(fs::read(out.join(&name)).unwrap(), bytes, "{name} changed on rerun");
    }
}

#[test]
fn single_plan_suite_and_empty_suite() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_suite(dir.path(), &["full"]);
    run_ok(&["suite", "--config", s(&config)]);
    let n = fs::read_dir(dir.path().join("out"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".report.json"))
        .count();
    assert_eq!(n, 1);

    let empty = write_suite(dir.path(), &[]);
    let out = run(&["suite", "--config", s(&empty)]);
    assert_eq!(out.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&out).contains("no plans"));
}
