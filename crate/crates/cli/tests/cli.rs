use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifs-singular"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn golden_coincidence_table() {
    let out = run(&["coincidences", "--beta1", "golden", "--beta2", "golden", "--m-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "m,card,entropy,entropy_rate");
    let ln2 = std::f64::consts::LN_2;
    assert_eq!(rows[1], format!("1,2,{ln2},{ln2}"));
    assert!(rows[3].starts_with("3,7,"));
}

#[test]
fn dyadic_table_in_both_modes() {
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["coincidences", "--beta1", "1/2", "--beta2", "0.5", "--m-max", "8"];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).lines().last().unwrap().starts_with("8,256,"));
    }
    let out = run(&["coincidences", "--beta1", "golden", "--beta2", "0.5", "--m-max", "3", "--exact"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coincidence_depth_over_cap_is_a_usage_error() {
    let out = run(&["coincidences", "--beta1", "0.6", "--beta2", "0.6", "--m-max", "40"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn class_dump_lists_every_word() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("classes.csv");
    let out = run(&[
        "coincidences", "--beta1", "golden", "--beta2", "golden", "--m-max", "3",
        "--dump-classes", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 9);
    let merged: Vec<&str> = text.lines().filter(|l| l.contains(",122,") || l.contains(",211,")).collect();
    assert_eq!(merged.len(), 2);
    assert_eq!(merged[0].split(',').next(), merged[1].split(',').next());
}

#[test]
fn dim_bound_reports() {
    let out = run(&["dim-bound", "--beta1", "0.4", "--beta2", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("regime: below-quarter-singular"));
    let bound: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("dim_bound: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((bound - 2f64.ln() / 2.5f64.ln()).abs() < 1e-6);

    for n in ["", "5", "40"] {
        let mut args = vec!["dim-bound", "--beta1", "0.7", "--beta2", "0.6"];
        if !n.is_empty() {
            args.extend(["--n", n]);
        }
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("no singularity conclusion"), "n = {n}");
    }

    let out = run(&["dim-bound", "--beta1", "0.7", "--beta2", "0.6", "--n", "1"]);
    assert!(stdout(&out).contains("dim_bound: 0\n"));
    assert!(stdout(&out).contains("degenerate"));
}

#[test]
fn dim_bound_json_echoes_input() {
    let out = run(&["dim-bound", "--beta1", "0.4", "--beta2", "0.4", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["input"]["beta1"], "0.4");
    assert_eq!(v["report"]["regime"], "below-quarter-singular");
    assert_eq!(v["singular"], true);
}

#[test]
fn undecidable_quarter_exits_four() {
    // b1 * b2 = 1/4 exactly cannot be separated from 1/4
    let out = run(&["dim-bound", "--beta1", "0.5", "--beta2", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["dim-bound", "--beta1", "0.625", "--beta2", "0.4"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn find_exceptional_rejects_out_of_range() {
    for b2 in ["0.6", "0.25", "0.5", "abc"] {
        let out = run(&["find-exceptional", "--beta2", b2]);
        assert_eq!(out.status.code(), Some(2), "{b2}");
    }
    let out = run(&["find-exceptional", "--beta2", "0.3", "--k-start", "9", "--k-cap", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["find-exceptional", "--beta2", "0.3", "--precision", "32"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn find_exceptional_writes_a_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = run(&["find-exceptional", "--beta2", "0.3", "--out", path.to_str().unwrap()]);
    // the certificate is valid but lies outside the singular domain
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("block trace"));
    let text = std::fs::read_to_string(&path).unwrap();
    let record = ifs_core::construction::CertificateRecord::from_json(&text).unwrap();
    record.verify().unwrap();
    assert_eq!(record.input["beta2"], "0.3");
    assert_eq!(record.input["epsilon"], "1e-3");
    let lo: f64 = record.bracket[0].parse().unwrap();
    assert!(lo > 1.0 / 1.2 && lo - 1.0 / 1.2 < 1e-3);

    let again = run(&["find-exceptional", "--beta2", "0.3"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn sample_is_reproducible_and_uniform_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec![
            "sample".to_string(), "--beta1".into(), "0.5".into(), "--beta2".into(), "0.5".into(),
            "--count".into(), "200000".into(), "--depth".into(), "30".into(), "--seed".into(), "17".into(),
            "--bins".into(), "20".into(), "--out".into(), p.to_str().unwrap().into(),
        ]
    };
    let run_owned = |v: Vec<String>| run(&v.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run_owned(args(&a)).status.code(), Some(0));
    assert_eq!(run_owned(args(&b)).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,count"));
    let counts: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(counts.len(), 20);
    let sd = (200_000.0f64 * 0.05 * 0.95).sqrt();
    assert!(counts.iter().all(|c| (c - 10_000.0).abs() <= 4.0 * sd));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["input"]["seed"], "17");
    assert_eq!(meta["depth"], 30);
    assert!(meta["sample_range"][1].as_f64().unwrap() <= 2.0);
}

#[test]
fn sample_with_estimate_keeps_requested_bins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = run(&[
        "sample", "--beta1", "0.4", "--beta2", "0.4", "--count", "200000", "--bins", "64",
        "--estimate-dim", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("entropy dimension estimate"));
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 65);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert!(meta["dimension_estimate"]["slope"].as_f64().unwrap() < 0.85);
}

#[test]
fn unwritable_output_exits_one() {
    let out = run(&["sample", "--beta1", "0.5", "--beta2", "0.5", "--count", "10", "--out", "/nonexistent/dir/h.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_are_long_only() {
    let out = run(&["dim-bound", "-b", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
}
