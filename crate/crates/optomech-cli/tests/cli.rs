use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = run(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn write_scenario(dir: &Path, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value =
        serde_json::from_str(&optomech::scenario::Scenario::fig4().to_json()).unwrap();
    edit(&mut v);
    let path = dir.join("case.scenario");
    std::fs::write(&path, v.to_string()).unwrap();
    path.display().to_string()
}

// data rows of one CSV table, skipping the metadata block and header
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn modes_reproduce_table() {
    let v = json(&["modes", "--n-max", "5"]);
    let rows = v["data"]["bracket"].as_array().unwrap();
    let b = |i: u64, j: u64| {
        rows.iter()
            .find(|r| r["i"] == i && r["j"] == j)
            .map(|r| r["B_11ij"].as_f64().unwrap())
            .unwrap()
    };
    assert!((b(1, 1) - 0.3024).abs() < 1e-4);
    assert!((b(2, 2) - 0.4106).abs() < 1e-4);
    assert!((b(5, 5) - 0.486232).abs() < 1e-5);
    assert!((b(3, 5) - 0.0705).abs() < 1e-4);
    assert!(b(1, 2).abs() < 1e-8);
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["metadata"]["scenario_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn steady_json_layout() {
    let v = json(&["steady"]);
    let d = &v["data"];
    let p: Vec<f64> = d["P"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(p[1] > 0.85);
    let k = p.len();
    assert_eq!(d["gamma_eff"].as_array().unwrap().len(), k);
    assert_eq!(d["delta"][1][0].as_f64().unwrap().round(), 5424480.0);
    assert!((d["bath"]["nbar"].as_f64().unwrap() - 79.18).abs() < 0.05);
    assert_eq!(v["metadata"]["effective_scenario"]["bath"]["quality"], 5e6);
}

#[test]
fn emission_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = run(&["emission", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let spectrum = std::fs::read_to_string(out.join("emission_spectrum.csv")).unwrap();
    assert!(spectrum.contains("# units: offset_hz [Hz"));
    let header = spectrum.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "offset_hz,S_value,nearest_peak_n,nearest_peak_m");
    let rows = csv_rows(&spectrum);
    assert!(rows.len() > 4096);
    let x: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(x.windows(2).all(|w| w[0] < w[1]));
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));

    let peaks = csv_rows(&std::fs::read_to_string(out.join("emission_peaks.csv")).unwrap());
    let pos = |n: &str, m: &str| -> f64 {
        peaks.iter().find(|r| r[0] == n && r[1] == m).map(|r| r[2].parse().unwrap()).unwrap()
    };
    for r in &peaks {
        let (n, m): (i64, i64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert_eq!((n - m).rem_euclid(2), 1);
    }
    // main anti-Stokes group: spacings of the exact spectrum
    let s1 = pos("2", "1") - pos("1", "0");
    let s2 = pos("3", "2") - pos("2", "1");
    assert!((s1 / 180.8e3 - 1.0).abs() < 2e-3, "{s1}");
    assert!((s2 / 166.1e3 - 1.0).abs() < 2e-3, "{s2}");
}

#[test]
fn outputs_are_byte_identical() {
    for cmd in [&["steady"][..], &["emission"][..], &["couple"][..], &["modes", "--n-max", "3"][..]] {
        let a = run(cmd);
        let b = run(cmd);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    for d in [&x, &y] {
        assert!(run(&["losses", "--format", "json", "--out", d.to_str().unwrap()]).status.success());
    }
    assert_eq!(std::fs::read(x.join("losses.json")).unwrap(), std::fs::read(y.join("losses.json")).unwrap());
}

#[test]
fn hash_tracks_effective_scenario() {
    let a = json(&["losses"]);
    let b = json(&["losses", "--fock-cutoff", "80"]);
    assert_ne!(a["metadata"]["scenario_sha256"], b["metadata"]["scenario_sha256"]);
    assert_eq!(b["metadata"]["effective_scenario"]["options"]["fock_cutoff"], 80);
}

#[test]
fn convention_flag_changes_coupling() {
    let g = |v: &serde_json::Value| {
        v["data"]["coupling"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["quantity"] == "g0_rad_per_s_m")
            .unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    let default = g(&json(&["couple"]));
    let reference = g(&json(&["couple", "--ac-convention", "ref"]));
    assert!((default / 1.745e10 - 1.0).abs() < 0.01);
    assert!(reference < 0.3 * default);
}

#[test]
fn explicit_scenario_matches_bundled() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), |_| {});
    let a = json(&["steady"]);
    let b = json(&["steady", "--scenario", &path]);
    assert_eq!(a["data"], b["data"]);
    assert_eq!(a["metadata"]["scenario_sha256"], b["metadata"]["scenario_sha256"]);
}

#[test]
fn validation_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_scenario(dir.path(), |v| v["cavity"]["colour"] = serde_json::json!("red"));
    let o = run(&["couple", "--scenario", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let empty = dir.path().join("empty.scenario");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["steady", "--scenario", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beam"));

    assert_eq!(run(&["steady", "--scenario", "/nonexistent/x.scenario"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum-levels", "--fock-cutoff", "2"]).status.code(), Some(2));
    assert_eq!(run(&["steady", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn instability_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scenario(dir.path(), |v| {
        v.as_object_mut().unwrap().remove("tuning");
        v["electrodes"]["direct_field"]["e_par"] = serde_json::json!(1e9);
    });
    let o = run(&["tune", "--scenario", &path]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("buckling"));
}

#[test]
fn other_subcommands_run() {
    for cmd in ["tune", "spectrum-levels", "couple", "losses"] {
        let o = run(&[cmd]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("# optomech "));
    }
}

#[test]
fn verify_reports_every_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("criterion")).count(), 14);
    assert!(text.contains("documented deviation"));
    let table = std::fs::read_to_string(dir.path().join("verify_criteria.csv")).unwrap();
    assert_eq!(csv_rows(&table).len(), 14);
}
