use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn objrender(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objrender"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs `demo` and returns the scene, scenario, rules and selection paths it prints.
fn demo(dir: &Path) -> [PathBuf; 4] {
    let o = objrender(&["demo", "--out", dir.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<PathBuf> = stdout(&o).lines().map(PathBuf::from).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|p| p.exists()));
    [lines[0].clone(), lines[1].clone(), lines[2].clone(), lines[3].clone()]
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let [scene, scenario, ..] = demo(dir.path());

    let ok = objrender(&["validate", "--scene", s(&scene), "--scenario", s(&scenario)]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert_eq!(stdout(&ok).trim(), "ok");

    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&scene).unwrap()).unwrap();
    let first = doc["objects"][0].clone();
    doc["objects"].as_array_mut().unwrap().push(first);
    std::fs::write(&scene, doc.to_string()).unwrap();
    let dup = objrender(&["validate", "--scene", s(&scene), "--scenario", s(&scenario), "--json"]);
    assert_eq!(dup.status.code(), Some(1));
    let records: serde_json::Value = serde_json::from_str(&stdout(&dup)).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 1);
    assert_eq!(records[0]["field"], "id");

    std::fs::write(&scene, "not json at all").unwrap();
    let garbage = objrender(&["validate", "--scene", s(&scene), "--scenario", s(&scenario)]);
    assert_eq!(garbage.status.code(), Some(2));
    let err = stderr(&garbage);
    assert!(err.starts_with("error: ") && err.trim_end().lines().count() == 1, "{err}");
}

#[test]
fn render_writes_audio_report_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let [scene, scenario, rules, select] = demo(dir.path());
    let out = dir.path().join("mix.wav");
    let drives = dir.path().join("drives.json");
    let o = objrender(&[
        "render",
        "--scene",
        s(&scene),
        "--scenario",
        s(&scenario),
        "--rules",
        s(&rules),
        "--select",
        s(&select),
        "--out",
        s(&out),
        "--block",
        "512",
        "--dump-drives",
        s(&drives),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("5 channels"));

    let wav = hound_spec(&out);
    assert_eq!(wav, (5, 48_000));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mix.report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "render-report v1");
    let csv = std::fs::read_to_string(dir.path().join("mix.metrics.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    let dumped: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&drives).unwrap()).unwrap();
    assert!(!dumped.as_array().unwrap().is_empty());
}

/// Channel count and sample rate from the RIFF header.
fn hound_spec(path: &Path) -> (u16, u32) {
    let bytes = std::fs::read(path).unwrap();
    assert_eq!(&bytes[0..4], b"RIFF");
    assert_eq!(&bytes[8..12], b"WAVE");
    let channels = u16::from_le_bytes([bytes[22], bytes[23]]);
    let rate = u32::from_le_bytes([bytes[24], bytes[25], bytes[26], bytes[27]]);
    (channels, rate)
}

#[test]
fn render_failure_is_one_diagnostic_line() {
    let dir = tempfile::tempdir().unwrap();
    let [scene, scenario, ..] = demo(dir.path());
    let o = objrender(&[
        "render",
        "--scene",
        s(&scene),
        "--scenario",
        s(&scenario),
        "--out",
        s(&dir.path().join("x.wav")),
        "--xfade",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("crossfade"), "{}", stderr(&o));
    assert!(!dir.path().join("x.wav").exists());
}

#[test]
fn probe_and_devices() {
    let dir = tempfile::tempdir().unwrap();
    let [_, scenario, ..] = demo(dir.path());
    let probe = objrender(&["probe", "--scenario", s(&scenario)]);
    assert!(probe.status.success(), "{}", stderr(&probe));
    assert!(stdout(&probe).starts_with("layout: C L R Ls Rs"));
    let json = objrender(&["probe", "--scenario", s(&scenario), "--json"]);
    let table: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 8);

    let config = dir.path().join("devices.json");
    std::fs::write(
        &config,
        r#"{"devices":[
            {"speaker_id":"bar","position":{"az":0,"dist":2.5},"device_kind":"soundbar"},
            {"speaker_id":"phone","position":{"az":-20,"dist":0.4},"device_kind":"phone"}
        ]}"#,
    )
    .unwrap();
    let devices = objrender(&["devices", "--config", s(&config)]);
    assert!(devices.status.success(), "{}", stderr(&devices));
    let layout: serde_json::Value = serde_json::from_str(&stdout(&devices)).unwrap();
    assert_eq!(layout["speakers"].as_array().unwrap().len(), 2);
    assert_eq!(layout["speakers"][1]["device_kind"], "phone");
}
