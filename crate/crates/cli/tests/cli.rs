use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_particleness"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

const KET2: &str = r#"{"kind":"pure","amplitudes":[[0,0],[0,0],[1,0]]}"#;
const KET1: &str = r#"{"kind":"pure","amplitudes":[[0,0],[1,0],[0,0]]}"#;

#[test]
fn classify_reports_label_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.json", KET2);
    let o = run(&["classify", two.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("Resourceful, energy=2.000000000"), "{}", stdout(&o));

    let one = write(dir.path(), "one.json", KET1);
    let o = run(&["classify", one.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Edge"));

    let bad = write(dir.path(), "bad.json", "{\"kind\": ");
    let o = run(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn classify_json_and_custom_spec() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", KET1);
    let v = json(&run(&["classify", one.to_str().unwrap(), "--json"]));
    assert_eq!(v["label"], "Edge");
    assert_eq!(v["energy"].as_f64().unwrap(), 1.0);

    let strict = write(
        dir.path(),
        "spec.json",
        r#"{"dim":3,"level_energies":[0,1,2],"threshold":1,"strict_inequality":true}"#,
    );
    let o = run(&["--spec", strict.to_str().unwrap(), "classify", one.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let qubit = write(
        dir.path(),
        "qubit.json",
        r#"{"dim":2,"level_energies":[0,1],"threshold":1}"#,
    );
    let o = run(&["--spec", qubit.to_str().unwrap(), "classify", one.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn measure_examples() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.json", KET2);
    let o = run(&["measure", two.to_str().unwrap(), "--measure", "both"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["particleness"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["coherence"]["value"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["particleness"]["optimizer"].as_array().unwrap().len(), 9);

    let third = 1.0 / 3.0;
    let mixed = format!(
        r#"{{"kind":"mixed","matrix":[[[{third},0],[0,0],[0,0]],[[0,0],[{third},0],[0,0]],[[0,0],[0,0],[{third},0]]]}}"#
    );
    let mm = write(dir.path(), "mm.json", &mixed);
    let v = json(&run(&["measure", mm.to_str().unwrap()]));
    assert!(v["particleness"]["value"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["coherence"]["value"].as_f64().unwrap().abs() < 1e-9);

    let s = 1.0 / 3f64.sqrt();
    let plus = write(
        dir.path(),
        "plus.json",
        &format!(r#"{{"kind":"pure","amplitudes":[[{s},0],[{s},0],[{s},0]]}}"#),
    );
    let o = run(&[
        "measure",
        plus.to_str().unwrap(),
        "--measure",
        "particleness",
        "--bounds",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v.get("coherence").is_none());
    let p = v["particleness"]["value"].as_f64().unwrap();
    let lower = v["bounds"]["witness_lower"].as_f64().unwrap();
    let lemma = v["bounds"]["lemma_bound"].as_f64().unwrap();
    assert!(lower <= p + 1e-6 && p <= lemma + 1e-6, "{lower} {p} {lemma}");
}

#[test]
fn measure_rejects_bad_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let two = write(dir.path(), "two.json", KET2);
    let o = run(&["--tol=2", "measure", two.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn matrix(rows: &[[(f64, f64); 3]; 3]) -> String {
    let rows: Vec<String> = rows
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|(re, im)| format!("[{re},{im}]")).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

const O: (f64, f64) = (0.0, 0.0);
const I: (f64, f64) = (1.0, 0.0);

#[test]
fn check_ops_examples() {
    let dir = tempfile::tempdir().unwrap();
    let id = write(
        dir.path(),
        "id.json",
        &format!(r#"{{"operators":[{}]}}"#, matrix(&[[I, O, O], [O, I, O], [O, O, I]])),
    );
    let o = run(&["check-ops", id.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict=Free"));

    let raise = write(
        dir.path(),
        "raise.json",
        &format!(r#"{{"operators":[{}]}}"#, matrix(&[[O, O, I], [I, O, O], [O, I, O]])),
    );
    let o = run(&["check-ops", raise.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["verdict"], "NotFree");
    assert!(v["certificate_state"].is_array());
    assert!((v["worst_energy"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let phase = write(
        dir.path(),
        "phase.json",
        &format!(
            r#"{{"operators":[{}]}}"#,
            matrix(&[[I, O, O], [O, (c, s), O], [O, O, (c, -s)]])
        ),
    );
    let o = run(&["check-ops", phase.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("verdict=Free (commutation fast path)"),
        "{}",
        stdout(&o)
    );

    let half = (0.5, 0.0);
    let incomplete = write(
        dir.path(),
        "incomplete.json",
        &format!(r#"{{"operators":[{}]}}"#, matrix(&[[half, O, O], [O, I, O], [O, O, I]])),
    );
    let o = run(&["check-ops", incomplete.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("incomplete") && err.contains("7.5e-1"), "{err}");
}

fn scan_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let out = dir.join(format!("{name}.csv"));
    write(
        dir,
        &format!("{name}.json"),
        &format!(r#"{{"seed": 7, "output": {:?}{extra}}}"#, out.to_str().unwrap()),
    )
}

#[test]
fn scan_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scan_config(dir.path(), "smoke", r#", "samples_per_rank": 10"#);
    let start = Instant::now();
    let o = run(&["scan", cfg.to_str().unwrap(), "--json"]);
    assert!(start.elapsed().as_secs() < 30);
    let v = json(&o);
    let violations = v["bound"]["violations"].as_u64().unwrap();
    assert_eq!(o.status.code(), Some(if violations > 0 { 2 } else { 0 }));
    assert_eq!(v["records"], 30);
    let csv = fs::read_to_string(dir.path().join("smoke.csv")).unwrap();
    assert!(csv.starts_with("rank,sample_index,coherence,particleness,coherence_gap,particleness_gap\n"));
    assert_eq!(csv.lines().count(), 31);
    assert!(dir.path().join("smoke.meta.json").exists());
    let plot = fs::read_to_string(dir.path().join("smoke.gp")).unwrap();
    assert!(plot.contains("'smoke.csv'"));
}

#[test]
fn scan_with_single_rank() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scan_config(dir.path(), "r1", r#", "samples_per_rank": 4, "ranks": [1]"#);
    let o = run(&["scan", cfg.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)));
    let csv = fs::read_to_string(dir.path().join("r1.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("1,")));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn scan_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"ranks": [5]}"#);
    assert_eq!(run(&["scan", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn scan_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = scan_config(dir.path(), "a", r#", "samples_per_rank": 5"#);
    let b = scan_config(dir.path(), "b", r#", "samples_per_rank": 5"#);
    run(&["scan", a.to_str().unwrap()]);
    run(&["scan", b.to_str().unwrap()]);
    let ca = fs::read(dir.path().join("a.csv")).unwrap();
    let cb = fs::read(dir.path().join("b.csv")).unwrap();
    assert!(!ca.is_empty());
    assert_eq!(ca, cb);
}

#[test]
fn sample_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "sample",
            "--dim",
            "3",
            "--rank",
            "1",
            "--count",
            "2",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["state_0000.json", "state_0001.json"] {
        let text = fs::read_to_string(a.join(f)).unwrap();
        assert_eq!(text, fs::read_to_string(b.join(f)).unwrap());
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "pure");
        assert_eq!(v["amplitudes"].as_array().unwrap().len(), 3);
    }
    assert_ne!(
        fs::read_to_string(a.join("state_0000.json")).unwrap(),
        fs::read_to_string(a.join("state_0001.json")).unwrap()
    );

    let full = dir.path().join("full");
    let o = run(&["sample", "--dim", "3", "--rank", "3", "--out", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(full.join("state_0000.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "mixed");
    let state = full.join("state_0000.json");
    assert!(matches!(
        run(&["classify", state.to_str().unwrap()]).status.code(),
        Some(0) | Some(2)
    ));

    let o = run(&["sample", "--dim", "3", "--rank", "4", "--out", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sampled_qubits_are_never_resourceful() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let o = run(&[
        "sample",
        "--dim",
        "2",
        "--rank",
        "2",
        "--count",
        "100",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    for i in 0..100 {
        let f = out.join(format!("state_{i:04}.json"));
        let o = run(&["classify", f.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
}
