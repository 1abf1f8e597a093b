use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn entroflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entroflow")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn make_circle_perimeter() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.txt");
    let o = entroflow(&["make", "circle", "--radius", "1", "--segments", "1024", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(field(&text, "vertices"), 1024.0);
    assert!((field(&text, "measure") - 2.0 * std::f64::consts::PI).abs() < 1e-4);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1024);
}

#[test]
fn make_sphere_and_ellipsoid_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = entroflow(&["make", "sphere", "--radius", "2", "--subdiv", "4", "--out", p(&dir.path().join("s.obj"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(field(&stdout(&o), "vertices"), 2562.0);
    let o = entroflow(&["make", "ellipsoid", "--axes", "2,1,1", "--subdiv", "4", "--out", p(&dir.path().join("e.obj"))]);
    assert_eq!(code(&o), 0);
    let exact = 4.0 * std::f64::consts::PI / 3.0 * 2.0;
    assert!((field(&stdout(&o), "volume") - exact).abs() < 0.02 * exact);
}

#[test]
fn make_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.obj");
    assert_eq!(code(&entroflow(&["make", "sphere", "--subdiv", "7", "--out", p(&out)])), 2);
    assert_eq!(code(&entroflow(&["make", "sphere", "--radius=-1", "--out", p(&out)])), 2);
    assert_eq!(code(&entroflow(&["make", "ellipsoid", "--axes", "1,1", "--out", p(&out)])), 2);
    assert_eq!(code(&entroflow(&["make", "sphere"])), 2);
    let missing = dir.path().join("missing.obj");
    assert_eq!(code(&entroflow(&["make", "obj", "--input", p(&missing), "--out", p(&out)])), 3);
}

#[test]
fn make_round_trips_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.obj");
    let b = dir.path().join("b.obj");
    assert_eq!(code(&entroflow(&["make", "sphere", "--subdiv", "2", "--out", p(&a)])), 0);
    assert_eq!(code(&entroflow(&["make", "obj", "--input", p(&a), "--out", p(&b)])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(code(&entroflow(&["make", "polygon", "--input", p(&a), "--out", p(&b)])), 2);
}

#[test]
fn stone_table() {
    let o = entroflow(&["stone", "--from", "1", "--to", "5"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("1 1.52034690106"), "{}", lines[0]);
    assert!(lines[1].starts_with("2 1.47151776468"), "{}", lines[1]);
    assert_eq!(code(&entroflow(&["stone", "--from", "0", "--to", "3"])), 2);
}

#[test]
fn circle_flow_summary_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    let run = dir.path().join("run");
    assert_eq!(code(&entroflow(&["make", "circle", "--segments", "128", "--out", p(&c)])), 0);
    let o = entroflow(&["flow", "--input", p(&c), "--out", p(&run), "--t-end", "1", "--scheme", "explicit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&run.join("summary.json"));
    assert_eq!(s["termination"], "SingularityDetected");
    assert!((s["singular_time"].as_f64().unwrap() - 0.5).abs() < 5e-3);
    let series = std::fs::read_to_string(run.join("series.csv")).unwrap();
    assert!(series.starts_with("time,step,epoch,vertices,area,volume,max_h,min_h\n"));

    let report = dir.path().join("density.json");
    let csv = dir.path().join("density.csv");
    let o = entroflow(&[
        "density", "--input", p(&run), "--center", "0,0", "--time", "0.5", "--times", "0.45,0.475,0.4875", "--out",
        p(&report), "--csv", p(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&report);
    assert!((d["value"].as_f64().unwrap() - (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()).abs() < 5e-3);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);

    let o = entroflow(&["rescale", "--input", p(&run), "--center", "0,0", "--time", "5", "--scales", "3"]);
    assert_eq!(code(&o), 5);
    let o = entroflow(&["density", "--input", p(&run), "--center", "0,0", "--time", "0.5", "--times", "0.1"]);
    assert_eq!(code(&o), 5);

    let tangent = dir.path().join("tangent.json");
    let o = entroflow(&["rescale", "--input", p(&run), "--scales", "4", "--out", p(&tangent)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = json(&tangent);
    assert_eq!(t["sequence"]["scales"].as_array().unwrap().len(), 4);
    assert_eq!(t["self_similarity"].as_array().unwrap().len(), 4);
}

#[test]
fn sphere_flow_singular_time() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.obj");
    let run = dir.path().join("run");
    assert_eq!(code(&entroflow(&["make", "sphere", "--radius", "2", "--subdiv", "3", "--out", p(&s)])), 0);
    let o = entroflow(&["flow", "--input", p(&s), "--out", p(&run), "--t-end", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&run.join("summary.json"));
    assert_eq!(summary["termination"], "SingularityDetected");
    assert!((summary["singular_time"].as_f64().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn empty_flow_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.obj");
    assert_eq!(code(&entroflow(&["make", "ellipsoid", "--subdiv", "2", "--out", p(&s)])), 0);
    let empty = dir.path().join("empty");
    assert_eq!(code(&entroflow(&["flow", "--input", p(&s), "--out", p(&empty), "--t-end", "0"])), 0);
    assert_eq!(json(&empty.join("summary.json"))["snapshots"], 1);

    let runs = [dir.path().join("a"), dir.path().join("b")];
    for r in &runs {
        let o = entroflow(&["flow", "--input", p(&s), "--out", p(r), "--t-end", "0.05", "--snapshot-every", "0.01"]);
        assert_eq!(code(&o), 0);
    }
    for f in ["summary.json", "series.csv", "manifest.toml", "snapshot_00003.obj"] {
        assert_eq!(std::fs::read(runs[0].join(f)).unwrap(), std::fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
}

#[test]
fn entropy_and_shrinker_reports() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.obj");
    assert_eq!(code(&entroflow(&["make", "sphere", "--radius", "2", "--subdiv", "4", "--out", p(&s)])), 0);
    let rep = dir.path().join("e.json");
    assert_eq!(code(&entroflow(&["entropy", "--input", p(&s), "--out", p(&rep), "--starts", "4"])), 0);
    let e = json(&rep);
    assert!((e["result"]["entropy"].as_f64().unwrap() - 4.0 / std::f64::consts::E).abs() < 1e-2);
    assert_eq!(e["result"]["starts_tried"], 15);

    let c = dir.path().join("c.txt");
    assert_eq!(code(&entroflow(&["make", "circle", "--radius", "1", "--out", p(&c)])), 0);
    let o = entroflow(&["shrinker", "--input", p(&c)]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["classification"]["kind"], "Sphere");
    assert!((r["classification"]["radius"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((r["l2_residual"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    assert_eq!(code(&entroflow(&["make", "circle", "--segments", "64", "--out", p(&c)])), 0);
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("input = {:?}\nt_end = 0.1\nscheme = \"explicit\"\n", p(&c))).unwrap();
    let run = dir.path().join("run");
    let o = entroflow(&["--config", p(&cfg), "flow", "--out", p(&run), "--t-end", "0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&run.join("summary.json"));
    assert!((s["final_time"].as_f64().unwrap() - 0.05).abs() < 1e-12);
    assert_eq!(s["controls"]["scheme"], "explicit");

    std::fs::write(&cfg, "t_end = 0.1\nwhatever = 3\n").unwrap();
    assert_eq!(code(&entroflow(&["--config", p(&cfg), "flow", "--input", p(&c), "--out", p(&run)])), 2);
    let missing = dir.path().join("nope.toml");
    assert_eq!(code(&entroflow(&["--config", p(&missing), "stone"])), 3);
    assert_eq!(code(&entroflow(&["flow", "--input", p(&c), "--out", p(&run), "--scheme", "rk4"])), 2);
    assert_eq!(code(&entroflow(&["flow", "--input", p(&c), "--out", p(&run), "--cfl", "3"])), 2);
}

#[test]
fn thread_cap_and_verify() {
    let bad = Command::new(env!("CARGO_BIN_EXE_entroflow"))
        .args(["stone", "--to", "2"])
        .env("ENTROFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = Command::new(env!("CARGO_BIN_EXE_entroflow"))
        .args(["verify", "entropy-invariance", "--out", p(&out)])
        .env("ENTROFLOW_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 6);
}
