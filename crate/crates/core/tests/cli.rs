mod support;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn aicmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aicmem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = aicmem(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn schema() -> Value {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn all_finite(v: &Value) -> bool {
    v.as_array()
        .is_some_and(|a| !a.is_empty() && a.iter().all(|x| x.as_f64().is_some_and(f64::is_finite)))
}

fn panel(dir: &Path, symbols: usize, days: usize) -> String {
    let d = p(dir);
    ok(&[
        "synth",
        "--kind",
        "panel",
        "--n-symbols",
        &symbols.to_string(),
        "--n-days",
        &days.to_string(),
        "--seed",
        "5",
        "--output-dir",
        d,
    ]);
    p(&dir.join("panel.csv")).to_string()
}

#[test]
fn pipeline_sweep_writes_valid_reports() {
    let tmp = TempDir::new().unwrap();
    let input = panel(tmp.path(), 20, 900);
    let out = tmp.path().join("out");
    let stdout = ok(&[
        "pipeline",
        "--input",
        &input,
        "--output-dir",
        p(&out),
        "--interval",
        "1,5,10,22,44",
        "--plot-data",
    ]);
    assert_eq!(stdout.lines().count(), 5);
    let schema = schema();
    for dt in [1, 5, 10, 22, 44] {
        let report = read_json(&out.join(format!("report_dt{dt}.json")));
        support::schema::validate(&schema, &report).unwrap();
        assert_eq!(report["interval"], dt);
        assert_eq!(report["config"]["intervals"].as_array().unwrap().len(), 5);
        assert!(report["version"].is_string());
        let s = &report["spectrum"];
        for key in ["h", "tau", "alpha", "f_alpha"] {
            assert!(all_finite(&s[key]), "{key}");
        }
        assert!(s["delta_alpha"].as_f64().unwrap().is_finite());
        for name in ["hq", "tau", "falpha"] {
            assert!(out.join(format!("dt{dt}_{name}.dat")).exists());
        }
        assert!(out.join(format!("dt{dt}_fq_q2.dat")).exists());
    }
}

#[test]
fn schema_rejects_broken_reports() {
    let tmp = TempDir::new().unwrap();
    let input = panel(tmp.path(), 5, 400);
    ok(&["pipeline", "--input", &input, "--output-dir", p(tmp.path())]);
    let report = read_json(&tmp.path().join("report_dt1.json"));
    let schema = schema();
    support::schema::validate(&schema, &report).unwrap();

    let mut bad = report.clone();
    bad["dfa"]["regime"] = "chaotic".into();
    assert!(support::schema::validate(&schema, &bad).is_err());
    let mut bad = report.clone();
    bad.as_object_mut().unwrap().remove("spectrum");
    assert!(support::schema::validate(&schema, &bad).is_err());
    let mut bad = report;
    bad["spectrum"]["h"][0] = "x".into();
    assert!(support::schema::validate(&schema, &bad).is_err());
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = TempDir::new().unwrap();
    let d = p(tmp.path());
    ok(&[
        "synth",
        "--kind",
        "white",
        "--length",
        "256",
        "--seed",
        "1",
        "--output-dir",
        d,
    ]);
    let series = tmp.path().join("white.csv");

    let out = aicmem(&["mfdfa", "--input", p(&series), "--q", "-2:4:0", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("aicmem: config:"), "{err}");

    let out = aicmem(&["pipeline", "--input", p(&tmp.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("aicmem: ingest:"));

    let constant = tmp.path().join("const.csv");
    fs::write(&constant, format!("value\n{}", "1.5\n".repeat(64))).unwrap();
    let out = aicmem(&["mfdfa", "--input", p(&constant), "--q", "0:2:1", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("aicmem: fluctuation:"));

    let out = aicmem(&["dfa", "--input", p(&series), "--scales", "4:200:5", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(1));

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "date,A,B\n2020-01-01,1,2\n2020-01-02,x,3\n").unwrap();
    assert_eq!(aicmem(&["validate", "--input", p(&bad)]).status.code(), Some(2));
    assert_eq!(aicmem(&["pipeline"]).status.code(), Some(1));
    assert_eq!(aicmem(&["--help"]).status.code(), Some(0));
}

#[test]
fn dfa_fit_and_spectrum_chain() {
    let tmp = TempDir::new().unwrap();
    let d = p(tmp.path());
    ok(&[
        "synth",
        "--kind",
        "fgn",
        "--hurst",
        "0.7",
        "--length",
        "8192",
        "--seed",
        "3",
        "--output-dir",
        d,
    ]);
    let sidecar = read_json(&tmp.path().join("fgn.json"));
    assert_eq!(sidecar["seed"], 3);
    assert_eq!(sidecar["spec"]["hurst"], 0.7);

    ok(&[
        "dfa",
        "--input",
        p(&tmp.path().join("fgn.csv")),
        "--output-dir",
        d,
        "--plot-data",
    ]);
    assert!(tmp.path().join("dfa_fq_q2.dat").exists());
    let fit: Value = serde_json::from_str(&ok(&[
        "fit",
        "--input",
        p(&tmp.path().join("dfa.csv")),
        "--output-dir",
        d,
    ]))
    .unwrap();
    assert!((fit["exponent"].as_f64().unwrap() - 0.7).abs() < 0.06, "{fit}");
    assert!(fit["stderr"].as_f64().unwrap() >= 0.0);
    assert!(fit["t_c"].is_u64());
    assert!(["single", "two-stage"].contains(&fit["preferred"].as_str().unwrap()));
    assert_eq!(fit["regime"], "long-range-correlated");

    ok(&[
        "mfdfa",
        "--input",
        p(&tmp.path().join("fgn.csv")),
        "--output-dir",
        d,
        "--q",
        "-2:4:0.5",
    ]);
    let csv = fs::read_to_string(tmp.path().join("mfdfa.csv")).unwrap();
    assert!(csv.starts_with("scale,-2,-1.5,-1,-0.5,0,0.5,1,1.5,2,"));
    ok(&[
        "spectrum",
        "--input",
        p(&tmp.path().join("mfdfa.csv")),
        "--output-dir",
        d,
    ]);
    let spec = read_json(&tmp.path().join("spectrum.json"));
    assert!(all_finite(&spec["spectrum"]["alpha"]));
    assert!(spec["spectrum"]["delta_alpha"].as_f64().unwrap() < 0.3);
    let falpha = fs::read_to_string(tmp.path().join("falpha.dat")).unwrap();
    assert_eq!(falpha.lines().filter(|l| !l.starts_with('#')).count(), 13);
}

#[test]
fn aic_of_two_symbols_equals_their_ic() {
    let tmp = TempDir::new().unwrap();
    let input = panel(tmp.path(), 4, 300);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&[
        "aic",
        "--input",
        &input,
        "--output-dir",
        p(&a),
        "--symbols",
        "S001,S003",
        "--interval",
        "1,5",
    ]);
    ok(&[
        "aic",
        "--input",
        &input,
        "--output-dir",
        p(&b),
        "--pair",
        "S001,S003",
        "--interval",
        "1,5",
    ]);
    for dt in [1, 5] {
        let aic = fs::read_to_string(a.join(format!("aic_dt{dt}.csv"))).unwrap();
        let ic = fs::read_to_string(b.join(format!("ic_S001_S003_dt{dt}.csv"))).unwrap();
        assert!(aic.starts_with("index,value\n"));
        assert_eq!(aic.lines().count(), 300 - dt + 1);
        assert_eq!(aic, ic);
    }
    let out = aicmem(&["aic", "--input", &input, "--output-dir", p(&a), "--pair", "S001,S001"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_reports_dropped_rows() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("p.csv");
    fs::write(
        &csv,
        "date,A,B\n2020-01-01,1,2\n2020-01-02,,3\n2020-01-03,2,4\n2020-01-06,3,5\n",
    )
    .unwrap();
    assert_eq!(aicmem(&["validate", "--input", p(&csv)]).status.code(), Some(2));
    let summary: Value =
        serde_json::from_str(&ok(&["validate", "--input", p(&csv), "--missing", "drop-rows"])).unwrap();
    assert_eq!(summary["dropped_rows"], 1);
    assert_eq!(summary["n_dates"], 3);
    assert_eq!(summary["last_date"], "2020-01-06");
}
