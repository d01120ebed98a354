use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_levy-triple");

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn csv_rows(s: &str) -> Vec<Vec<String>> {
    s.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn golden_csv_contract() {
    let out = cli(&["run", "--config", golden("brownian_small.json").to_str().unwrap()]);
    let (stdout, stderr) = text(&out);
    assert!(out.status.success(), "{stderr}");
    let got = csv_rows(&stdout);
    let want = csv_rows(&std::fs::read_to_string(golden("brownian_small.csv")).unwrap());
    assert_eq!(got[0], ["a1", "a2", "T", "t", "value", "error_estimate", "method", "runtime"]);
    assert_eq!(got[0], want[0]);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want).skip(1) {
        assert_eq!(g[..4], w[..4]);
        assert_eq!(g[6], w[6]);
        for k in [4, 5] {
            let (a, b): (f64, f64) = (g[k].parse().unwrap(), w[k].parse().unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3), "column {k}: {a} vs {b}");
        }
        assert!(g[7].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn sidecar_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("first.csv");
    let cfg = golden("brownian_small.json");
    let o = cli(&["run", "--config", cfg.to_str().unwrap(), "--threads", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o).1);
    let side = dir.path().join("first.csv.scheme.json");
    let sidecar: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert!(sidecar["scheme"]["xi"].is_object());
    assert_eq!(sidecar["config"]["scheme"]["ne"], 6.0);
    let again = dir.path().join("second.csv");
    let o = cli(&["run", "--config", side.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o).1);
    let a = csv_rows(&std::fs::read_to_string(&out).unwrap());
    let b = csv_rows(&std::fs::read_to_string(&again).unwrap());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x[..7], y[..7]);
    }
}

#[test]
fn json_output_matches_csv() {
    let cfg = golden("brownian_small.json");
    let c = cli(&["run", "--config", cfg.to_str().unwrap()]);
    let j = cli(&["run", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(c.status.success() && j.status.success());
    let rows = csv_rows(&text(&c).0);
    let v: serde_json::Value = serde_json::from_str(&text(&j).0).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len() + 1, rows.len());
    for (r, x) in rows.iter().skip(1).zip(arr) {
        assert_eq!(r[4].parse::<f64>().unwrap(), x["value"].as_f64().unwrap());
        assert_eq!(r[6], x["method"].as_str().unwrap());
    }
}

#[test]
fn empty_grid_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "empty.json",
        r#"{"model":{"kind":"brownian","sigma":1},"query":{"T":0.25,"t":0.1,"a1":[0],"a2":[]}}"#,
    );
    let o = cli(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).1.contains("query.a2"), "{}", text(&o).1);
}

#[test]
fn bad_field_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"model":{"kind":"kobol","nu":1.2,"lambda_minus":-2,"lambda_plus":1,"m2":"x"},"query":{"T":0.25,"t":0.1,"a1":[0],"a2":[0.1]}}"#,
    );
    let o = cli(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).1.contains("model"), "{}", text(&o).1);
}

#[test]
fn rejected_queries_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "drift.json",
        r#"{"model":{"kind":"kobol","nu":0.6,"lambda_minus":-2,"lambda_plus":1,"mu":0.05,"m2":0.1},
            "query":{"T":0.25,"t":0.1,"a1":[-0.05,0.0],"a2":[0.05]},"method":"sinh"}"#,
    );
    let o = cli(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = text(&o).1;
    assert!(err.contains("2 of 2 queries rejected"), "{err}");
    assert!(err.contains("a1=-0.05") && err.contains("a1=0"), "{err}");
}

#[test]
fn unknown_method_flag_fails() {
    let o = cli(&["run", "--config", golden("brownian_small.json").to_str().unwrap(), "--method", "fast"]);
    assert!(!o.status.success());
}

#[test]
fn bench_reports_the_benchmark_row() {
    let o = cli(&["bench", "--nu", "1.2", "--method", "sinh", "--ne", "8", "--format", "csv"]);
    let (stdout, stderr) = text(&o);
    assert!(o.status.success(), "{stderr}");
    let rows = csv_rows(&stdout);
    assert_eq!(rows[0][..3], ["nu", "method", "ne"]);
    let max_err: f64 = rows[1][7].parse().unwrap();
    assert!(max_err <= 5e-6, "{max_err}");
    let per_point: f64 = rows[1][10].parse().unwrap();
    assert!(per_point > 0.0);
    let md = cli(&["bench", "--nu", "0.5", "--method", "sinh", "--ne", "4"]);
    assert!(md.status.success());
    assert!(text(&md).0.starts_with("| nu | method |"));
    let bad = cli(&["bench", "--nu", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oracle_is_reproducible() {
    let cfg = golden("brownian_small.json");
    let args = ["oracle", "--config", cfg.to_str().unwrap(), "--seed", "7", "--paths", "2000", "--steps", "200", "--sampler", "gaussian"];
    let a = cli(&args);
    let b = cli(&args);
    assert!(a.status.success(), "{}", text(&a).1);
    let ra = csv_rows(&text(&a).0);
    let rb = csv_rows(&text(&b).0);
    assert_eq!(ra[0], ["a1", "a2", "T", "t", "estimate", "std_error", "exact", "sampler", "runtime"]);
    for (x, y) in ra.iter().zip(&rb).skip(1) {
        assert_eq!(x[..8], y[..8]);
        let (e, s, ex): (f64, f64, f64) = (x[4].parse().unwrap(), x[5].parse().unwrap(), x[6].parse().unwrap());
        // 200 steps leave a visible skeleton bias; only a loose check here
        assert!((e - ex).abs() < 5.0 * s + 0.05, "{e} vs {ex}");
    }
}

#[test]
fn whf_dump_satisfies_identity() {
    let cfg = golden("brownian_small.json");
    let o = cli(&["whf-dump", "--config", cfg.to_str().unwrap(), "--q", "2", "--q", "5+3i", "--xi", "-5:1:5"]);
    assert!(o.status.success(), "{}", text(&o).1);
    let rows = csv_rows(&text(&o).0);
    assert_eq!(rows.len(), 1 + 2 * 11);
    for r in rows.iter().skip(1) {
        assert!(r[7].parse::<f64>().unwrap() < 1e-10, "{r:?}");
    }
}
