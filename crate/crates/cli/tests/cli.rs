use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const CHAIN: &str = r#"{"nodes":[{"id":"A","x":0,"y":0,"radios":1},{"id":"M","x":200,"y":0,"radios":1},{"id":"D","x":400,"y":0,"radios":1}],
 "channels":1,"comm_range":250,"interference_range":500,"commodities":[{"src":"A","dst":"D","demand":1}]}"#;

const BAD: &str = r#"{"nodes":[{"id":"A","x":0,"y":0,"radios":1},{"id":"B","x":100,"y":0,"radios":1}],
 "channels":1,"comm_range":250,"interference_range":200,"commodities":[{"src":"A","dst":"B","demand":1}]}"#;

const SMALL: &[&str] = &["--generate", "n=7", "area=500", "commodities=2", "seed=11"];

fn mrmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrmc"))
        .args(args)
        .env_remove("MRMC_LOG")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_ok(args: &[&str]) -> Output {
    let out = mrmc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn bound_on_chain() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "chain3.json", CHAIN);
    let out = run_ok(&["bound", "--input", &input]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "EE* = 0.5");
}

#[test]
fn invalid_topology_names_the_invariant() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "bad.json", BAD);
    let out = mrmc(&["validate", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interference_range"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mrmc(&["sweep", "--bogus"]).status.code(), Some(2));
    assert_eq!(mrmc(&["frobnicate"]).status.code(), Some(2));
    let both = mrmc(&["solve", "--input", "x.json", "--generate", "n=5"]);
    assert_eq!(both.status.code(), Some(2));
    assert_eq!(mrmc(&["sweep", "--generate", "n=5", "--channels", "3..1"]).status.code(), Some(2));
}

#[test]
fn solve_chain_row() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "chain3.json", CHAIN);
    let out = dir.path().join("out");
    run_ok(&["solve", "--input", &input, "--out", out.to_str().unwrap(), "--no-timing"]);
    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(
        text,
        "channels,radios,capacity,E,E0,throughput,EE,EE_star,EE_fraction,status,wall_ms\n\
         1,1,0.5,1,0.01,0.5,0.495049505,0.5,0.99009901,ok,\n"
    );
    assert!(out.join("results.json").exists() && out.join("manifest.json").exists());
}

#[test]
fn sweep_outputs_agree_and_repeat() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["sweep"];
        args.extend_from_slice(SMALL);
        args.extend_from_slice(&["--channels", "1..2", "--radios", "1..2", "--no-timing", "--out", out.to_str().unwrap()]);
        run_ok(&args);
        out
    };
    let first = run("a");
    let second = run("b");
    let csv_a = fs::read(first.join("results.csv")).unwrap();
    assert_eq!(csv_a, fs::read(second.join("results.csv")).unwrap());

    let (header, rows) = csv_rows(&first.join("results.csv"));
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 4);
    let json: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(first.join("results.json")).unwrap()).unwrap();
    assert_eq!(json.len(), rows.len());
    for (row, obj) in rows.iter().zip(&json) {
        assert_eq!(row[9], "ok");
        for (i, name) in header.iter().enumerate().take(9) {
            let from_csv: f64 = row[i].parse().unwrap();
            assert_eq!(Some(from_csv), obj[name.as_str()].as_f64(), "{name}");
        }
        let fraction: f64 = row[8].parse().unwrap();
        assert!(fraction <= 1.0 + 1e-6);
        assert!(row[10].is_empty() && obj["wall_ms"].is_null());
        assert!(obj["plan"].is_object());
    }

    for svg in ["heatmap_capacity.svg", "heatmap_ee.svg"] {
        let text = fs::read_to_string(first.join(svg)).unwrap();
        assert!(text.starts_with("<svg"));
        assert_eq!(text.matches("data-channels=").count(), 4);
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");
}

#[test]
fn relax_writes_curve() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r");
    let mut args = vec!["relax"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(&["--channels", "2", "--radios", "1", "--rho", "0.25,0.5,1", "--out", out.to_str().unwrap()]);
    run_ok(&args);
    let (header, rows) = csv_rows(&out.join("relax.csv"));
    assert_eq!(header[0], "rho");
    let energy: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(energy.len(), 3);
    assert!(energy.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{energy:?}");
}
