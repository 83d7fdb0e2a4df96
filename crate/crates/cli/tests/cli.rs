use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subspectra"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("subspectra-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run(args: &[&str], out: &Path) -> i32 {
    let st = bin().args(args).arg("--out").arg(out).output().unwrap();
    st.status.code().unwrap()
}

#[test]
fn repeated_runs_give_identical_csv() {
    let cfg = configs().join("example.json");
    let cfg = cfg.to_str().unwrap();
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["--config", cfg, "spectral", "--omega-count", "50", "--windows", "8"], "spectral.csv"),
        (vec!["--config", cfg, "--seed", "7", "spectral", "--omega-count", "20", "--windows", "8"], "spectral.csv"),
        (vec!["dioph", "sequence", "--poly", "1,-1,-3", "--n", "60"], "dioph-sequence.csv"),
        (vec!["bernoulli", "scan", "--poly", "1,-1,-3", "--p", "0.3", "--n-max", "20"], "bernoulli-scan.csv"),
    ];
    for (args, file) in cases {
        let out = scratch("det");
        assert_eq!(run(&args, &out), 0, "{args:?}");
        let first = std::fs::read(out.join(file)).unwrap();
        let manifest1: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join(file.replace(".csv", ".manifest.json"))).unwrap()).unwrap();
        assert_eq!(run(&args, &out), 0);
        let second = std::fs::read(out.join(file)).unwrap();
        let manifest2: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out.join(file.replace(".csv", ".manifest.json"))).unwrap()).unwrap();
        assert_eq!(manifest1["parameters"], manifest2["parameters"]);
        assert_eq!(manifest1["config_hash"], manifest2["config_hash"]);
        assert!(first == second, "{file} differs between runs");
        let _ = std::fs::remove_dir_all(&out);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = configs().join("example.json");
    let cfg = cfg.to_str().unwrap();
    let a = scratch("t1");
    let b = scratch("t4");
    let args = ["--config", cfg, "spectral", "--omega-count", "40", "--windows", "8"];
    assert_eq!(run(&[&["--threads", "1"], &args[..]].concat(), &a), 0);
    assert_eq!(run(&[&["--threads", "4"], &args[..]].concat(), &b), 0);
    assert_eq!(std::fs::read(a.join("spectral.csv")).unwrap(), std::fs::read(b.join("spectral.csv")).unwrap());
}

#[test]
fn exit_codes() {
    let out = scratch("codes");
    let fib = configs().join("fibonacci.toml");
    assert_eq!(run(&["--config", fib.to_str().unwrap(), "flow", "log-holder"], &out), 2);
    assert_eq!(run(&["dioph", "windows", "--poly", "1,-1,-1", "--n", "20"], &out), 2);
    assert_eq!(run(&["bernoulli", "scan", "--poly", "1,-1,-3", "--p", "1.5"], &out), 4);
    let bad = out.join("bad.json");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(&bad, "{\n \"alphabet\": 2,\n \"images\": [\"12\" \"1\"]\n}").unwrap();
    let o = bin().args(["--config", bad.to_str().unwrap(), "inspect", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(run(&["inspect"], &out), 4);
}

#[test]
fn empty_grid_is_header_only() {
    let out = scratch("empty");
    let cfg = configs().join("example.json");
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "spectral", "--omega-count", "0"], &out), 0);
    let text = std::fs::read_to_string(out.join("spectral.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("omega,status,"));
}

#[test]
fn inspect_reports_matrix_and_class() {
    let out = scratch("inspect");
    let cfg = configs().join("example.json");
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "inspect"], &out), 0);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("inspect.json")).unwrap()).unwrap();
    assert_eq!(r["matrix"], serde_json::json!([[1, 1], [3, 0]]));
    assert_eq!(r["classification"]["kind"], "HasConjugateOutside");
    assert!((r["theta"].as_f64().unwrap() - 2.302776).abs() < 1e-6);
    let fib = configs().join("fibonacci.toml");
    assert_eq!(run(&["--config", fib.to_str().unwrap(), "inspect"], &out), 0);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("inspect.json")).unwrap()).unwrap();
    assert_eq!(r["classification"]["kind"], "PV");
}

#[test]
fn cocycle_at_zero_time_is_zero() {
    let out = scratch("coc");
    let cfg = configs().join("symmetric.json");
    assert_eq!(run(&["--config", cfg.to_str().unwrap(), "flow", "cocycle", "--anchors", "2", "--times", "0"], &out), 0);
    let text = std::fs::read_to_string(out.join("flow-cocycle.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0);
    }
}
