use std::path::Path;
use std::process::{Command, Output};

fn memsvib(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memsvib"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next().unwrap();
    lines.map(str::to_owned).collect()
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["sweep", "--axis", "ty", "--bogus"][..], &["nosuch"], &["transient", "--axis", "tx", "--fnorm", "1"]] {
        let o = memsvib(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn divergence_exits_3_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsvib(dir.path(), &["--voltage", "5000", "respcurve", "--start", "1.0", "--end", "1.01"]);
    assert_eq!(o.status.code(), Some(3));
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.txt")).unwrap();
    assert!(diag.contains("diverged"));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsvib(dir.path(), &["sweep", "--axis", "tz", "--start", "1.9", "--end", "2.1", "--step", "0.05", "--fine-width", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("ok")));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary.is_object());
}

#[test]
fn respcurve_writes_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsvib(dir.path(), &["respcurve", "--start", "0.98", "--end", "1.02", "--step", "0.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["respcurve.csv", "jumps.csv", "backbone.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(data_rows(&dir.path().join("respcurve.csv")).len(), 10);
}

#[test]
fn transient_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsvib(dir.path(), &["transient", "--axis", "ty", "--fnorm", "1.05", "--post-cycles", "600"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "cycles.csv", "envelope.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(data_rows(&dir.path().join("cycles.csv")).len() > 1000);
}

#[test]
fn energy_and_plldemo_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsvib(dir.path(), &["energy", "--axis", "ty", "--fnorm", "1.03", "--periods", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!data_rows(&dir.path().join("energy.csv")).is_empty());
    let o = memsvib(dir.path(), &["plldemo", "--periods", "300", "--period-scale", "1.01"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(data_rows(&dir.path().join("pll_history.csv")).len() > 100);
}
