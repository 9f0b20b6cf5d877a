//! Golden-file regression: one N = 200 campaign per command, compared
//! byte for byte. Set `SIMPLY_UPDATE_GOLDEN=1` to regenerate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn quick_config() -> PathBuf {
    manifest().join("../../configs/quick.toml")
}

fn run(cmd: &str, out: &Path, extra: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_simply"))
        .arg(cmd)
        .arg("--config")
        .arg(quick_config())
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn check_golden(cmd: &str, expected: &[&str]) {
    let tmp = tempfile::tempdir().unwrap();
    let res = run(cmd, tmp.path(), &[]);
    assert!(res.status.success(), "{cmd}: {}", String::from_utf8_lossy(&res.stderr));

    let mut produced: Vec<String> =
        fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    produced.sort();
    let mut want: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    want.sort();
    assert_eq!(produced, want);

    let golden = manifest().join("tests/golden").join(cmd);
    let update = std::env::var_os("SIMPLY_UPDATE_GOLDEN").is_some();
    if update {
        fs::create_dir_all(&golden).unwrap();
    }
    for name in expected {
        let got = fs::read(tmp.path().join(name)).unwrap();
        let path = golden.join(name);
        if update {
            fs::write(&path, &got).unwrap();
        } else {
            let want = fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
            assert!(got == want, "{cmd}: {name} differs from golden copy");
        }
    }
}

#[test]
fn characterize_golden() {
    check_golden("characterize", &["characterize_rt.csv", "characterize_delta_ic.csv", "characterize_wer.csv"]);
}

#[test]
fn read_golden() {
    check_golden("read", &["read_distributions.csv", "read_summary.json"]);
}

#[test]
fn gate_golden() {
    check_golden("gate", &["gate_report.csv"]);
}

#[test]
fn sweep_golden() {
    check_golden("sweep", &["sweep_read.csv", "vset_targets.csv", "sweep_wer.csv", "sweep_full.csv"]);
}

#[test]
fn temperature_golden() {
    check_golden("temperature", &["temperature.csv"]);
}

#[test]
fn calibrate_golden() {
    check_golden("calibrate", &["calibration.json"]);
}
