use std::path::Path;
use std::process::{Command, Output};

const PHANTOM_256_SHA256: &str = "c24285573c63038edf813e8fb8e7e3919930b74d644282effc487c8fed1566cc";

fn kdac(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdac"))
        .args(args)
        .current_dir(cwd)
        .env("KDAC_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn phantom_checksum_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdac(&["phantom", "--n", "256", "--out", "."], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(
        stdout(&o).contains(&format!("sha256={PHANTOM_256_SHA256}")),
        "{}",
        stdout(&o)
    );
    assert!(dir.path().join("phantom_v1_n256.kdc").exists());
    assert!(dir.path().join("phantom_v1_n256.png").exists());
}

#[test]
fn mask_command_reports_achieved_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdac(
        &[
            "mask", "--kind", "radial", "--ratio", "0.3", "--n", "256", "--seed", "7",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let achieved: f64 = line
        .split_whitespace()
        .find_map(|t| t.strip_prefix("achieved="))
        .and_then(|v| v.parse().ok())
        .expect("achieved ratio printed");
    assert!((achieved - 0.3).abs() <= 0.01, "{line}");
}

#[test]
fn invalid_parameters_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdac(&["mask", "--kind", "radial", "--ratio", "1.5", "--n", "64"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ratio"), "{}", stderr(&o));

    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"version": 1, "mask": {"kind": "radial", "ratio": 0.3, "seed": 0}, "typo": 1}"#,
    )
    .unwrap();
    let o = kdac(&["recon", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("typo"), "{}", stderr(&o));
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdac(
        &[
            "recon",
            "--input",
            "absent.kdc",
            "--mask-kind",
            "radial",
            "--ratio",
            "0.3",
            "--n",
            "64",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn zero_fill_at_full_sampling_writes_infinite_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdac(
        &[
            "recon",
            "--mask-kind",
            "random2d",
            "--ratio",
            "1.0",
            "--n",
            "64",
            "--solver",
            "zero_fill",
            "--out",
            "run",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("run/metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "{csv}");
    assert!(csv.lines().nth(1).unwrap().contains(",inf,"), "{csv}");
}

#[test]
fn shipped_configs_validate() {
    use kdac_cli::config::{load_json, BenchConfig, ExperimentConfig};
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let recon: ExperimentConfig = load_json(&dir.join("recon_radial.json")).unwrap();
    recon.validate().unwrap();
    let bench: BenchConfig = load_json(&dir.join("bench_small.json")).unwrap();
    bench.validate().unwrap();
}
