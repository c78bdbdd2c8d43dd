use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_otfs-dse"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("otfs_dse_cli_{}_{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_documents_the_noise_convention() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("Eb/N0"));
    assert!(text.contains("base_seed XOR t"));
    for sub in [
        "analyze",
        "sig-nmse",
        "sig-ber",
        "est-nmse-snr",
        "est-nmse-m",
        "est-ber",
        "validate",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn analyze_writes_table_sidecar_and_grid() {
    let dir = scratch("analyze");
    let cfg = write_config(
        &dir,
        "num_subcarriers = 64\nnum_slots = 16\nl_max = 8\nspeeds_kmh = [500.0]\nmodel = \"dd-closed\"\n",
    );
    let csv = dir.join("analyze.csv");
    let out = bin()
        .args(["analyze", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_name,sweep_value,subcarriers,speed_kmh,metric,mean,trial_count,sample_count,seed_first,seed_last"
    );
    assert!(table.contains("max_squint_phase_over_pi"));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("analyze.csv.meta.json")).unwrap()).unwrap();
    assert!(meta.is_object());

    let grid = std::fs::read_to_string(dir.join("analyze.csv.grid.csv")).unwrap();
    assert_eq!(grid.lines().next().unwrap(), "row_index,col_index,real,imag,modulus");
    assert_eq!(grid.lines().count(), 1 + 64 * 16);
}

#[test]
fn worker_count_does_not_change_the_csv() {
    let dir = scratch("workers");
    let cfg = write_config(
        &dir,
        "num_subcarriers = 32\nnum_slots = 16\nl_max = 6\nspeeds_kmh = [500.0]\nsnr_p_db = [30.0, 40.0]\n",
    );
    let run = |workers: &str| {
        let out = bin()
            .args([
                "est-nmse-snr",
                "--trials",
                "6",
                "--seed",
                "77",
                "--workers",
                workers,
                "--config",
            ])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one.lines().count(), 1 + 4);
}

#[test]
fn invalid_configuration_exits_with_status_two() {
    let dir = scratch("invalid");
    let cfg = write_config(&dir, "num_subcarriers = 1\n");
    let out = bin().args(["sig-nmse", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let out = bin()
        .args(["sig-nmse", "--config"])
        .arg(dir.join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_prints_one_line_per_check() {
    let dir = scratch("validate");
    let cfg = write_config(&dir, "exact_subcarriers = 1\n");
    let out = bin()
        .args(["validate", "--trials", "2", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let report = stderr(&out);
    let lines: Vec<&str> = report
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .collect();
    assert!(lines.len() >= 7, "{report}");
    assert!(report.contains("exact_vs_closed_form"));
    let failed = lines.iter().any(|l| l.starts_with("FAIL "));
    assert_eq!(out.status.code(), Some(if failed { 1 } else { 0 }));
    assert!(stdout(&out).contains("exact_vs_closed_form_error"));
}
