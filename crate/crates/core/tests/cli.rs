use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

const BIN: &str = env!("CARGO_BIN_EXE_quincunx");

fn quincunx(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn run_writes_variance_table() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = quincunx(&["run", "--out", out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(dir.path().join("variance.csv")).unwrap();
    assert!(text.starts_with("# quincunx "));
    assert!(text.contains("# lattice overall: pass"));
    let (header, rows) = read_table(&dir.path().join("variance.csv"));
    assert_eq!(header, ["step", "qw", "rw", "qw_g=0.01"]);
    assert_eq!(rows.len(), 16);
    for (m, row) in rows.iter().enumerate() {
        assert_eq!(row[0], m as f64);
    }
    assert!((rows[0][1] - 0.5).abs() < 5e-3);
    let (phase_header, phase_rows) = read_table(&dir.path().join("phase_distribution.csv"));
    assert_eq!(&phase_header[..3], ["step", "k", "theta_k"]);
    assert_eq!(phase_rows.len(), 16 * 31);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["run", "--steps", "6", "--rw-mode", "monte_carlo", "--n-traj", "500", "--seed", "3", "--out", out];
    assert!(quincunx(&args).status.success());
    let first = fs::read(dir.path().join("variance.csv")).unwrap();
    let first_phase = fs::read(dir.path().join("phase_distribution.csv")).unwrap();
    assert!(quincunx(&args).status.success());
    assert_eq!(first, fs::read(dir.path().join("variance.csv")).unwrap());
    assert_eq!(first_phase, fs::read(dir.path().join("phase_distribution.csv")).unwrap());
}

#[test]
fn validate_reports_and_sets_exit_code() {
    let ok = quincunx(&["validate"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.contains("support") && text.contains("photon_bound"));

    let bad = quincunx(&["validate", "--alpha", "6", "--d", "37"]);
    assert_eq!(bad.status.code(), Some(1));

    let refused = quincunx(&["run", "--alpha", "6", "--d", "37", "--steps", "1", "--out", "/nonexistent/x"]);
    assert_eq!(refused.status.code(), Some(2));
}

#[test]
fn config_file_is_read_and_unknown_keys_rejected() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("res");
    let good = dir.path().join("good.toml");
    fs::write(
        &good,
        format!("alpha = 3.0\nd = 14\nfock_levels = 32\nsteps = 4\ng_values = [0.0]\nout = {:?}\n", out),
    )
    .unwrap();
    let res = quincunx(&["run", good.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_table(&out.join("variance.csv"));
    assert_eq!(header, ["step", "qw", "rw"]);
    assert_eq!(rows.len(), 5);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "alpha = 3.0\nstepz = 4\n").unwrap();
    let res = quincunx(&["run", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("stepz"));
}

#[test]
fn dump_dist_writes_both_distributions() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = quincunx(&["dump-dist", "--step", "3", "--steps", "3", "--g", "0", "--out", out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_table(&dir.path().join("phase_step3.csv"));
    assert_eq!(header, ["k", "theta_k", "qw", "rw"]);
    assert_eq!(rows.len(), 31);
    for col in 2..4 {
        let total: f64 = rows.iter().map(|r| r[col]).sum();
        assert!(total <= 1.0 + 1e-10 && total > 0.5);
    }
    let (_, qpd) = read_table(&dir.path().join("qpd_step3.csv"));
    let dx = qpd[1][0] - qpd[0][0];
    let mass: f64 = qpd.iter().map(|r| r[1]).sum::<f64>() * dx;
    assert!((mass - 1.0).abs() < 1e-3);
}

#[test]
fn sweep_variance_falls_with_loss() {
    let dir = tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = quincunx(&["sweep", "--steps", "10", "--g", "0.02,0,0.005", "--out", out]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_table(&dir.path().join("sweep.csv"));
    assert_eq!(header.len(), 12);
    let gs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(gs, [0.0, 0.005, 0.02]);
    for w in rows.windows(2) {
        assert!(w[1][11] <= w[0][11]);
    }
}
