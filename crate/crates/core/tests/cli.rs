use std::path::Path;
use std::process::Command;

use phaselift::experiment::git_blob_sha256;
use phaselift::experiment::output::config_echo;

fn phaselift(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_phaselift"))
        .args(args)
        .env("PHASELIFT_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn header(csv: &str) -> Vec<String> {
    csv.lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect()
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "experiment = \"snr-sweep\"\nn = 8\ntrials = 2\nnoise = \"gaussian\"\nsnr-db = [10.0, 30.0]\nseed = 42\n",
    )
    .unwrap();
    let run = |out: &Path, threads: &str| {
        let o = phaselift(
            &[
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.csv"), "1");
    let b = run(&dir.path().join("b.csv"), "4");
    assert_eq!(a, b);
    let timing = std::fs::read_to_string(dir.path().join("a.csv.timing.csv")).unwrap();
    assert_eq!(timing.lines().count(), 1 + 4);
}

#[test]
fn csv_header_carries_schema_config_and_hash() {
    let o = phaselift(
        &[
            "--experiment",
            "rip1-study",
            "--n",
            "4,6",
            "--m-over-n",
            "4,2",
            "--trials",
            "2",
            "--samples",
            "5",
        ],
        "2",
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "# phaselift-csv schema=1 experiment=rip1-study"
    );
    let hash_line = lines.next().unwrap();
    let echo = config_echo(&csv);
    assert_eq!(
        hash_line,
        format!("# config-sha256 {}", git_blob_sha256(echo.as_bytes()))
    );
    assert!(echo.contains("n = [4, 6]"));

    // rows strictly ordered by (n, m)
    let keys: Vec<(usize, usize)> = data_rows(&csv)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(keys, vec![(4, 8), (4, 16), (6, 12), (6, 24)]);
}

#[test]
fn summary_rows_recompute_from_trial_rows() {
    let o = phaselift(
        &[
            "--experiment",
            "oversampling-sweep",
            "--n",
            "8",
            "--m-over-n",
            "4,6",
            "--trials",
            "3",
            "--noise",
            "poisson",
        ],
        "2",
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let cols = header(&csv);
    let col = |name: &str| cols.iter().position(|c| c == name).unwrap();
    let mut group: Vec<Vec<String>> = Vec::new();
    let mut summaries = 0;
    for row in data_rows(&csv) {
        if row[col("kind")] == "trial" {
            assert_eq!(row[col("status")], "ok");
            assert!(row[col("rel_mse")].parse::<f64>().unwrap() >= 0.0);
            group.push(row);
            continue;
        }
        summaries += 1;
        assert_eq!(row[col("trial")].parse::<usize>().unwrap(), group.len());
        for name in ["rel_mse", "rel_mse_debiased", "rel_rms", "rel_rms_debiased"] {
            let mean = group
                .iter()
                .map(|r| r[col(name)].parse::<f64>().unwrap())
                .sum::<f64>()
                / group.len() as f64;
            let emitted: f64 = row[col(name)].parse().unwrap();
            assert!(
                (mean - emitted).abs() <= 1e-12,
                "{name}: {mean} vs {emitted}"
            );
        }
        group.clear();
    }
    assert_eq!(summaries, 2);
}

#[test]
fn noiseless_sweep_recovers_exactly() {
    let o = phaselift(
        &[
            "--experiment",
            "snr-sweep",
            "--n",
            "16",
            "--snr-db",
            "inf",
            "--trials",
            "1",
        ],
        "1",
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let cols = header(&csv);
    let rel = cols.iter().position(|c| c == "rel_mse").unwrap();
    let mse: f64 = data_rows(&csv)[0][rel].parse().unwrap();
    assert!(mse <= 1e-6, "rel_mse {mse}");
}

#[test]
fn f_curves_and_certificate_schemas() {
    let o = phaselift(&["--experiment", "f-curves", "--samples", "1000"], "2");
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        header(&csv),
        ["field", "t", "f_closed", "mc_mean", "mc_stderr"]
    );
    assert_eq!(data_rows(&csv).len(), 101);

    let o = phaselift(
        &[
            "--experiment",
            "certificate-study",
            "--n",
            "16",
            "--m-over-n",
            "2,20",
            "--trials",
            "3",
        ],
        "2",
    );
    let csv = String::from_utf8(o.stdout).unwrap();
    let cols = header(&csv);
    let pr = cols.iter().position(|c| c == "pass_rate").unwrap();
    for row in data_rows(&csv) {
        let rate: f64 = row[pr].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(
        phaselift(&["--experiment", "snr-sweep", "--trials", "0"], "1")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        phaselift(&["--experiment", "warp"], "1").status.code(),
        Some(2)
    );
    assert_eq!(
        phaselift(&["--experiment", "f-curves", "--bogus"], "1")
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        phaselift(&["--experiment", "f-curves"], "many")
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"rip1-study\"\nm-over-n = 0.5\n").unwrap();
    assert_eq!(
        phaselift(&["--config", cfg.to_str().unwrap()], "1")
            .status
            .code(),
        Some(2)
    );
}
