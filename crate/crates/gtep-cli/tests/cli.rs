//! Exit-code contract and surface behavior of the binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_gtep")
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../gtep/data")
        .join(file)
}

fn run(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn mkm_without_k2_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let hist = data("desk_history_14d.csv");
    let (code, _, err) = run(
        dir.path(),
        &["cluster", "--in", hist.to_str().unwrap(), "--method", "mkm", "--k1", "3"],
    );
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("--k2"), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(dir.path(), &["cluster", "--nonsense"]);
    assert_eq!(code, 2);
}

#[test]
fn bad_system_file_exits_2_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("broken.toml");
    std::fs::write(&sys, "name = \"x\"\n[options]\nreference_bus = \"b9\"\n").unwrap();
    let rd = dir.path().join("rd.csv");
    std::fs::write(&rd, "rep_day,weight,zone,feature,hour,value_pu\n").unwrap();
    let (code, _, err) = run(
        dir.path(),
        &[
            "solve",
            "--system",
            sys.to_str().unwrap(),
            "--repdays",
            rd.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("broken.toml"), "{err}");
}

#[test]
fn k_above_day_count_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(
        dir.path(),
        &[
            "evaluate",
            "--system",
            data("desk3.toml").to_str().unwrap(),
            "--history",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--k-grid",
            "40",
        ],
    );
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("14"), "{err}");
}

#[test]
fn tkm_k1_single_mean_day() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(
        dir.path(),
        &[
            "cluster",
            "--in",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--method",
            "tkm",
            "--k",
            "1",
            "--out",
            "c",
        ],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("1 representative"), "{out}");
    let summary = std::fs::read_to_string(dir.path().join("c/summary.txt")).unwrap();
    assert!(summary.contains("weight 14"), "{summary}");
}

#[test]
fn mkm_5_by_2_yields_10_days() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(
        dir.path(),
        &[
            "cluster",
            "--in",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--method",
            "mkm",
            "--k1",
            "5",
            "--k2",
            "2",
            "--seed",
            "1",
            "--out",
            "c",
        ],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("10 representative"), "{out}");
}

#[test]
fn export_writes_file_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(
        dir.path(),
        &[
            "cluster",
            "--in",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--method",
            "tkm",
            "--k",
            "2",
            "--seed",
            "1",
            "--out",
            "c",
        ],
    );
    assert_eq!(code, 0, "{err}");
    let (code, out, err) = run(
        dir.path(),
        &[
            "solve",
            "--system",
            data("desk3.toml").to_str().unwrap(),
            "--repdays",
            "c/repdays.csv",
            "--export",
            "model.lp",
            "--out",
            "s",
        ],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("exported"), "{out}");
    assert!(dir.path().join("model.lp").exists());
    assert!(!dir.path().join("s/plan.csv").exists(), "must not solve");
}

#[test]
fn config_file_supplies_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("defaults.toml"),
        "[defaults]\nout = \"from-config\"\n",
    )
    .unwrap();
    let (code, _, err) = run(
        dir.path(),
        &[
            "cluster",
            "--config",
            "defaults.toml",
            "--in",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--method",
            "tkm",
            "--k",
            "2",
        ],
    );
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("from-config/repdays.csv").exists());
}

#[test]
fn parallel_jobs_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    for (jobs, out) in [("1", "a"), ("3", "b")] {
        let (code, _, err) = run(
            dir.path(),
            &[
                "evaluate",
                "--system",
                data("desk3.toml").to_str().unwrap(),
                "--history",
                data("desk_history_14d.csv").to_str().unwrap(),
                "--k-grid",
                "2",
                "--methods",
                "tkm,mkm",
                "--seed-list",
                "1,2",
                "--jobs",
                jobs,
                "--out",
                out,
            ],
        );
        assert_eq!(code, 0, "{err}");
    }
    // Wall times differ run to run; every value column must not.
    for file in ["cost_vs_k.csv", "error_vs_k.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} depends on --jobs");
    }
    let strip_times = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                l.split(',')
                    .enumerate()
                    .filter(|(i, _)| ![7usize, 8].contains(i))
                    .map(|(_, f)| f.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    };
    assert_eq!(
        strip_times(&dir.path().join("a/rows.csv")),
        strip_times(&dir.path().join("b/rows.csv")),
        "rows.csv values depend on --jobs"
    );
}

#[test]
fn exact_only_writes_exact_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(
        dir.path(),
        &[
            "evaluate",
            "--system",
            data("desk3.toml").to_str().unwrap(),
            "--history",
            data("desk_history_14d.csv").to_str().unwrap(),
            "--k-grid",
            "2",
            "--exact-only",
            "--out",
            "ev",
        ],
    );
    assert_eq!(code, 0, "{err}");
    let exact = std::fs::read_to_string(dir.path().join("ev/exact.csv")).unwrap();
    assert!(exact.starts_with("ct_exact,"), "{exact}");
    assert!(!dir.path().join("ev/table.csv").exists());
}
