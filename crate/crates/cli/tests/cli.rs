use std::path::Path;
use std::process::{Command, Output};

use csq_cli::config::Level;
use csq_cli::output::{read_table, sidecar_path, Meta};
use csq_cli::verify::{verify, Builders};
use csq_core::well::{op_position, BlockOperator};
use csq_core::Parameters;

fn csq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csq"))
        .args(args)
        .env_remove("CSQ_DEFAULT_TOL")
        .output()
        .expect("csq runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = csq(&[
        "well",
        "op",
        "--which",
        "q",
        "--size",
        "4",
        "--theta",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_table(&out).unwrap();
    assert_eq!(header, ["n", "n_prime", "kappa", "re", "im"]);
    assert_eq!(rows.len(), 32);
    let meta = Meta::parse(&std::fs::read_to_string(sidecar_path(&out)).unwrap());
    assert_eq!(meta.get("which"), Some("q"));
    assert_eq!(meta.get("size"), Some("4"));
    assert_eq!(meta.get("spin_structure"), Some("Sigma0"));
    let theta: f64 = meta.get("theta").unwrap().parse().unwrap();
    assert_eq!(theta, 0.5);
    assert!(meta.get("neglected_coupling_max").is_some());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);
}

#[test]
fn stdout_when_no_output_path() {
    let o = csq(&["circle", "spectrum", "--which", "p", "--size", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with("-1.0000000000000000e0"));
}

#[test]
fn system_flag_equals_positional_word() {
    let a = csq(&["well", "spectrum", "--which", "p", "--size", "3"]);
    let b = csq(&["spectrum", "--system", "well", "--which", "p", "--size", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn environment_tolerance_only_as_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_csq"));
        cmd.args(["well", "norm", "--grid", "1:2:2,0:1:2", "--out", out.to_str().unwrap()]);
        cmd.args(extra);
        match env {
            Some(v) => cmd.env("CSQ_DEFAULT_TOL", v),
            None => cmd.env_remove("CSQ_DEFAULT_TOL"),
        };
        assert!(cmd.status().unwrap().success());
        let meta = Meta::parse(&std::fs::read_to_string(sidecar_path(&out)).unwrap());
        meta.get("tol").unwrap().parse::<f64>().unwrap()
    };
    assert_eq!(run(&[], None), 1e-16);
    assert_eq!(run(&[], Some("1e-10")), 1e-10);
    assert_eq!(run(&["--tol", "1e-12"], Some("1e-10")), 1e-12);
}

#[test]
fn invalid_configurations_exit_2() {
    let cases: [&[&str]; 8] = [
        &["well", "op", "--which", "shift"],
        &["circle", "op", "--which", "q", "--theta", "2"],
        &["well", "op", "--which", "q", "--epsilon", "2"],
        &["well", "op", "--which", "q", "--time", "1"],
        &["well", "op", "--which", "q", "--size", "0"],
        &["well", "symbol", "--which", "q", "--grid", "0:1:5,-1:1:5"],
        &["well", "spectrum", "--which", "q", "--theta", "-1"],
        &["well", "teleport"],
    ];
    for args in cases {
        let o = csq(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    let o = csq(&[
        "well",
        "op",
        "--which",
        "p",
        "--size",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    assert!(!Path::new(&out).exists());
}

#[test]
fn accumulation_guard_is_a_warning() {
    let o = csq(&[
        "well",
        "spectrum",
        "--which",
        "commutator",
        "--theta",
        "10",
        "--size",
        "48",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("WARN"));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 97);
}

#[test]
fn verify_fast_passes() {
    let o = csq(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    assert!(!text.contains("FAIL"));
}

fn flipped_position(params: &Parameters, n: usize) -> csq_core::Result<BlockOperator> {
    Ok(op_position(params, n)?.scale(-1.0))
}

#[test]
fn verify_catches_a_broken_builder() {
    let builders = Builders {
        position: flipped_position,
        ..Builders::default()
    };
    let report = verify(Level::Fast, &builders);
    assert!(!report.passed());
    let failed: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
    assert!(failed.contains(&"position oracle"), "{failed:?}");
    let line = report
        .lines()
        .into_iter()
        .find(|l| l.contains("position oracle"))
        .unwrap();
    assert!(line.starts_with("FAIL") && line.contains("mismatch"));
    assert!(verify(Level::Fast, &Builders::default()).passed());
}
