use std::path::Path;
use std::process::{Command, Output};

fn monostat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monostat"))
        .args(args)
        .current_dir(dir)
        .env_remove("MONOSTAT_CAPACITY")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn zeta_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["zeta", "--u", "0.6931471805599453", "--levels", "400"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r.len(), 1);
    let zeta: f64 = r[0][2].parse().unwrap();
    // e^{-u/2} / (1 - e^{-u}) at u = ln 2
    assert!((zeta - 2f64.sqrt()).abs() < 1e-14);
    assert_eq!(r[0][4], "false");
}

#[test]
fn empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["grand", "--u", "", "--kind", "monotone"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn user_spectrum_without_tail_is_uncertified() {
    let dir = tempfile::tempdir().unwrap();
    let doc = r#"{"levels": [{"energy": 0.5, "degeneracy": 1}, {"energy": 1.5, "degeneracy": 2}]}"#;
    std::fs::write(dir.path().join("levels.json"), doc).unwrap();
    let o = monostat(dir.path(), &["zeta", "--spectrum", "levels.json", "--beta", "1"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r[0][3], "");
    assert_eq!(r[0][4], "true");
}

#[test]
fn bad_input_exits_with_two_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["grand", "--kind", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["status"], "error");

    let o = monostat(dir.path(), &["coeffs", "--u", "1,2", "--z", "0.1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = monostat(dir.path(), &["appendix"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn capacity_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["grand", "--kind", "full", "--spectrum", "iso:3", "--mode-cutoff", "30", "--nmax", "3", "--u", "1"];
    let o = Command::new(env!("CARGO_BIN_EXE_monostat"))
        .args(args)
        .current_dir(dir.path())
        .env("MONOSTAT_CAPACITY", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
    assert!(monostat(dir.path(), &args).status.success());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"u": [1.0, 2.0], "z": "0.1", "kind": ["monotone"], "out": "z.csv"}"#,
    )
    .unwrap();
    let o = monostat(dir.path(), &["grand", "--config", "run.json", "--u", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    let recorded: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("z.csv.config.json")).unwrap()).unwrap();
    assert_eq!(recorded["command"], "grand");
    assert_eq!(recorded["config"]["u"], serde_json::json!([3.0]));

    std::fs::write(dir.path().join("bad.json"), r#"{"temperature": 1}"#).unwrap();
    assert_eq!(monostat(dir.path(), &["grand", "--config", "bad.json"]).status.code(), Some(2));
}

#[test]
fn engines_agree() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["monotone", "boltzmann", "block-monotone", "weakly-monotone"] {
        let o = monostat(
            dir.path(),
            &[
                "grand",
                "--kind",
                kind,
                "--both-engines",
                "--u",
                "0.5,1.5",
                "--z",
                "0.1,0.4",
                "--mode-cutoff",
                "25",
                "--nmax",
                "5",
            ],
        );
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(rows(&o).iter().all(|r| r.last().unwrap() == "true"));
    }
}

#[test]
fn coefficients_and_basis_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(
        dir.path(),
        &[
            "coeffs",
            "--kind",
            "monotone",
            "--spectrum",
            "two-level:0.4:1.1",
            "--u",
            "1",
            "--z",
            "0.5",
            "--dump-basis",
            "basis.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let basis = std::fs::read_to_string(dir.path().join("basis.csv")).unwrap();
    // vacuum, three one-particle states, three pairs, one triple
    assert_eq!(basis.lines().count(), 1 + 8);
    let r = rows(&o);
    let a: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert_eq!(a[0], 1.0);
    assert!(a[4..].iter().all(|&x| x == 0.0));
}

#[test]
fn bounds_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["bounds", "--u", "lin:0.5:3:4", "--z", "0.2,1"]);
    assert!(o.status.success());
    assert_eq!(rows(&o).len(), 8);
    let o = monostat(dir.path(), &["bounds", "--r-path", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&o).len(), 6);
}

#[test]
fn scan_orders_rows_by_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["scan", "--kind", "boltzmann,monotone", "--u", "1", "--z", "0.1,0.5"]);
    assert!(o.status.success());
    let kinds: Vec<String> = rows(&o).iter().map(|r| r[2].clone()).collect();
    assert_eq!(kinds, ["boltzmann", "monotone", "boltzmann", "monotone"]);
}

#[test]
fn appendix_and_fock_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = monostat(dir.path(), &["appendix", "--out", "app", "--points", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["delta2_scan.csv", "delta2_fit.csv", "config.json"] {
        assert!(dir.path().join("app").join(f).exists(), "{f}");
    }
    let o = monostat(dir.path(), &["fock-check"]);
    assert!(o.status.success());
    assert!(rows(&o).iter().all(|r| r[1] == "true"));
}
