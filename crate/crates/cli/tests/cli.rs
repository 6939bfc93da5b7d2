use std::path::Path;
use std::process::{Command, Output};

fn hetnet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetnet")).args(args).arg("--out").arg(out).output().expect("hetnet runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

fn column(headers: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn association_sweep_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetnet(dir.path(), &["association", "--sweep", "h=50:500:50", "--trials", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (headers, rows) = read_csv(&dir.path().join("association.csv"));
    assert_eq!(&headers[..4], ["h", "A_T", "A_L", "A_N"]);
    assert_eq!(rows.len(), 10);
    let sums: Vec<f64> =
        (0..10).map(|i| ["A_T", "A_L", "A_N"].iter().map(|c| column(&headers, &rows, c)[i]).sum()).collect();
    assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-9), "{sums:?}");
    assert!(rows.iter().all(|r| r[4].is_empty()), "MC columns stay empty without trials");
}

#[test]
fn noma_coverage_non_increasing_in_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetnet(dir.path(), &["coverage-noma", "--sweep", "eps_dB=-10:10:2", "--beta", "0.1", "--trials", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (headers, rows) = read_csv(&dir.path().join("coverage_noma.csv"));
    let cov = column(&headers, &rows, "P_A_C");
    assert_eq!(cov.len(), 11);
    assert!(cov.windows(2).all(|w| w[1] <= w[0]), "{cov:?}");
    assert_eq!(*cov.last().unwrap(), 0.0);
}

#[test]
fn simulated_columns_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetnet(dir.path(), &["coverage-tbs", "--trials", "300", "--seed", "5", "--nu-db", "-3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (headers, rows) = read_csv(&dir.path().join("coverage_tbs.csv"));
    assert_eq!(headers, ["h", "P_T_C", "P_T_C_MC", "P_T_C_SE"]);
    let mc = column(&headers, &rows, "P_T_C_MC")[0];
    assert!((0.0..=1.0).contains(&mc));
    let manifest = std::fs::read_to_string(dir.path().join("coverage_tbs.manifest.toml")).unwrap();
    for key in ["config_sha256", "seed = 5", "trials = 300", "git_describe", "[versions]", "[timings]", "nu_dB = -3.0"]
    {
        assert!(manifest.contains(key), "manifest lacks {key}:\n{manifest}");
    }
}

#[test]
fn csv_is_reproducible() {
    let args = ["coverage-noma", "--trials", "500", "--seed", "3", "--sweep", "beta=0:0.2:0.1"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(hetnet(a.path(), &args).status.success());
    assert!(hetnet(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read(d.join("coverage_noma.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn rate_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetnet(dir.path(), &["rate", "--trials", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (headers, rows) = read_csv(&dir.path().join("rate.csv"));
    assert_eq!(headers, ["h", "R_T", "R_A", "R_T_MC", "R_T_SE", "R_A_MC", "R_A_SE", "R_A_OMA_MC", "R_A_OMA_SE"]);
    let (noma, oma) = (column(&headers, &rows, "R_A")[0], column(&headers, &rows, "R_A_OMA_MC")[0]);
    assert!(noma > 0.0 && oma > 0.0);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[network]\nh = 100.0\nR_f = 110.0\n[simulation]\ntrials = 0\n").unwrap();
    let o = hetnet(dir.path(), &["association", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (headers, rows) = read_csv(&dir.path().join("association.csv"));
    assert_eq!(column(&headers, &rows, "h"), [100.0]);
}

#[test]
fn reference_config_matches_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/table2.toml");
    let run = |extra: &[&str]| {
        let mut args = vec!["association", "--trials", "0"];
        args.extend_from_slice(extra);
        assert!(hetnet(dir.path(), &args).status.success());
        let m = std::fs::read_to_string(dir.path().join("association.manifest.toml")).unwrap();
        m.lines().find(|l| l.starts_with("config_sha256")).unwrap().to_string()
    };
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]), run(&[]));
}

#[test]
fn invalid_config_names_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[network]\nbeta = 1.5\na_n = 0.9\n").unwrap();
    let o = hetnet(dir.path(), &["association", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("network.beta") && err.contains("network.a_m"), "{err}");

    std::fs::write(&cfg, "[network]\nlambda = 1e-5\n").unwrap();
    let o = hetnet(dir.path(), &["association", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
}

#[test]
fn bad_sweeps_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        ["association", "--sweep", "nu_dB=0:10:5"],
        ["association", "--sweep", "height=1:2:1"],
        ["validate", "--sweep", "h=100:200:100"],
    ] {
        let o = hetnet(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = hetnet(dir.path(), &["association", "--sweep", "h=1:2"]);
    assert!(!o.status.success());
}

#[test]
fn validate_needs_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = hetnet(dir.path(), &["validate", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trial"));
}
