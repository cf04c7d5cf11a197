use std::path::Path;
use std::process::Command;

fn icfdr(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_icfdr")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_SWEEP: &str = r#"{
    "command": "sweep-bounds",
    "gains": {"h11": 1, "h12": 0.5, "h21": 0.5, "h22": 1, "h1r": 1, "h2r": 1, "hr1": 1, "hr2": 1},
    "sweep": {"p_db_min": 0, "p_db_max": 10, "p_db_step": 5}
}"#;

#[test]
fn sweep_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SWEEP);
    let out = dir.path().join("bounds.csv");
    let status = icfdr(&["sweep-bounds", "--config", &config, "--out", out.to_str().unwrap(), "--seed", "4"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p_db,r_cs,r_m,r_s1,r_s2,envelope,active"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let values: Vec<f64> = row[1..6].iter().map(|v| v.parse().unwrap()).collect();
        let min = values[..4].iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(values[4], min);
        assert!(["cs", "m", "s1", "s2"].contains(&row[6]));
    }
    assert!(!csv.contains('\r'));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 4);
    assert_eq!(meta["command"], "sweep-bounds");
}

#[test]
fn stdout_output_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SWEEP);
    let out = dir.path().join("bounds.csv");
    let to_file = icfdr(&["sweep-bounds", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(to_file.status.success());
    let to_stdout = icfdr(&["sweep-bounds", "--config", &config]);
    assert!(to_stdout.status.success());
    assert_eq!(String::from_utf8(to_stdout.stdout).unwrap(), std::fs::read_to_string(&out).unwrap());
}

#[test]
fn deselected_bounds_are_blank() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL_SWEEP.replace("\"sweep\"", "\"bounds\": {\"m\": false, \"s2\": false}, \"sweep\"");
    let config = write_config(dir.path(), &body);
    let run = icfdr(&["sweep-bounds", "--config", &config]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    for line in String::from_utf8(run.stdout).unwrap().lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(!f[1].is_empty() && f[2].is_empty() && !f[3].is_empty() && f[4].is_empty(), "{line}");
    }
}

#[test]
fn symmetric_rate_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "symmetric": {"hd": 1, "hc": 1, "hr": 1, "hsr": 1},
            "sweep": {"p_db_min": 0, "p_db_max": 20, "p_db_step": 10},
            "sampler": {"quasi_random": 64, "refine_steps": 10}
        }"#,
    );
    let run = icfdr(&["sym-rate", "--config", &config]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = String::from_utf8(run.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p_db,r_cor5,r_ic,lower,upper,delta"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (lower, upper, delta): (f64, f64, f64) =
            (f[3].parse().unwrap(), f[4].parse().unwrap(), f[5].parse().unwrap());
        assert!(lower <= upper + 1e-3);
        assert!((upper - lower - delta).abs() <= 2e-6);
        let r_ic: f64 = f[2].parse().unwrap();
        assert!(lower >= r_ic - 1e-6);
    }
}

#[test]
fn small_gap_map() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{
            "grid": {"a_min": 0.5, "a_max": 1.5, "a_steps": 2, "b_min": 0.5, "b_max": 1.5, "b_steps": 2,
                     "hd": 1, "hr": 1, "p_db": 20},
            "sampler": {"quasi_random": 64, "refine_steps": 10}
        }"#,
    );
    let run = icfdr(&["gap-map", "--config", &config, "--seed", "1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = String::from_utf8(run.stdout).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let again = icfdr(&["gap-map", "--config", &config, "--seed", "1"]);
    assert_eq!(csv, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(icfdr(&["sweep-bounds"]).status.code(), Some(2));
    assert_eq!(icfdr(&["not-a-command"]).status.code(), Some(2));
    assert_eq!(icfdr(&["--help"]).status.code(), Some(0));
    assert_eq!(icfdr(&["region", "--config", "/nonexistent/run.json"]).status.code(), Some(2));

    let bad = write_config(
        dir.path(),
        r#"{"gains": {"h11": -1, "h12": 0, "h21": 0, "h22": 1, "h1r": 0, "h2r": 0, "hr1": 0, "hr2": 0}, "p_db": 0}"#,
    );
    assert_eq!(icfdr(&["region", "--config", &bad]).status.code(), Some(2));

    let wrong = write_config(dir.path(), r#"{"command": "gap-map"}"#);
    let run = icfdr(&["sweep-bounds", "--config", &wrong, "--preset", "fig2"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("configuration error"));

    let unwritable = dir.path().join("missing-dir").join("out.csv");
    let config = write_config(dir.path(), SMALL_SWEEP);
    let run = icfdr(&["sweep-bounds", "--config", &config, "--out", unwritable.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));

    let overflow = write_config(
        dir.path(),
        r#"{"gains": {"h11": 1, "h12": 1, "h21": 1, "h22": 1, "h1r": 1, "h2r": 1, "hr1": 1, "hr2": 1}, "p_db": 4000}"#,
    );
    assert_eq!(icfdr(&["region", "--config", &overflow]).status.code(), Some(2));
}

#[test]
fn inapplicable_bounds_are_blank() {
    let dir = tempfile::tempdir().unwrap();
    // Marić and S1 need a cross link into receiver 1.
    let config = write_config(
        dir.path(),
        r#"{"gains": {"h11": 1, "h12": 1, "h21": 0, "h22": 1, "h1r": 1, "h2r": 1, "hr1": 1, "hr2": 1},
            "sweep": {"p_db_min": 0, "p_db_max": 0, "p_db_step": 1}}"#,
    );
    let run = icfdr(&["sweep-bounds", "--config", &config]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = String::from_utf8(run.stdout).unwrap();
    let f: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(f[2].is_empty() && f[3].is_empty() && !f[1].is_empty() && !f[5].is_empty(), "{csv}");
}
