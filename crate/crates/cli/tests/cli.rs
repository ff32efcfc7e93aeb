//! The binary end to end: output format, error reporting, exit codes,
//! manifests and the cheap figure presets.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use udw_harvest_cli::Config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_udw-harvest"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn point_config(kind: &str, a: f64, dz: f64) -> String {
    format!(
        "[scenario]\nkind = \"{kind}\"\na_sigma = {a}\ndd_over_sigma = 1.0\ndz_over_sigma = {dz}\n\n[detector]\nomega_sigma = 0.1\n"
    )
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn labeled(report: &str, label: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.split_whitespace().next() == Some(label))
        .unwrap_or_else(|| panic!("no {label} in {report}"));
    line.split_whitespace().nth(2).unwrap().parse().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn point_prints_six_consistent_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", &point_config("inertial", 0.0, 0.5));
    let out = bin().arg("point").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    let [p_a, p_b, re_x, im_x, abs_x, c] =
        ["p_a", "p_b", "re_x", "im_x", "abs_x", "concurrence"].map(|l| labeled(&report, l));
    assert_eq!(p_a, p_b);
    assert!((abs_x - re_x.hypot(im_x)).abs() <= 1e-16 * abs_x);
    let recomputed = 2.0 * (abs_x - (p_a * p_b).sqrt()).max(0.0);
    assert!((c - recomputed).abs() <= 1e-15 * c, "{c} vs {recomputed}");
    assert!(c > 0.0);

    let again = bin().arg("point").arg(&config).output().unwrap();
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn point_writes_a_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", &point_config("parallel", 0.5, 0.5));
    let csv = dir.path().join("point.csv");
    let out = bin().arg("point").arg(&config).arg("--output").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(column(&csv, "abs_x")[0], labeled(&report, "abs_x"));
    assert_eq!(column(&csv, "p_a")[0], labeled(&report, "p_a"));
    let manifest = std::fs::read_to_string(dir.path().join("point.manifest.toml")).unwrap();
    assert!(manifest.contains("command = \"point\""), "{manifest}");
}

#[test]
fn zero_acceleration_needs_the_static_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", &point_config("parallel", 0.0, 0.5));
    let out = bin().arg("point").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("scenario = Inertial required when a = 0"), "{}", stderr(&out));
}

#[test]
fn on_boundary_distance_quotes_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "p.toml", &point_config("anti_parallel", 0.5, 0.005));
    let out = bin().arg("point").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("on-boundary") && err.contains("dz_over_sigma < 1/100"), "{err}");
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("inertial", 0.0, 0.5).replace("omega_sigma", "omega");
    let config = write(dir.path(), "p.toml", &text);
    let out = bin().arg("point").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("omega"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("perpendicular", 0.5, 1.0)
        + "\n[sweep]\nparameter = \"dz_over_sigma\"\nstart = 0.1\nstop = 3.0\npoints = 400\n";
    let config = write(dir.path(), "s.toml", &text);
    let start = std::time::Instant::now();
    let out = bin()
        .arg("sweep")
        .arg(&config)
        .arg("--output")
        .arg(dir.path().join("missing").join("s.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot write"), "{}", stderr(&out));
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn sweep_is_reproducible_from_its_manifest_at_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("anti_parallel", 0.5, 1.0)
        + "\n[sweep]\nparameter = \"a_sigma\"\nstart = 0.0\nstop = 1.0\npoints = 5\n";
    let config = write(dir.path(), "s.toml", &text);
    let run = |config: &Path, threads: &str, name: &str| {
        let csv = dir.path().join(name);
        let out = bin()
            .args(["--threads", threads, "sweep"])
            .arg(config)
            .arg("--output")
            .arg(&csv)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read(csv).unwrap()
    };
    let first = run(&config, "1", "first.csv");
    let manifest = dir.path().join("first.manifest.toml");
    assert_eq!(run(&config, "3", "second.csv"), first);
    assert_eq!(run(&manifest, "2", "replay.csv"), first);

    let echoed = Config::from_toml(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(echoed.resolved().unwrap(), echoed);
    let original = Config::from_toml(&text).unwrap().resolved().unwrap();
    assert_eq!(echoed, original);

    let (header, rows) = read_csv(&dir.path().join("first.csv"));
    assert_eq!(
        header[..9],
        ["swept_value", "p", "re_x", "im_x", "abs_x", "concurrence", "err_p", "err_x", "converged"]
    );
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[8] == "true"));
}

#[test]
fn tolerance_flag_is_echoed_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("inertial", 0.0, 1.0)
        + "\n[sweep]\nparameter = \"dd_over_sigma\"\ngrid = [0.5, 1.0]\n";
    let config = write(dir.path(), "s.toml", &text);
    let out = bin()
        .args(["--tol", "1e-7", "sweep"])
        .arg(&config)
        .arg("--output")
        .arg(dir.path().join("s.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let manifest = std::fs::read_to_string(dir.path().join("s.manifest.toml")).unwrap();
    let echoed = Config::from_toml(&manifest).unwrap();
    assert_eq!(echoed.quadrature.rel_tol, Some(1e-7));
}

#[test]
fn threshold_rows_are_written_in_grid_order() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("inertial", 0.0, 1.0)
        + "\n[sweep]\nparameter = \"dz_over_sigma\"\ngrid = [0.5, 1.0, 2.0]\n\n[threshold]\ntarget = \"dd_max\"\nbracket = [0.5, 4.0]\n";
    let config = write(dir.path(), "t.toml", &text);
    let csv = dir.path().join("t.csv");
    let out = bin().arg("threshold").arg(&config).arg("--output").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(column(&csv, "swept_value"), [0.5, 1.0, 2.0]);
    let t = column(&csv, "threshold");
    assert!(t[0] > t[1] && t[1] > t[2], "{t:?}");
    let width = column(&csv, "tolerance_achieved");
    assert!(width.iter().all(|&w| w <= 1e-3));
}

#[test]
fn failed_threshold_rows_are_flagged_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = point_config("inertial", 0.0, 1.0)
        + "\n[sweep]\nparameter = \"dz_over_sigma\"\ngrid = [1.0]\n\n[threshold]\ntarget = \"dd_max\"\nbracket = [3.0, 4.0]\n";
    let config = write(dir.path(), "t.toml", &text);
    let csv = dir.path().join("t.csv");
    let out = bin().arg("threshold").arg(&config).arg("--output").arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let (_, rows) = read_csv(&csv);
    assert_eq!(rows[0][1], "");
    assert_eq!(rows[0][7], "false");
    let manifest = std::fs::read_to_string(dir.path().join("t.manifest.toml")).unwrap();
    assert!(manifest.contains("no entanglement is harvested"), "{manifest}");
}

#[test]
fn preset_fig2a_has_an_interior_maximum_per_separation() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["preset", "fig2a", "--output"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let tables: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    assert_eq!(tables.len(), 3);
    for table in tables {
        let c = column(&table, "concurrence");
        let k = (0..c.len()).max_by(|&i, &j| c[i].total_cmp(&c[j])).unwrap();
        assert!(k > 0 && k + 1 < c.len(), "{}: maximum at the edge", table.display());
        let rises = c[..=k].windows(2).all(|w| w[1] > w[0]);
        let falls = c[k..].windows(2).all(|w| w[1] <= w[0]);
        assert!(rises && falls, "{}: maximum is not unique", table.display());
        assert!(dir.path().join(table.with_extension("manifest.toml")).exists());
    }
}

#[test]
fn preset_fig1a_orders_distances_at_unit_acceleration() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["preset", "fig1a", "--output"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let at_unit = |dz: &str| {
        let table = dir.path().join(format!("fig1a_dz_{dz}.csv"));
        let a = column(&table, "swept_value");
        let k = a.iter().position(|&a| a == 1.0).expect("a = 1 on the grid");
        column(&table, "p")[k]
    };
    let (near, mid, far) = (at_unit("0p1"), at_unit("0p5"), at_unit("1"));
    assert!(near < mid && mid < far, "{near} {mid} {far}");
}

#[test]
fn presets_and_subcommands_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["sweep", "--preset", "fig4", "--output"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["preset", "fig12", "--output"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown preset"));
}
