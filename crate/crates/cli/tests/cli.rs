use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use metaring_cli::config;
use metaring_cli::{run, CliError, Command};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

const MICROLOOP_ONLY: &str = r#"{
  "device": {
    "microloop": { "width_ratio": 1.5, "gap": 2e-6, "loop_dc_inductance": 1e-4, "l1": 2.1e-9, "i1_star": 40e-6 }
  }
}"#;

#[test]
fn shipped_configs_validate() {
    for name in ["default.json", "lumped_ring.json"] {
        let v = config::validate(&configs().join(name)).unwrap();
        assert!(v.is_empty(), "{name}: {v:?}");
    }
}

#[test]
fn width_ratio_violation_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), MICROLOOP_ONLY);
    let v = config::validate(&path).unwrap();
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].path, "device.microloop.width_ratio");
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_metaring");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let ok = Process::new(bin)
        .args(["validate", "--config"])
        .arg(configs().join("default.json"))
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let bad = write_config(dir.path(), MICROLOOP_ONLY);
    let schema = Process::new(bin).args(["tune", "--config"]).arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(schema.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&schema.stderr).contains("device.microloop.width_ratio"));

    let missing = Process::new(bin)
        .args(["modes", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(4));

    // Bias beyond the narrow-wire characteristic current is a solver error.
    let strong = write_config(
        dir.path(),
        r#"{
  "device": {
    "microloop": { "width_ratio": 0.5, "gap": 2e-6, "loop_dc_inductance": 1e-4, "l1": 2.1e-9, "i1_star": 40e-6 }
  },
  "sweep": { "field_mT": { "start": 0, "stop": 100, "count": 3 } }
}"#,
    );
    let solver = Process::new(bin).args(["tune", "--config"]).arg(&strong).arg("--out").arg(&out).output().unwrap();
    assert_eq!(solver.status.code(), Some(3), "{}", String::from_utf8_lossy(&solver.stderr));
}

#[test]
fn unknown_command_section_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), r#"{ "sweep": {} }"#);
    let err = run(Command::Modes, &path, &dir.path().join("out"), None).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(matches!(err, CliError::Schema(_)));
}

#[test]
fn empty_range_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        r#"{
  "converter": { "kappa_s": 1e5, "kappa_i": 1e5, "eta_s": 0.99, "eta_i": 0.98 },
  "sweep": { "pump": { "start": 0, "stop": 4, "count": 0 }, "detuning": [] }
}"#,
    );
    let out = dir.path().join("out");
    run(Command::Convert, &path, &out, None).unwrap();
    let (header, rows) = read_csv(&out.join("convert_pump.csv"));
    assert_eq!(header, ["p0_norm", "t2", "r2"]);
    assert!(rows.is_empty());
    assert!(read_csv(&out.join("convert_spectrum.csv")).1.is_empty());
}

#[test]
fn conversion_peaks_at_unit_pump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run(Command::Convert, &configs().join("default.json"), &out, None).unwrap();
    let (_, rows) = read_csv(&out.join("convert_pump.csv"));
    let best = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert_eq!(best[0], 1.0);
    assert!((best[1] - 0.99 * 0.98).abs() < 1e-12);
    for row in &rows {
        assert!((row[1] + row[2] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lumped_ring_mode_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run(Command::Modes, &configs().join("lumped_ring.json"), &out, None).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("modes_summary.json")).unwrap()).unwrap();
    let fsr = summary["fsr_mean_hz"].as_f64().unwrap();
    assert!((fsr - 79e6).abs() < 1e6, "{fsr}");
    let (_, rows) = read_csv(&out.join("modes.csv"));
    assert!(rows.iter().all(|r| r[1] >= 4e9 && r[1] <= 10e9));
}

#[test]
fn manifest_lists_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let manifest = run(Command::Sweep, &configs().join("default.json"), &out, Some(2)).unwrap();
    assert_eq!(manifest.command, "sweep");
    assert_eq!(manifest.config_hash.len(), 64);
    for name in &manifest.output_paths {
        assert!(out.join(name).is_file(), "{name}");
    }
    for name in ["modes.csv", "fsr.csv", "tune.csv", "convert_pump.csv", "fringe.csv", "kerr.csv", "fit.json"] {
        assert!(manifest.output_paths.iter().any(|p| p == name), "{name}");
    }
    let on_disk: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk["config_hash"], manifest.config_hash.as_str());
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    let a = run(Command::Sweep, &configs().join("default.json"), &one, Some(1)).unwrap();
    run(Command::Sweep, &configs().join("default.json"), &four, Some(4)).unwrap();
    for name in &a.output_paths {
        assert_eq!(fs::read(one.join(name)).unwrap(), fs::read(four.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn fit_reports_the_shipped_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run(Command::Fit, &configs().join("default.json"), &out, None).unwrap();
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let p = &fit["reflection"]["parameters"];
    assert!((p["f0"].as_f64().unwrap() / 4.85e9 - 1.0).abs() < 1e-6);
    assert!((p["q_ex"].as_f64().unwrap() / 2.51e4 - 1.0).abs() < 0.02);
    let quad = fit["field_shift"]["parameters"]["quad_coeff"].as_f64().unwrap();
    assert!((quad / 207500.0 - 1.0).abs() < 1e-9, "{quad}");
}
