//! Command-line behaviour: outputs, exit codes and determinism.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde_json::Value;

use nems_qnd::cli::{fmt_num, read_spectrum_csv, run};

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["nems-qnd".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.push("--out".into());
    full.push(dir.display().to_string());
    run(full)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn model_reports_chi() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["model"]), 0);
    let m = json(&dir.path().join("model.json"));
    assert_eq!(m["derived"]["chi"].as_f64().unwrap(), 0.0025);
    assert_eq!(m["derived"]["dispersive_valid"], Value::Bool(true));
    assert_eq!(m["dimensions"]["total"].as_u64().unwrap(), 30);
    assert_eq!(m["qnd"]["cond2_holds"], Value::Bool(true));
}

#[test]
fn resonance_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["model", "--override", "device.E_J=1.0"]), 2);
    assert!(!dir.path().join("model.json").exists());
}

#[test]
fn strong_coupling_only_warns() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["model", "--override", "device.g=0.05"]), 0);
    let m = json(&dir.path().join("model.json"));
    assert_eq!(m["derived"]["dispersive_valid"], Value::Bool(false));
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[device]\nkapa = 1e-4\n").unwrap();
    assert_eq!(run_in(dir.path(), &["model", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(run_in(dir.path(), &["model", "--override", "fock_cutoff=1"]), 2);
    assert_eq!(run_in(dir.path(), &["model", "--override", "nonsense"]), 2);
    assert_eq!(run_in(dir.path(), &["model", "--config", "/nonexistent/cfg.toml"]), 2);
    assert_eq!(run(["nems-qnd", "frobnicate"]), 2);
}

#[test]
fn config_file_and_override_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "fock_cutoff = 6\n[device]\ng = 0.02\n").unwrap();
    let code = run_in(dir.path(), &["model", "--config", cfg.to_str().unwrap(), "--override", "device.g=0.01"]);
    assert_eq!(code, 0);
    let m = json(&dir.path().join("model.json"));
    assert_eq!(m["config"]["device"]["g"].as_f64().unwrap(), 0.01);
    assert_eq!(m["dimensions"]["fock_cutoff"].as_u64().unwrap(), 6);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    assert_eq!(run(["nems-qnd", "model", "--out", blocker.join("sub").to_str().unwrap()]), 3);
}

#[test]
fn evolve_without_loss_keeps_occupation() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["evolve", "--override", "fock_cutoff=8", "--override", "device.kappa=0", "--override", "device.gamma=0",
        "--override", "time.t_max=500", "--override", "time.evolve_steps=50"];
    assert_eq!(run_in(dir.path(), &args), 0);
    let (header, rows) = csv_rows(&dir.path().join("evolve.csv"));
    assert_eq!(&header[..4], &["t", "trace", "sigma_z", "n_mean"]);
    assert_eq!(header.len(), 4 + 8);
    assert_eq!(rows.len(), 51);
    for r in &rows {
        assert!((r[3] - rows[0][3]).abs() < 1e-10);
    }
    // t = 0 reproduces the thermal(1) seed populations, truncated at 8 levels.
    let norm = 1.0 - 0.5f64.powi(8);
    for n in 0..8 {
        assert!((rows[0][4 + n] - 0.5f64.powi(n as i32 + 1) / norm).abs() < 1e-11);
    }
    assert_eq!(rows[0][2], -1.0);
}

#[test]
fn evolve_thermalizes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["evolve", "--override", "seed_state=vacuum", "--override", "device.kappa=0.05",
        "--override", "time.t_max=800", "--override", "time.evolve_steps=8"];
    assert_eq!(run_in(dir.path(), &args), 0);
    let (_, rows) = csv_rows(&dir.path().join("evolve.csv"));
    assert_eq!(rows[0][3], 0.0);
    assert!((rows.last().unwrap()[3] - 1.0).abs() < 1e-3);
}

#[test]
fn correlate_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["correlate", "--override", "fock_cutoff=6", "--override", "time.t_max=100"];
    assert_eq!(run_in(dir.path(), &args), 0);
    let (header, rows) = csv_rows(&dir.path().join("correlation.csv"));
    assert_eq!(header, ["t", "re_C", "im_C"]);
    assert_eq!((rows[0][1], rows[0][2]), (1.0, 0.0));
}

#[test]
fn spectrum_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["spectrum"]), 0);
    let peaks = json(&dir.path().join("peaks.json"));
    assert!(peaks["resolved_peaks"].as_u64().unwrap() >= 3);
    assert_eq!(peaks["metadata"]["chi"].as_f64().unwrap(), 0.0025);
    assert_eq!(peaks["metadata"]["stark_lines_simple"].as_array().unwrap().len(), 6);

    // The spectrum file re-reads to the exact values it prints.
    let path = dir.path().join("spectrum.csv");
    let (freq, vals) = read_spectrum_csv(&path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    for (line, (w, s)) in data.iter().zip(freq.iter().zip(&vals)) {
        assert_eq!(*line, format!("{},{}", fmt_num(*w), fmt_num(*s)));
    }

    assert_eq!(run_in(dir.path(), &["fit"]), 0);
    let fit = json(&dir.path().join("fit.json"));
    let p: Vec<f64> = fit["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(p.len(), 6);
    assert!(p.windows(2).take(3).all(|w| w[0] > w[1]));
    assert!(fit["comparison"]["total_variation"].as_f64().unwrap() < 0.08);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let files = ["spectrum.csv", "peaks.json"];
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(run_in(dir.path(), &["spectrum", "--override", "fock_cutoff=8"]), 0);
        runs.push(files.map(|f| fs::read(dir.path().join(f)).unwrap()));
    }
    assert!(runs[0] == runs[1]);
}

#[test]
fn unresolved_regime_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["spectrum", "--override", "device.kappa=1e-3"]), 4);
}

fn write_synthetic(dir: &Path, peaks: &str) -> std::path::PathBuf {
    let (c0, c1, w) = (1.0, 1.1, 0.01);
    let (h0, h1) = (2.0 / (PI * w), 1.0 / (PI * w));
    let mut csv = String::from("# synthetic\nomega,S\n");
    for k in 0..4001 {
        let x = 0.8 + k as f64 * 1e-4;
        let s = h0 / (1.0 + ((x - c0) / w).powi(2)) + h1 / (1.0 + ((x - c1) / w).powi(2));
        csv.push_str(&format!("{},{}\n", fmt_num(x), fmt_num(s)));
    }
    let path = dir.join("spectrum.csv");
    fs::write(&path, csv).unwrap();
    let meta = r#"{"chi":null,"dispersive_shift":null,"nu_a":null,"peak_formula_used":"","comb_lines":[],
        "stark_lines_simple":[],"t_max":0,"dt":0,"samples":0,"zero_pad_factor":1,"bin_width":0.0001}"#;
    let record = format!(r#"{{"peaks": {peaks}, "metadata": {meta}, "config": {{"device": {{"n_bar": 0.5}}}}}}"#);
    fs::write(dir.join("peaks.json"), record).unwrap();
    path
}

#[test]
fn fit_of_synthetic_two_to_one_comb() {
    let dir = tempfile::tempdir().unwrap();
    let peaks = format!(
        r#"[{{"center":1.0,"height":{h0},"width":0.02,"weight":0,"phonon_index":0,"resolved":true}},
            {{"center":1.1,"height":{h1},"width":0.02,"weight":0,"phonon_index":1,"resolved":true}}]"#,
        h0 = 2.0 / (PI * 0.01),
        h1 = 1.0 / (PI * 0.01)
    );
    let input = write_synthetic(dir.path(), &peaks);
    assert_eq!(run_in(dir.path(), &["fit", "--input", input.to_str().unwrap()]), 0);
    let fit = json(&dir.path().join("fit.json"));
    let p: Vec<f64> = fit["probabilities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p[0] - 2.0 / 3.0).abs() < 1e-9 && (p[1] - 1.0 / 3.0).abs() < 1e-9, "{p:?}");
    assert_eq!(fit["comparison"]["n_bar"].as_f64().unwrap(), 0.5);
}

#[test]
fn fit_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_synthetic(dir.path(), "[]");
    assert_eq!(run_in(dir.path(), &["fit", "--input", input.to_str().unwrap()]), 5);
    fs::write(&input, "omega,S\n1.0,abc\n").unwrap();
    assert_eq!(run_in(dir.path(), &["fit", "--input", input.to_str().unwrap()]), 5);
    fs::write(&input, "freq,value\n1,2\n").unwrap();
    assert_eq!(run_in(dir.path(), &["fit", "--input", input.to_str().unwrap()]), 5);
    let missing = dir.path().join("none.csv");
    assert_eq!(run_in(dir.path(), &["fit", "--input", missing.to_str().unwrap()]), 3);
}

#[test]
fn qnd_check_command() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["qnd-check", "--override", "fock_cutoff=5"]), 0);
    let q = json(&dir.path().join("qnd.json"));
    assert_eq!(q["all_hold"], Value::Bool(true));
}
