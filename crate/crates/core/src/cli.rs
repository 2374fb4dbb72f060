//! Command-line front end: config loading, pipeline orchestration and
//! serialization. Exit codes: 0 ok, 2 config, 3 I/O, 4 regime, 5 input data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::device::{hamiltonian_effective, qnd_check_effective, DeviceParams, DISPERSIVE_LIMIT};
use crate::error::{Error, Result};
use crate::hilbert::{embed, number_op, pauli, Pauli, QubitBasis, Slot};
use crate::lindblad::{build_liouvillian, evolve, expectation, Liouvillian};
use crate::spectrum::{
    correlation, detect_peaks, require_resolved, spectrum_padded, time_grid, CorrelationTrace, Peak,
    SpectrumMetadata, SpectrumResult,
};
use crate::statistics::{bose_einstein, compare_distributions, fit_peak_weights};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_REGIME: i32 = 4;
pub const EXIT_INPUT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "nems-qnd", version, about = "Dispersive phonon-number readout of a qubit-coupled NEMS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key=value` or `section.key=value`, applied after the config file.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived model quantities and the QND check of the dispersive split.
    Model,
    /// Density-matrix evolution: trace, ⟨σz⟩, ⟨b†b⟩ and Fock populations.
    Evolve,
    /// Two-time qubit correlation ⟨σ₋(t)σ₊(0)⟩.
    Correlate,
    /// Absorption spectrum and phonon-number peaks.
    Spectrum,
    /// Phonon distribution from a spectrum file and its peaks record.
    Fit {
        /// Spectrum CSV; `peaks.json` is read from the same directory.
        /// Defaults to `<out>/spectrum.csv`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// The three QND conditions for the dispersive Hamiltonian.
    QndCheck,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Validation(_) | Error::Singularity(_) | Error::Sizing(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Regime(_) => EXIT_REGIME,
        Error::InputData(_) | Error::Fit(_) => EXIT_INPUT,
        Error::Shape(_) | Error::Multiplicity(_) | Error::Numerical(_) => EXIT_FAILURE,
    }
}

/// Parses arguments, runs the command, reports on stdout/stderr and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs the parsed command and returns the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(out) = &cli.out {
        cfg.outputs.directory = out.clone();
    }
    match &cli.command {
        Command::Model => cmd_model(&cfg),
        Command::Evolve => cmd_evolve(&cfg),
        Command::Correlate => cmd_correlate(&cfg),
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Fit { input } => {
            let input = input.clone().unwrap_or_else(|| cfg.outputs.directory.join("spectrum.csv"));
            cmd_fit(&cfg, &input)
        }
        Command::QndCheck => cmd_qnd_check(&cfg),
    }
}

/// Rounds to 12 significant digits and prints the shortest representation
/// that reads back to the rounded value.
pub fn fmt_num(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 || (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round12(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.outputs.directory.as_path();
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn write_json(cfg: &RunConfig, name: &str, mut record: Value) -> Result<Option<PathBuf>> {
    if !cfg.wants(OutputFormat::Json) {
        return Ok(None);
    }
    round_json(&mut record);
    let path = out_dir(cfg)?.join(name);
    let text = serde_json::to_string_pretty(&record).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    Ok(Some(path))
}

fn write_csv(
    cfg: &RunConfig,
    name: &str,
    command: &str,
    extra: &[(&str, String)],
    header: &[String],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<Option<PathBuf>> {
    if !cfg.wants(OutputFormat::Csv) {
        return Ok(None);
    }
    let mut text = format!("# nems-qnd {command}\n");
    for line in cfg.to_toml().lines().filter(|l| !l.trim().is_empty()) {
        let _ = writeln!(text, "# {line}");
    }
    for (k, v) in extra {
        let _ = writeln!(text, "# {k} = {v}");
    }
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    let path = out_dir(cfg)?.join(name);
    fs::write(&path, text)?;
    Ok(Some(path))
}

fn config_json(cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(map) = &mut v {
        map.insert("t_max_effective".into(), json!(cfg.t_max()));
        map.insert("dt_effective".into(), json!(cfg.dt()));
    }
    v
}

fn derived_json(p: &DeviceParams) -> Value {
    json!({
        "nu_a": p.nu_a(),
        "delta": p.delta(),
        "lambda": p.lambda(),
        "chi": p.chi(),
        "dispersive_shift": p.dispersive_shift(),
        "dispersive_valid": p.dispersive_valid(),
    })
}

fn liouvillian(cfg: &RunConfig) -> Result<Liouvillian> {
    let h = hamiltonian_effective(&cfg.device, cfg.dims())?;
    build_liouvillian(&h, &cfg.device, cfg.dims())
}

fn warn_dispersive(p: &DeviceParams) {
    if !p.dispersive_valid() {
        eprintln!(
            "warning: |lambda| = {} exceeds {DISPERSIVE_LIMIT}; the dispersive expansion is unreliable",
            fmt_num(p.lambda().abs())
        );
    }
}

pub fn cmd_model(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.device;
    p.require_dispersive()?;
    warn_dispersive(p);
    let dims = cfg.dims();
    let qnd = qnd_check_effective(p, dims)?;
    let record = json!({
        "command": "model",
        "dimensions": {
            "qubit": dims.qubit_dim(),
            "fock_cutoff": dims.fock_cutoff(),
            "total": dims.total_dim(),
        },
        "derived": derived_json(p),
        "transition_lines": (0..cfg.spectrum.n_max_peaks).map(|n| p.transition_frequency(n)).collect::<Vec<_>>(),
        "qnd": qnd,
        "config": config_json(cfg),
    });
    Ok(write_json(cfg, "model.json", record)?.into_iter().collect())
}

pub fn cmd_qnd_check(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.device;
    p.require_dispersive()?;
    let qnd = qnd_check_effective(p, cfg.dims())?;
    let record = json!({
        "command": "qnd-check",
        "observable": "b^dag b",
        "apparatus_observable": "sigma_x",
        "all_hold": qnd.all_hold(),
        "qnd": qnd,
        "config": config_json(cfg),
    });
    Ok(write_json(cfg, "qnd.json", record)?.into_iter().collect())
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.device;
    p.require_dispersive()?;
    warn_dispersive(p);
    let dims = cfg.dims();
    let l = liouvillian(cfg)?;
    let steps = cfg.time.evolve_steps;
    let t_max = cfg.t_max();
    let grid: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
    let states = evolve(&l, &cfg.initial_state()?, &grid)?;
    let sz = embed(&pauli(Pauli::Z, QubitBasis::EnergyBasis), Slot::Qubit, dims)?;
    let nop = embed(&number_op(dims.fock_cutoff())?, Slot::Nems, dims)?;

    let mut rows = Vec::with_capacity(states.len());
    for (t, s) in grid.iter().zip(&states) {
        let mut row = vec![*t, s.rho().trace().re, expectation(&sz, s)?.re, expectation(&nop, s)?.re];
        row.extend(crate::statistics::fock_populations(s)?.probabilities);
        rows.push(row);
    }
    let mut header: Vec<String> = ["t", "trace", "sigma_z", "n_mean"].map(String::from).to_vec();
    header.extend((0..dims.fock_cutoff()).map(|n| format!("P{n}")));
    let extra = [("evolve_dt", fmt_num(t_max / steps as f64))];
    Ok(write_csv(cfg, "evolve.csv", "evolve", &extra, &header, rows.into_iter())?.into_iter().collect())
}

fn correlation_trace(cfg: &RunConfig) -> Result<CorrelationTrace> {
    let l = liouvillian(cfg)?;
    let grid = time_grid(cfg.t_max(), cfg.dt())?;
    correlation(&l, &cfg.nems_seed()?, &grid)
}

pub fn cmd_correlate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.device.require_dispersive()?;
    warn_dispersive(&cfg.device);
    let trace = correlation_trace(cfg)?;
    let header = ["t", "re_C", "im_C"].map(String::from);
    let rows = trace.times.iter().zip(&trace.values).map(|(t, c)| vec![*t, c.re, c.im]);
    Ok(write_csv(cfg, "correlation.csv", "correlate", &[], &header, rows)?.into_iter().collect())
}

/// Correlation, spectrum and peak detection for a validated config.
pub fn compute_spectrum(cfg: &RunConfig) -> Result<SpectrumResult> {
    require_resolved(&cfg.device)?;
    let trace = correlation_trace(cfg)?;
    let s = spectrum_padded(&trace, cfg.spectrum.zero_pad_factor)?;
    detect_peaks(&s, &cfg.device, cfg.spectrum.n_max_peaks)
}

/// Frequency range written to the spectrum file.
pub fn output_window(cfg: &RunConfig, s: &SpectrumResult) -> (f64, f64) {
    let lines = &s.metadata.comb_lines;
    let margin = 10.0 * cfg.device.chi().abs();
    let lo = lines.iter().copied().fold(f64::INFINITY, f64::min) - margin;
    let hi = lines.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin;
    (cfg.spectrum.omega_min.unwrap_or(lo), cfg.spectrum.omega_max.unwrap_or(hi))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    warn_dispersive(&cfg.device);
    let s = compute_spectrum(cfg)?;
    let (lo, hi) = output_window(cfg, &s);
    let header = ["omega", "S"].map(String::from);
    let extra = [
        ("peak_formula_used", s.metadata.peak_formula_used.clone()),
        ("bin_width", fmt_num(s.bin_width())),
    ];
    let rows = s
        .frequencies
        .iter()
        .zip(&s.values)
        .filter(|(w, _)| **w >= lo && **w <= hi)
        .map(|(w, v)| vec![*w, *v]);
    let mut written: Vec<PathBuf> = write_csv(cfg, "spectrum.csv", "spectrum", &extra, &header, rows)?.into_iter().collect();
    let record = json!({
        "command": "spectrum",
        "peaks": s.peaks,
        "resolved_peaks": s.resolved_peaks().count(),
        "metadata": s.metadata,
        "derived": derived_json(&cfg.device),
        "config": config_json(cfg),
    });
    written.extend(write_json(cfg, "peaks.json", record)?);
    Ok(written)
}

/// Reads `omega,S` rows, skipping `#` comment lines and the header.
pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == "omega,S" => {}
        other => {
            return Err(Error::InputData(format!(
                "{}: expected header `omega,S`, found {other:?}",
                path.display()
            )))
        }
    }
    let (mut freq, mut vals) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let bad = || Error::InputData(format!("{}: malformed data row {}: `{line}`", path.display(), i + 1));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let w: f64 = a.trim().parse().map_err(|_| bad())?;
        let v: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(w.is_finite() && v.is_finite()) || freq.last().is_some_and(|&last| w <= last) {
            return Err(bad());
        }
        freq.push(w);
        vals.push(v);
    }
    if freq.len() < 3 {
        return Err(Error::InputData(format!("{}: fewer than 3 data rows", path.display())));
    }
    Ok((freq, vals))
}

/// Spectrum file plus the peaks record next to it.
pub fn read_spectrum(path: &Path) -> Result<(SpectrumResult, Option<DeviceParams>)> {
    let (frequencies, values) = read_spectrum_csv(path)?;
    let peaks_path = path.with_file_name("peaks.json");
    let text = fs::read_to_string(&peaks_path)?;
    let record: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InputData(format!("{}: {e}", peaks_path.display())))?;
    let field = |k: &str| {
        record
            .get(k)
            .cloned()
            .ok_or_else(|| Error::InputData(format!("{}: missing `{k}`", peaks_path.display())))
    };
    let peaks: Vec<Peak> = serde_json::from_value(field("peaks")?)
        .map_err(|e| Error::InputData(format!("{}: peaks: {e}", peaks_path.display())))?;
    if peaks.is_empty() {
        return Err(Error::InputData(format!("{}: no peaks", peaks_path.display())));
    }
    let metadata: SpectrumMetadata = serde_json::from_value(field("metadata")?)
        .map_err(|e| Error::InputData(format!("{}: metadata: {e}", peaks_path.display())))?;
    let device = record
        .get("config")
        .and_then(|c| c.get("device"))
        .and_then(|d| serde_json::from_value(d.clone()).ok());
    Ok((SpectrumResult { frequencies, values, peaks, metadata }, device))
}

pub fn cmd_fit(cfg: &RunConfig, input: &Path) -> Result<Vec<PathBuf>> {
    let (s, device) = read_spectrum(input)?;
    let dist = fit_peak_weights(&s)?;
    let n_bar = device.map_or(cfg.device.n_bar, |d| d.n_bar);
    let reference = bose_einstein(n_bar, dist.n_max())?;
    let cmp = compare_distributions(&dist, &reference)?;
    let record = json!({
        "command": "fit",
        "input": input.display().to_string(),
        "probabilities": dist.probabilities,
        "residual": dist.residual,
        "comparison": {
            "n_bar": n_bar,
            "bose_einstein": reference.probabilities,
            "total_variation": cmp.total_variation,
            "max_abs": cmp.max_abs,
        },
    });
    Ok(write_json(cfg, "fit.json", record)?.into_iter().collect())
}
