//! Spectrum checks against closed forms and the exact resolvent.

use std::f64::consts::PI;

use num_complex::Complex64;

use nems_qnd::cli::compute_spectrum;
use nems_qnd::hilbert::{projector, thermal_state};
use nems_qnd::lindblad::{build_liouvillian, vec, Liouvillian};
use nems_qnd::linalg::{ComplexMatrix, ZERO};
use nems_qnd::spectrum::{correlation, detect_peaks, regression_seed, spectrum, spectrum_padded, time_grid, Peak,
    SpectrumMetadata};
use nems_qnd::statistics::{fit_lorentzians, fit_peak_weights};
use nems_qnd::{hamiltonian_effective, CorrelationTrace, DeviceParams, RunConfig, SpaceDims, SpectrumResult, EXCITED,
    GROUND};

/// `S(ω) = (1/π) Re Tr[σ₋ (−(ℒ + iω))⁻¹ Λ₀]`, the infinite-time spectrum,
/// solved on the connected block of ℒ that holds the seed.
struct Resolvent {
    block: ComplexMatrix,
    seed: ComplexMatrix,
    readout: Vec<bool>,
}

impl Resolvent {
    fn new(l: &Liouvillian, rho_nems: &ComplexMatrix) -> Self {
        let d = l.dims();
        let n = d.fock_cutoff();
        let dd = d.total_dim();
        let seed = vec(&regression_seed(rho_nems, d).unwrap());
        let first = (0..seed.len()).find(|&i| seed[i] != ZERO).unwrap();
        let comp = l.components().into_iter().find(|c| c.contains(&first)).unwrap();
        let readout = comp
            .iter()
            .map(|&i| {
                let (r, c) = (i % dd, i / dd);
                r / n == EXCITED && c / n == GROUND && r % n == c % n
            })
            .collect();
        Self {
            block: l.matrix().principal_submatrix(&comp),
            seed: ComplexMatrix::column(comp.iter().map(|&i| seed[i]).collect()),
            readout,
        }
    }

    fn at(&self, w: f64) -> f64 {
        let m = self.block.rows();
        let a = (&self.block + &ComplexMatrix::identity(m).scale(Complex64::new(0.0, w))).scale_real(-1.0);
        let x = a.solve(&self.seed).unwrap();
        let tot: Complex64 = (0..m).filter(|&k| self.readout[k]).map(|k| x[(k, 0)]).sum();
        tot.re / PI
    }
}

fn default_setup() -> (RunConfig, Liouvillian) {
    let cfg = RunConfig::default();
    let d = cfg.dims();
    let l = build_liouvillian(&hamiltonian_effective(&cfg.device, d).unwrap(), &cfg.device, d).unwrap();
    (cfg, l)
}

#[test]
fn fft_spectrum_matches_resolvent_near_the_comb() {
    let (cfg, l) = default_setup();
    let s = compute_spectrum(&cfg).unwrap();
    let res = Resolvent::new(&l, &thermal_state(1.0, 15).unwrap());
    let top = s.peaks.iter().map(|p| p.height).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for k in 0..s.frequencies.len() {
        let w = s.frequencies[k];
        if (0.7300..0.7500).contains(&w) && k % 7 == 0 {
            worst = worst.max((s.values[k] - res.at(w)).abs() / top);
        }
    }
    // The 12/γ window truncates C(t) at |C| ≈ e^{-6}.
    assert!(worst < 5e-3, "relative deviation {worst:.3e}");
}

#[test]
fn grid_maxima_agree_with_resolvent_maxima() {
    let (cfg, l) = default_setup();
    let s = compute_spectrum(&cfg).unwrap();
    let res = Resolvent::new(&l, &thermal_state(1.0, 15).unwrap());
    let bin = s.bin_width();
    for pk in s.resolved_peaks() {
        let k0 = s.frequencies.partition_point(|&w| w < pk.center);
        let best = (k0 - 40..k0 + 40).max_by(|&a, &b| res.at(s.frequencies[a]).total_cmp(&res.at(s.frequencies[b]))).unwrap();
        let off = (s.frequencies[best] - pk.center).abs() / bin;
        assert!(off <= 1.0 + 1e-9, "peak n={} off the resolvent maximum by {off} bins", pk.phonon_index);
    }
}

#[test]
fn discrete_sum_rule_returns_c0() {
    let (cfg, l) = default_setup();
    let grid = time_grid(2000.0, cfg.dt()).unwrap();
    let trace = correlation(&l, &thermal_state(1.0, 15).unwrap(), &grid).unwrap();
    for pad in [1, 4] {
        let s = spectrum_padded(&trace, pad).unwrap();
        let sum: f64 = s.values.iter().sum::<f64>() * s.bin_width();
        assert!((sum - trace.values[0].re).abs() < 1e-10, "pad {pad}: {sum}");
    }
}

#[test]
fn single_damped_line_is_lorentzian() {
    // C(t) = e^{−iνt − Γt}  ⇒  S(ω) ≈ (1/π) Γ / (Γ² + (ω − ν)²).
    let (nu, gamma, dt) = (0.75, 2e-3, 0.4);
    let times: Vec<f64> = (0..40_000).map(|k| k as f64 * dt).collect();
    let values = times.iter().map(|&t| Complex64::from_polar((-gamma * t).exp(), -nu * t)).collect();
    let s = spectrum(&CorrelationTrace { times, values, params_snapshot: None }).unwrap();
    for (w, v) in s.frequencies.iter().zip(&s.values) {
        if (w - nu).abs() < 0.02 {
            let exact = gamma / (PI * (gamma * gamma + (w - nu).powi(2)));
            // Trapezoid error of the sampled transform scales as (ωdt)².
            assert!((v - exact).abs() < 2e-3 * exact.max(1.0), "ω = {w}: {v} vs {exact}");
        }
    }
}

#[test]
fn vacuum_seed_gives_one_dominant_line() {
    let cfg = RunConfig { seed_state: nems_qnd::SeedState::Vacuum, ..RunConfig::default() };
    let s = compute_spectrum(&cfg).unwrap();
    let heights: Vec<f64> = s.peaks.iter().map(|p| p.height).collect();
    let n0 = s.peaks.iter().find(|p| p.phonon_index == 0).unwrap();
    assert!((n0.center - cfg.device.transition_frequency(0)).abs() < 2.0 * s.bin_width());
    for p in s.peaks.iter().filter(|p| p.phonon_index > 0) {
        assert!(p.height < 0.05 * n0.height, "{heights:?}");
    }
}

#[test]
fn thermal_seed_has_decreasing_line_areas() {
    let s = compute_spectrum(&RunConfig::default()).unwrap();
    assert!(s.resolved_peaks().count() >= 3);
    let p = fit_peak_weights(&s).unwrap().probabilities;
    for n in 0..3 {
        assert!(p[n] > p[n + 1], "{p:?}");
    }
}

#[test]
fn unresolved_regime_is_rejected() {
    let (cfg, _) = default_setup();
    let p = DeviceParams { kappa: 1e-3, ..cfg.device };
    let s = SpectrumResult {
        frequencies: (0..10).map(|k| k as f64).collect(),
        values: vec![0.0; 10],
        peaks: vec![],
        metadata: empty_metadata(1.0),
    };
    let err = detect_peaks(&s, &p, 3).unwrap_err();
    assert!(matches!(err, nems_qnd::Error::Regime(_)));
    assert!(err.to_string().contains("chi/kappa = 2.5"), "{err}");
}

fn empty_metadata(bin: f64) -> SpectrumMetadata {
    SpectrumMetadata {
        chi: None,
        dispersive_shift: None,
        nu_a: None,
        peak_formula_used: String::new(),
        comb_lines: vec![],
        stark_lines_simple: vec![],
        t_max: 0.0,
        dt: 0.0,
        samples: 0,
        zero_pad_factor: 1,
        bin_width: bin,
    }
}

/// Two Lorentzians with areas 2:1 sampled on a fine grid.
pub fn synthetic_comb() -> SpectrumResult {
    let (c0, c1, w) = (1.0, 1.1, 0.01);
    let (h0, h1) = (2.0 / (PI * w), 1.0 / (PI * w));
    let frequencies: Vec<f64> = (0..4001).map(|k| 0.8 + k as f64 * 1e-4).collect();
    let values = frequencies
        .iter()
        .map(|x| h0 / (1.0 + ((x - c0) / w).powi(2)) + h1 / (1.0 + ((x - c1) / w).powi(2)))
        .collect();
    let peak = |c: f64, h: f64, n| Peak { center: c, height: h, width: 2.0 * w, weight: 0.0, phonon_index: n, resolved: true };
    SpectrumResult { frequencies, values, peaks: vec![peak(c0, h0, 0), peak(c1, h1, 1)], metadata: empty_metadata(1e-4) }
}

#[test]
fn synthetic_two_to_one_comb() {
    let s = synthetic_comb();
    let fit = fit_lorentzians(&s, &s.peaks).unwrap();
    assert!(fit.residual < 1e-10);
    let p = fit_peak_weights(&s).unwrap().probabilities;
    assert!((p[0] - 2.0 / 3.0).abs() < 1e-9 && (p[1] - 1.0 / 3.0).abs() < 1e-9, "{p:?}");
}

#[test]
fn fit_recovers_perturbed_widths() {
    let mut s = synthetic_comb();
    for p in &mut s.peaks {
        p.width *= 1.7;
        p.height *= 0.6;
    }
    let fit = fit_lorentzians(&s, &s.peaks).unwrap();
    for w in &fit.half_widths {
        assert!((w - 0.01).abs() < 1e-8, "{w}");
    }
}

#[test]
fn fit_rejects_duplicate_indices() {
    let mut s = synthetic_comb();
    s.peaks[1].phonon_index = 0;
    assert!(fit_peak_weights(&s).is_err());
}

#[test]
fn seed_readout_index_of_vacuum() {
    let d = SpaceDims::new(3).unwrap();
    let seed = regression_seed(&projector(0, 3), d).unwrap();
    assert_eq!(seed[(d.index(EXCITED, 0), d.index(GROUND, 0))], Complex64::new(1.0, 0.0));
}
