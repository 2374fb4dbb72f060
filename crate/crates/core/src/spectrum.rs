//! Two-time qubit correlation and the qubit absorption spectrum.
//!
//! The correlation `⟨σ₋(t)σ₊(0)⟩ = Tr[σ₋ e^{ℒt}(|+⟩⟨−| ⊗ ρ_NEMS)]` is computed
//! by evolving the operator seed under the same Liouvillian as the state.
//! The spectrum is its one-sided transform
//! `S(ω) = (1/π) Re ∫₀ᵀ dt e^{iωt} C(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{SpaceDims, EXCITED, GROUND};
use crate::lindblad::{uniform_step, vec, Liouvillian, Propagator};
use crate::linalg::{dft, eig_hermitian, kron, ComplexMatrix, ONE, ZERO};

pub const MIN_TRACE_LEN: usize = 64;
pub const DEFAULT_ZERO_PAD: usize = 4;
/// Required ratio |χ| / max(κ, γ) for number-resolved peaks.
pub const RESOLUTION_RATIO: f64 = 3.0;

/// Sampled correlation `⟨σ₋(t)σ₊(0)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub params_snapshot: Option<DeviceParams>,
}

impl CorrelationTrace {
    pub fn dt(&self) -> Result<f64> {
        uniform_step(&self.times)
    }
}

/// Seed `|+⟩⟨−| ⊗ ρ_NEMS`.
pub fn regression_seed(rho_nems: &ComplexMatrix, dims: SpaceDims) -> Result<ComplexMatrix> {
    let mut coherence = ComplexMatrix::zeros(2, 2);
    coherence[(EXCITED, GROUND)] = ONE;
    kron(&coherence, rho_nems).and_then(|m| {
        if m.rows() == dims.total_dim() {
            Ok(m)
        } else {
            Err(Error::Shape("NEMS state does not match the Fock cutoff".into()))
        }
    })
}

fn validate_nems_state(rho: &ComplexMatrix, dims: SpaceDims) -> Result<()> {
    let n = dims.fock_cutoff();
    if rho.shape() != (n, n) {
        return Err(Error::Validation(format!("NEMS state must be {n}x{n}, got {:?}", rho.shape())));
    }
    if (rho.trace() - 1.0).norm() > 1e-9 {
        return Err(Error::Validation(format!("NEMS state has trace {}", rho.trace())));
    }
    if rho.hermiticity_error() > 1e-10 {
        return Err(Error::Validation("NEMS state is not Hermitian".into()));
    }
    let min = eig_hermitian(rho)?.values[0];
    if min < -1e-8 {
        return Err(Error::Validation(format!("NEMS state has negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `C(t_k) = Tr[(σ₋⊗1) e^{ℒt_k}(|+⟩⟨−| ⊗ ρ_NEMS)]` on a uniform grid.
pub fn correlation(l: &Liouvillian, rho_nems0: &ComplexMatrix, t_grid: &[f64]) -> Result<CorrelationTrace> {
    let dims = l.dims();
    validate_nems_state(rho_nems0, dims)?;
    let dt = uniform_step(t_grid)?;
    let d = dims.total_dim();
    let seed = vec(&regression_seed(rho_nems0, dims)?);
    let support: Vec<usize> = (0..seed.len()).filter(|&i| seed[i] != ZERO).collect();

    // Tr[(σ₋⊗1)Λ] = Σ_k Λ[(+,k), (−,k)]; column-stacked index of Λ[i, j] is j·d + i.
    let readout: Vec<usize> = (0..dims.fock_cutoff())
        .map(|k| dims.index(GROUND, k) * d + dims.index(EXCITED, k))
        .collect();
    let read = |v: &[Complex64]| readout.iter().map(|&i| v[i]).sum::<Complex64>();

    let mut v = if t_grid[0] > 0.0 {
        Propagator::for_support(l, t_grid[0], &support)?.apply(&seed)
    } else {
        seed
    };
    let prop = Propagator::for_support(l, dt, &support)?;
    let mut values = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        if k > 0 {
            v = prop.apply(&v);
        }
        values.push(read(&v));
    }
    Ok(CorrelationTrace { times: t_grid.to_vec(), values, params_snapshot: l.params().copied() })
}

/// Uniform grid `0, dt, …` covering `[0, t_max]`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max > dt && t_max.is_finite()) {
        return Err(Error::Validation(format!("need t_max > dt > 0, got t_max = {t_max}, dt = {dt}")));
    }
    let steps = (t_max / dt).round() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// One spectral line of the phonon-number comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub height: f64,
    /// Full width at half maximum.
    pub width: f64,
    /// Line area; a Lorentzian estimate `π·height·width/2` until fitted.
    pub weight: f64,
    pub phonon_index: usize,
    /// The maximum lies strictly inside the search window.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    /// g²/Δ.
    pub chi: Option<f64>,
    /// Signed line shift per phonon pair, −g²/Δ.
    pub dispersive_shift: Option<f64>,
    pub nu_a: Option<f64>,
    pub peak_formula_used: String,
    /// Lines `ν_a + χ_d(2n+1)` used to seed the peak search.
    pub comb_lines: Vec<f64>,
    /// Lines of the shorter Stark formula `ν_a + n g²/Δ`, for comparison.
    pub stark_lines_simple: Vec<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub samples: usize,
    pub zero_pad_factor: usize,
    /// Spacing of the (padded) frequency grid.
    pub bin_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub values: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub metadata: SpectrumMetadata,
}

impl SpectrumResult {
    pub fn bin_width(&self) -> f64 {
        self.metadata.bin_width
    }

    /// Peaks whose maximum is a genuine interior local maximum.
    pub fn resolved_peaks(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.resolved)
    }

    /// Trapezoid integral of S over ω.
    pub fn integral(&self) -> f64 {
        self.frequencies
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, s)| 0.5 * (w[1] - w[0]) * (s[0] + s[1]))
            .sum()
    }
}

pub const COMB_FORMULA: &str = "nu_a + chi_d*(2n+1), chi_d = -g^2/Delta";

/// Absorption spectrum with the default zero padding.
pub fn spectrum(trace: &CorrelationTrace) -> Result<SpectrumResult> {
    spectrum_padded(trace, DEFAULT_ZERO_PAD)
}

/// `S(ω_j) = (1/π) Re Σ_k w_k e^{iω_j t_k} C(t_k) dt`, trapezoid weights
/// `w_0 = w_{M−1} = 1/2`, evaluated on the DFT grid of the trace zero-padded
/// to `zero_pad·M` samples.
pub fn spectrum_padded(trace: &CorrelationTrace, zero_pad: usize) -> Result<SpectrumResult> {
    let m = trace.values.len();
    if m < MIN_TRACE_LEN || trace.times.len() != m {
        return Err(Error::Validation(format!(
            "spectrum needs at least {MIN_TRACE_LEN} correlation samples, got {m}"
        )));
    }
    if zero_pad == 0 {
        return Err(Error::Validation("zero padding factor must be at least 1".into()));
    }
    let dt = trace.dt()?;
    let t0 = trace.times[0];
    let mut padded = vec![ZERO; m * zero_pad];
    for (k, (&c, slot)) in trace.values.iter().zip(padded.iter_mut()).enumerate() {
        let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
        *slot = c * (w * dt);
    }
    let transformed = dft(&padded, dt)?;
    let values = transformed
        .frequencies
        .iter()
        .zip(&transformed.amplitudes)
        .map(|(&w, &a)| {
            let shifted = if t0 == 0.0 { a } else { a * Complex64::from_polar(1.0, w * t0) };
            shifted.re / PI
        })
        .collect();
    let bin_width = 2.0 * PI / ((m * zero_pad) as f64 * dt);
    let p = trace.params_snapshot;
    let metadata = SpectrumMetadata {
        chi: p.map(|p| p.chi()),
        dispersive_shift: p.map(|p| p.dispersive_shift()),
        nu_a: p.map(|p| p.nu_a()),
        peak_formula_used: COMB_FORMULA.to_string(),
        comb_lines: Vec::new(),
        stark_lines_simple: Vec::new(),
        t_max: trace.times[m - 1],
        dt,
        samples: m,
        zero_pad_factor: zero_pad,
        bin_width,
    };
    Ok(SpectrumResult { frequencies: transformed.frequencies, values, peaks: Vec::new(), metadata })
}

/// Fails with a regime error unless |χ| > 3·max(κ, γ).
pub fn require_resolved(p: &DeviceParams) -> Result<()> {
    p.require_dispersive()?;
    let chi = p.chi().abs();
    let broadest = p.kappa.max(p.gamma);
    if chi <= RESOLUTION_RATIO * broadest {
        return Err(Error::Regime(format!(
            "phonon lines are not resolved: |chi| = {chi:.3e}, max(kappa, gamma) = {broadest:.3e}, chi/kappa = {:.3}; need |chi| > {RESOLUTION_RATIO} max(kappa, gamma)",
            chi / p.kappa
        )));
    }
    Ok(())
}

/// Locates the phonon-number lines.
///
/// Seeds are the comb `ν_a + χ_d(2n+1)`, n = 0…n_max−1; each is moved to the
/// largest spectral value within ±|χ|/2.
pub fn detect_peaks(s: &SpectrumResult, p: &DeviceParams, n_max: usize) -> Result<SpectrumResult> {
    if n_max == 0 {
        return Err(Error::Validation("n_max must be at least 1".into()));
    }
    require_resolved(p)?;
    let chi = p.chi().abs();
    let freq = &s.frequencies;
    let vals = &s.values;
    if freq.len() < 3 || freq.len() != vals.len() {
        return Err(Error::Validation("spectrum grid too short".into()));
    }

    let mut peaks = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let seed = p.transition_frequency(n);
        let lo = freq.partition_point(|&w| w < seed - chi / 2.0);
        let hi = freq.partition_point(|&w| w <= seed + chi / 2.0);
        if lo >= hi {
            return Err(Error::Validation(format!("comb line {n} at {seed} lies outside the frequency grid")));
        }
        let imax = (lo..hi).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
        let interior = imax > lo && imax + 1 < hi && imax > 0 && imax + 1 < vals.len();
        let resolved = interior && vals[imax] > vals[imax - 1] && vals[imax] >= vals[imax + 1];
        let height = vals[imax];
        let width = fwhm(freq, vals, imax, 2.0 * chi).unwrap_or(chi);
        peaks.push(Peak {
            center: freq[imax],
            height,
            width,
            weight: PI * height * width / 2.0,
            phonon_index: n,
            resolved,
        });
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));

    let mut out = s.clone();
    out.metadata.chi = Some(p.chi());
    out.metadata.dispersive_shift = Some(p.dispersive_shift());
    out.metadata.nu_a = Some(p.nu_a());
    out.metadata.comb_lines = (0..n_max).map(|n| p.transition_frequency(n)).collect();
    out.metadata.stark_lines_simple = (0..n_max).map(|n| p.stark_line_simple(n)).collect();
    out.peaks = peaks;
    Ok(out)
}

/// Full width at half maximum around `imax`, searching at most `reach` away
/// on each side. A side that never drops below half height is mirrored from
/// the other; `None` if neither side does.
fn fwhm(freq: &[f64], vals: &[f64], imax: usize, reach: f64) -> Option<f64> {
    let half = vals[imax] / 2.0;
    let center = freq[imax];
    let crossing = |range: &mut dyn Iterator<Item = usize>, step_back: isize| -> Option<f64> {
        for i in range {
            if (freq[i] - center).abs() > reach {
                return None;
            }
            if vals[i] < half {
                let j = (i as isize + step_back) as usize;
                let (x0, y0, x1, y1) = (freq[i], vals[i], freq[j], vals[j]);
                return Some(x0 + (half - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        None
    };
    let left = crossing(&mut (0..imax).rev(), 1).map(|x| center - x);
    let right = crossing(&mut (imax + 1..freq.len()), -1).map(|x| x - center);
    match (left, right) {
        (Some(l), Some(r)) => Some(l + r),
        (Some(h), None) | (None, Some(h)) => Some(2.0 * h),
        (None, None) => None,
    }
}
