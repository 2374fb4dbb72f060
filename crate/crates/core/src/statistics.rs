//! Phonon-number statistics: spectral line areas, thermal reference law,
//! and state populations.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{thermal_populations, trace_out_qubit};
use crate::lindblad::QuantumState;
use crate::spectrum::{Peak, SpectrumResult};

/// Fits with a column-scaled Jacobian condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    SpectralFit,
    StateDiagonal,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhononDistribution {
    /// P(n), n = 0…len−1.
    pub probabilities: Vec<f64>,
    pub source: DistributionSource,
    /// Relative fit residual ‖model − data‖/‖data‖; zero for exact sources.
    pub residual: f64,
}

impl PhononDistribution {
    pub fn n_max(&self) -> usize {
        self.probabilities.len()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

/// Result of a Lorentzian-comb least-squares fit, ordered like the input peaks.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzianFit {
    pub centers: Vec<f64>,
    pub heights: Vec<f64>,
    /// Half widths at half maximum.
    pub half_widths: Vec<f64>,
    /// `π·height·half_width`.
    pub areas: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
    pub iterations: usize,
}

fn lorentzian(x: f64, c: f64, h: f64, w: f64) -> f64 {
    let u = (x - c) / w;
    h / (1.0 + u * u)
}

/// Least-squares fit of `Σ_j h_j / (1 + ((ω − c_j)/w_j)²)` with the centers
/// fixed at the peak positions. Heights and widths are free; widths are
/// parameterised as `w = e^u` to stay positive.
pub fn fit_lorentzians(s: &SpectrumResult, peaks: &[Peak]) -> Result<LorentzianFit> {
    if peaks.is_empty() {
        return Err(Error::Fit("no peaks to fit".into()));
    }
    let centers: Vec<f64> = peaks.iter().map(|p| p.center).collect();
    let lo_c = centers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_c = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spacing = if centers.len() > 1 {
        let mut sorted = centers.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };
    let widest = peaks.iter().map(|p| p.width).filter(|w| w.is_finite() && *w > 0.0).fold(0.0, f64::max);
    let margin = if spacing > 0.0 { spacing } else { 5.0 * widest.max(s.bin_width()) };

    let (xs, ys): (Vec<f64>, Vec<f64>) = s
        .frequencies
        .iter()
        .zip(&s.values)
        .filter(|(w, _)| **w >= lo_c - margin && **w <= hi_c + margin)
        .map(|(w, v)| (*w, *v))
        .unzip();
    let k = peaks.len();
    if xs.len() < 2 * k + 1 {
        return Err(Error::Fit(format!("fit window holds {} points for {} parameters", xs.len(), 2 * k)));
    }

    let default_w = if spacing > 0.0 { spacing / 4.0 } else { (widest / 2.0).max(s.bin_width()) };
    let mut params: Vec<f64> = peaks.iter().map(|p| p.height).collect();
    params.extend(peaks.iter().map(|p| {
        let w = p.width / 2.0;
        (if w.is_finite() && w > 0.0 { w } else { default_w }).ln()
    }));

    let residuals = |q: &[f64]| -> Vec<f64> {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (0..k).map(|j| lorentzian(x, centers[j], q[j], q[k + j].exp())).sum::<f64>() - y)
            .collect()
    };
    let jacobian = |q: &[f64]| -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), 2 * k, |i, col| {
            let j = col % k;
            let w = q[k + j].exp();
            let u = (xs[i] - centers[j]) / w;
            let den = 1.0 + u * u;
            if col < k {
                1.0 / den
            } else {
                q[j] * 2.0 * u * u / (den * den)
            }
        })
    };
    let sq = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut r = residuals(&params);
    let mut cost = sq(&r);
    let mut mu = 1e-3;
    let mut iterations = 0;
    for it in 0..500 {
        iterations = it + 1;
        let jac = jacobian(&params);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..2 * k {
                a[(d, d)] += mu * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
            let tr = residuals(&trial);
            let tc = sq(&tr);
            if tc.is_finite() && tc < cost {
                let rel = (cost - tc) / cost.max(f64::MIN_POSITIVE);
                params = trial;
                r = tr;
                cost = tc;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                if rel < 1e-15 {
                    break;
                }
                break;
            }
            mu *= 4.0;
        }
        let gnorm = grad.amax();
        if !improved || gnorm == 0.0 || cost == 0.0 {
            break;
        }
    }

    // Condition number of the column-scaled Jacobian at the solution.
    let jac = jacobian(&params);
    let mut scaled = jac.clone();
    for mut col in scaled.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    let eig = SymmetricEigen::new(scaled.transpose() * &scaled);
    let (lmin, lmax) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let condition = if lmin > 0.0 { (lmax / lmin).sqrt() } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Fit(format!("ill-conditioned fit: condition number {condition:.3e}")));
    }

    let heights = params[..k].to_vec();
    let half_widths: Vec<f64> = params[k..].iter().map(|u| u.exp()).collect();
    let areas = heights.iter().zip(&half_widths).map(|(h, w)| PI * h * w).collect();
    let norm_y = sq(&ys).sqrt().max(f64::MIN_POSITIVE);
    Ok(LorentzianFit {
        centers,
        heights,
        half_widths,
        areas,
        residual: cost.sqrt() / norm_y,
        condition,
        iterations,
    })
}

/// Phonon-number distribution from the fitted line areas, indexed by the
/// peaks' phonon index. Negative areas are clipped to zero.
pub fn fit_peak_weights(s: &SpectrumResult) -> Result<PhononDistribution> {
    if s.peaks.is_empty() {
        return Err(Error::Fit("spectrum has no detected peaks".into()));
    }
    let n_max = s.peaks.len();
    let mut seen = vec![false; n_max];
    for p in &s.peaks {
        if p.phonon_index >= n_max || std::mem::replace(&mut seen[p.phonon_index], true) {
            return Err(Error::Fit(format!(
                "phonon indices must be a permutation of 0..{n_max}, got {}",
                p.phonon_index
            )));
        }
    }
    let fit = fit_lorentzians(s, &s.peaks)?;
    let mut probabilities = vec![0.0; n_max];
    for (p, area) in s.peaks.iter().zip(&fit.areas) {
        probabilities[p.phonon_index] = area.max(0.0);
    }
    let total: f64 = probabilities.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Fit("all fitted line areas vanish".into()));
    }
    for x in &mut probabilities {
        *x /= total;
    }
    Ok(PhononDistribution { probabilities, source: DistributionSource::SpectralFit, residual: fit.residual })
}

/// Thermal law `P(n) = n̄ⁿ/(n̄+1)^{n+1}` truncated to `n_max` levels and renormalised.
pub fn bose_einstein(n_bar: f64, n_max: usize) -> Result<PhononDistribution> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::Validation(format!("mean occupation must be non-negative, got {n_bar}")));
    }
    if n_max == 0 {
        return Err(Error::Validation("n_max must be at least 1".into()));
    }
    Ok(PhononDistribution {
        probabilities: thermal_populations(n_bar, n_max),
        source: DistributionSource::Analytic,
        residual: 0.0,
    })
}

/// Diagonal of the NEMS-reduced density matrix.
pub fn fock_populations(state: &QuantumState) -> Result<PhononDistribution> {
    let reduced = trace_out_qubit(state.rho(), state.dims())?;
    Ok(PhononDistribution {
        probabilities: reduced.diagonal().iter().map(|z| z.re).collect(),
        source: DistributionSource::StateDiagonal,
        residual: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    /// ½ Σ |P_a − P_b|
    pub total_variation: f64,
    pub max_abs: f64,
}

pub fn compare_distributions(a: &PhononDistribution, b: &PhononDistribution) -> Result<DistributionComparison> {
    if a.n_max() != b.n_max() {
        return Err(Error::Validation(format!("distribution lengths differ: {} vs {}", a.n_max(), b.n_max())));
    }
    let diffs: Vec<f64> = a.probabilities.iter().zip(&b.probabilities).map(|(x, y)| (x - y).abs()).collect();
    Ok(DistributionComparison {
        total_variation: 0.5 * diffs.iter().sum::<f64>(),
        max_abs: diffs.iter().copied().fold(0.0, f64::max),
    })
}
