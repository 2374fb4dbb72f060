use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// A sampled transform on an angular-frequency grid, ascending from the most
/// negative frequency.
#[derive(Debug, Clone)]
pub struct Spectrum1d {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

/// Discrete Fourier transform with the `e^{+iωt}` kernel:
///
/// `A(ω_j) = Σ_k x_k e^{+i ω_j t_k}`, `t_k = k·dt`, `ω_j = 2π j / (N·dt)`,
/// `j = -⌊N/2⌋ … ⌈N/2⌉-1`.
///
/// No `dt` factor is applied to the amplitudes.
pub fn dft(samples: &[Complex64], dt: f64) -> Result<Spectrum1d> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Shape(format!("dft needs at least 2 samples, got {n}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Validation(format!("dft: time step must be positive, got {dt}")));
    }
    let mut buf = samples.to_vec();
    // rustfft's inverse direction carries the e^{+2πi jk/N} kernel.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    let half = n / 2;
    let step = 2.0 * PI / (n as f64 * dt);
    let mut frequencies = Vec::with_capacity(n);
    let mut amplitudes = Vec::with_capacity(n);
    for idx in 0..n {
        let j = idx as i64 - half as i64;
        frequencies.push(j as f64 * step);
        amplitudes.push(buf[j.rem_euclid(n as i64) as usize]);
    }
    Ok(Spectrum1d { frequencies, amplitudes })
}

/// Inverse of [`dft`]: recovers the time samples from the ascending-frequency
/// amplitudes.
pub fn idft(amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = amplitudes.len();
    if n < 2 {
        return Err(Error::Shape(format!("idft needs at least 2 amplitudes, got {n}")));
    }
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (idx, &a) in amplitudes.iter().enumerate() {
        let j = idx as i64 - half as i64;
        buf[j.rem_euclid(n as i64) as usize] = a;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    Ok(buf.into_iter().map(|z| z * inv).collect())
}
