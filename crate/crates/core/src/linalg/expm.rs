//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13 (Higham 2005).

use super::{ComplexMatrix, ONE};
use crate::error::Result;

// 1-norm thresholds below which the [m/m] approximant is accurate to unit roundoff.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `e^a` for a square matrix.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square("expm")?;
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    for (theta, coeffs) in [
        (THETA_3, &PADE_3[..]),
        (THETA_5, &PADE_5[..]),
        (THETA_7, &PADE_7[..]),
        (THETA_9, &PADE_9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade_13(&scaled)?;
    for _ in 0..s {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

fn identity_scaled(n: usize, s: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = ONE * s;
    }
    m
}

/// Degrees 3 to 9: `U = A Σ b_{2k+1} A^{2k}`, `V = Σ b_{2k} A^{2k}`.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.rows();
    let a2 = a.matmul(a)?;
    let mut even_powers = vec![ComplexMatrix::identity(n), a2.clone()];
    while even_powers.len() < b.len() / 2 {
        let next = even_powers.last().unwrap().matmul(&a2)?;
        even_powers.push(next);
    }
    let mut u_inner = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, p) in even_powers.iter().enumerate() {
        v += &p.scale_real(b[2 * k]);
        u_inner += &p.scale_real(b[2 * k + 1]);
    }
    let u = a.matmul(&u_inner)?;
    finish(&u, &v)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = &PADE_13;
    let n = a.rows();
    let a2 = a.matmul(a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let u_hi = &(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]);
    let u_lo = &(&(&a6.scale_real(b[7]) + &a4.scale_real(b[5])) + &a2.scale_real(b[3]))
        + &identity_scaled(n, b[1]);
    let u = a.matmul(&(&a6.matmul(&u_hi)? + &u_lo))?;

    let v_hi = &(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]);
    let v_lo = &(&(&a6.scale_real(b[6]) + &a4.scale_real(b[4])) + &a2.scale_real(b[2]))
        + &identity_scaled(n, b[0]);
    let v = &a6.matmul(&v_hi)? + &v_lo;
    finish(&u, &v)
}

/// Solves `(V - U) X = V + U`.
fn finish(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    (v - u).solve(&(v + u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use num_complex::Complex64;

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(expm(&ComplexMatrix::zeros(3, 3)).unwrap(), ComplexMatrix::identity(3));
    }

    #[test]
    fn diagonal_phase() {
        let a = ComplexMatrix::from_diag(&[Complex64::new(0.0, std::f64::consts::PI), ZERO]);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] + 1.0).norm() < 1e-15);
        assert!((e[(1, 1)] - 1.0).norm() < 1e-15);
        assert_eq!(e[(0, 1)], ZERO);
    }

    #[test]
    fn rejects_non_square() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn nilpotent_is_exact_polynomial() {
        // exp([[0, x], [0, 0]]) = [[1, x], [0, 1]] for every x, exercising each degree.
        for x in [1e-3, 0.2, 0.9, 2.0, 5.0, 40.0, 900.0] {
            let a = ComplexMatrix::from_real_rows(&[&[0.0, x], &[0.0, 0.0]]);
            let e = expm(&a).unwrap();
            assert!((e[(0, 1)].re - x).abs() <= 1e-13 * x, "x = {x}: {:?}", e);
            assert!((e[(0, 0)].re - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rotation_generator() {
        // exp(θ [[0,-1],[1,0]]) is a rotation by θ.
        for theta in [0.01, 0.3, 1.7, 12.0, 300.0] {
            let a = ComplexMatrix::from_real_rows(&[&[0.0, -theta], &[theta, 0.0]]);
            let e = expm(&a).unwrap();
            assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-12 * theta.max(1.0));
            assert!((e[(1, 0)].re - theta.sin()).abs() < 1e-12 * theta.max(1.0));
        }
    }
}
