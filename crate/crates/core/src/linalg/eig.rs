use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Eigenpairs of a Hermitian matrix with eigenvalues in ascending order.
/// Column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

const HERMITIAN_TOL: f64 = 1e-10;

pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.ensure_square("eig_hermitian")?;
    let err = a.hermiticity_error();
    if err > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::Validation(format!("eig_hermitian: matrix is not Hermitian (deviation {err:.3e})")));
    }
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: ComplexMatrix::zeros(0, 0) });
    }
    // Symmetrise so the solver sees an exactly Hermitian input.
    let sym = (a + &a.dagger()).scale_real(0.5);
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    if eig.eigenvalues.iter().any(|x| !x.is_finite()) || eig.eigenvectors.iter().any(|z| !z.is_finite()) {
        return eig_jacobi(&sym);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Fallback for inputs on which the tridiagonal QR solver returns NaN
/// (observed on rank-deficient, mostly-zero density matrices).
///
/// Cyclic Jacobi: each rotation zeroes one off-diagonal pair exactly; sweeps
/// continue until the off-diagonal mass is at rounding level.
fn eig_jacobi(a: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = a.rows();
    let mut m = a.clone();
    let mut w = ComplexMatrix::identity(n);
    let scale = a.norm_fro().max(f64::MIN_POSITIVE);
    let off = |m: &ComplexMatrix| {
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].norm_sqr()).sum::<f64>().sqrt()
    };
    let mut converged = false;
    for _ in 0..100 {
        if off(&m) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]] on (p, q); A ← U†AU, W ← WU.
                let (u_qp, u_qq) = (-phase.conj() * s, phase.conj() * c);
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = akp * c + akq * u_qp;
                    m[(k, q)] = akp * s + akq * u_qq;
                    let (wkp, wkq) = (w[(k, p)], w[(k, q)]);
                    w[(k, p)] = wkp * c + wkq * u_qp;
                    w[(k, q)] = wkp * s + wkq * u_qq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = apk * c + aqk * u_qp.conj();
                    m[(q, k)] = apk * s + aqk * u_qq.conj();
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged && off(&m) > 1e-12 * scale {
        return Err(Error::Numerical("Jacobi eigensolver did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| w[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values in ascending order, together with the right singular
/// vector belonging to the smallest one.
pub fn singular_values(a: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let n = a.ensure_square("singular_values")?;
    if n == 0 {
        return Ok((vec![], vec![]));
    }
    let svd = SVD::new(a.to_nalgebra(), false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let k = order[0];
    // Rows of Vᴴ are conjugated right singular vectors.
    let smallest = (0..n).map(|j| v_t[(k, j)].conj()).collect();
    Ok((values, smallest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let e = eig_hermitian(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(e.values.len(), 3);
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn pauli_x_spectrum() {
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = eig_hermitian(&sx).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let h = 1.0 / 2f64.sqrt();
        // Eigenvectors are (|0⟩ ∓ |1⟩)/√2 up to a phase.
        let v0 = [e.vectors[(0, 0)], e.vectors[(1, 0)]];
        let v1 = [e.vectors[(0, 1)], e.vectors[(1, 1)]];
        assert!(((v0[0] * v0[1].conj()).re + 0.5).abs() < 1e-14);
        assert!(((v1[0] * v1[1].conj()).re - 0.5).abs() < 1e-14);
        assert!((v0[0].norm() - h).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig_hermitian(&a), Err(Error::Validation(_))));
    }

    #[test]
    fn smallest_singular_vector_spans_kernel() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 1) as f64 * (j as f64 - 1.0), 0.0));
        let (sv, v) = singular_values(&a).unwrap();
        assert!(sv[0] < 1e-12);
        assert!(sv[1] > 1e-6 || sv[1] < 1e-12);
        let av = a.mul_vec(&v);
        assert!(av.iter().all(|z| z.norm() < 1e-12));
    }

    /// Rank-deficient input on which the complex tridiagonal solver returns NaN.
    #[test]
    fn rank_deficient_coherence_has_finite_spectrum() {
        let z = Complex64::new(-0.27104668890795647, 0.42015912751246315);
        let mut m = ComplexMatrix::zeros(30, 30);
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        m[(15, 15)] = Complex64::new(0.5, 0.0);
        m[(0, 15)] = z;
        m[(15, 0)] = z.conj();
        let e = eig_hermitian(&m).unwrap();
        assert!(e.values.iter().all(|x| x.is_finite()));
        assert!(e.values[0].abs() < 1e-14 && (e.values[29] - 1.0).abs() < 1e-14);
        let recon = &(&e.vectors * &ComplexMatrix::from_real_diag(&e.values)) * &e.vectors.dagger();
        assert!((&recon - &m).max_abs() < 1e-14);
        let gram = &e.vectors.dagger() * &e.vectors;
        assert!((&gram - &ComplexMatrix::identity(30)).max_abs() < 1e-13);
    }

    #[test]
    fn jacobi_matches_direct_solver() {
        let m = ComplexMatrix::from_fn(5, 5, |i, j| {
            let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
            let s = if i <= j { 1.0 } else { -1.0 };
            if i == j { Complex64::new(lo, 0.0) } else { Complex64::new(0.3 * lo + 0.1, s * 0.2 * hi) }
        });
        let a = eig_hermitian(&m).unwrap();
        let b = eig_jacobi(&m).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
        let recon = &(&b.vectors * &ComplexMatrix::from_real_diag(&b.values)) * &b.vectors.dagger();
        assert!((&recon - &m).max_abs() < 1e-12);
    }
}
