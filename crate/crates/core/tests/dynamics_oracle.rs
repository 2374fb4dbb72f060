//! Master-equation dynamics against independent computations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nems_qnd::hilbert::{annihilation, embed, number_op, pauli, projector, thermal_state, trace_out_qubit, Pauli,
    QubitBasis, Slot};
use nems_qnd::lindblad::{build_liouvillian, dissipator, evolve, expectation, steady_state, unvec, vec, Propagator,
    QuantumState};
use nems_qnd::linalg::{eig_hermitian, expm, ComplexMatrix};
use nems_qnd::{hamiltonian_effective, hamiltonian_rwa, DeviceParams, Error, SpaceDims};

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + &a.dagger()).scale_real(0.5)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &a * &a.dagger();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// ρ̇ = −i[H, ρ] + Σ γ_k (c ρ c† − ½{c†c, ρ}) in operator form.
fn rhs(h: &ComplexMatrix, channels: &[(f64, ComplexMatrix)], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = (&(h * rho) - &(rho * h)).scale(Complex64::new(0.0, -1.0));
    for (g, c) in channels {
        let cd = c.dagger();
        let cdc = &cd * c;
        let term = &(&(c * rho) * &cd) - &(&(&cdc * rho) + &(rho * &cdc)).scale_real(0.5);
        out = &out + &term.scale_real(*g);
    }
    out
}

fn rk4(h: &ComplexMatrix, ch: &[(f64, ComplexMatrix)], rho: &ComplexMatrix, t: f64, steps: usize) -> ComplexMatrix {
    let dt = t / steps as f64;
    let mut r = rho.clone();
    for _ in 0..steps {
        let k1 = rhs(h, ch, &r);
        let k2 = rhs(h, ch, &(&r + &k1.scale_real(dt / 2.0)));
        let k3 = rhs(h, ch, &(&r + &k2.scale_real(dt / 2.0)));
        let k4 = rhs(h, ch, &(&r + &k3.scale_real(dt)));
        let inc = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
        r = &r + &inc.scale_real(dt / 6.0);
    }
    r
}

fn channels(p: &DeviceParams, d: SpaceDims) -> Vec<(f64, ComplexMatrix)> {
    let b = embed(&annihilation(d.fock_cutoff()).unwrap(), Slot::Nems, d).unwrap();
    vec![
        (p.kappa * (p.n_bar + 1.0), b.clone()),
        (p.kappa * p.n_bar, b.dagger()),
        (p.gamma, embed(&pauli(Pauli::Minus, QubitBasis::EnergyBasis), Slot::Qubit, d).unwrap()),
        (p.gamma_phi / 2.0, embed(&pauli(Pauli::Z, QubitBasis::EnergyBasis), Slot::Qubit, d).unwrap()),
    ]
}

fn lossy() -> DeviceParams {
    DeviceParams { g: 0.05, kappa: 0.03, gamma: 0.05, gamma_phi: 0.02, n_bar: 0.8, ..DeviceParams::default() }
}

#[test]
fn expm_matches_spectral_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1, 2, 5, 12] {
        for scale in [0.01, 1.0, 40.0] {
            let h = random_hermitian(&mut rng, n).scale_real(scale);
            let eig = eig_hermitian(&h).unwrap();
            let phases: Vec<Complex64> = eig.values.iter().map(|&x| Complex64::from_polar(1.0, -x)).collect();
            let oracle = &(&eig.vectors * &ComplexMatrix::from_diag(&phases)) * &eig.vectors.dagger();
            let got = expm(&h.scale(Complex64::new(0.0, -1.0))).unwrap();
            assert!((&got - &oracle).max_abs() < 1e-11 * scale.max(1.0), "n={n} scale={scale}");
        }
    }
}

#[test]
fn evolve_matches_rk4_with_richardson() {
    let d = SpaceDims::new(4).unwrap();
    let p = lossy();
    for h in [hamiltonian_effective(&p, d).unwrap(), hamiltonian_rwa(&p, d).unwrap()] {
        let l = build_liouvillian(&h, &p, d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho0 = QuantumState::new(random_state(&mut rng, 8), d).unwrap();
        let t = 12.0;
        let got = evolve(&l, &rho0, &[0.0, t]).unwrap().pop().unwrap().into_rho();
        let ch = channels(&p, d);
        let coarse = rk4(&h, &ch, rho0.rho(), t, 3000);
        let fine = rk4(&h, &ch, rho0.rho(), t, 6000);
        // Fourth order: the extrapolated error falls well below either run.
        let extrap = &fine + &(&fine - &coarse).scale_real(1.0 / 15.0);
        assert!((&got - &extrap).max_abs() < 1e-11, "{:e}", (&got - &extrap).max_abs());
    }
}

#[test]
fn dissipator_superoperator_matches_operator_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = ComplexMatrix::from_fn(5, 5, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = random_state(&mut rng, 5);
    let sup = dissipator(&c).unwrap();
    let got = unvec(&sup.mul_vec(&vec(&rho)), 5).unwrap();
    let oracle = rhs(&ComplexMatrix::zeros(5, 5), &[(1.0, c)], &rho);
    assert!((&got - &oracle).max_abs() < 1e-13);
}

#[test]
fn block_propagator_equals_dense_exponential() {
    let d = SpaceDims::new(3).unwrap();
    let p = lossy();
    let l = build_liouvillian(&hamiltonian_effective(&p, d).unwrap(), &p, d).unwrap();
    assert!(l.components().len() > 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = vec(&random_state(&mut rng, 6));
    let dense = expm(&l.matrix().scale_real(2.5)).unwrap().mul_vec(&v);
    let blocks = Propagator::new(&l, 2.5).unwrap().apply(&v);
    let err = dense.iter().zip(&blocks).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err:e}");
}

#[test]
fn mean_occupation_relaxes_to_reservoir() {
    let n = 15;
    let d = SpaceDims::new(n).unwrap();
    let p = DeviceParams { kappa: 0.05, ..DeviceParams::default() };
    let l = build_liouvillian(&hamiltonian_effective(&p, d).unwrap(), &p, d).unwrap();
    let rho0 = QuantumState::product(&projector(1, 2), &projector(0, n), d).unwrap();
    let num = embed(&number_op(n).unwrap(), Slot::Nems, d).unwrap();
    let last = evolve(&l, &rho0, &[0.0, 300.0, 600.0]).unwrap().pop().unwrap();
    let occ = expectation(&num, &last).unwrap().re;
    // Truncated thermal(1) at N = 15 has mean 1 − 15·2⁻¹⁵/(1 − 2⁻¹⁵).
    let target = 1.0 - 15.0 * 0.5f64.powi(15) / (1.0 - 0.5f64.powi(15));
    assert!((occ - target).abs() < 1e-9, "{occ}");
}

#[test]
fn steady_state_solves_the_master_equation() {
    let d = SpaceDims::new(6).unwrap();
    let p = lossy();
    let h = hamiltonian_rwa(&p, d).unwrap();
    let l = build_liouvillian(&h, &p, d).unwrap();
    let ss = steady_state(&l).unwrap();
    assert!(rhs(&h, &channels(&p, d), ss.rho()).max_abs() < 1e-12);
    let diag = ss.diagnostics().unwrap();
    assert!(diag.is_physical());
    // Independent route: long-time evolution.
    let rho0 = QuantumState::product(&projector(0, 2), &projector(0, 6), d).unwrap();
    let late = evolve(&l, &rho0, &[0.0, 4000.0]).unwrap().pop().unwrap();
    assert!(late.trace_distance(&ss).unwrap() < 1e-9);
}

#[test]
fn steady_state_of_dispersive_model_is_thermal_times_ground() {
    let n = 10;
    let d = SpaceDims::new(n).unwrap();
    let p = DeviceParams { gamma_phi: 1e-4, ..DeviceParams::default() };
    let l = build_liouvillian(&hamiltonian_effective(&p, d).unwrap(), &p, d).unwrap();
    let ss = steady_state(&l).unwrap();
    let expect = QuantumState::product(&projector(1, 2), &thermal_state(1.0, n).unwrap(), d).unwrap();
    assert!(ss.trace_distance(&expect).unwrap() < 1e-9);
    let reduced = trace_out_qubit(ss.rho(), d).unwrap();
    assert!((reduced.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_null_space_is_reported() {
    let d = SpaceDims::new(4).unwrap();
    let p = DeviceParams { kappa: 0.0, gamma: 0.0, gamma_phi: 0.0, ..DeviceParams::default() };
    let l = build_liouvillian(&hamiltonian_effective(&p, d).unwrap(), &p, d).unwrap();
    assert!(matches!(steady_state(&l), Err(Error::Multiplicity(_))));
}
