//! Qubit and Fock-space operators on the joint space `qubit ⊗ NEMS`.
//!
//! The qubit factor always comes first. Qubit basis index 0 is the state
//! with `σ_z = +1`: the charge state |0⟩ in the charge basis, the excited
//! state |+⟩ in the energy basis. Index 1 is |1⟩ or the ground state |−⟩.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, ONE, ZERO};

/// Dimensions of the truncated joint space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceDims {
    fock_cutoff: usize,
}

impl SpaceDims {
    pub const QUBIT_DIM: usize = 2;
    pub const DEFAULT_FOCK_CUTOFF: usize = 15;

    pub fn new(fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::Sizing(format!("Fock cutoff must be at least 2, got {fock_cutoff}")));
        }
        Ok(Self { fock_cutoff })
    }

    pub fn qubit_dim(&self) -> usize {
        Self::QUBIT_DIM
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn total_dim(&self) -> usize {
        Self::QUBIT_DIM * self.fock_cutoff
    }

    /// Joint index of `|qubit, n⟩`.
    pub fn index(&self, qubit: usize, n: usize) -> usize {
        debug_assert!(qubit < 2 && n < self.fock_cutoff);
        qubit * self.fock_cutoff + n
    }
}

impl Default for SpaceDims {
    fn default() -> Self {
        Self { fock_cutoff: Self::DEFAULT_FOCK_CUTOFF }
    }
}

/// Which factor of the joint space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Qubit,
    Nems,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// Raising operator σ₊ = (σ_x + iσ_y)/2.
    Plus,
    /// Lowering operator σ₋ = (σ_x − iσ_y)/2.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitBasis {
    /// Cooper-pair number states |0⟩, |1⟩.
    ChargeBasis,
    /// Eigenstates |+⟩ (excited), |−⟩ (ground) of the bare qubit.
    EnergyBasis,
}

/// Qubit index of the excited energy state |+⟩.
pub const EXCITED: usize = 0;
/// Qubit index of the ground energy state |−⟩.
pub const GROUND: usize = 1;

/// Truncated annihilation operator, `b[k, k+1] = √(k+1)`.
pub fn annihilation(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Sizing(format!("Fock cutoff must be at least 2, got {n}")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    }))
}

pub fn creation(n: usize) -> Result<ComplexMatrix> {
    Ok(annihilation(n)?.dagger())
}

/// `b†b = diag(0, 1, …, n−1)`.
pub fn number_op(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::Sizing(format!("Fock cutoff must be at least 2, got {n}")));
    }
    Ok(ComplexMatrix::from_real_diag(&(0..n).map(|k| k as f64).collect::<Vec<_>>()))
}

/// Pauli matrices with `σ_z = diag(+1, −1)`.
///
/// In both conventions basis index 0 is the `σ_z = +1` state, so the
/// matrices coincide; the convention only fixes which physical states the
/// indices label. In the energy basis this gives `σ_z = |+⟩⟨+| − |−⟩⟨−|`
/// and `σ₊ = |+⟩⟨−|`.
pub fn pauli(which: Pauli, _convention: QubitBasis) -> ComplexMatrix {
    let z = ZERO;
    let o = ONE;
    let i = Complex64::new(0.0, 1.0);
    let data = match which {
        Pauli::X => vec![z, o, o, z],
        Pauli::Y => vec![z, -i, i, z],
        Pauli::Z => vec![o, z, z, -o],
        Pauli::Plus => vec![z, o, z, z],
        Pauli::Minus => vec![z, z, o, z],
    };
    ComplexMatrix::new(2, 2, data).expect("2x2")
}

/// Lifts a single-factor operator onto the joint space (qubit first).
pub fn embed(op: &ComplexMatrix, slot: Slot, dims: SpaceDims) -> Result<ComplexMatrix> {
    let expected = match slot {
        Slot::Qubit => dims.qubit_dim(),
        Slot::Nems => dims.fock_cutoff(),
    };
    if op.shape() != (expected, expected) {
        return Err(Error::Shape(format!(
            "embed: {slot:?} operator must be {expected}x{expected}, got {}x{}",
            op.rows(),
            op.cols()
        )));
    }
    match slot {
        Slot::Qubit => kron(op, &ComplexMatrix::identity(dims.fock_cutoff())),
        Slot::Nems => kron(&ComplexMatrix::identity(dims.qubit_dim()), op),
    }
}

/// Truncated thermal state with `ρ_kk ∝ (n̄/(n̄+1))^k`, renormalised to unit trace.
pub fn thermal_state(n_bar: f64, n: usize) -> Result<ComplexMatrix> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::Validation(format!("mean occupation must be non-negative, got {n_bar}")));
    }
    if n < 2 {
        return Err(Error::Sizing(format!("Fock cutoff must be at least 2, got {n}")));
    }
    Ok(ComplexMatrix::from_real_diag(&thermal_populations(n_bar, n)))
}

/// Truncated, renormalised geometric law `n̄^k/(n̄+1)^{k+1}`.
pub(crate) fn thermal_populations(n_bar: f64, n: usize) -> Vec<f64> {
    let ratio = n_bar / (n_bar + 1.0);
    let mut p: Vec<f64> = (0..n).map(|k| ratio.powi(k as i32)).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// Projector `|k⟩⟨k|` in an n-dimensional space.
pub fn projector(k: usize, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(k, k)] = ONE;
    m
}

/// Fock state `|k⟩⟨k|`.
pub fn fock_state(k: usize, n: usize) -> Result<ComplexMatrix> {
    if k >= n {
        return Err(Error::Validation(format!("Fock state |{k}⟩ outside cutoff {n}")));
    }
    Ok(projector(k, n))
}

/// Partial trace over the qubit, returning the NEMS-reduced matrix.
pub fn trace_out_qubit(rho: &ComplexMatrix, dims: SpaceDims) -> Result<ComplexMatrix> {
    let d = dims.total_dim();
    if rho.shape() != (d, d) {
        return Err(Error::Shape(format!("partial trace: expected {d}x{d}, got {:?}", rho.shape())));
    }
    let n = dims.fock_cutoff();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..2).map(|q| rho[(dims.index(q, i), dims.index(q, j))]).sum()
    }))
}

/// Partial trace over the NEMS, returning the 2×2 qubit-reduced matrix.
pub fn trace_out_nems(rho: &ComplexMatrix, dims: SpaceDims) -> Result<ComplexMatrix> {
    let d = dims.total_dim();
    if rho.shape() != (d, d) {
        return Err(Error::Shape(format!("partial trace: expected {d}x{d}, got {:?}", rho.shape())));
    }
    Ok(ComplexMatrix::from_fn(2, 2, |p, q| {
        (0..dims.fock_cutoff()).map(|k| rho[(dims.index(p, k), dims.index(q, k))]).sum()
    }))
}
