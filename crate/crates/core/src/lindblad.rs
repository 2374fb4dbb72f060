//! Lindblad master equation on the joint qubit–NEMS space.
//!
//! Superoperators act on column-stacked density matrices:
//! `vec(ρ)[j·d + i] = ρ[i, j]`, so that `vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)`.
//!
//! Time stepping uses the exact propagator `e^{ℒ·dt}`. The Liouvillian is
//! first split into the connected components of its sparsity graph; each
//! component is an invariant subspace and is exponentiated on its own.

use num_complex::Complex64;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, pauli, Pauli, QubitBasis, Slot, SpaceDims};
use crate::linalg::{eig_hermitian, expm, kron, singular_values, ComplexMatrix, I, ZERO};

pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = -1e-8;

/// Column-stacking vectorisation.
pub fn vec(rho: &ComplexMatrix) -> Vec<Complex64> {
    let (r, c) = rho.shape();
    let mut out = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            out.push(rho[(i, j)]);
        }
    }
    out
}

/// Inverse of [`vec`] for a square `d × d` matrix.
pub fn unvec(v: &[Complex64], d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::Shape(format!("unvec: {} entries do not form a {d}x{d} matrix", v.len())));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| v[j * d + i]))
}

/// A density matrix on the joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    rho: ComplexMatrix,
    dims: SpaceDims,
}

/// Deviations of a density matrix from the physical constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// |Tr ρ − 1|
    pub trace_error: f64,
    /// max |ρ − ρ†|
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn is_physical(&self) -> bool {
        self.trace_error < TRACE_TOL
            && self.hermiticity_error < HERMITICITY_TOL
            && self.min_eigenvalue >= POSITIVITY_TOL
    }
}

impl QuantumState {
    /// Validated constructor: unit trace, Hermitian, positive semidefinite
    /// within the module tolerances.
    pub fn new(rho: ComplexMatrix, dims: SpaceDims) -> Result<Self> {
        let d = dims.total_dim();
        if rho.shape() != (d, d) {
            return Err(Error::Shape(format!("state must be {d}x{d}, got {:?}", rho.shape())));
        }
        let state = Self { rho, dims };
        let diag = state.diagnostics()?;
        if !diag.is_physical() {
            return Err(Error::Validation(format!("not a density matrix: {diag:?}")));
        }
        Ok(state)
    }

    /// `ρ_qubit ⊗ ρ_NEMS`.
    pub fn product(qubit: &ComplexMatrix, nems: &ComplexMatrix, dims: SpaceDims) -> Result<Self> {
        if qubit.shape() != (2, 2) || nems.shape() != (dims.fock_cutoff(), dims.fock_cutoff()) {
            return Err(Error::Shape("product state factors do not match the space".into()));
        }
        Self::new(kron(qubit, nems)?, dims)
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }

    pub fn diagnostics(&self) -> Result<StateDiagnostics> {
        let hermiticity_error = self.rho.hermiticity_error();
        let sym = (&self.rho + &self.rho.dagger()).scale_real(0.5);
        let min_eigenvalue = eig_hermitian(&sym)?.values.first().copied().unwrap_or(0.0);
        Ok(StateDiagnostics {
            trace_error: (self.rho.trace() - 1.0).norm(),
            hermiticity_error,
            min_eigenvalue,
        })
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &QuantumState) -> Result<f64> {
        trace_distance(&self.rho, &other.rho)
    }
}

/// ½ Σ|λ_k| of the Hermitian part of `a − b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = a - b;
    let sym = (&diff + &diff.dagger()).scale_real(0.5);
    Ok(0.5 * eig_hermitian(&sym)?.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// `Tr(op·ρ)`.
pub fn expectation(op: &ComplexMatrix, state: &QuantumState) -> Result<Complex64> {
    let rho = state.rho();
    if op.shape() != rho.shape() {
        return Err(Error::Shape(format!(
            "expectation: operator {:?} vs state {:?}",
            op.shape(),
            rho.shape()
        )));
    }
    let d = rho.rows();
    let mut acc = ZERO;
    for i in 0..d {
        for (k, &o) in op.row(i).iter().enumerate() {
            acc += o * rho[(k, i)];
        }
    }
    Ok(acc)
}

/// Superoperator of `𝒟[c]ρ = (2cρc† − c†cρ − ρc†c)/2`.
pub fn dissipator(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = c.ensure_square("dissipator")?;
    let id = ComplexMatrix::identity(d);
    let cdc = &c.dagger() * c;
    let jump = kron(&c.conj(), c)?;
    let left = kron(&id, &cdc)?;
    let right = kron(&cdc.transpose(), &id)?;
    Ok(&jump - &(&left + &right).scale_real(0.5))
}

/// Superoperator of `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superoperator(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = h.ensure_square("hamiltonian_superoperator")?;
    let id = ComplexMatrix::identity(d);
    Ok((&kron(&id, h)? - &kron(&h.transpose(), &id)?).scale(-I))
}

/// Liouvillian superoperator on the joint space.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
    dims: SpaceDims,
    params: Option<DeviceParams>,
}

impl Liouvillian {
    /// Wraps a prebuilt `d² × d²` generator.
    pub fn from_matrix(matrix: ComplexMatrix, dims: SpaceDims) -> Result<Self> {
        let d = dims.total_dim();
        if matrix.shape() != (d * d, d * d) {
            return Err(Error::Shape(format!("Liouvillian must be {0}x{0}, got {1:?}", d * d, matrix.shape())));
        }
        Ok(Self { matrix, dims, params: None })
    }

    /// Device parameters the generator was built from, if any.
    pub fn params(&self) -> Option<&DeviceParams> {
        self.params.as_ref()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> SpaceDims {
        self.dims
    }

    /// Hilbert-space dimension d (the superoperator is d² × d²).
    pub fn hilbert_dim(&self) -> usize {
        self.dims.total_dim()
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.hilbert_dim();
        if rho.shape() != (d, d) {
            return Err(Error::Shape(format!("Liouvillian acts on {d}x{d}, got {:?}", rho.shape())));
        }
        unvec(&self.matrix.mul_vec(&vec(rho)), d)
    }

    /// Connected components of the sparsity graph of ℒ, each sorted, ordered
    /// by smallest member. Each component spans an invariant subspace.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.matrix.rows();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for (j, z) in self.matrix.row(i).iter().enumerate() {
                if i != j && *z != ZERO {
                    uf.union(i, j);
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = uf.find(i);
            groups[r].push(i);
        }
        let mut comps: Vec<Vec<usize>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        comps.sort_by_key(|g| g[0]);
        comps
    }
}

/// `ℒ = −i[H,·] + κ(n̄+1)𝒟[b] + κn̄𝒟[b†] + γ𝒟[σ₋] + (γ_φ/2)𝒟[σ_z]`.
///
/// With `n̄ = 0` the thermal-excitation term vanishes.
pub fn build_liouvillian(h: &ComplexMatrix, p: &DeviceParams, dims: SpaceDims) -> Result<Liouvillian> {
    let d = dims.total_dim();
    if h.shape() != (d, d) {
        return Err(Error::Shape(format!("Hamiltonian must be {d}x{d}, got {:?}", h.shape())));
    }
    if !h.is_hermitian(1e-10 * h.max_abs().max(1.0)) {
        return Err(Error::Validation("Hamiltonian is not Hermitian".into()));
    }
    p.check_finite()?;
    for (name, rate) in [("kappa", p.kappa), ("gamma", p.gamma), ("gamma_phi", p.gamma_phi), ("n_bar", p.n_bar)] {
        if rate < 0.0 {
            return Err(Error::Validation(format!("{name} must be non-negative, got {rate}")));
        }
    }
    let mut l = hamiltonian_superoperator(h)?;
    let b = embed(&annihilation(dims.fock_cutoff())?, Slot::Nems, dims)?;
    let basis = QubitBasis::EnergyBasis;
    let channels = [
        (p.kappa * (p.n_bar + 1.0), b.clone()),
        (p.kappa * p.n_bar, b.dagger()),
        (p.gamma, embed(&pauli(Pauli::Minus, basis), Slot::Qubit, dims)?),
        (p.gamma_phi / 2.0, embed(&pauli(Pauli::Z, basis), Slot::Qubit, dims)?),
    ];
    for (rate, c) in channels {
        if rate > 0.0 {
            l += &dissipator(&c)?.scale_real(rate);
        }
    }
    let mut out = Liouvillian::from_matrix(l, dims)?;
    out.params = Some(*p);
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    step: ComplexMatrix,
}

/// Single-step propagator `e^{ℒ·dt}`, stored block by block.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    blocks: Vec<Block>,
    dt: f64,
}

impl Propagator {
    /// Propagator on the whole space.
    pub fn new(l: &Liouvillian, dt: f64) -> Result<Self> {
        Self::build(l, dt, None)
    }

    /// Propagator restricted to the invariant subspaces touched by `support`
    /// (indices into the vectorised state). Vectors handed to
    /// [`Propagator::apply`] must vanish outside those subspaces.
    pub fn for_support(l: &Liouvillian, dt: f64, support: &[usize]) -> Result<Self> {
        Self::build(l, dt, Some(support))
    }

    fn build(l: &Liouvillian, dt: f64, support: Option<&[usize]>) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::Validation(format!("time step must be finite and non-negative, got {dt}")));
        }
        let dim = l.matrix.rows();
        let mut wanted = vec![support.is_none(); dim];
        if let Some(s) = support {
            for &i in s {
                if i >= dim {
                    return Err(Error::Shape(format!("support index {i} outside {dim}")));
                }
                wanted[i] = true;
            }
        }
        let mut blocks = Vec::new();
        for comp in l.components() {
            if !comp.iter().any(|&i| wanted[i]) {
                continue;
            }
            let sub = l.matrix.principal_submatrix(&comp).scale_real(dt);
            blocks.push(Block { step: expm(&sub)?, indices: comp });
        }
        Ok(Self { dim, blocks, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of vector entries the propagator acts on.
    pub fn active_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).sum()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "propagator dimension mismatch");
        let mut out = vec![ZERO; self.dim];
        let mut local = Vec::new();
        for block in &self.blocks {
            local.clear();
            local.extend(block.indices.iter().map(|&i| v[i]));
            for (r, &i) in block.indices.iter().enumerate() {
                out[i] = block.step.row(r).iter().zip(&local).map(|(&a, &b)| a * b).sum();
            }
        }
        out
    }
}

/// Spacing of a uniform time grid.
pub fn uniform_step(t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::Validation("empty time grid".into()));
    }
    if !(t_grid[0] >= 0.0) {
        return Err(Error::Validation(format!("time grid must start at t ≥ 0, got {}", t_grid[0])));
    }
    if t_grid.len() == 1 {
        return Ok(0.0);
    }
    let dt = t_grid[1] - t_grid[0];
    if !(dt > 0.0) {
        return Err(Error::Validation("time grid must be strictly ascending".into()));
    }
    let span = t_grid[t_grid.len() - 1].abs().max(dt);
    for (k, w) in t_grid.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * span {
            return Err(Error::Validation(format!(
                "time grid is not uniform at step {k}: {} vs {dt}",
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}

/// `ρ(t_k)` on a uniform grid, using one propagator `e^{ℒ·dt}` for every step.
pub fn evolve(l: &Liouvillian, rho0: &QuantumState, t_grid: &[f64]) -> Result<Vec<QuantumState>> {
    if rho0.dims() != l.dims() {
        return Err(Error::Shape("state and Liouvillian live on different spaces".into()));
    }
    let dt = uniform_step(t_grid)?;
    let d = l.hilbert_dim();
    let v0 = vec(rho0.rho());
    let support: Vec<usize> = (0..v0.len()).filter(|&i| v0[i] != ZERO).collect();
    let mut v = if t_grid[0] > 0.0 {
        Propagator::for_support(l, t_grid[0], &support)?.apply(&v0)
    } else {
        v0
    };
    let prop = Propagator::for_support(l, dt, &support)?;
    let mut out = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        if k > 0 {
            v = prop.apply(&v);
        }
        let state = QuantumState::new(unvec(&v, d)?, l.dims()).map_err(|e| {
            Error::Numerical(format!("evolved state at t = {} violates the density-matrix invariants: {e}", t_grid[k]))
        })?;
        out.push(state);
    }
    Ok(out)
}

/// Singular values below this count as zero in the null-space test.
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Unique stationary state `ℒρ = 0` with unit trace.
pub fn steady_state(l: &Liouvillian) -> Result<QuantumState> {
    let d = l.hilbert_dim();
    let mut all_sv = Vec::new();
    let mut best: Option<(f64, Vec<usize>, Vec<Complex64>)> = None;
    for comp in l.components() {
        let (sv, v) = singular_values(&l.matrix.principal_submatrix(&comp))?;
        if best.as_ref().is_none_or(|(b, _, _)| sv[0] < *b) {
            best = Some((sv[0], comp, v));
        }
        all_sv.extend(sv);
    }
    all_sv.sort_by(f64::total_cmp);
    let (smallest, comp, v) = best.ok_or_else(|| Error::Shape("empty Liouvillian".into()))?;
    let second = all_sv.get(1).copied().unwrap_or(f64::INFINITY);
    if second <= NULL_SPACE_TOL {
        return Err(Error::Multiplicity(format!(
            "steady state is not unique: two smallest singular values {smallest:.3e}, {second:.3e}"
        )));
    }
    let mut full = vec![ZERO; d * d];
    for (&i, &z) in comp.iter().zip(&v) {
        full[i] = z;
    }
    let rho = unvec(&full, d)?;
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Numerical("null vector of ℒ is traceless".into()));
    }
    let rho = rho.scale(Complex64::new(1.0, 0.0) / tr);
    let rho = (&rho + &rho.dagger()).scale_real(0.5);
    let residual = l.matrix.mul_vec(&vec(&rho)).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if residual > NULL_SPACE_TOL.max(1e-13 * l.matrix.norm_fro()) {
        return Err(Error::Numerical(format!("steady-state residual {residual:.3e} too large")));
    }
    QuantumState::new(rho, l.dims())
}
