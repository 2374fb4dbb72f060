//! Device parameters and the model Hamiltonians of the qubit–NEMS system.
//!
//! Internal units: ħ = 1, every rate and frequency angular. The chain of
//! Hamiltonians runs from the charge basis through the basis rotation and
//! the rotating-wave approximation to the dispersive effective Hamiltonian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, embed, number_op, pauli, Pauli, QubitBasis, Slot, SpaceDims};
use crate::linalg::{commutator, expm, ComplexMatrix};

/// |λ| above which the dispersive expansion is flagged as unreliable.
pub const DISPERSIVE_LIMIT: f64 = 0.1;

/// Physical constants of the qubit–NEMS device in internal units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    /// Charging energy.
    #[serde(rename = "E_C")]
    pub e_c: f64,
    /// Josephson energy; sets the bare qubit frequency ν_a = E_J/ħ.
    #[serde(rename = "E_J")]
    pub e_j: f64,
    /// NEMS angular frequency.
    pub omega: f64,
    /// Qubit–NEMS coupling.
    pub g: f64,
    /// NEMS energy decay rate.
    pub kappa: f64,
    /// Qubit relaxation rate.
    pub gamma: f64,
    /// Qubit pure-dephasing rate.
    pub gamma_phi: f64,
    /// Thermal occupation of the NEMS reservoir.
    pub n_bar: f64,
    /// Total gate charge.
    pub n_g: f64,
}

impl Default for DeviceParams {
    /// Desk-scale resolved regime: Δ = 0.25, λ = 0.1, χ = 0.0025, χ/κ = 12.5.
    fn default() -> Self {
        Self {
            e_c: 2.0,
            e_j: 0.75,
            omega: 1.0,
            g: 0.025,
            kappa: 2e-4,
            gamma: 2e-4,
            gamma_phi: 0.0,
            n_bar: 1.0,
            n_g: 0.5,
        }
    }
}

impl DeviceParams {
    pub const HBAR: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        self.check_finite()?;
        if self.omega <= 0.0 {
            return Err(Error::Validation(format!("omega must be positive, got {}", self.omega)));
        }
        if self.e_j <= 0.0 {
            return Err(Error::Validation(format!("E_J must be positive, got {}", self.e_j)));
        }
        for (name, rate) in [("kappa", self.kappa), ("gamma", self.gamma), ("gamma_phi", self.gamma_phi)] {
            if rate < 0.0 {
                return Err(Error::Validation(format!("{name} must be non-negative, got {rate}")));
            }
        }
        if self.n_bar < 0.0 {
            return Err(Error::Validation(format!("n_bar must be non-negative, got {}", self.n_bar)));
        }
        Ok(())
    }

    /// Rejects non-finite values only; Hamiltonian builders accept the
    /// degenerate limits (E_J = 0, g = 0) that [`DeviceParams::validate`] forbids.
    pub fn check_finite(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, f64); 9] {
        [
            ("E_C", self.e_c),
            ("E_J", self.e_j),
            ("omega", self.omega),
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_phi", self.gamma_phi),
            ("n_bar", self.n_bar),
            ("n_g", self.n_g),
        ]
    }

    /// Bare qubit frequency ν_a = E_J/ħ.
    pub fn nu_a(&self) -> f64 {
        self.e_j / Self::HBAR
    }

    /// Detuning Δ = ω − ν_a.
    pub fn delta(&self) -> f64 {
        self.omega - self.nu_a()
    }

    /// λ = g/Δ (infinite at resonance).
    pub fn lambda(&self) -> f64 {
        self.g / self.delta()
    }

    /// χ = g²/Δ.
    pub fn chi(&self) -> f64 {
        self.g * self.g / self.delta()
    }

    /// Signed frequency shift per phonon carried by the qubit, `χ_d = −g²/Δ`.
    ///
    /// With Δ = ω − ν_a, level repulsion from the exchange coupling moves the
    /// qubit line to `ν_a + χ_d(2n+1)`.
    pub fn dispersive_shift(&self) -> f64 {
        -self.chi()
    }

    /// `|λ| ≤ 0.1`.
    pub fn dispersive_valid(&self) -> bool {
        self.lambda().abs() <= DISPERSIVE_LIMIT * (1.0 + 1e-12)
    }

    pub fn require_dispersive(&self) -> Result<()> {
        if self.delta() == 0.0 {
            return Err(Error::Singularity(format!(
                "resonant regime: Δ = ω − ν_a = 0 (ω = ν_a = {}), the dispersive expansion is undefined",
                self.omega
            )));
        }
        Ok(())
    }

    /// Qubit transition frequency with `n` phonons present.
    pub fn transition_frequency(&self, n: usize) -> f64 {
        self.nu_a() + self.dispersive_shift() * (2 * n + 1) as f64
    }

    /// The shorter Stark-shift formula `ν_a + n g²/Δ`, kept for reporting.
    pub fn stark_line_simple(&self, n: usize) -> f64 {
        self.nu_a() + n as f64 * self.chi()
    }
}

/// Capacitive layout of the Cooper-pair box and the NEMS gate, in units with
/// e = ħ = 1 (so `E_C = 1/(2C_Σ)` and `n_X = C_X V_X / 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitiveGeometry {
    /// NEMS effective mass.
    pub m: f64,
    /// NEMS gate capacitance at rest.
    pub c_n: f64,
    /// ∂C_N/∂x along the flexion axis.
    pub dc_n_dx: f64,
    /// NEMS-induced gate charge at rest, n_N(0).
    pub n_n0: f64,
    pub c_cpb: f64,
    pub c_j: f64,
    pub v_n: f64,
    pub v_cpb: f64,
    /// Charging energy used in the coupling; see [`CapacitiveGeometry::derived_charging_energy`].
    pub e_c: f64,
}

impl CapacitiveGeometry {
    /// Geometry whose charging energy is derived from the capacitances.
    pub fn from_capacitances(
        m: f64,
        c_n: f64,
        dc_n_dx: f64,
        n_n0: f64,
        c_cpb: f64,
        c_j: f64,
        v_n: f64,
        v_cpb: f64,
    ) -> Result<Self> {
        let mut geom = Self { m, c_n, dc_n_dx, n_n0, c_cpb, c_j, v_n, v_cpb, e_c: 0.0 };
        geom.e_c = geom.derived_charging_energy()?;
        Ok(geom)
    }

    /// C_Σ = C_N + C_cpb + C_J.
    pub fn c_sigma(&self) -> f64 {
        self.c_n + self.c_cpb + self.c_j
    }

    /// E_C = e²/2C_Σ.
    pub fn derived_charging_energy(&self) -> Result<f64> {
        let cs = self.c_sigma();
        if cs <= 0.0 || !cs.is_finite() {
            return Err(Error::Validation(format!("total capacitance must be positive, got {cs}")));
        }
        Ok(1.0 / (2.0 * cs))
    }

    /// Whether `e_c` matches `e²/2C_Σ` to relative `tol`.
    pub fn charging_energy_consistent(&self, tol: f64) -> bool {
        self.derived_charging_energy()
            .map(|e| (e - self.e_c).abs() <= tol * e.abs())
            .unwrap_or(false)
    }

    /// n_N = C_N V_N / 2e.
    pub fn n_nems(&self) -> f64 {
        self.c_n * self.v_n / 2.0
    }

    /// n_cpb = C_cpb V_cpb / 2e.
    pub fn n_cpb(&self) -> f64 {
        self.c_cpb * self.v_cpb / 2.0
    }

    /// n_g = n_N + n_cpb.
    pub fn n_g(&self) -> f64 {
        self.n_nems() + self.n_cpb()
    }
}

/// Charging energy of `n` Cooper pairs, `E_n = 2E_C(n − n_g)²`.
pub fn charging_energy(n: i64, n_g: f64, e_c: f64) -> f64 {
    let d = n as f64 - n_g;
    2.0 * e_c * d * d
}

/// `g = √(ħ/2mω) · 4 n_N(0) E_C (∂C_N/∂x) / (ħ C_N)`.
pub fn coupling_constant(geom: &CapacitiveGeometry, omega: f64) -> Result<f64> {
    for (name, v) in [("m", geom.m), ("omega", omega), ("C_N", geom.c_n)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    let hbar = DeviceParams::HBAR;
    let zero_point = (hbar / (2.0 * geom.m * omega)).sqrt();
    Ok(zero_point * 4.0 * geom.n_n0 * geom.e_c * geom.dc_n_dx / (hbar * geom.c_n))
}

/// Embedded operators reused by every Hamiltonian.
struct Ops {
    dims: SpaceDims,
    sx: ComplexMatrix,
    sz: ComplexMatrix,
    sp: ComplexMatrix,
    sm: ComplexMatrix,
    b: ComplexMatrix,
    bd: ComplexMatrix,
    n: ComplexMatrix,
}

impl Ops {
    fn new(dims: SpaceDims, basis: QubitBasis) -> Result<Self> {
        let q = |w| embed(&pauli(w, basis), Slot::Qubit, dims);
        let b = embed(&annihilation(dims.fock_cutoff())?, Slot::Nems, dims)?;
        Ok(Self {
            dims,
            sx: q(Pauli::X)?,
            sz: q(Pauli::Z)?,
            sp: q(Pauli::Plus)?,
            sm: q(Pauli::Minus)?,
            bd: b.dagger(),
            b,
            n: embed(&number_op(dims.fock_cutoff())?, Slot::Nems, dims)?,
        })
    }

    fn position(&self) -> ComplexMatrix {
        &self.b + &self.bd
    }

    fn identity(&self) -> ComplexMatrix {
        ComplexMatrix::identity(self.dims.total_dim())
    }
}

/// `H = −(E_J/2)σ_x + ħω b†b + ħg σ_z(b + b†)` in the Cooper-pair basis.
pub fn hamiltonian_charge_basis(p: &DeviceParams, dims: SpaceDims) -> Result<ComplexMatrix> {
    p.check_finite()?;
    let o = Ops::new(dims, QubitBasis::ChargeBasis)?;
    Ok(&(&o.sx.scale_real(-p.e_j / 2.0) + &o.n.scale_real(p.omega)) + &(&o.sz * &o.position()).scale_real(p.g))
}

/// Qubit rotation implementing σ_z → σ_x, σ_x → −σ_z under `U σ U†`.
pub fn basis_change_unitary() -> ComplexMatrix {
    let h = 1.0 / 2f64.sqrt();
    ComplexMatrix::from_real_rows(&[&[h, -h], &[h, h]])
}

/// `H = (E_J/2)σ_z + ħω b†b + ħg σ_x(b + b†)` in the qubit energy basis.
pub fn hamiltonian_rotated(p: &DeviceParams, dims: SpaceDims) -> Result<ComplexMatrix> {
    p.check_finite()?;
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    Ok(&(&o.sz.scale_real(p.e_j / 2.0) + &o.n.scale_real(p.omega)) + &(&o.sx * &o.position()).scale_real(p.g))
}

/// Jaynes–Cummings form `ħω b†b + (E_J/2)σ_z + ħg(σ₋b† + σ₊b)`.
pub fn hamiltonian_rwa(p: &DeviceParams, dims: SpaceDims) -> Result<ComplexMatrix> {
    p.check_finite()?;
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    let exchange = &(&o.sm * &o.bd) + &(&o.sp * &o.b);
    Ok(&(&o.n.scale_real(p.omega) + &o.sz.scale_real(p.e_j / 2.0)) + &exchange.scale_real(p.g))
}

/// Total excitation number `b†b + |+⟩⟨+|`, conserved by [`hamiltonian_rwa`].
pub fn excitation_number(dims: SpaceDims) -> Result<ComplexMatrix> {
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    Ok(&o.n + &(&o.sp * &o.sm))
}

/// Dispersive Hamiltonian
/// `ħ[ω + χ_d σ_z] b†b + (ħ/2)[ν_a + χ_d] σ_z + (ħχ_d/2)·1`
/// with `χ_d = −g²/Δ` (see [`DeviceParams::dispersive_shift`]).
///
/// The constant term is the offset produced by the second-order expansion;
/// keeping it makes this exactly the λ² part of [`dispersive_transform`].
/// Diagonal in the product basis: `|+, n⟩` has energy `ωn + ν_a/2 + χ_d(n+1)`,
/// `|−, n⟩` has `ωn − ν_a/2 − χ_d n`.
pub fn hamiltonian_effective(p: &DeviceParams, dims: SpaceDims) -> Result<ComplexMatrix> {
    p.check_finite()?;
    p.require_dispersive()?;
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    let shift = p.dispersive_shift();
    let pieces = [
        o.n.scale_real(p.omega),
        (&o.sz * &o.n).scale_real(shift),
        o.sz.scale_real(0.5 * (p.nu_a() + shift)),
        o.identity().scale_real(0.5 * shift),
    ];
    Ok(pieces.iter().fold(ComplexMatrix::zeros(dims.total_dim(), dims.total_dim()), |acc, m| &acc + m))
}

/// The dispersive Hamiltonian split into system and interaction parts:
/// `H_S = ħω b†b + (ħ/2)(ν_a + χ_d)σ_z + (ħχ_d/2)·1`, `H_I = ħχ_d σ_z b†b`.
pub fn effective_split(p: &DeviceParams, dims: SpaceDims) -> Result<(ComplexMatrix, ComplexMatrix)> {
    p.check_finite()?;
    p.require_dispersive()?;
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    let shift = p.dispersive_shift();
    let h_s = &(&o.n.scale_real(p.omega) + &o.sz.scale_real(0.5 * (p.nu_a() + shift)))
        + &o.identity().scale_real(0.5 * shift);
    let h_i = (&o.sz * &o.n).scale_real(shift);
    Ok((h_s, h_i))
}

/// Anti-Hermitian generator `Y = bσ₊ − b†σ₋` of the dispersive transformation.
pub fn dispersive_generator(dims: SpaceDims) -> Result<ComplexMatrix> {
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    Ok(&(&o.b * &o.sp) - &(&o.bd * &o.sm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BchOrder {
    /// `H̃ + λ[H̃,Y] + (λ²/2)[[H̃,Y],Y]`.
    Second,
    /// `e^{−λY} H̃ e^{λY}`.
    Exact,
}

/// Conjugates the RWA Hamiltonian with `e^{λY}`, λ = g/Δ, either truncated
/// after the second nested commutator or exactly.
pub fn dispersive_transform(p: &DeviceParams, dims: SpaceDims, order: BchOrder) -> Result<ComplexMatrix> {
    p.check_finite()?;
    p.require_dispersive()?;
    let h = hamiltonian_rwa(p, dims)?;
    let lambda = p.lambda();
    let y = dispersive_generator(dims)?;
    match order {
        BchOrder::Second => {
            let c1 = commutator(&h, &y);
            let c2 = commutator(&c1, &y);
            Ok(&(&h + &c1.scale_real(lambda)) + &c2.scale_real(0.5 * lambda * lambda))
        }
        BchOrder::Exact => {
            let left = expm(&y.scale_real(-lambda))?;
            let right = expm(&y.scale_real(lambda))?;
            Ok(&(&left * &h) * &right)
        }
    }
}

/// Indices of the joint basis states with at most `max` excitations
/// (`n + [qubit excited]`), in ascending joint-index order.
pub fn excitation_block(dims: SpaceDims, max: usize) -> Vec<usize> {
    let mut idx = Vec::new();
    for q in 0..2 {
        for n in 0..dims.fock_cutoff() {
            let exc = n + usize::from(q == crate::hilbert::EXCITED);
            if exc <= max {
                idx.push(dims.index(q, n));
            }
        }
    }
    idx
}

/// Norms of the three commutators tested by [`qnd_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorNorms {
    /// ‖[O_A, H_I]‖
    pub apparatus_interaction: f64,
    /// ‖[O_S, H_I]‖
    pub observable_interaction: f64,
    /// ‖[H_S, O_S]‖
    pub system_observable: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QndReport {
    /// The apparatus observable responds to the interaction.
    pub cond1_holds: bool,
    /// The measured observable commutes with the interaction.
    pub cond2_holds: bool,
    /// The measured observable is a constant of motion of the system.
    pub cond3_holds: bool,
    pub commutator_norms: CommutatorNorms,
    pub tolerance: f64,
}

impl QndReport {
    pub fn all_hold(&self) -> bool {
        self.cond1_holds && self.cond2_holds && self.cond3_holds
    }
}

/// Checks the three quantum non-demolition conditions with Frobenius norms
/// and tolerance `1e-10·‖H_S + H_I‖`.
pub fn qnd_check(
    h_s: &ComplexMatrix,
    h_i: &ComplexMatrix,
    o_s: &ComplexMatrix,
    o_a: &ComplexMatrix,
) -> Result<QndReport> {
    let d = h_s.ensure_square("qnd_check H_S")?;
    for (name, m) in [("H_I", h_i), ("O_S", o_s), ("O_A", o_a)] {
        if m.shape() != (d, d) {
            return Err(Error::Shape(format!("qnd_check: {name} is {:?}, expected {d}x{d}", m.shape())));
        }
    }
    let tolerance = 1e-10 * (h_s + h_i).norm_fro().max(f64::MIN_POSITIVE);
    let norms = CommutatorNorms {
        apparatus_interaction: commutator(o_a, h_i).norm_fro(),
        observable_interaction: commutator(o_s, h_i).norm_fro(),
        system_observable: commutator(h_s, o_s).norm_fro(),
    };
    Ok(QndReport {
        cond1_holds: norms.apparatus_interaction > tolerance,
        cond2_holds: norms.observable_interaction <= tolerance,
        cond3_holds: norms.system_observable <= tolerance,
        commutator_norms: norms,
        tolerance,
    })
}

/// QND check of the dispersive split with `O_S = b†b`, `O_A = σ_x`.
pub fn qnd_check_effective(p: &DeviceParams, dims: SpaceDims) -> Result<QndReport> {
    let (h_s, h_i) = effective_split(p, dims)?;
    let o = Ops::new(dims, QubitBasis::EnergyBasis)?;
    qnd_check(&h_s, &h_i, &o.n, &o.sx)
}
