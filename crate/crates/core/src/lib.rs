//! Dispersive phonon-number readout of a nanomechanical resonator (NEMS)
//! coupled to a Cooper-pair-box charge qubit.
//!
//! The crate builds the qubit–NEMS Hamiltonians, evolves the open system with
//! a Lindblad master equation, computes the qubit absorption spectrum from the
//! two-time correlation `⟨σ₋(t)σ₊(0)⟩`, and recovers the phonon-number
//! distribution from the areas of the number-split spectral lines.
//!
//! ```
//! use nems_qnd::{DeviceParams, SpaceDims, hamiltonian_effective};
//!
//! let p = DeviceParams::default();
//! assert!((p.chi() - 0.0025).abs() < 1e-15);
//! let h = hamiltonian_effective(&p, SpaceDims::new(4).unwrap()).unwrap();
//! assert!(h.is_hermitian(1e-14));
//! ```

pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod linalg;
pub mod spectrum;
pub mod statistics;

pub use config::{RunConfig, SeedState};
pub use device::{
    basis_change_unitary, dispersive_transform, effective_split, hamiltonian_charge_basis, hamiltonian_effective,
    hamiltonian_rotated, hamiltonian_rwa, qnd_check, qnd_check_effective, BchOrder, DeviceParams, QndReport,
};
pub use error::{Error, Result};
pub use hilbert::{SpaceDims, EXCITED, GROUND};
pub use lindblad::{build_liouvillian, evolve, steady_state, Liouvillian, QuantumState};
pub use linalg::ComplexMatrix;
pub use spectrum::{correlation, detect_peaks, spectrum, CorrelationTrace, Peak, SpectrumResult};
pub use statistics::{bose_einstein, compare_distributions, fit_peak_weights, fock_populations, PhononDistribution};
