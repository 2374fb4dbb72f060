//! Lindblad evolution of the qubit–NEMS system from a vacuum NEMS and an
//! excited qubit, with the NEMS coupled to a reservoir at n̄ = 1.

use nems_qnd::hilbert::{embed, number_op, pauli, projector, Pauli, QubitBasis, Slot};
use nems_qnd::lindblad::expectation;
use nems_qnd::{build_liouvillian, evolve, hamiltonian_effective, DeviceParams, QuantumState, SpaceDims, EXCITED};

fn main() -> nems_qnd::Result<()> {
    let n = 12;
    let dims = SpaceDims::new(n)?;
    let p = DeviceParams { kappa: 0.01, gamma: 0.02, ..DeviceParams::default() };
    let l = build_liouvillian(&hamiltonian_effective(&p, dims)?, &p, dims)?;
    let rho0 = QuantumState::product(&projector(EXCITED, 2), &projector(0, n), dims)?;

    let grid: Vec<f64> = (0..=20).map(|k| 25.0 * k as f64).collect();
    let states = evolve(&l, &rho0, &grid)?;
    let num = embed(&number_op(n)?, Slot::Nems, dims)?;
    let sz = embed(&pauli(Pauli::Z, QubitBasis::EnergyBasis), Slot::Qubit, dims)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "<n>", "<sz>", "|Tr-1|", "min eig");
    for (t, s) in grid.iter().zip(&states) {
        let d = s.diagnostics()?;
        println!(
            "{t:>8.1} {:>12.6} {:>12.6} {:>12.2e} {:>12.2e}",
            expectation(&num, s)?.re,
            expectation(&sz, s)?.re,
            d.trace_error,
            d.min_eigenvalue
        );
    }
    Ok(())
}
