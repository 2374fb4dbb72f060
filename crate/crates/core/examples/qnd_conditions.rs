//! Checks the three non-demolition conditions for b†b as measured
//! observable and σx as apparatus observable.
//!
//! The dispersive split passes all three. The exchange (RWA) interaction
//! fails the second: it moves phonons between qubit and NEMS.

use nems_qnd::device::{effective_split, hamiltonian_rwa};
use nems_qnd::hilbert::{embed, number_op, pauli, Pauli, QubitBasis, Slot};
use nems_qnd::{qnd_check, qnd_check_effective, DeviceParams, SpaceDims};

fn main() -> nems_qnd::Result<()> {
    let p = DeviceParams::default();
    let dims = SpaceDims::new(10)?;

    let report = qnd_check_effective(&p, dims)?;
    println!("dispersive: {report:#?}");

    let (h_s, _) = effective_split(&p, dims)?;
    let h_i = &hamiltonian_rwa(&p, dims)? - &h_s;
    let n = embed(&number_op(10)?, Slot::Nems, dims)?;
    let sx = embed(&pauli(Pauli::X, QubitBasis::EnergyBasis), Slot::Qubit, dims)?;
    let rwa = qnd_check(&h_s, &h_i, &n, &sx)?;
    println!("exchange: cond1 {} cond2 {} cond3 {}", rwa.cond1_holds, rwa.cond2_holds, rwa.cond3_holds);
    println!("||[b^dag b, H_I]|| = {:.3e}", rwa.commutator_norms.observable_interaction);
    Ok(())
}
