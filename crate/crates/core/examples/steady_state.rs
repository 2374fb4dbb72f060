//! Null space of the Liouvillian. With the NEMS damped into a reservoir at
//! n̄ = 1 the reduced steady state is thermal, whatever the qubit does.

use nems_qnd::hilbert::{thermal_state, trace_out_nems, trace_out_qubit};
use nems_qnd::lindblad::trace_distance;
use nems_qnd::{build_liouvillian, hamiltonian_rwa, steady_state, DeviceParams, SpaceDims};

fn main() -> nems_qnd::Result<()> {
    let n = 15;
    let dims = SpaceDims::new(n)?;
    let p = DeviceParams::default();
    let l = build_liouvillian(&hamiltonian_rwa(&p, dims)?, &p, dims)?;
    println!("Liouvillian {}x{}, {} connected blocks", l.matrix().rows(), l.matrix().cols(), l.components().len());

    let ss = steady_state(&l)?;
    let nems = trace_out_qubit(ss.rho(), dims)?;
    let qubit = trace_out_nems(ss.rho(), dims)?;
    println!("P(n): {:?}", nems.diagonal().iter().take(6).map(|z| format!("{:.5}", z.re)).collect::<Vec<_>>());
    println!("qubit populations: {:.6} {:.6}", qubit[(0, 0)].re, qubit[(1, 1)].re);
    // Under the exchange coupling the qubit dresses the NEMS slightly.
    println!("trace distance to thermal(1): {:.3e}", trace_distance(&nems, &thermal_state(1.0, n)?)?);
    Ok(())
}
