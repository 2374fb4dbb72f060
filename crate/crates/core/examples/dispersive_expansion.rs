//! Accuracy of the second-order dispersive expansion. On the block with at
//! most two excitations the residual against the effective Hamiltonian
//! falls as λ³: halving g at fixed detuning divides it by 8.

use nems_qnd::device::{dispersive_transform, excitation_block, BchOrder};
use nems_qnd::{hamiltonian_effective, DeviceParams, SpaceDims};

fn main() -> nems_qnd::Result<()> {
    let dims = SpaceDims::new(6)?;
    let block = excitation_block(dims, 2);
    let mut previous: Option<f64> = None;
    println!("{:>8} {:>14} {:>14} {:>8}", "lambda", "order 2", "exact", "ratio");
    for g in [0.05, 0.025, 0.0125, 0.00625] {
        let p = DeviceParams { g, ..DeviceParams::default() };
        let h_eff = hamiltonian_effective(&p, dims)?.principal_submatrix(&block);
        let residual = |order| -> nems_qnd::Result<f64> {
            let h = dispersive_transform(&p, dims, order)?.principal_submatrix(&block);
            Ok((&h - &h_eff).norm_fro())
        };
        let (r2, rx) = (residual(BchOrder::Second)?, residual(BchOrder::Exact)?);
        let ratio = previous.map_or(String::from("-"), |r| format!("{:.3}", r / r2));
        println!("{:>8.4} {r2:>14.6e} {rx:>14.6e} {ratio:>8}", p.lambda());
        previous = Some(r2);
    }
    Ok(())
}
