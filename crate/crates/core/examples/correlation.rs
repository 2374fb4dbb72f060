//! Two-time qubit correlation ⟨σ₋(t)σ₊(0)⟩ with a thermal NEMS, by the
//! quantum regression theorem. The envelope beats at the comb spacing 2χ.

use nems_qnd::hilbert::thermal_state;
use nems_qnd::spectrum::time_grid;
use nems_qnd::{build_liouvillian, correlation, hamiltonian_effective, DeviceParams, SpaceDims};

fn main() -> nems_qnd::Result<()> {
    let n = 15;
    let dims = SpaceDims::new(n)?;
    let p = DeviceParams::default();
    let l = build_liouvillian(&hamiltonian_effective(&p, dims)?, &p, dims)?;
    let grid = time_grid(5000.0, 0.25)?;
    let c = correlation(&l, &thermal_state(p.n_bar, n)?, &grid)?;

    println!("{:>10} {:>14} {:>14} {:>12}", "t", "Re C", "Im C", "|C|");
    for k in (0..grid.len()).step_by(1000) {
        let z = c.values[k];
        println!("{:>10.1} {:>14.8} {:>14.8} {:>12.8}", grid[k], z.re, z.im, z.norm());
    }
    println!("beat period pi/chi = {:.1}", std::f64::consts::PI / p.chi());
    Ok(())
}
