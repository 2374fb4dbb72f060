//! The Hamiltonian chain: charge basis, qubit energy basis, rotating-wave
//! approximation and the dispersive effective form. Prints the low-lying
//! spectra side by side.

use nems_qnd::linalg::eig_hermitian;
use nems_qnd::{hamiltonian_charge_basis, hamiltonian_effective, hamiltonian_rotated, hamiltonian_rwa, DeviceParams,
    SpaceDims};

fn main() -> nems_qnd::Result<()> {
    let p = DeviceParams::default();
    let dims = SpaceDims::new(8)?;
    println!("nu_a = {}, Delta = {}, lambda = {}, chi = {}", p.nu_a(), p.delta(), p.lambda(), p.chi());

    let spectra = [
        ("charge", eig_hermitian(&hamiltonian_charge_basis(&p, dims)?)?.values),
        ("rotated", eig_hermitian(&hamiltonian_rotated(&p, dims)?)?.values),
        ("rwa", eig_hermitian(&hamiltonian_rwa(&p, dims)?)?.values),
        ("effective", eig_hermitian(&hamiltonian_effective(&p, dims)?)?.values),
    ];
    print!("{:>4}", "k");
    for (name, _) in &spectra {
        print!("{name:>16}");
    }
    println!();
    for k in 0..8 {
        print!("{k:>4}");
        for (_, e) in &spectra {
            print!("{:>16.10}", e[k]);
        }
        println!();
    }
    // The charge and rotated forms are related by a unitary and share every eigenvalue.
    let diff = spectra[0].1.iter().zip(&spectra[1].1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |E_charge - E_rotated| = {diff:.2e}");
    Ok(())
}
