//! Loading a run configuration with overrides, as the command-line tool
//! does, and echoing the resolved values.

use nems_qnd::RunConfig;

fn main() -> nems_qnd::Result<()> {
    let text = "fock_cutoff = 20\nseed_state = \"vacuum\"\n\n[device]\ng = 0.02\n";
    let overrides = ["device.kappa=1e-4".to_string(), "spectrum.n_max_peaks=4".to_string()];
    let cfg = RunConfig::from_toml_str(text, &overrides)?;
    println!("{}", cfg.to_toml());
    println!("t_max = {} (12/gamma), dt = {} (pi/(8 omega))", cfg.t_max(), cfg.dt());
    println!("chi/kappa = {}", cfg.device.chi() / cfg.device.kappa);

    match RunConfig::from_toml_str("[device]\nkapa = 1.0\n", &[]) {
        Err(e) => println!("typo rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
