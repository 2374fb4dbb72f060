//! Phonon-number distribution read off the spectrum: Lorentzian areas of
//! the comb lines, normalised, against the Bose–Einstein law and the
//! populations of the state itself.

use nems_qnd::cli::compute_spectrum;
use nems_qnd::{bose_einstein, compare_distributions, fit_peak_weights, fock_populations, RunConfig};

fn main() -> nems_qnd::Result<()> {
    for n_bar in [0.5, 1.0] {
        let mut cfg = RunConfig::default();
        cfg.device.n_bar = n_bar;
        let s = compute_spectrum(&cfg)?;
        let fitted = fit_peak_weights(&s)?;
        let analytic = bose_einstein(n_bar, fitted.n_max())?;
        let state = fock_populations(&cfg.initial_state()?)?;
        let cmp = compare_distributions(&fitted, &analytic)?;
        println!("n_bar = {n_bar}: fit residual {:.2e}", fitted.residual);
        println!("{:>3} {:>10} {:>10} {:>10}", "n", "fitted", "thermal", "state");
        for n in 0..fitted.n_max() {
            println!(
                "{n:>3} {:>10.5} {:>10.5} {:>10.5}",
                fitted.probabilities[n], analytic.probabilities[n], state.probabilities[n]
            );
        }
        println!("total variation {:.4}, max |dP| {:.4}\n", cmp.total_variation, cmp.max_abs);
    }
    Ok(())
}
