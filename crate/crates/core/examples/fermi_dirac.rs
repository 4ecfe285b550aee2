//! Complete Fermi-Dirac integrals across the classical, crossover and
//! degenerate regimes, next to their asymptotic forms.

use pauli_blockade::specfun::{fd_integral, FdOrder};

fn main() -> pauli_blockade::Result<()> {
    println!("{:>8} {:>14} {:>14} {:>14}", "mu", "f_3/2", "f_2", "f_3");
    for mu in [-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0] {
        println!(
            "{mu:>8.1} {:>14.8e} {:>14.8e} {:>14.8e}",
            fd_integral(FdOrder::THREE_HALVES, mu)?,
            fd_integral(FdOrder::TWO, mu)?,
            fd_integral(FdOrder::THREE, mu)?,
        );
    }

    // deep in the Boltzmann tail every order collapses onto e^mu
    let mu = -30.0;
    println!("\nf_3(-30) / e^-30 = {:.12}", fd_integral(FdOrder::THREE, mu)? / mu.exp());

    // and far on the degenerate side f_3 -> mu^3 / 6
    let mu = 200.0;
    println!("f_3(200) / (200^3 / 6) = {:.9}", fd_integral(FdOrder::THREE, mu)? / (mu.powi(3) / 6.0));
    Ok(())
}
