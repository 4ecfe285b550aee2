//! Energy scales of the strontium-87 cloud and the fugacity that fixes the
//! atom number at a few temperatures.

use pauli_blockade::gas::{derive_scales, solve_fugacity, SpeciesParams, TrapGeometry};

fn main() -> pauli_blockade::Result<()> {
    let trap = TrapGeometry::from_hz(120.0, 120.0, 506.0)?;
    let scales = derive_scales(&trap, 18_000, &SpeciesParams::strontium_87())?;

    println!("E_F        = {:.1} nK", scales.fermi_energy_nk);
    println!("E_R        = {:.1} nK", scales.recoil_energy_nk);
    println!("k_F/k_R    = {:.3}", scales.ratio_kf_kr);
    println!("E_F/E_R    = {:.3}", scales.ratio_ef_er());
    println!("hw/E_R     = {:.2e}", scales.confinement_ratio);

    println!("\n{:>6} {:>10} {:>12}", "T/T_F", "mu/E_F", "fugacity");
    for t in [0.05, 0.13, 0.3, 0.7, 2.0] {
        let state = solve_fugacity(t)?;
        println!("{t:>6.2} {:>10.4} {:>12.5e}", state.mu_over_ef(), state.fugacity());
    }
    Ok(())
}
