use pauli_blockade::gas::GasState;
use pauli_blockade::observables::{lifetime_factor, EmissionWeighting};

fn main() -> pauli_blockade::Result<()> {
    for t in [0.1, 0.13, 0.3, 5.0] {
        let state = GasState::new(t)?;
        let iso = lifetime_factor(&state, 0.93, EmissionWeighting::Isotropic)?;
        let dip = lifetime_factor(&state, 0.93, EmissionWeighting::DipoleCircular)?;
        println!(
            "T/T_F = {t:<5} isotropic: <S> = {:.4}, tau/tau0 = {:.4}   dipole: <S> = {:.4}, tau/tau0 = {:.4}",
            iso.mean_s, iso.multiplier, dip.mean_s, dip.multiplier
        );
    }
    Ok(())
}
