//! Scattering rate, optical depth and photon count for one probe pulse.

use pauli_blockade::gas::{derive_scales, GasState, SpeciesParams, TrapGeometry};
use pauli_blockade::observables::DetectionAxis;
use pauli_blockade::optics::{optical_density, photon_budget, scattering_rate, DriveParams};

fn main() -> pauli_blockade::Result<()> {
    let species = SpeciesParams::strontium_87();
    let trap = TrapGeometry::from_hz(120.0, 120.0, 506.0)?;
    let scales = derive_scales(&trap, 18_000, &species)?;
    let state = GasState::new(0.13)?;
    let n_spins = 10;

    // 5 I_sat, 40 linewidths red of resonance, 1 us
    let drive = DriveParams::new(5.0, 40.0, 1e-6)?;
    let scat = scattering_rate(&drive, &species);
    println!("rate               {:.4e} /s", scat.rate);
    println!("excitation/atom    {:.4}", scat.excitation_fraction);

    let od = optical_density(&scales, &state, &trap, &species, &drive, n_spins)?;
    println!("resonant OD        {:.1}", od.od_resonant);
    println!("effective OD       {:.4}", od.od_effective);
    println!("transmission       {:.4}", od.transmission);

    let n_total = scales.n_per_spin * u64::from(n_spins);
    for (alpha, na) in [(24.0, 0.23), (72.0, 0.1)] {
        let axis = DetectionAxis::new(alpha, na)?;
        println!("photons at {alpha:>2} deg  {:.1}", photon_budget(&scat, &axis, 1.0, n_total)?);
    }
    Ok(())
}
