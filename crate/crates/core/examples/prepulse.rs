//! Heating the Fermi sea with a resonant pre-pulse. Each atom takes Poisson
//! recoil kicks; `S` is re-estimated from the kicked momenta and normalized
//! to the longest pulses.

use pauli_blockade::gas::GasState;
use pauli_blockade::observables::{prepulse_relaxation_mc, DetectionAxis, PrepulseSpec};

fn main() -> pauli_blockade::Result<()> {
    let durations: Vec<f64> = (0..=10).map(|i| 0.5e-6 * i as f64).collect();
    for t in [0.11, 0.58] {
        let spec = PrepulseSpec {
            kf_over_kr: 0.93,
            scatter_rate: 5e7,
            durations: durations.clone(),
            probe: DetectionAxis::new(24.0, 0.23)?,
            seed: 1,
            n_atoms_sim: 5_000,
            kick_histories: 4,
        };
        let rows = prepulse_relaxation_mc(&GasState::new(t)?, &spec)?;
        println!("T/T_F = {t}");
        for r in &rows {
            println!("  {:>4.1} us  S = {:.4} +/- {:.4}  normalized {:.3}", r.duration * 1e6, r.s_raw, r.std_error, r.s_normalized);
        }
    }
    Ok(())
}
