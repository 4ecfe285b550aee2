//! `S` against scattering angle for a shallow and a deep Fermi sea.

use pauli_blockade::gas::GasState;
use pauli_blockade::observables::angular_map;

fn main() -> pauli_blockade::Result<()> {
    let state = GasState::new(0.1)?;
    let shallow = angular_map(&state, 0.93, 13)?;
    let deep = angular_map(&state, 3.0, 13)?;
    println!("{:>6} {:>10} {:>10}", "alpha", "kF/kR=0.93", "kF/kR=3");
    for (a, b) in shallow.iter().zip(&deep) {
        println!("{:>6.0} {:>10.4} {:>10.4}", a.alpha_deg, a.s_value, b.s_value);
    }
    Ok(())
}
