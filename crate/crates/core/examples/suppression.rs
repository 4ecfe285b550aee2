//! One transfer, four estimates of `S`: the trapped quadrature, the
//! fugacity series, Monte Carlo over phase space, and the homogeneous gas at
//! the trap center for comparison.

use pauli_blockade::blockade::{
    local_fermi_wavevector, suppression_homogeneous, suppression_mc, suppression_series, suppression_trapped,
};
use pauli_blockade::gas::GasState;

fn main() -> pauli_blockade::Result<()> {
    let k = 0.45;
    for t in [0.13, 0.7] {
        let state = GasState::new(t)?;
        println!("T/T_F = {t}, k/k_F = {k}");

        let quad = suppression_trapped(k, &state)?;
        println!("  quadrature   {:.6}  (err {:.1e})", quad.s_value, quad.error_estimate);

        match suppression_series(k, &state, 400) {
            Ok(series) => println!("  series       {:.6}", series.s_value),
            Err(e) => println!("  series       unavailable: {e}"),
        }

        let mc = suppression_mc(k, &state, 400_000, 7)?;
        println!("  monte carlo  {:.6} +/- {:.6}", mc.s_value, mc.std_error);

        let x = k / local_fermi_wavevector(&state)?;
        let center = suppression_homogeneous(x, &state)?;
        println!("  trap center  {:.6}", center.s_value);
    }
    Ok(())
}
