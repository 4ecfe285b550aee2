//! Column density and the locally blocked fraction of scattering, blurred to
//! imaging resolution and azimuthally averaged. Writes the maps to the
//! directory given as the first argument (default: a temporary directory).

use pauli_blockade::gas::{derive_scales, GasState, SpeciesParams, TrapGeometry};
use pauli_blockade::observables::angle_to_k;
use pauli_blockade::profile::{blocked_scattering_profile, cloud_diameter, gaussian_blur, radial_average, GridSpec};

fn main() -> pauli_blockade::Result<()> {
    let trap = TrapGeometry::from_hz(120.0, 120.0, 506.0)?;
    let scales = derive_scales(&trap, 18_000, &SpeciesParams::strontium_87())?;
    let state = GasState::new(0.12)?;
    let grid = GridSpec::default();
    let k = angle_to_k(24.0, scales.ratio_kf_kr);

    let maps = blocked_scattering_profile(&scales, &state, &trap, k, &grid)?;
    println!("k/k_F = {k:.3}, cloud-averaged S = {:.4}", maps.global_ratio());
    println!("diameter at half maximum = {:.1} um", 1e6 * cloud_diameter(&maps.unblocked, 0.5));

    let blocked = gaussian_blur(&maps.blocked, 3e-6)?;
    let unblocked = gaussian_blur(&maps.unblocked, 3e-6)?;
    let pb = radial_average(&blocked, grid.center, 1.8e-6)?;
    let pu = radial_average(&unblocked, grid.center, 1.8e-6)?;
    println!("\n{:>6} {:>8}", "r/um", "ratio");
    for i in 0..pb.bin_centers.len().min(12) {
        println!("{:>6.1} {:>8.4}", pb.bin_centers[i] * 1e6, pb.means[i] / pu.means[i]);
    }

    let dir = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(std::env::temp_dir);
    maps.ratio.save(&dir, "ratio", serde_json::json!({ "k_over_kf": k }))?;
    println!("\nratio map written to {}", dir.join("ratio.csv").display());
    Ok(())
}
