use proptest::prelude::*;

use pauli_blockade::blockade::{suppression_series, suppression_trapped};
use pauli_blockade::gas::constants::HBAR;
use pauli_blockade::gas::{derive_scales, solve_fugacity, GasState, SpeciesParams, TrapGeometry};
use pauli_blockade::observables::{angle_to_k, DetectionAxis};
use pauli_blockade::optics::{optical_density, scattering_rate, DriveParams};
use pauli_blockade::profile::{gaussian_blur, radial_average, GridSpec, ScalarMap2D};
use pauli_blockade::specfun::{fd_integral, FdOrder};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn order() -> impl Strategy<Value = FdOrder> {
    prop::sample::select(FdOrder::SUPPORTED.to_vec())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn fermi_dirac_is_positive_and_increasing(s in order(), mu in -40.0f64..60.0, step in 1e-3f64..5.0) {
        let lo = fd_integral(s, mu).unwrap();
        let hi = fd_integral(s, mu + step).unwrap();
        prop_assert!(lo > 0.0);
        prop_assert!(hi > lo);
    }

    #[test]
    fn fermi_dirac_order_ordering_in_boltzmann_regime(mu in -12.0f64..-0.5) {
        // z - z^2/2^s + ... grows with s when e^mu < 1
        let vals: Vec<f64> = FdOrder::SUPPORTED.iter().map(|&o| fd_integral(o, mu).unwrap()).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn scales_are_self_consistent(
        fx in 20.0f64..2000.0, fy in 20.0f64..2000.0, fz in 20.0f64..2000.0, n in 10u64..10_000_000,
    ) {
        let species = SpeciesParams::strontium_87();
        let s = derive_scales(&TrapGeometry::from_hz(fx, fy, fz).unwrap(), n, &species).unwrap();
        let kf = (2.0 * s.mass * s.fermi_energy).sqrt() / HBAR;
        prop_assert!((kf / s.fermi_wavevector - 1.0).abs() < 1e-12);
        prop_assert!((s.ratio_kf_kr.powi(2) / s.ratio_ef_er() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_mapping_is_bounded(alpha in 0.0f64..=180.0, ratio in 0.1f64..5.0) {
        let k = angle_to_k(alpha, ratio);
        prop_assert!(k >= 0.0);
        prop_assert!(k <= 2.0 / ratio + 1e-15);
    }

    #[test]
    fn rate_monotone_in_saturation_and_detuning(
        s1 in 0.0f64..50.0, ds in 1e-3f64..50.0, d1 in 0.0f64..100.0, dd in 1e-3f64..50.0,
    ) {
        let sp = SpeciesParams::strontium_87();
        let r = |s: f64, d: f64| scattering_rate(&DriveParams::new(s, d, 1e-6).unwrap(), &sp).rate;
        prop_assert!(r(s1 + ds, d1) >= r(s1, d1));
        if s1 > 0.0 {
            prop_assert!(r(s1, d1 + dd) < r(s1, d1));
            prop_assert!((r(s1, -d1) - r(s1, d1)).abs() <= 1e-12 * r(s1, d1));
        }
    }

    #[test]
    fn blur_conserves_total(values in prop::collection::vec(0.0f64..10.0, 20 * 20), width in 0.0f64..4.0) {
        let map = ScalarMap2D::new(values, &GridSpec::centered(20, 20, 1.0), "u").unwrap();
        let blurred = gaussian_blur(&map, width).unwrap();
        prop_assert!((blurred.sum() / map.sum() - 1.0).abs() < 1e-9);
        prop_assert!(blurred.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn uniform_map_has_flat_profile(level in 0.0f64..100.0, cx in 0.0f64..15.0, cy in 0.0f64..15.0) {
        let map = ScalarMap2D::new(vec![level; 16 * 16], &GridSpec::centered(16, 16, 1.0), "u").unwrap();
        let p = radial_average(&map, (cx, cy), 1.5).unwrap();
        prop_assert!(p.means.iter().all(|m| (m - level).abs() <= 1e-12 * level.max(1.0)));
        prop_assert!(p.bin_centers.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(p.counts.iter().all(|&c| c >= 1));
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn fugacity_decreases_with_temperature(t in 0.01f64..50.0, factor in 1.01f64..2.0) {
        let cold = solve_fugacity(t).unwrap();
        let hot = solve_fugacity((t * factor).min(100.0)).unwrap();
        prop_assert!(hot.fugacity() < cold.fugacity());
    }

    #[test]
    fn suppression_is_bounded(k in 0.0f64..4.0, t in 0.02f64..5.0) {
        let s = suppression_trapped(k, &GasState::new(t).unwrap()).unwrap().s_value;
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn suppression_rises_with_transfer(k in 0.02f64..1.9, dk in 0.02f64..0.1, t in 0.05f64..0.7) {
        let state = GasState::new(t).unwrap();
        let a = suppression_trapped(k, &state).unwrap().s_value;
        let b = suppression_trapped(k + dk, &state).unwrap().s_value;
        prop_assert!(b > a, "S({k}) = {a}, S({}) = {b}", k + dk);
    }

    #[test]
    fn suppression_rises_with_temperature(k in 0.0f64..1.4, t in 0.05f64..0.7, dt in 0.01f64..0.2) {
        let a = suppression_trapped(k, &GasState::new(t).unwrap()).unwrap().s_value;
        let b = suppression_trapped(k, &GasState::new(t + dt).unwrap()).unwrap().s_value;
        prop_assert!(b >= a);
    }

    #[test]
    fn series_agrees_in_its_domain(k in 0.0f64..2.5, t in 0.6f64..5.0) {
        let state = GasState::new(t).unwrap();
        let q = suppression_trapped(k, &state).unwrap().s_value;
        let s = suppression_series(k, &state, 400).unwrap().s_value;
        prop_assert!((q - s).abs() < 1e-6);
    }

    #[test]
    fn optical_density_linear_in_spins(n_spins in 1u32..20, t in 0.05f64..2.0) {
        let sp = SpeciesParams::strontium_87();
        let trap = TrapGeometry::from_hz(120.0, 120.0, 506.0).unwrap();
        let scales = derive_scales(&trap, 18_000, &sp).unwrap();
        let state = GasState::new(t).unwrap();
        let drive = DriveParams::new(5.0, 40.0, 1e-6).unwrap();
        let one = optical_density(&scales, &state, &trap, &sp, &drive, 1).unwrap();
        let many = optical_density(&scales, &state, &trap, &sp, &drive, n_spins).unwrap();
        prop_assert!((many.od_effective / one.od_effective - f64::from(n_spins)).abs() < 1e-9);
        prop_assert_eq!(many.transmission, (-many.od_effective).exp());
    }
}

#[test]
fn temperature_monotonicity_grid() {
    // 20 x 20 grid over k/k_F in (0, 1.4] and T/T_F in [0.05, 1]
    let temps: Vec<f64> = (0..20).map(|i| 0.05 + i as f64 * 0.05).collect();
    let states: Vec<GasState> = temps.iter().map(|&t| GasState::new(t).unwrap()).collect();
    for j in 1..=20 {
        let k = 0.07 * j as f64;
        let column: Vec<f64> = states.iter().map(|s| suppression_trapped(k, s).unwrap().s_value).collect();
        assert!(column.windows(2).all(|w| w[1] >= w[0]), "k={k}: {column:?}");
    }
}

#[test]
fn near_sphere_separation_heating_reopens_overlap() {
    // Close to k = 2 k_F the cold Fermi spheres barely overlap; thermal tails
    // add overlap, so S first falls with temperature before the classical
    // limit pulls it back to 1.
    let s = |t: f64| suppression_trapped(1.9, &GasState::new(t).unwrap()).unwrap().s_value;
    assert!(s(0.02) > s(0.1));
    assert!(s(0.1) > s(0.5));
    assert!(s(20.0) > s(0.5));
}

#[test]
fn detection_axis_limits() {
    let axis = DetectionAxis::new(90.0, 0.999_999).unwrap();
    assert!((axis.solid_angle_fraction() - 0.5).abs() < 1e-3);
}
