//! Trap and species parameters, derived Fermi and recoil scales, and the
//! fugacity of a harmonically trapped ideal Fermi gas.
//!
//! Everything downstream works in reduced units: energies in `k_B T_F`,
//! momenta in `hbar k_F`. Physical units live here and in [`crate::optics`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{fd_integral, FdOrder};

pub mod constants {
    /// Reduced Planck constant, J s (CODATA 2018, exact).
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K (exact).
    pub const K_B: f64 = 1.380_649e-23;
    /// Atomic mass unit, kg (CODATA 2018).
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Atomic mass of 87Sr in u.
    pub const SR87_MASS_U: f64 = 86.908_877_5;
}

use constants::{ATOMIC_MASS_UNIT, HBAR, K_B, SR87_MASS_U};

/// Lower end of the supported `T/T_F` range. Zero temperature maps here.
pub const MIN_T_OVER_TF: f64 = 0.01;
pub const MAX_T_OVER_TF: f64 = 100.0;

/// `hbar * omega_bar / E_R` below this counts as weak confinement.
pub const WEAK_CONFINEMENT_RATIO: f64 = 0.05;

/// Harmonic trap, angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapGeometry {
    omega_x: f64,
    omega_y: f64,
    omega_z: f64,
}

impl TrapGeometry {
    pub fn new(omega_x: f64, omega_y: f64, omega_z: f64) -> Result<Self> {
        for (name, w) in [("omega_x", omega_x), ("omega_y", omega_y), ("omega_z", omega_z)] {
            if !(w.is_finite() && w > 0.0) {
                return domain(format!("trap frequency {name} must be positive and finite, got {w}"));
            }
        }
        Ok(Self { omega_x, omega_y, omega_z })
    }

    /// Trap from ordinary frequencies `omega / 2 pi` in Hz.
    pub fn from_hz(fx: f64, fy: f64, fz: f64) -> Result<Self> {
        Self::new(2.0 * PI * fx, 2.0 * PI * fy, 2.0 * PI * fz)
    }

    pub fn omega_x(&self) -> f64 {
        self.omega_x
    }
    pub fn omega_y(&self) -> f64 {
        self.omega_y
    }
    pub fn omega_z(&self) -> f64 {
        self.omega_z
    }

    /// Geometric mean trap frequency.
    pub fn omega_bar(&self) -> f64 {
        (self.omega_x * self.omega_y * self.omega_z).cbrt()
    }
}

/// Atomic species and the probed optical transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesParams {
    /// kg
    pub mass: f64,
    /// Transition wavelength, m.
    pub wavelength: f64,
    /// Natural linewidth Gamma, rad/s.
    pub linewidth: f64,
    /// Resonant saturation intensity, W/m^2.
    pub i_sat: f64,
}

impl SpeciesParams {
    pub fn new(mass: f64, wavelength: f64, linewidth: f64, i_sat: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("wavelength", wavelength), ("linewidth", linewidth), ("i_sat", i_sat)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("species {name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self { mass, wavelength, linewidth, i_sat })
    }

    /// 87Sr on the 461 nm 1S0-1P1 line: Gamma = 2 pi x 30.4 MHz, I_sat = 41 mW/cm^2.
    pub fn strontium_87() -> Self {
        Self {
            mass: SR87_MASS_U * ATOMIC_MASS_UNIT,
            wavelength: 461e-9,
            linewidth: 2.0 * PI * 30.4e6,
            i_sat: 410.0,
        }
    }

    pub fn recoil_wavevector(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Energy and momentum scales of one spin component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasScales {
    /// J
    pub fermi_energy: f64,
    pub fermi_energy_nk: f64,
    /// K
    pub fermi_temperature: f64,
    /// 1/m
    pub fermi_wavevector: f64,
    /// J
    pub recoil_energy: f64,
    pub recoil_energy_nk: f64,
    /// 1/m
    pub recoil_wavevector: f64,
    pub ratio_kf_kr: f64,
    /// `hbar omega_bar / E_R`
    pub confinement_ratio: f64,
    pub weak_confinement: bool,
    /// kg
    pub mass: f64,
    pub n_per_spin: u64,
}

impl GasScales {
    pub fn ratio_ef_er(&self) -> f64 {
        self.fermi_energy / self.recoil_energy
    }
}

/// `E_F = (6N)^(1/3) hbar omega_bar`, `E_R = (hbar k_R)^2 / 2m`.
pub fn derive_scales(trap: &TrapGeometry, n_per_spin: u64, species: &SpeciesParams) -> Result<GasScales> {
    if n_per_spin < 1 {
        return domain("atom number per spin state must be at least 1");
    }
    let species = SpeciesParams::new(species.mass, species.wavelength, species.linewidth, species.i_sat)?;
    let hbar_omega = HBAR * trap.omega_bar();
    let fermi_energy = (6.0 * n_per_spin as f64).cbrt() * hbar_omega;
    let fermi_wavevector = (2.0 * species.mass * fermi_energy).sqrt() / HBAR;
    let recoil_wavevector = species.recoil_wavevector();
    let recoil_energy = (HBAR * recoil_wavevector).powi(2) / (2.0 * species.mass);
    let confinement_ratio = hbar_omega / recoil_energy;
    Ok(GasScales {
        fermi_energy,
        fermi_energy_nk: fermi_energy / K_B * 1e9,
        fermi_temperature: fermi_energy / K_B,
        fermi_wavevector,
        recoil_energy,
        recoil_energy_nk: recoil_energy / K_B * 1e9,
        recoil_wavevector,
        ratio_kf_kr: fermi_wavevector / recoil_wavevector,
        confinement_ratio,
        weak_confinement: confinement_ratio < WEAK_CONFINEMENT_RATIO,
        mass: species.mass,
        n_per_spin,
    })
}

/// Dimensionless thermodynamic state of one spin component.
///
/// Always self-consistent: `f_3(beta_mu) = 1 / (6 (T/T_F)^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasState {
    t_over_tf: f64,
    beta_mu: f64,
    fugacity: f64,
}

impl GasState {
    /// Solves for the chemical potential at the given `T/T_F`.
    pub fn new(t_over_tf: f64) -> Result<Self> {
        solve_fugacity(t_over_tf)
    }

    /// Builds the state belonging to a reduced chemical potential.
    pub fn from_beta_mu(beta_mu: f64) -> Result<Self> {
        let t_over_tf = t_over_tf_from_mu(beta_mu)?;
        Ok(Self { t_over_tf, beta_mu, fugacity: beta_mu.exp() })
    }

    pub fn t_over_tf(&self) -> f64 {
        self.t_over_tf
    }
    pub fn beta_mu(&self) -> f64 {
        self.beta_mu
    }
    pub fn fugacity(&self) -> f64 {
        self.fugacity
    }
    /// Chemical potential in units of `E_F`.
    pub fn mu_over_ef(&self) -> f64 {
        self.beta_mu * self.t_over_tf
    }
}

/// Solves `f_3(beta_mu) = 1 / (6 (T/T_F)^3)` for `T/T_F` in `[0.01, 100]`.
pub fn solve_fugacity(t_over_tf: f64) -> Result<GasState> {
    if !(t_over_tf.is_finite() && (MIN_T_OVER_TF..=MAX_T_OVER_TF).contains(&t_over_tf)) {
        return domain(format!(
            "T/T_F = {t_over_tf} outside the supported range [{MIN_T_OVER_TF}, {MAX_T_OVER_TF}]"
        ));
    }
    let target = 1.0 / (6.0 * t_over_tf.powi(3));
    let ln_target = target.ln();

    // f_3(mu) < e^mu everywhere and f_3(mu) > mu^3/6 for mu > 0.
    let mut lo = ln_target;
    let mut hi = 1.0 / t_over_tf;
    if hi <= lo {
        hi = lo + 1.0;
    }
    let residual = |mu: f64| -> Result<(f64, f64)> {
        let f3 = fd_integral(FdOrder::THREE, mu)?;
        let f2 = fd_integral(FdOrder::TWO, mu)?;
        Ok((f3.ln() - ln_target, f2 / f3))
    };

    let mut mu = if target < 0.5 { ln_target } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (r, slope) = residual(mu)?;
        if r > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let mut next = mu - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - mu).abs();
        mu = next;
        if step <= 1e-14 * mu.abs().max(1.0) || hi - lo <= 1e-14 * mu.abs().max(1.0) {
            let f3 = fd_integral(FdOrder::THREE, mu)?;
            let consistency = (f3 * 6.0 * t_over_tf.powi(3) - 1.0).abs();
            if consistency > 1e-8 {
                return Err(Error::Numerical(format!(
                    "fugacity solve at T/T_F = {t_over_tf} converged to an inconsistent state ({consistency:e})"
                )));
            }
            return Ok(GasState { t_over_tf, beta_mu: mu, fugacity: mu.exp() });
        }
    }
    Err(Error::Numerical(format!("fugacity solve at T/T_F = {t_over_tf} did not converge")))
}

/// Inverse of [`solve_fugacity`]: `T/T_F = (6 f_3(beta_mu))^(-1/3)`.
pub fn t_over_tf_from_mu(beta_mu: f64) -> Result<f64> {
    if !beta_mu.is_finite() {
        return domain(format!("beta_mu must be finite, got {beta_mu}"));
    }
    let f3 = fd_integral(FdOrder::THREE, beta_mu)?;
    Ok((6.0 * f3).powf(-1.0 / 3.0))
}
