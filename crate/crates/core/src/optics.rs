//! Order-of-magnitude budget for an off-resonant probe pulse: scattering
//! rate, optical density and collected photon number.
//!
//! The two-level cross section `3 lambda^2 / 2 pi` ignores the hyperfine
//! structure of real atoms, so these numbers are good to tens of percent.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gas::{GasScales, GasState, SpeciesParams, TrapGeometry};
use crate::observables::DetectionAxis;
use crate::profile::peak_column_density;

/// Above this excitation fraction the linear `rate * duration` estimate is
/// no longer trustworthy.
pub const LINEAR_EXCITATION_LIMIT: f64 = 0.3;

/// Resonant two-level cross section for wavelength `lambda` (m).
pub fn resonant_cross_section(lambda: f64) -> f64 {
    3.0 * lambda * lambda / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// `I / I_sat`
    pub saturation: f64,
    /// Detuning in units of the natural linewidth.
    pub detuning_gamma: f64,
    /// s
    pub pulse_duration: f64,
}

impl DriveParams {
    pub fn new(saturation: f64, detuning_gamma: f64, pulse_duration: f64) -> Result<Self> {
        if !(saturation.is_finite() && saturation >= 0.0) {
            return domain(format!("saturation parameter must be >= 0, got {saturation}"));
        }
        if !detuning_gamma.is_finite() {
            return domain("detuning must be finite");
        }
        if !(pulse_duration.is_finite() && pulse_duration > 0.0) {
            return domain(format!("pulse duration must be positive, got {pulse_duration}"));
        }
        Ok(Self { saturation, detuning_gamma, pulse_duration })
    }

    /// Detuning in rad/s.
    pub fn detuning(&self, species: &SpeciesParams) -> f64 {
        self.detuning_gamma * species.linewidth
    }

    /// `1 + s + (2 Delta / Gamma)^2`
    pub fn broadening(&self) -> f64 {
        1.0 + self.saturation + (2.0 * self.detuning_gamma).powi(2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scattering {
    /// Photons per second per atom.
    pub rate: f64,
    /// `rate * pulse_duration`
    pub excitation_fraction: f64,
    /// False when the fraction exceeds the linear-response limit.
    pub linear_regime: bool,
}

pub fn scattering_rate(drive: &DriveParams, species: &SpeciesParams) -> Scattering {
    let rate = 0.5 * species.linewidth * drive.saturation / drive.broadening();
    let excitation_fraction = rate * drive.pulse_duration;
    Scattering { rate, excitation_fraction, linear_regime: excitation_fraction <= LINEAR_EXCITATION_LIMIT }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalDensity {
    /// Weak-probe resonant OD through the cloud center.
    pub od_resonant: f64,
    /// OD at the actual drive intensity and detuning.
    pub od_effective: f64,
    /// `exp(-od_effective)`
    pub transmission: f64,
    /// Peak column density summed over spin states, m^-2.
    pub peak_column_density: f64,
}

pub fn optical_density(
    scales: &GasScales,
    state: &GasState,
    trap: &TrapGeometry,
    species: &SpeciesParams,
    drive: &DriveParams,
    n_spins: u32,
) -> Result<OpticalDensity> {
    if n_spins == 0 {
        return domain("at least one spin state is required");
    }
    let column = f64::from(n_spins) * peak_column_density(scales, state, trap)?;
    let od_resonant = resonant_cross_section(species.wavelength) * column;
    let od_effective = od_resonant / drive.broadening();
    Ok(OpticalDensity { od_resonant, od_effective, transmission: (-od_effective).exp(), peak_column_density: column })
}

/// Expected number of detected photons from one pulse.
pub fn photon_budget(
    scattering: &Scattering,
    detection: &DetectionAxis,
    quantum_efficiency: f64,
    n_atoms_total: u64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&quantum_efficiency) {
        return domain(format!("quantum efficiency must lie in [0, 1], got {quantum_efficiency}"));
    }
    Ok(n_atoms_total as f64 * scattering.excitation_fraction * quantum_efficiency * detection.solid_angle_fraction())
}
