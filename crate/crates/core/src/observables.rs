//! Detector-facing quantities built on the scattering kernel: angle to
//! momentum-transfer mapping, angular maps, temperature and confinement
//! sweeps, emission-averaged lifetime, and the pre-pulse Monte Carlo.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockade::{check_acceptance, stream_rng, suppression_trapped, FermiSampler, Moments};
use crate::error::{domain, Error, Result};
use crate::gas::GasState;
use crate::quad::{gauss_legendre_10, Integrator};

/// Photon momentum transfer `k / k_F = 2 sin(alpha / 2) / (k_F / k_R)` for a
/// photon scattered at `alpha_deg` degrees off the drive axis.
pub fn angle_to_k(alpha_deg: f64, kf_over_kr: f64) -> f64 {
    2.0 * (0.5 * alpha_deg.to_radians()).sin() / kf_over_kr
}

/// A detection direction and its collection aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionAxis {
    pub alpha_deg: f64,
    pub numerical_aperture: f64,
}

impl DetectionAxis {
    pub fn new(alpha_deg: f64, numerical_aperture: f64) -> Result<Self> {
        if !(alpha_deg > 0.0 && alpha_deg <= 180.0) {
            return domain(format!("detection angle must be in (0, 180] degrees, got {alpha_deg}"));
        }
        if !(numerical_aperture > 0.0 && numerical_aperture < 1.0) {
            return domain(format!("numerical aperture must be in (0, 1), got {numerical_aperture}"));
        }
        Ok(Self { alpha_deg, numerical_aperture })
    }

    /// Fraction of the full sphere collected: `(1 - sqrt(1 - NA^2)) / 2`.
    pub fn solid_angle_fraction(&self) -> f64 {
        0.5 * (1.0 - (1.0 - self.numerical_aperture.powi(2)).sqrt())
    }

    pub fn label(&self) -> String {
        format!("s_{}deg", format_angle(self.alpha_deg))
    }
}

fn format_angle(a: f64) -> String {
    if a.fract() == 0.0 {
        format!("{}", a as i64)
    } else {
        format!("{a}").replace('.', "p")
    }
}

/// How a detector signal is reduced to one `S` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApertureAveraging {
    /// `S` at the central detection angle.
    #[default]
    Central,
    /// `S` averaged uniformly over the solid angle of the collection cone.
    Cone,
}

/// `S` seen by a detector.
pub fn detector_suppression(
    axis: &DetectionAxis,
    state: &GasState,
    kf_over_kr: f64,
    averaging: ApertureAveraging,
) -> Result<f64> {
    match averaging {
        ApertureAveraging::Central => {
            Ok(suppression_trapped(angle_to_k(axis.alpha_deg, kf_over_kr), state)?.s_value)
        }
        ApertureAveraging::Cone => {
            let theta_max = axis.numerical_aperture.asin();
            let alpha = axis.alpha_deg.to_radians();
            let rule = gauss_legendre_10();
            let mut acc = 0.0;
            let mut norm = 0.0;
            // polar angle inside the cone, uniform in cos(theta)
            for &(xc, wc) in &rule {
                let cos_theta = 1.0 - 0.5 * (1.0 - theta_max.cos()) * (1.0 + xc);
                let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
                // azimuth over [0, pi] by mirror symmetry
                for &(xp, wp) in &rule {
                    let phi = 0.5 * PI * (1.0 + xp);
                    let cos_scatter = alpha.cos() * cos_theta + alpha.sin() * sin_theta * phi.cos();
                    let scatter = cos_scatter.clamp(-1.0, 1.0).acos().to_degrees();
                    let s = suppression_trapped(angle_to_k(scatter, kf_over_kr), state)?.s_value;
                    acc += wc * wp * s;
                    norm += wc * wp;
                }
            }
            Ok(acc / norm)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularPoint {
    pub alpha_deg: f64,
    pub k_over_kf: f64,
    pub s_value: f64,
}

/// `S(alpha)` on a uniform grid over `[0, 180]` degrees. The full emission
/// pattern follows by rotation about the drive axis.
pub fn angular_map(state: &GasState, kf_over_kr: f64, n_alpha: usize) -> Result<Vec<AngularPoint>> {
    if n_alpha < 2 {
        return domain(format!("angular map needs at least 2 angles, got {n_alpha}"));
    }
    check_ratio(kf_over_kr)?;
    (0..n_alpha)
        .into_par_iter()
        .map(|i| {
            let alpha_deg = 180.0 * i as f64 / (n_alpha - 1) as f64;
            let k = angle_to_k(alpha_deg, kf_over_kr);
            Ok(AngularPoint { alpha_deg, k_over_kf: k, s_value: suppression_trapped(k, state)?.s_value })
        })
        .collect()
}

fn check_ratio(kf_over_kr: f64) -> Result<()> {
    if !(kf_over_kr.is_finite() && kf_over_kr > 0.0) {
        return domain(format!("k_F/k_R must be positive, got {kf_over_kr}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionWeighting {
    #[default]
    Isotropic,
    /// `(3 / 16 pi) (1 + cos^2 theta)` about the drive axis.
    DipoleCircular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lifetime {
    pub mean_s: f64,
    /// `1 / mean_s`
    pub multiplier: f64,
}

/// Emission-direction average of `S` and the corresponding lifetime factor.
pub fn lifetime_factor(state: &GasState, kf_over_kr: f64, weighting: EmissionWeighting) -> Result<Lifetime> {
    check_ratio(kf_over_kr)?;
    let mut failure = None;
    let integrand = |alpha: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let w = match weighting {
            EmissionWeighting::Isotropic => 0.5 * alpha.sin(),
            EmissionWeighting::DipoleCircular => 0.375 * (1.0 + alpha.cos().powi(2)) * alpha.sin(),
        };
        match suppression_trapped(angle_to_k(alpha.to_degrees(), kf_over_kr), state) {
            Ok(r) => w * r.s_value,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let out = Integrator::new(1e-7, 1e-7).integrate(integrand, 0.0, PI, &[]);
    if let Some(e) = failure {
        return Err(e);
    }
    let mean_s = out?.value;
    Ok(Lifetime { mean_s, multiplier: 1.0 / mean_s })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TOverTf,
    KfOverKr,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::TOverTf => "t_over_tf",
            SweepVariable::KfOverKr => "kf_over_kr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Value of the variable held fixed (`k_F/k_R` for a temperature sweep,
    /// `T/T_F` for a confinement sweep).
    pub fixed: f64,
    pub grid: Vec<f64>,
    pub axes: Vec<DetectionAxis>,
    #[serde(default)]
    pub averaging: ApertureAveraging,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return domain("sweep grid is empty");
        }
        if self.axes.is_empty() {
            return domain("sweep needs at least one detection axis");
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("sweep grid must be strictly increasing");
        }
        if self.grid.iter().chain([&self.fixed]).any(|v| !(v.is_finite() && *v > 0.0)) {
            return domain("sweep values must be positive and finite");
        }
        for a in &self.axes {
            DetectionAxis::new(a.alpha_deg, a.numerical_aperture)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Theory curves along one trajectory through `(T/T_F, k/k_F)` space.
pub fn sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let mut columns = vec![spec.variable.column().to_string()];
    columns.extend(spec.axes.iter().map(DetectionAxis::label));

    let rows = spec
        .grid
        .par_iter()
        .map(|&x| {
            let (t, ratio) = match spec.variable {
                SweepVariable::TOverTf => (x, spec.fixed),
                SweepVariable::KfOverKr => (spec.fixed, x),
            };
            let state = GasState::new(t)?;
            let mut row = vec![x];
            for axis in &spec.axes {
                row.push(detector_suppression(axis, &state, ratio, spec.averaging)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { columns, rows })
}

/// Inputs of the pre-pulse simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepulseSpec {
    pub kf_over_kr: f64,
    /// Mean scattering events per atom per second.
    pub scatter_rate: f64,
    /// Pre-pulse durations, s.
    pub durations: Vec<f64>,
    pub probe: DetectionAxis,
    pub seed: u64,
    pub n_atoms_sim: u64,
    /// Independent kick histories averaged to estimate the perturbed occupation.
    pub kick_histories: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrepulseRow {
    pub duration: f64,
    pub s_raw: f64,
    pub std_error: f64,
    pub s_normalized: f64,
}

/// Accumulated recoil of one atom, tabulated at each requested duration.
fn kick_history<R: Rng + ?Sized>(
    rng: &mut R,
    rate: f64,
    durations: &[f64],
    kick: f64,
    out: &mut [[f64; 3]],
) {
    let wait = Exp::new(rate).expect("scatter rate is positive");
    let mut clock = wait.sample(rng);
    let mut total = [0.0; 3];
    for (slot, &until) in out.iter_mut().zip(durations) {
        while clock < until {
            // absorption along +z, emission recoil isotropic
            let cos_t: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let phi: f64 = 2.0 * PI * rng.random::<f64>();
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            total[0] -= kick * sin_t * phi.cos();
            total[1] -= kick * sin_t * phi.sin();
            total[2] += kick * (1.0 - cos_t);
            clock += wait.sample(rng);
        }
        *slot = total;
    }
}

/// Monte Carlo of Fermi-sea destruction by a pre-pulse, probed along one axis.
///
/// Atoms are drawn from the trapped Fermi-Dirac distribution and receive
/// Poisson-distributed photon recoils (one `k_R` absorption kick along the
/// drive axis plus one isotropic `k_R` emission kick per event). Positions are
/// frozen over the microsecond pulse. Because the kicks do not depend on the
/// phase-space point, the perturbed occupation is the kick-distribution
/// average `n'(p, q) = E_K[n_FD(p - K, q)]`; it is estimated per atom from
/// `kick_histories` fresh recoil histories. The probe then sees
/// `S = E[1 - n'(p' + k, q)]` over the kicked atoms.
///
/// Every atom owns a random stream derived from the seed and its index, so
/// results do not depend on the thread count. Durations must be non-decreasing. Rows are normalized to the mean of the
/// two longest durations.
pub fn prepulse_relaxation_mc(state: &GasState, spec: &PrepulseSpec) -> Result<Vec<PrepulseRow>> {
    check_ratio(spec.kf_over_kr)?;
    if !(spec.scatter_rate.is_finite() && spec.scatter_rate > 0.0) {
        return domain("pre-pulse scatter rate must be positive");
    }
    let durations = &spec.durations;
    if durations.is_empty() || durations.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return domain("pre-pulse durations must be a non-empty list of non-negative times");
    }
    if durations.windows(2).any(|w| w[1] < w[0]) {
        return domain("pre-pulse durations must be non-decreasing");
    }
    if let Some(&longest) = durations.last() {
        if longest > 0.0 && spec.scatter_rate * 5e-6 < 1.0 {
            return domain("pre-pulse rate must give at least one event per atom in 5 us");
        }
    }
    if spec.n_atoms_sim < 100 || spec.kick_histories == 0 {
        return domain("pre-pulse simulation needs at least 100 atoms and one kick history");
    }
    DetectionAxis::new(spec.probe.alpha_deg, spec.probe.numerical_aperture)?;

    let sampler = FermiSampler::new(state);
    let kick = 1.0 / spec.kf_over_kr;
    let k = angle_to_k(spec.probe.alpha_deg, spec.kf_over_kr);
    let half = 0.5 * spec.probe.alpha_deg.to_radians();
    // drive along +z, photon at alpha in the x-z plane: k_abs - k_photon
    let transfer = [-k * half.cos(), 0.0, k * half.sin()];
    let n_dur = durations.len();
    let histories = spec.kick_histories as usize;

    const ATOMS_PER_BATCH: u64 = 256;
    let batches = spec.n_atoms_sim.div_ceil(ATOMS_PER_BATCH);
    let per_batch: Vec<Result<Vec<Moments>>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = ATOMS_PER_BATCH.min(spec.n_atoms_sim - b * ATOMS_PER_BATCH);
            let mut moments = vec![Moments::default(); n_dur];
            let mut own = vec![[0.0; 3]; n_dur];
            let mut fresh = vec![[0.0; 3]; n_dur];
            let mut occ = vec![0.0; n_dur];
            let mut proposals = 0u64;
            for atom in 0..count {
                let mut rng = stream_rng(spec.seed, b * ATOMS_PER_BATCH + atom);
                let x = sampler.sample(&mut rng, &mut proposals)?;
                check_acceptance(atom + 1, proposals)?;
                let q2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5];
                kick_history(&mut rng, spec.scatter_rate, durations, kick, &mut own);
                occ.iter_mut().for_each(|o| *o = 0.0);
                for _ in 0..histories {
                    kick_history(&mut rng, spec.scatter_rate, durations, kick, &mut fresh);
                    for d in 0..n_dur {
                        let mut p2 = 0.0;
                        for i in 0..3 {
                            let p = x[i] + own[d][i] + transfer[i] - fresh[d][i];
                            p2 += p * p;
                        }
                        occ[d] += sampler.occupation(p2 + q2);
                    }
                }
                for d in 0..n_dur {
                    let n_final = occ[d] / histories as f64;
                    if n_final > 1.0 + 1e-12 {
                        return Err(Error::Numerical(format!("perturbed occupation {n_final} exceeds 1")));
                    }
                    moments[d].push(1.0 - n_final);
                }
            }
            Ok(moments)
        })
        .collect();

    let mut totals = vec![Moments::default(); n_dur];
    for batch in per_batch {
        for (t, m) in totals.iter_mut().zip(batch?) {
            *t = t.merge(m);
        }
    }
    let reference = if n_dur >= 2 {
        0.5 * (totals[n_dur - 1].mean + totals[n_dur - 2].mean)
    } else {
        totals[0].mean
    };
    Ok(durations
        .iter()
        .zip(&totals)
        .map(|(&duration, m)| PrepulseRow {
            duration,
            s_raw: m.mean,
            std_error: m.std_error(),
            s_normalized: m.mean / reference,
        })
        .collect())
}
