//! Relative scattering rate `S(k)` of a trapped ideal Fermi gas.
//!
//! `S(k) = ∫ n_i (1 - n_f) / ∫ n_i` over the six-dimensional phase space, with
//! `n_i = n_FD(p, q)` and `n_f = n_FD(p + k, q)`. In reduced units
//! (momenta in `hbar k_F`, positions rescaled per axis by `m omega_i / hbar k_F`)
//! the single-particle energy is `|p|^2 + |q|^2` in units of `E_F`, so the
//! phase-space distribution is isotropic in six dimensions and only the
//! momentum component along `k` is singled out.
//!
//! Four independent evaluations are provided:
//! * [`suppression_trapped`]: adaptive 2D quadrature over `(w, p_par)` where
//!   `w` is the radius of the remaining five coordinates,
//! * [`suppression_mc`]: rejection-sampled Monte Carlo,
//! * [`suppression_series`]: closed-form fugacity double series,
//! * [`suppression_homogeneous`]: the local (uniform-gas) kernel.
//!
//! All of them compute the blocked fraction `B = ∫ n_i n_f` and return
//! `S = 1 - B / ∫ n_i`, which keeps `S` exact to the last digit when the
//! Fermi spheres no longer overlap.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::gas::GasState;
use crate::quad::Integrator;
use crate::specfun::{fd_integral, logistic_occupation, FdOrder};

/// `ln(1e12)`: occupations below `1e-12` of the peak are dropped.
pub const DEFAULT_LOG_CUTOFF: f64 = 27.631_021_115_928_547;

/// Accepted samples per Monte Carlo batch. Each batch draws from its own
/// ChaCha stream, so results do not depend on the thread count.
pub const MC_BATCH: u64 = 1 << 14;

pub const MIN_MC_SAMPLES: u64 = 10_000;
pub const MAX_SERIES_FUGACITY: f64 = 0.95;
const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Homogeneous,
    TrappedQuadrature,
    MonteCarlo,
    Series,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Homogeneous => "homogeneous",
            Method::TrappedQuadrature => "trapped-quadrature",
            Method::MonteCarlo => "monte-carlo",
            Method::Series => "series",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuppressionResult {
    pub s_value: f64,
    pub method: Method,
    /// Standard error of the mean; zero except for Monte Carlo.
    pub std_error: f64,
    /// Quadrature or truncation error estimate in `S`; zero for Monte Carlo.
    pub error_estimate: f64,
    /// Integrand evaluations, accepted samples or series terms.
    pub evaluations: u64,
}

/// Fermi-Dirac occupation at reduced single-particle energy `epsilon / k_B T_F`.
pub fn occupation(state: &GasState, reduced_energy: f64) -> f64 {
    logistic_occupation(reduced_energy / state.t_over_tf() - state.beta_mu())
}

fn check_transfer(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return domain(format!("momentum transfer must be finite and non-negative, got {k}"));
    }
    Ok(())
}

/// Area of the unit sphere in `dims` dimensions.
fn sphere_area(dims: u32) -> f64 {
    2.0 * PI.powf(dims as f64 / 2.0) / gamma(dims as f64 / 2.0)
}

/// `∫ dp_par ∫ d^dims w  n(w^2 + p_par^2) n(w^2 + (p_par + kappa)^2)` with the
/// `dims`-dimensional transverse part reduced to its radius.
struct OverlapIntegral {
    t: f64,
    beta_mu: f64,
    kappa: f64,
    log_cutoff: f64,
    dims: u32,
    abs_tol: f64,
}

struct OverlapOutput {
    value: f64,
    error: f64,
    evaluations: u64,
}

impl OverlapIntegral {
    fn evaluate(&self) -> Result<OverlapOutput> {
        let t = self.t;
        let bm = self.beta_mu;
        let kappa = self.kappa;
        let eps_cut = t * (bm.max(0.0) + self.log_cutoff);
        let radius = eps_cut.sqrt();
        let p_lo = (-radius).max(-kappa - radius);
        let p_hi = radius.min(radius - kappa);
        if p_lo >= p_hi {
            return Ok(OverlapOutput { value: 0.0, error: 0.0, evaluations: 0 });
        }
        let fermi_energy = if bm > 0.0 { t * bm } else { 0.0 };
        let occ = |e: f64| logistic_occupation(e / t - bm);
        let power = self.dims as i32 - 1;
        let area = sphere_area(self.dims);
        let span = p_hi - p_lo;
        let inner_quad = Integrator::new(0.01 * self.abs_tol / (area * span), 1e-10).max_intervals(400);

        let mut evaluations = 0u64;
        let mut failure: Option<Error> = None;
        let inner = |p: f64| -> f64 {
            if failure.is_some() {
                return 0.0;
            }
            let a = p * p;
            let b = (p + kappa) * (p + kappa);
            let w2_max = eps_cut - a.max(b);
            if w2_max <= 0.0 {
                return 0.0;
            }
            let mut breaks = [f64::NAN; 2];
            for (slot, edge) in breaks.iter_mut().zip([fermi_energy - a, fermi_energy - b]) {
                if edge > 0.0 && edge < w2_max {
                    *slot = edge.sqrt();
                }
            }
            let f = |w: f64| {
                let w2 = w * w;
                w.powi(power) * occ(w2 + a) * occ(w2 + b)
            };
            match inner_quad.integrate(f, 0.0, w2_max.sqrt(), &breaks) {
                Ok(out) => {
                    evaluations += out.evaluations as u64;
                    out.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        };

        let mut breaks = vec![-0.5 * kappa];
        if fermi_energy > 0.0 {
            let kf = fermi_energy.sqrt();
            breaks.extend([-kf, kf, -kappa - kf, -kappa + kf]);
        }
        let outer = Integrator::new(self.abs_tol / area, 1e-10)
            .max_intervals(400)
            .integrate(inner, p_lo, p_hi, &breaks);
        if let Some(e) = failure {
            return Err(e);
        }
        let outer = outer?;
        Ok(OverlapOutput {
            value: area * outer.value,
            error: area * outer.error,
            evaluations: evaluations + outer.evaluations as u64,
        })
    }
}

/// Settings for the trapped-gas quadrature.
#[derive(Debug, Clone, Copy)]
pub struct TrappedQuadrature {
    /// Occupations below `e^-log_cutoff` of the peak are truncated.
    pub log_cutoff: f64,
    /// Absolute tolerance on `S`.
    pub tolerance: f64,
}

impl Default for TrappedQuadrature {
    fn default() -> Self {
        Self { log_cutoff: DEFAULT_LOG_CUTOFF, tolerance: 1e-8 }
    }
}

impl TrappedQuadrature {
    pub fn evaluate(&self, k_over_kf: f64, state: &GasState) -> Result<SuppressionResult> {
        check_transfer(k_over_kf)?;
        let t = state.t_over_tf();
        let total = PI.powi(3) * t.powi(3) * fd_integral(FdOrder::THREE, state.beta_mu())?;
        let overlap = OverlapIntegral {
            t,
            beta_mu: state.beta_mu(),
            kappa: k_over_kf,
            log_cutoff: self.log_cutoff,
            dims: 5,
            abs_tol: self.tolerance * total,
        }
        .evaluate()?;
        Ok(SuppressionResult {
            s_value: (1.0 - overlap.value / total).clamp(0.0, 1.0),
            method: Method::TrappedQuadrature,
            std_error: 0.0,
            error_estimate: overlap.error / total,
            evaluations: overlap.evaluations,
        })
    }
}

/// `S(k)` of the trapped gas by adaptive quadrature over `(w, p_par)`.
pub fn suppression_trapped(k_over_kf: f64, state: &GasState) -> Result<SuppressionResult> {
    TrappedQuadrature::default().evaluate(k_over_kf, state)
}

/// Local Fermi wavevector (in units of the global `k_F`) of a uniform gas at
/// the state's temperature and chemical potential:
/// `(k_loc/k_F)^3 = (3 sqrt(pi) / 4) t^(3/2) f_{3/2}(beta_mu)`.
pub fn local_fermi_wavevector(state: &GasState) -> Result<f64> {
    let t = state.t_over_tf();
    let f = fd_integral(FdOrder::THREE_HALVES, state.beta_mu())?;
    Ok((0.75 * PI.sqrt() * t.powf(1.5) * f).cbrt())
}

/// Uniform-gas kernel at the trap center: chemical potential and temperature
/// of `state`, transfer `x = k / k_F,loc` in units of the local Fermi wavevector.
pub fn suppression_homogeneous(x: f64, state: &GasState) -> Result<SuppressionResult> {
    check_transfer(x)?;
    let t = state.t_over_tf();
    let total = PI.powf(1.5) * t.powf(1.5) * fd_integral(FdOrder::THREE_HALVES, state.beta_mu())?;
    let kappa = x * local_fermi_wavevector(state)?;
    let overlap = OverlapIntegral {
        t,
        beta_mu: state.beta_mu(),
        kappa,
        log_cutoff: DEFAULT_LOG_CUTOFF,
        dims: 2,
        abs_tol: 1e-9 * total,
    }
    .evaluate()?;
    Ok(SuppressionResult {
        s_value: (1.0 - overlap.value / total).clamp(0.0, 1.0),
        method: Method::Homogeneous,
        std_error: 0.0,
        error_estimate: overlap.error / total,
        evaluations: overlap.evaluations,
    })
}

/// Zero-temperature uniform-gas kernel, `x = k / k_F`.
///
/// Same `(p_par, p_perp)` reduction with step occupations: the transverse
/// integral over the intersection of the two Fermi spheres is
/// `pi * max(0, min(1 - p^2, 1 - (p + x)^2))`.
pub fn suppression_homogeneous_ground(x: f64) -> Result<SuppressionResult> {
    check_transfer(x)?;
    let total = 4.0 * PI / 3.0;
    let p_lo = (-1.0f64).max(-1.0 - x);
    let p_hi = 1.0f64.min(1.0 - x);
    let (overlap, error, evaluations) = if p_lo < p_hi {
        let out = Integrator::new(1e-14, 1e-13).integrate(
            |p: f64| PI * (1.0 - p * p).min(1.0 - (p + x) * (p + x)).max(0.0),
            p_lo,
            p_hi,
            &[-0.5 * x],
        )?;
        (out.value, out.error, out.evaluations as u64)
    } else {
        (0.0, 0.0, 0)
    };
    Ok(SuppressionResult {
        s_value: (1.0 - overlap / total).clamp(0.0, 1.0),
        method: Method::Homogeneous,
        std_error: 0.0,
        error_estimate: error / total,
        evaluations,
    })
}

/// Closed-form fugacity series, valid for `zeta <= 0.95`.
///
/// Expanding both occupations in powers of `zeta` turns every term into a
/// Gaussian integral:
/// `∫ n_i n_f / ∫ n_i = Σ_n (-1)^n zeta^n / n^3 Σ_{j=1}^{n-1} exp(-j (n-j) k^2 / (n t))
///  / Σ_j (-1)^(j+1) zeta^j / j^3`.
/// `max_terms` bounds the number of `n` groups.
pub fn suppression_series(k_over_kf: f64, state: &GasState, max_terms: usize) -> Result<SuppressionResult> {
    check_transfer(k_over_kf)?;
    let zeta = state.fugacity();
    if zeta > MAX_SERIES_FUGACITY {
        return domain(format!("fugacity {zeta:.4} exceeds the series domain (<= {MAX_SERIES_FUGACITY})"));
    }
    if max_terms == 0 {
        return domain("series needs at least one term");
    }
    let t = state.t_over_tf();
    let a = k_over_kf * k_over_kf / t;

    let group = |n: usize| -> f64 {
        let nf = n as f64;
        let inner: f64 = (1..n).map(|j| (-(j as f64) * (nf - j as f64) * a / nf).exp()).sum();
        let mag = zeta.powi(n as i32) / (nf * nf * nf) * inner;
        if n.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    };

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut used = 0usize;
    for m in 1..=max_terms {
        let n = m + 1;
        let term = group(n);
        numerator += term;
        let j = m as f64;
        let d = zeta.powi(m as i32) / (j * j * j);
        denominator += if m % 2 == 1 { d } else { -d };
        used = m;
        if term.abs() < 1e-18 * numerator.abs().max(f64::MIN_POSITIVE) && d < 1e-18 * denominator {
            break;
        }
    }
    let next = used + 1;
    let j = next as f64;
    let truncation = group(next + 1).abs() / denominator
        + numerator.abs() / denominator * (zeta.powi(next as i32) / (j * j * j)) / denominator;

    Ok(SuppressionResult {
        s_value: (1.0 - numerator / denominator).clamp(0.0, 1.0),
        method: Method::Series,
        std_error: 0.0,
        error_estimate: truncation,
        evaluations: used as u64,
    })
}

/// Rejection sampler for the normalized trapped Fermi-Dirac distribution in
/// the six reduced phase-space coordinates.
///
/// The envelope is a Gaussian `A exp(-r^2 / T_env)`; `T_env > t` and `A` are
/// chosen to maximize acceptance subject to dominating `n_FD` everywhere.
#[derive(Debug, Clone, Copy)]
pub struct FermiSampler {
    t: f64,
    beta_mu: f64,
    envelope_temperature: f64,
    ln_amplitude: f64,
    sigma: f64,
}

fn ln_occupation(x: f64) -> f64 {
    // ln(1 / (1 + e^x))
    if x > 0.0 {
        -(x + (-x).exp().ln_1p())
    } else {
        -x.exp().ln_1p()
    }
}

impl FermiSampler {
    pub fn new(state: &GasState) -> Self {
        let t = state.t_over_tf();
        let bm = state.beta_mu();
        let ln_amp = |y: f64| -> f64 {
            let t_env = t * (1.0 + y.exp());
            let x_star = (t * (bm - y)).max(0.0);
            x_star / t_env + ln_occupation(x_star / t - bm)
        };
        // minimize ln A + 3 ln T_env over y = ln(T_env / t - 1)
        let cost = |y: f64| ln_amp(y) + 3.0 * (t * (1.0 + y.exp())).ln();
        let (mut a, mut b) = (-12.0f64, 8.0f64);
        let g = 0.5 * (5.0f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (cost(c), cost(d));
        for _ in 0..120 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = cost(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = cost(d);
            }
        }
        let y = 0.5 * (a + b);
        let envelope_temperature = t * (1.0 + y.exp());
        Self {
            t,
            beta_mu: bm,
            envelope_temperature,
            // tiny margin against rounding in the envelope bound
            ln_amplitude: ln_amp(y) + 1e-12,
            sigma: (0.5 * envelope_temperature).sqrt(),
        }
    }

    /// Expected fraction of accepted proposals.
    pub fn acceptance(&self) -> f64 {
        // ∫ n_FD = pi^3 t^3 f_3 = pi^3 / 6 for a self-consistent state
        1.0 / (6.0 * self.ln_amplitude.exp() * self.envelope_temperature.powi(3))
    }

    pub fn envelope_temperature(&self) -> f64 {
        self.envelope_temperature
    }

    /// Occupation at reduced energy `r2 = |p|^2 + |q|^2`.
    #[inline]
    pub fn occupation(&self, r2: f64) -> f64 {
        logistic_occupation(r2 / self.t - self.beta_mu)
    }

    /// Draws one phase-space point `[p_x, p_y, p_z, q_x, q_y, q_z]`.
    /// `proposals` is incremented once per proposal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, proposals: &mut u64) -> Result<[f64; 6]> {
        loop {
            *proposals += 1;
            let mut x = [0.0; 6];
            let mut r2 = 0.0;
            for xi in x.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *xi = self.sigma * z;
                r2 += *xi * *xi;
            }
            let ln_ratio = ln_occupation(r2 / self.t - self.beta_mu) - self.ln_amplitude
                + r2 / self.envelope_temperature;
            if ln_ratio > 1e-9 {
                return Err(Error::EnvelopeViolation { ratio: ln_ratio.exp(), r2 });
            }
            let u: f64 = rng.random();
            if u.ln() < ln_ratio {
                return Ok(x);
            }
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        Moments {
            count: self.count + other.count,
            mean: self.mean + delta * other.count as f64 / n,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * other.count as f64 / n,
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn check_acceptance(accepted: u64, proposals: u64) -> Result<()> {
    if proposals > 10_000 && (accepted as f64) < MIN_ACCEPTANCE * proposals as f64 {
        return Err(Error::Efficiency { acceptance: accepted as f64 / proposals as f64 });
    }
    Ok(())
}

/// Monte Carlo estimate `S = E[1 - n_f]` over points drawn from `n_i`.
pub fn suppression_mc(k_over_kf: f64, state: &GasState, n_samples: u64, seed: u64) -> Result<SuppressionResult> {
    check_transfer(k_over_kf)?;
    if n_samples < MIN_MC_SAMPLES {
        return domain(format!("Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n_samples}"));
    }
    let sampler = FermiSampler::new(state);
    let kappa = k_over_kf;
    let batches = n_samples.div_ceil(MC_BATCH);

    let per_batch: Vec<Result<(Moments, u64)>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let quota = MC_BATCH.min(n_samples - b * MC_BATCH);
            let mut rng = stream_rng(seed, b);
            let mut moments = Moments::default();
            let mut proposals = 0u64;
            for _ in 0..quota {
                let x = sampler.sample(&mut rng, &mut proposals)?;
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let r2_final = r2 + 2.0 * x[2] * kappa + kappa * kappa;
                moments.push(1.0 - sampler.occupation(r2_final));
                check_acceptance(moments.count, proposals)?;
            }
            Ok((moments, proposals))
        })
        .collect();

    let mut total = Moments::default();
    let mut proposals = 0;
    for batch in per_batch {
        let (m, p) = batch?;
        total = total.merge(m);
        proposals += p;
    }
    check_acceptance(total.count, proposals)?;
    Ok(SuppressionResult {
        s_value: total.mean,
        method: Method::MonteCarlo,
        std_error: total.std_error(),
        error_estimate: 0.0,
        evaluations: total.count,
    })
}
