//! Complete Fermi-Dirac integrals of real order.
//!
//! `f_s(mu) = -Li_s(-e^mu) = (1/Gamma(s)) * int_0^inf t^(s-1) / (e^(t - mu) + 1) dt`
//!
//! Every order and every finite `mu` goes through the same integral
//! representation. The substitution `t = u^2` removes the endpoint
//! singularity for half-integer orders; the range is split at the Fermi edge
//! `u = sqrt(max(mu, 0))`. For `mu < 0` the factor `e^mu` is pulled out of the
//! integrand so that relative accuracy survives deep in the Boltzmann tail.

use statrs::function::gamma::gamma;

use crate::error::{domain, Result};
use crate::quad::Integrator;

const QUAD_TOL: f64 = 1e-10;
const TAIL_RATIO: f64 = 1e-18;

/// Order of a Fermi-Dirac integral. Only the orders used downstream are
/// publicly constructible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOrder(f64);

impl FdOrder {
    pub const ONE: FdOrder = FdOrder(1.0);
    pub const THREE_HALVES: FdOrder = FdOrder(1.5);
    pub const TWO: FdOrder = FdOrder(2.0);
    pub const FIVE_HALVES: FdOrder = FdOrder(2.5);
    pub const THREE: FdOrder = FdOrder(3.0);

    pub const SUPPORTED: [FdOrder; 5] =
        [Self::ONE, Self::THREE_HALVES, Self::TWO, Self::FIVE_HALVES, Self::THREE];

    pub fn new(s: f64) -> Result<Self> {
        match Self::SUPPORTED.iter().find(|o| o.0 == s) {
            Some(o) => Ok(*o),
            None if s < 1.0 => domain(format!("Fermi-Dirac order {s} is below 1")),
            None => domain(format!("unsupported Fermi-Dirac order {s}")),
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `f_s(mu)` for a supported order and any finite reduced chemical potential.
pub fn fd_integral(order: FdOrder, mu: f64) -> Result<f64> {
    if !mu.is_finite() {
        return domain(format!("Fermi-Dirac argument must be finite, got {mu}"));
    }
    fermi_dirac(order.0, mu)
}

/// Fermi-Dirac occupation `1 / (e^x + 1)` without overflow.
#[inline]
pub(crate) fn logistic_occupation(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `f_s(mu)` for any real order `s > 0`.
pub(crate) fn fermi_dirac(s: f64, mu: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("Fermi-Dirac order must be positive, got {s}"));
    }
    if !mu.is_finite() {
        return domain(format!("Fermi-Dirac argument must be finite, got {mu}"));
    }
    let power = 2.0 * s - 1.0;
    let mu_pos = mu.max(0.0);
    let e_mu = if mu < 0.0 { mu.exp() } else { 0.0 };

    let integrand = |u: f64| -> f64 {
        if u <= 0.0 {
            return if power == 0.0 { kernel(0.0, mu, e_mu) } else { 0.0 };
        }
        u.powf(power) * kernel(u * u, mu, e_mu)
    };

    let u_ref = mu_pos.max(0.5 * power).max(0.25).sqrt();
    let peak = integrand(u_ref);
    let mut u_max = (mu_pos + 10.0).sqrt();
    while u_max * u_max < mu_pos + power || integrand(u_max) > TAIL_RATIO * peak {
        u_max += 1.0;
    }

    let mut breaks = Vec::with_capacity(3);
    if mu > 0.0 {
        breaks.push(mu.sqrt());
        if mu > 5.0 {
            breaks.push((mu - 5.0).sqrt());
        }
        breaks.push((mu + 5.0).sqrt());
    }
    let out = Integrator::new(QUAD_TOL, QUAD_TOL)
        .max_intervals(500)
        .integrate(integrand, 0.0, u_max, &breaks)?;

    let scale = if mu < 0.0 { e_mu } else { 1.0 };
    Ok(scale * 2.0 * out.value / gamma(s))
}

// 1/(e^(x - mu) + 1), divided by e^mu when mu < 0.
#[inline]
fn kernel(x: f64, mu: f64, e_mu: f64) -> f64 {
    if mu < 0.0 {
        1.0 / (x.exp() + e_mu)
    } else {
        logistic_occupation(x - mu)
    }
}
