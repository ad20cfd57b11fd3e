//! Spike-and-slab lasso penalty machinery.
//!
//! With `psi(x | l) = (l / 2) exp(-l |x|)` the Laplace density, the slab posterior
//! probability of a coefficient is
//!
//! ```text
//! p*(x) = theta psi(x | xi1) / [(1 - theta) psi(x | xi0) + theta psi(x | xi1)]
//! ```
//!
//! and the adaptive penalty weight is `lambda*(x) = xi1 p*(x) + xi0 (1 - p*(x))`.
//! A proximal step zeroes a coordinate whenever `|z|` falls below the selection
//! threshold returned by [`threshold_upper`], and otherwise soft-thresholds it by
//! `eta * lambda*`.

use crate::error::{Error, Result};

/// Arguments of the penalty functions for one factor column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    /// Inclusion probability.
    pub theta: f64,
    /// Spike inverse scale.
    pub xi0: f64,
    /// Slab inverse scale.
    pub xi1: f64,
    /// Proximal step size.
    pub eta: f64,
    /// Slab subtracted in the squared term of [`g_check`]; equals `xi1` unless overridden.
    pub g_slab: f64,
}

impl PenaltyParams {
    pub fn new(theta: f64, xi0: f64, xi1: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must be in [0, 1], got {theta}"
            )));
        }
        if !(xi1 > 0.0 && xi0 >= xi1 && xi0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need xi0 >= xi1 > 0, got xi0 = {xi0}, xi1 = {xi1}"
            )));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eta must be positive, got {eta}"
            )));
        }
        Ok(Self::unchecked(theta, xi0, xi1, eta))
    }

    pub(crate) fn unchecked(theta: f64, xi0: f64, xi1: f64, eta: f64) -> Self {
        PenaltyParams {
            theta,
            xi0,
            xi1,
            eta,
            g_slab: xi1,
        }
    }

    pub fn with_g_slab(mut self, slab: f64) -> Self {
        self.g_slab = slab;
        self
    }
}

/// Slab posterior probability `p*(x; theta, xi0, xi1)`.
///
/// Evaluated as `1 / (1 + exp(log-odds))` so it never forms the tiny Laplace densities directly.
pub fn p_star(x: f64, pp: &PenaltyParams) -> f64 {
    let theta = pp.theta;
    if theta >= 1.0 {
        return 1.0;
    }
    if theta <= 0.0 {
        return 0.0;
    }
    let log_odds =
        ((1.0 - theta) * pp.xi0).ln() - (theta * pp.xi1).ln() - (pp.xi0 - pp.xi1) * x.abs();
    1.0 / (1.0 + log_odds.exp())
}

/// Adaptive penalty weight, always between `xi1` and `xi0`.
pub fn lambda_star(x: f64, pp: &PenaltyParams) -> f64 {
    let p = p_star(x, pp);
    pp.xi1 * p + pp.xi0 * (1.0 - p)
}

/// `g(x) = (lambda*(x) - slab)^2 + (2 / eta) log p*(x)`; `-inf` when `theta = 0`.
pub fn g_check(x: f64, pp: &PenaltyParams) -> f64 {
    let p = p_star(x, pp);
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let d = lambda_star(x, pp) - pp.g_slab;
    d * d + (2.0 / pp.eta) * p.ln()
}

/// Upper bound on the selection threshold below which the proximal mode is exactly zero.
///
/// `sqrt(2 eta log(1/p*(0))) + eta xi1` when `g(0) > 0`, otherwise `eta lambda*(0)`.
pub fn threshold_upper(pp: &PenaltyParams) -> f64 {
    if g_check(0.0, pp) > 0.0 {
        let p0 = p_star(0.0, pp);
        (2.0 * pp.eta * (1.0 / p0).ln()).sqrt() + pp.eta * pp.xi1
    } else {
        pp.eta * lambda_star(0.0, pp)
    }
}

/// Generalized soft-thresholding: `(|z| - eta lam)_+ sign(z) 1(|z| > delta)`.
///
/// Killed coordinates are returned as a literal `0.0`.
#[inline]
pub fn soft_threshold(z: f64, lam: f64, delta: f64, eta: f64) -> f64 {
    let mag = z.abs();
    if mag <= delta {
        return 0.0;
    }
    let shrunk = mag - eta * lam;
    if shrunk > 0.0 {
        shrunk.copysign(z)
    } else {
        0.0
    }
}
