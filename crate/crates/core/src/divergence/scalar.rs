use crate::error::{Error, Result};
use crate::math::{exp, ln, xlogx, xlogx_over_y};

use super::Interval;

/// A one-dimensional Bregman generator `phi`.
///
/// Multivariate data is handled by summing the scalar divergence over
/// coordinates, which is again a Bregman divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFamily {
    /// `phi(x) = x^2`.
    SquaredEuclidean,
    /// `phi(x) = x^2 / (2 sigma^2)`: the Gaussian log-likelihood scale.
    GaussianScaled { sigma: f64 },
    /// `phi(x) = x ln x - x`.
    Poisson,
    /// `phi(x) = x ln(x/N) + (N - x) ln((N - x)/N)`.
    Binomial { trials: f64 },
    /// `phi(x) = -k + k ln(k/x)` with shape `k`.
    Gamma { shape: f64 },
    /// `phi(x) = e^x`.
    ExponentialLoss,
    /// `phi(x) = x ln x + (1 - x) ln(1 - x)`.
    LogisticLoss,
}

impl ScalarFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidConfig(alloc::format!(
                "{what} must be positive and finite, got {v}"
            )))
        };
        match *self {
            ScalarFamily::GaussianScaled { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                bad("gaussian sigma", sigma)
            }
            ScalarFamily::Binomial { trials } if !(trials > 0.0 && trials.is_finite()) => {
                bad("binomial trials", trials)
            }
            ScalarFamily::Gamma { shape } if !(shape > 0.0 && shape.is_finite()) => {
                bad("gamma shape", shape)
            }
            _ => Ok(()),
        }
    }

    /// Allowed values for data points (boundaries included where the
    /// divergence has a finite limit there).
    pub fn point_interval(&self) -> Interval {
        match *self {
            ScalarFamily::SquaredEuclidean
            | ScalarFamily::GaussianScaled { .. }
            | ScalarFamily::ExponentialLoss => Interval::REAL,
            ScalarFamily::Poisson => Interval::closed_open(0.0, f64::INFINITY),
            ScalarFamily::Binomial { trials } => Interval::closed(0.0, trials),
            ScalarFamily::Gamma { .. } => Interval::open(0.0, f64::INFINITY),
            ScalarFamily::LogisticLoss => Interval::closed(0.0, 1.0),
        }
    }

    /// Allowed values for codepoints: the open interior of the point domain.
    pub fn codepoint_interval(&self) -> Interval {
        match *self {
            ScalarFamily::SquaredEuclidean
            | ScalarFamily::GaussianScaled { .. }
            | ScalarFamily::ExponentialLoss => Interval::REAL,
            ScalarFamily::Poisson | ScalarFamily::Gamma { .. } => {
                Interval::open(0.0, f64::INFINITY)
            }
            ScalarFamily::Binomial { trials } => Interval::open(0.0, trials),
            ScalarFamily::LogisticLoss => Interval::open(0.0, 1.0),
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match *self {
            ScalarFamily::SquaredEuclidean => x * x,
            ScalarFamily::GaussianScaled { sigma } => x * x / (2.0 * sigma * sigma),
            ScalarFamily::Poisson => xlogx(x) - x,
            ScalarFamily::Binomial { trials } => {
                xlogx_over_y(x, trials) + xlogx_over_y(trials - x, trials)
            }
            ScalarFamily::Gamma { shape } => -shape + shape * ln(shape / x),
            ScalarFamily::ExponentialLoss => exp(x),
            ScalarFamily::LogisticLoss => xlogx(x) + xlogx(1.0 - x),
        }
    }

    pub fn gradient(&self, y: f64) -> f64 {
        match *self {
            ScalarFamily::SquaredEuclidean => 2.0 * y,
            ScalarFamily::GaussianScaled { sigma } => y / (sigma * sigma),
            ScalarFamily::Poisson => ln(y),
            ScalarFamily::Binomial { trials } => ln(y / (trials - y)),
            ScalarFamily::Gamma { shape } => -shape / y,
            ScalarFamily::ExponentialLoss => exp(y),
            ScalarFamily::LogisticLoss => ln(y / (1.0 - y)),
        }
    }

    /// Closed-form divergence, no domain checks. May be `+inf`.
    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        let v = match *self {
            ScalarFamily::SquaredEuclidean => {
                let t = x - y;
                t * t
            }
            ScalarFamily::GaussianScaled { sigma } => {
                let t = x - y;
                t * t / (2.0 * sigma * sigma)
            }
            ScalarFamily::Poisson => xlogx_over_y(x, y) - (x - y),
            ScalarFamily::Binomial { trials } => {
                xlogx_over_y(x, y) + xlogx_over_y(trials - x, trials - y)
            }
            ScalarFamily::Gamma { shape } => shape * (ln(y / x) + x / y - 1.0),
            ScalarFamily::ExponentialLoss => {
                let ey = exp(y);
                exp(x) - ey - (x - y) * ey
            }
            ScalarFamily::LogisticLoss => {
                xlogx_over_y(x, y) + xlogx_over_y(1.0 - x, 1.0 - y)
            }
        };
        sanitize(v)
    }
}

/// Rounding can push an exact-zero divergence slightly negative, and
/// overflowing generators produce NaN; map both to the extended range.
#[inline]
pub(crate) fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else if v < 0.0 {
        0.0
    } else {
        v
    }
}
