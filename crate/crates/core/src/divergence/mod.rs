//! Bregman divergences `d(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>`.
//!
//! A [`Divergence`] is either a scalar generator applied to every coordinate
//! and summed, a Mahalanobis quadratic form, the Kullback-Leibler divergence on
//! the probability simplex, or a per-coordinate mix of scalar generators.
//!
//! Points (first argument) may sit on the boundary of the domain where the
//! divergence has a finite limit, e.g. a zero count for Poisson, using the
//! convention `0 ln 0 = 0`. Codepoints (second argument) must lie in the open
//! interior.

mod mahalanobis;
mod parse;
mod scalar;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use mahalanobis::SpdMatrix;
pub use scalar::ScalarFamily;

use crate::data::Codebook;
use crate::error::{Error, Result};
use crate::math::{abs, ln, xlogx, xlogx_over_y};
use scalar::sanitize;

/// Tolerance on the coordinate sum of simplex points.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A real interval with open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub const REAL: Interval = Interval::open(f64::NEG_INFINITY, f64::INFINITY);

    pub const fn open(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: false,
            upper_closed: false,
        }
    }

    pub const fn closed(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: true,
            upper_closed: true,
        }
    }

    pub const fn closed_open(lower: f64, upper: f64) -> Self {
        Interval {
            lower,
            upper,
            lower_closed: true,
            upper_closed: false,
        }
    }

    /// NaN is never contained.
    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_closed {
            v >= self.lower
        } else {
            v > self.lower
        };
        let below = if self.upper_closed {
            v <= self.upper
        } else {
            v < self.upper
        };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// Per-coordinate bounds for points and codepoints, plus the simplex
/// constraint when it applies.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDescriptor {
    pub point: Vec<Interval>,
    pub codepoint: Vec<Interval>,
    pub simplex: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Divergence {
    /// The same scalar generator on every coordinate.
    Lifted(ScalarFamily),
    /// `phi(x) = x^T A x`, so `d(x, y) = (x - y)^T A (x - y)`.
    Mahalanobis(SpdMatrix),
    /// `phi(x) = sum x_l ln x_l` on the probability simplex.
    KullbackLeiblerSimplex,
    /// One scalar generator per coordinate; the divergence is their sum.
    PerCoordinate(Vec<ScalarFamily>),
}

impl Divergence {
    pub const SQUARED_EUCLIDEAN: Divergence = Divergence::Lifted(ScalarFamily::SquaredEuclidean);
    pub const POISSON: Divergence = Divergence::Lifted(ScalarFamily::Poisson);
    pub const EXPONENTIAL_LOSS: Divergence = Divergence::Lifted(ScalarFamily::ExponentialLoss);
    pub const LOGISTIC_LOSS: Divergence = Divergence::Lifted(ScalarFamily::LogisticLoss);

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Divergence::lifted(ScalarFamily::GaussianScaled { sigma })
    }

    pub fn binomial(trials: f64) -> Result<Self> {
        Divergence::lifted(ScalarFamily::Binomial { trials })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        Divergence::lifted(ScalarFamily::Gamma { shape })
    }

    pub fn lifted(family: ScalarFamily) -> Result<Self> {
        family.validate()?;
        Ok(Divergence::Lifted(family))
    }

    pub fn per_coordinate(families: Vec<ScalarFamily>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidConfig(
                "per-coordinate divergence needs at least one family".into(),
            ));
        }
        for f in &families {
            f.validate()?;
        }
        Ok(Divergence::PerCoordinate(families))
    }

    /// Dimension imposed by the divergence itself, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Divergence::Mahalanobis(m) => Some(m.dim()),
            Divergence::PerCoordinate(fs) => Some(fs.len()),
            _ => None,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.fixed_dim() {
            Some(expected) if expected != dim => Err(Error::Dimension {
                expected,
                found: dim,
            }),
            _ if dim == 0 => Err(Error::Dimension {
                expected: 1,
                found: 0,
            }),
            _ => Ok(()),
        }
    }

    fn family_at(&self, coord: usize) -> Option<ScalarFamily> {
        match self {
            Divergence::Lifted(f) => Some(*f),
            Divergence::PerCoordinate(fs) => fs.get(coord).copied(),
            _ => None,
        }
    }

    pub fn domain(&self, dim: usize) -> Result<DomainDescriptor> {
        self.check_dim(dim)?;
        let (point, codepoint) = match self {
            Divergence::Mahalanobis(_) => (
                alloc::vec![Interval::REAL; dim],
                alloc::vec![Interval::REAL; dim],
            ),
            Divergence::KullbackLeiblerSimplex => (
                alloc::vec![Interval::closed(0.0, 1.0); dim],
                alloc::vec![Interval::open(0.0, 1.0); dim],
            ),
            _ => (0..dim)
                .map(|c| {
                    let f = self.family_at(c).expect("scalar family per coordinate");
                    (f.point_interval(), f.codepoint_interval())
                })
                .unzip(),
        };
        Ok(DomainDescriptor {
            point,
            codepoint,
            simplex: matches!(self, Divergence::KullbackLeiblerSimplex),
        })
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        self.check_membership(x, false)
    }

    pub fn check_codepoint(&self, y: &[f64]) -> Result<()> {
        self.check_membership(y, true)
    }

    fn check_membership(&self, v: &[f64], interior: bool) -> Result<()> {
        self.check_dim(v.len())?;
        let outside = |coord: usize, value: f64, expected: String| Error::Domain {
            row: None,
            coord,
            value,
            expected,
        };
        match self {
            Divergence::Mahalanobis(_) => {
                if let Some((c, &x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                    return Err(outside(c, x, "the real line".into()));
                }
            }
            Divergence::KullbackLeiblerSimplex => {
                let bound = if interior {
                    Interval::open(0.0, 1.0)
                } else {
                    Interval::closed(0.0, 1.0)
                };
                for (c, &x) in v.iter().enumerate() {
                    if !bound.contains(x) {
                        return Err(outside(c, x, alloc::format!("simplex coordinate range {bound}")));
                    }
                }
                let total: f64 = v.iter().sum();
                if abs(total - 1.0) > SIMPLEX_TOL {
                    return Err(outside(
                        0,
                        total,
                        "the probability simplex (coordinates must sum to 1)".into(),
                    ));
                }
            }
            _ => {
                for (c, &x) in v.iter().enumerate() {
                    let f = self.family_at(c).expect("scalar family per coordinate");
                    let bound = if interior {
                        f.codepoint_interval()
                    } else {
                        f.point_interval()
                    };
                    if !bound.contains(x) {
                        return Err(outside(c, x, alloc::format!("{bound}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// `d(x, y)`, checking both arguments against the domain.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                found: y.len(),
            });
        }
        self.check_point(x)?;
        self.check_codepoint(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// `d(x, y)` without domain checks; callers validate inputs once.
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Divergence::Lifted(f) => x.iter().zip(y).map(|(a, b)| f.divergence(*a, *b)).sum(),
            Divergence::PerCoordinate(fs) => x
                .iter()
                .zip(y)
                .zip(fs)
                .map(|((a, b), f)| f.divergence(*a, *b))
                .sum(),
            Divergence::Mahalanobis(m) => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                sanitize(m.quadratic(&diff))
            }
            Divergence::KullbackLeiblerSimplex => sanitize(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| xlogx_over_y(*a, *b) - a + b)
                    .sum(),
            ),
        }
    }

    /// Smallest divergence from `x` to the codebook and the first center
    /// attaining it.
    pub fn evaluate_to_codebook(&self, x: &[f64], codebook: &Codebook) -> Result<(f64, usize)> {
        if x.len() != codebook.dim() {
            return Err(Error::Dimension {
                expected: codebook.dim(),
                found: x.len(),
            });
        }
        self.check_point(x)?;
        for c in codebook.centers() {
            self.check_codepoint(c)?;
        }
        Ok(self.nearest_unchecked(x, codebook))
    }

    pub(crate) fn nearest_unchecked(&self, x: &[f64], codebook: &Codebook) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (j, c) in codebook.centers().enumerate() {
            let v = self.eval_unchecked(x, c);
            // strict comparison keeps the lowest index on ties
            if v < best.0 {
                best = (v, j);
            }
        }
        best
    }

    /// The generator `phi` at an interior point.
    pub fn phi(&self, y: &[f64]) -> Result<f64> {
        self.check_point(y)?;
        Ok(match self {
            Divergence::Lifted(f) => y.iter().map(|v| f.phi(*v)).sum(),
            Divergence::PerCoordinate(fs) => y.iter().zip(fs).map(|(v, f)| f.phi(*v)).sum(),
            Divergence::Mahalanobis(m) => m.quadratic(y),
            Divergence::KullbackLeiblerSimplex => y.iter().map(|v| xlogx(*v)).sum(),
        })
    }

    /// `grad phi(y)` in closed form.
    pub fn gradient_phi(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_codepoint(y)?;
        Ok(match self {
            Divergence::Lifted(f) => y.iter().map(|v| f.gradient(*v)).collect(),
            Divergence::PerCoordinate(fs) => y.iter().zip(fs).map(|(v, f)| f.gradient(*v)).collect(),
            Divergence::Mahalanobis(m) => m.apply(y).into_iter().map(|v| 2.0 * v).collect(),
            Divergence::KullbackLeiblerSimplex => y.iter().map(|v| ln(*v) + 1.0).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let d = Divergence::SQUARED_EUCLIDEAN;
        assert_eq!(d.evaluate(&[1.0, 2.0], &[4.0, 6.0]).unwrap(), 25.0);
        let p = Divergence::POISSON;
        assert_eq!(p.evaluate(&[0.0], &[3.0]).unwrap(), 3.0);
        assert!((p.evaluate(&[2.0], &[1.0]).unwrap() - 0.386_294_361_119_890_6).abs() < 1e-12);
        let g = Divergence::gamma(1.0).unwrap();
        assert!((g.evaluate(&[2.0], &[1.0]).unwrap() - 0.306_852_819_440_054_7).abs() < 1e-12);
        let b = Divergence::binomial(2.0).unwrap();
        assert!((b.evaluate(&[2.0], &[1.0]).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-12);
        let e = Divergence::EXPONENTIAL_LOSS;
        assert!((e.evaluate(&[1.0], &[0.0]).unwrap() - 0.718_281_828_459_045_1).abs() < 1e-12);
    }

    #[test]
    fn gradients() {
        assert_eq!(
            Divergence::SQUARED_EUCLIDEAN.gradient_phi(&[1.0, 2.0]).unwrap(),
            alloc::vec![2.0, 4.0]
        );
        let g = Divergence::POISSON.gradient_phi(&[3.0]).unwrap();
        assert!((g[0] - 1.098_612_288_668_109_8).abs() < 1e-12);
        assert_eq!(Divergence::EXPONENTIAL_LOSS.gradient_phi(&[0.0]).unwrap(), alloc::vec![1.0]);
    }

    #[test]
    fn codebook_ties_go_to_lower_index() {
        let d = Divergence::SQUARED_EUCLIDEAN;
        let cb = Codebook::from_scalars(&[0.0, 10.0]).unwrap();
        assert_eq!(d.evaluate_to_codebook(&[5.0], &cb).unwrap(), (25.0, 0));
        let cb = Codebook::from_scalars(&[2.0, 7.0]).unwrap();
        assert_eq!(Divergence::POISSON.evaluate_to_codebook(&[2.0], &cb).unwrap(), (0.0, 0));
        let cb = Codebook::from_rows(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(d.evaluate_to_codebook(&[0.0, 0.0], &cb).unwrap(), (1.0, 0));
    }

    #[test]
    fn domain_errors() {
        let p = Divergence::POISSON;
        assert!(matches!(p.evaluate(&[-1.0], &[1.0]), Err(Error::Domain { coord: 0, .. })));
        assert!(matches!(p.evaluate(&[1.0], &[0.0]), Err(Error::Domain { .. })));
        let b = Divergence::binomial(10.0).unwrap();
        assert!(b.evaluate(&[10.0], &[5.0]).is_ok());
        assert!(b.evaluate(&[11.0], &[5.0]).is_err());
        assert!(b.evaluate(&[3.0], &[10.0]).is_err());
        let g = Divergence::gamma(2.0).unwrap();
        assert!(g.evaluate(&[0.0], &[1.0]).is_err());
        let l = Divergence::LOGISTIC_LOSS;
        assert!(l.evaluate(&[1.0], &[0.5]).is_ok());
        assert!(l.evaluate(&[0.5], &[1.0]).is_err());
        assert!(Divergence::SQUARED_EUCLIDEAN.evaluate(&[f64::NAN], &[0.0]).is_err());
    }

    #[test]
    fn dimension_errors() {
        let d = Divergence::SQUARED_EUCLIDEAN;
        assert!(matches!(d.evaluate(&[1.0], &[1.0, 2.0]), Err(Error::Dimension { .. })));
        let h = Divergence::per_coordinate(alloc::vec![ScalarFamily::Poisson]).unwrap();
        assert!(matches!(h.evaluate(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn simplex_domain() {
        let kl = Divergence::KullbackLeiblerSimplex;
        assert!(kl.evaluate(&[0.0, 1.0], &[0.5, 0.5]).is_ok());
        assert!(kl.evaluate(&[0.2, 0.2], &[0.5, 0.5]).is_err());
        assert!(kl.evaluate(&[0.5, 0.5], &[1.0, 0.0]).is_err());
        let v = kl.evaluate(&[0.25, 0.75], &[0.5, 0.5]).unwrap();
        let expected = 0.25 * libm::log(0.5) + 0.75 * libm::log(1.5);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn mahalanobis_quadratic_form() {
        let m = SpdMatrix::new(alloc::vec![2.0, 0.5, 0.5, 1.0], 2).unwrap();
        let d = Divergence::Mahalanobis(m);
        // diff (1, -2): 2*1 + 2*0.5*1*(-2) + 1*4 = 4
        assert!((d.evaluate(&[1.0, 0.0], &[0.0, 2.0]).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(d.gradient_phi(&[1.0, 0.0]).unwrap(), alloc::vec![4.0, 1.0]);
    }

    #[test]
    fn hybrid_is_sum_of_parts() {
        let fams = alloc::vec![ScalarFamily::Poisson, ScalarFamily::Binomial { trials: 100.0 }];
        let h = Divergence::per_coordinate(fams.clone()).unwrap();
        let (x, y) = ([3.0, 40.0], [5.0, 37.5]);
        let parts = fams[0].divergence(x[0], y[0]) + fams[1].divergence(x[1], y[1]);
        assert_eq!(h.evaluate(&x, &y).unwrap(), parts);
    }

    #[test]
    fn domain_descriptor_shapes() {
        let h = Divergence::per_coordinate(alloc::vec![ScalarFamily::Poisson, ScalarFamily::SquaredEuclidean])
            .unwrap();
        let dom = h.domain(2).unwrap();
        assert!(dom.point[0].contains(0.0) && !dom.codepoint[0].contains(0.0));
        assert!(dom.point[1].contains(-5.0));
        assert!(!dom.simplex);
        assert!(Divergence::KullbackLeiblerSimplex.domain(3).unwrap().simplex);
        assert!(h.domain(3).is_err());
    }
}
