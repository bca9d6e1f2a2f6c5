//! Text form of divergences:
//! `sqeuclidean`, `gaussian:<sigma>`, `mahalanobis:<path>`, `poisson`,
//! `binomial:<N>`, `gamma:<shape>`, `exp`, `logistic`, `kl`,
//! `percoord:<spec>,<spec>,...`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::{Divergence, ScalarFamily, SpdMatrix};
use crate::error::{Error, Result};

impl Divergence {
    /// Parses a divergence string; `mahalanobis:<path>` is resolved through
    /// `load_matrix`.
    pub fn parse_with<F>(text: &str, load_matrix: F) -> Result<Self>
    where
        F: FnOnce(&str) -> Result<SpdMatrix>,
    {
        let text = text.trim();
        let (head, arg) = split_head(text);
        match head {
            "mahalanobis" => {
                let path = arg.ok_or_else(|| Error::Parse(text.to_string()))?;
                Ok(Divergence::Mahalanobis(load_matrix(path)?))
            }
            "kl" => no_arg(text, arg).map(|_| Divergence::KullbackLeiblerSimplex),
            "percoord" => {
                let list = arg.ok_or_else(|| Error::Parse(text.to_string()))?;
                let families = list
                    .split(',')
                    .map(parse_scalar)
                    .collect::<Result<Vec<_>>>()?;
                Divergence::per_coordinate(families)
            }
            _ => Divergence::lifted(parse_scalar(text)?),
        }
    }
}

impl FromStr for Divergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Divergence::parse_with(s, |path| {
            Err(Error::Parse(alloc::format!(
                "mahalanobis:{path} (matrix files need a loader)"
            )))
        })
    }
}

impl FromStr for ScalarFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_scalar(s)
    }
}

fn split_head(text: &str) -> (&str, Option<&str>) {
    match text.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (text, None),
    }
}

fn no_arg(text: &str, arg: Option<&str>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(_) => Err(Error::Parse(text.to_string())),
    }
}

fn number(text: &str, arg: Option<&str>) -> Result<f64> {
    arg.and_then(|a| a.parse::<f64>().ok())
        .ok_or_else(|| Error::Parse(text.to_string()))
}

fn parse_scalar(text: &str) -> Result<ScalarFamily> {
    let text = text.trim();
    let (head, arg) = split_head(text);
    let family = match head {
        "sqeuclidean" => {
            no_arg(text, arg)?;
            ScalarFamily::SquaredEuclidean
        }
        "gaussian" => ScalarFamily::GaussianScaled {
            sigma: match arg {
                None => 1.0,
                Some(_) => number(text, arg)?,
            },
        },
        "poisson" => {
            no_arg(text, arg)?;
            ScalarFamily::Poisson
        }
        "binomial" => ScalarFamily::Binomial {
            trials: number(text, arg)?,
        },
        "gamma" => ScalarFamily::Gamma {
            shape: number(text, arg)?,
        },
        "exp" => {
            no_arg(text, arg)?;
            ScalarFamily::ExponentialLoss
        }
        "logistic" => {
            no_arg(text, arg)?;
            ScalarFamily::LogisticLoss
        }
        _ => return Err(Error::Parse(String::from(text))),
    };
    family.validate()?;
    Ok(family)
}

impl fmt::Display for ScalarFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFamily::SquaredEuclidean => f.write_str("sqeuclidean"),
            ScalarFamily::GaussianScaled { sigma } => write!(f, "gaussian:{sigma}"),
            ScalarFamily::Poisson => f.write_str("poisson"),
            ScalarFamily::Binomial { trials } => write!(f, "binomial:{trials}"),
            ScalarFamily::Gamma { shape } => write!(f, "gamma:{shape}"),
            ScalarFamily::ExponentialLoss => f.write_str("exp"),
            ScalarFamily::LogisticLoss => f.write_str("logistic"),
        }
    }
}

/// Mahalanobis divergences print without their source path, as
/// `mahalanobis:<d>x<d>`.
impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Lifted(family) => family.fmt(f),
            Divergence::Mahalanobis(m) => write!(f, "mahalanobis:{0}x{0}", m.dim()),
            Divergence::KullbackLeiblerSimplex => f.write_str("kl"),
            Divergence::PerCoordinate(fs) => {
                f.write_str("percoord:")?;
                for (i, fam) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    fam.fmt(f)?;
                }
                Ok(())
            }
        }
    }
}
