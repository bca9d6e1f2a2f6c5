use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

const EIGEN_FLOOR: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive definite matrix defining `phi(x) = x^T A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SpdMatrix {
    /// Validates symmetry and that every eigenvalue exceeds `1e-12`.
    pub fn new(entries: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::NotPositiveDefinite(alloc::format!(
                "expected {dim}x{dim} entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        let scale = entries.iter().fold(1.0_f64, |m, v| m.max(abs(*v)));
        for i in 0..dim {
            for j in 0..i {
                if abs(entries[i * dim + j] - entries[j * dim + i]) > SYMMETRY_TOL * scale {
                    return Err(Error::NotPositiveDefinite(alloc::format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        let smallest = symmetric_eigenvalues(&entries, dim)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if smallest <= EIGEN_FLOOR {
            return Err(Error::NotPositiveDefinite(alloc::format!(
                "smallest eigenvalue {smallest:e}"
            )));
        }
        Ok(SpdMatrix { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        SpdMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub(crate) fn quadratic(&self, v: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.entries[i * d..(i + 1) * d];
            let av: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += v[i] * av;
        }
        acc
    }

    pub(crate) fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                self.entries[i * d..(i + 1) * d]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Cyclic Jacobi rotations; adequate for the small matrices used here.
fn symmetric_eigenvalues(entries: &[f64], dim: usize) -> Vec<f64> {
    let mut a = entries.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    off += a[i * dim + j] * a[i * dim + j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (abs(theta) + sqrt(theta * theta + 1.0));
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..dim {
                    let arp = a[r * dim + p];
                    let arq = a[r * dim + q];
                    a[r * dim + p] = c * arp - s * arq;
                    a[r * dim + q] = s * arp + c * arq;
                }
                for r in 0..dim {
                    let apr = a[p * dim + r];
                    let aqr = a[q * dim + r];
                    a[p * dim + r] = c * apr - s * aqr;
                    a[q * dim + r] = s * apr + c * aqr;
                }
            }
        }
    }
    (0..dim).map(|i| a[i * dim + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_of_known_matrix() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let mut ev = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(SpdMatrix::new(alloc::vec![1.0, 2.0, 2.0, 1.0], 2).is_err());
        assert!(SpdMatrix::new(alloc::vec![1.0, 0.5, 0.0, 1.0], 2).is_err());
        assert!(SpdMatrix::new(alloc::vec![1.0, 0.0, 0.0, 0.0], 2).is_err());
        assert!(SpdMatrix::new(alloc::vec![2.0, 0.5, 0.5, 1.0], 2).is_ok());
    }

    #[test]
    fn three_by_three() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let ev = symmetric_eigenvalues(&m, 3);
        let trace: f64 = ev.iter().sum();
        assert!((trace - 9.0).abs() < 1e-10);
        assert!(SpdMatrix::new(m.to_vec(), 3).is_ok());
    }
}
