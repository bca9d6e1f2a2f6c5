//! Row-major point matrices: datasets and codebooks.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// `n` points in dimension `d`, stored row-major, with optional ground truth.
///
/// Label `0` marks noise; clusters are numbered from `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    dim: usize,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(alloc::format!(
                "{} values do not form a nonempty matrix with {dim} columns",
                points.len()
            )));
        }
        Ok(Dataset {
            points,
            dim,
            labels: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: row.len(),
                });
            }
            points.extend_from_slice(row);
        }
        Dataset::new(points, dim)
    }

    /// One-dimensional dataset.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Dataset::new(values.to_vec(), 1)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of distinct rows (exact float equality).
    pub fn distinct_count(&self) -> usize {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(self.point(a), self.point(b)));
        let mut count = 0;
        for (pos, &i) in order.iter().enumerate() {
            if pos == 0 || lex_cmp(self.point(order[pos - 1]), self.point(i)) != Ordering::Equal {
                count += 1;
            }
        }
        count
    }
}

/// `k` codepoints in dimension `d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centers: Vec<f64>,
    dim: usize,
}

impl Codebook {
    pub fn new(centers: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || centers.is_empty() || !centers.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(
                "a codebook needs at least one center of positive dimension".into(),
            ));
        }
        Ok(Codebook { centers, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut centers = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    found: row.len(),
                });
            }
            centers.extend_from_slice(row);
        }
        Codebook::new(centers, dim)
    }

    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Codebook::new(values.to_vec(), 1)
    }

    /// Codebook made of the given dataset rows, in order.
    pub fn from_indices(data: &Dataset, indices: &[usize]) -> Result<Self> {
        let mut centers = Vec::with_capacity(indices.len() * data.dim());
        for &i in indices {
            centers.extend_from_slice(data.point(i));
        }
        Codebook::new(centers, data.dim())
    }

    pub fn k(&self) -> usize {
        self.centers.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub(crate) fn center_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn centers(&self) -> core::slice::ChunksExact<'_, f64> {
        self.centers.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.centers
    }

    /// Appends a center.
    pub fn push(&mut self, center: &[f64]) -> Result<()> {
        if center.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: center.len(),
            });
        }
        self.centers.extend_from_slice(center);
        Ok(())
    }

    /// Permutation sorting the centers lexicographically (first coordinate,
    /// then the next ones); ties keep their original order.
    pub fn lexicographic_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| lex_cmp(self.center(a), self.center(b)));
        order
    }

    /// Largest absolute coordinate over all centers.
    pub fn max_abs(&self) -> f64 {
        self.centers.iter().fold(0.0, |m, v| m.max(crate::math::abs(*v)))
    }
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}
