//! External clustering evaluation.
//!
//! Label `0` (noise) is treated as one more cluster, so trimming decisions
//! count toward agreement with the ground truth.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln, sqrt};

/// Joint counts of two labelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    /// Distinct labels of the first labeling, ascending.
    pub row_labels: Vec<usize>,
    /// Distinct labels of the second labeling, ascending.
    pub col_labels: Vec<usize>,
    /// `counts[r][c]`: points with the `r`-th row label and `c`-th column label.
    pub counts: Vec<Vec<usize>>,
}

impl Contingency {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

fn index_labels(labels: &[usize]) -> (Vec<usize>, BTreeMap<usize, usize>) {
    let mut map = BTreeMap::new();
    for &l in labels {
        map.insert(l, 0);
    }
    let distinct: Vec<usize> = map.keys().copied().collect();
    for (i, v) in map.values_mut().enumerate() {
        *v = i;
    }
    (distinct, map)
}

pub fn contingency(a: &[usize], b: &[usize]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (row_labels, rows) = index_labels(a);
    let (col_labels, cols) = index_labels(b);
    let mut counts = alloc::vec![alloc::vec![0; col_labels.len()]; row_labels.len()];
    for (x, y) in a.iter().zip(b) {
        counts[rows[x]][cols[y]] += 1;
    }
    Ok(Contingency {
        row_labels,
        col_labels,
        counts,
    })
}

fn entropy(marginal: impl Iterator<Item = usize>, n: f64) -> f64 {
    marginal
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * ln(p)
        })
        .sum()
}

/// Normalized mutual information `I(A; B) / sqrt(H(A) H(B))` with natural
/// logarithms. Zero whenever either labeling has a single class.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let table = contingency(a, b)?;
    let n = a.len() as f64;
    if a.is_empty() {
        return Ok(0.0);
    }
    let row_sums: Vec<usize> = table.counts.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table.col_labels.len())
        .map(|c| table.counts.iter().map(|r| r[c]).sum())
        .collect();
    let ha = entropy(row_sums.iter().copied(), n);
    let hb = entropy(col_sums.iter().copied(), n);
    if ha <= 0.0 || hb <= 0.0 {
        return Ok(0.0);
    }
    let mut terms = Vec::new();
    for (r, row) in table.counts.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let nij = count as f64;
            terms.push(nij / n * ln(nij * n / (row_sums[r] as f64 * col_sums[c] as f64)));
        }
    }
    // summing in sorted order makes nmi(a, b) == nmi(b, a) bit for bit
    terms.sort_by(f64::total_cmp);
    let mi: f64 = terms.iter().sum();
    let value = mi / sqrt(ha * hb);
    Ok(value.clamp(0.0, 1.0))
}
