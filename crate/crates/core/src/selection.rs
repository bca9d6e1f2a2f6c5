//! Choosing `(k, q)` from cost curves.
//!
//! For each `k`, the curve `q -> cost_k[q]` is the best multi-restart trimmed
//! distortion at every grid value of `q`. Once `q` exceeds the amount of
//! signal, outliers enter the kept set and the curve bends upward.
//! [`detect_cutpoint`] reports the largest slope jump of a single curve;
//! [`select_k_q`] proposes one `q` per `k`, the knee of its curve when the
//! slope clearly jumps there (see [`chord_knee`]) and no trimming otherwise,
//! then ranks the pairs by how much `k` centers improve on `k - 1` compared
//! with how little `k + 1` improves on `k`.
//!
//! Two extra restarts keep the curves coherent:
//! - cell `(k, q)` also starts from the best `(k - 1)`-codebook at the same `q`
//!   plus one data point, so cost never increases with `k`;
//! - after a curve is computed, every cell is refit from the codebook of the
//!   next larger `q` (largest first), so the average divergence of the kept
//!   points never decreases along `q`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::data::{Codebook, Dataset};
use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::trimmed::{self, TrimConfig};

/// Scores below this are flagged as low-confidence cut-points.
pub const LOW_CONFIDENCE_SCORE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEntry {
    pub q: usize,
    /// `None` when every restart for this cell failed.
    pub cost: Option<f64>,
    pub best_start: Option<usize>,
    pub codebook: Option<Codebook>,
    pub error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    pub k: usize,
    pub n: usize,
    /// Sorted by `q`.
    pub entries: Vec<CurveEntry>,
}

impl CostCurve {
    /// `(q, cost)` pairs of the cells that were fitted.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.cost.map(|c| (e.q, c)))
            .collect()
    }

    pub fn cost_at(&self, q: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.q == q).and_then(|e| e.cost)
    }

    /// Average divergence over the kept points, `cost * n / q`, per fitted cell.
    pub fn kept_averages(&self) -> Vec<(usize, f64)> {
        self.points()
            .into_iter()
            .map(|(q, c)| (q, c * self.n as f64 / q as f64))
            .collect()
    }

    /// Slope jump at every fitted cell; `None` at the two ends.
    pub fn scores(&self) -> Vec<(usize, Option<f64>)> {
        let pts = self.points();
        let smoothed = median3(&pts);
        pts.iter()
            .enumerate()
            .map(|(i, &(q, _))| {
                let s = (i > 0 && i + 1 < pts.len()).then(|| slope_jump(&smoothed, i));
                (q, s)
            })
            .collect()
    }
}

/// Largest slope jump of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutpoint {
    pub q: usize,
    /// `slope(q -> next) - slope(previous -> q)`; on a unit-spaced grid this
    /// is the second difference `cost[q+1] - 2 cost[q] + cost[q-1]`.
    pub score: f64,
    pub low_confidence: bool,
}

fn median3(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = points.to_vec();
    for i in 1..points.len().saturating_sub(1) {
        let mut w = [points[i - 1].1, points[i].1, points[i + 1].1];
        w.sort_by(f64::total_cmp);
        out[i].1 = w[1];
    }
    out
}

fn slope_jump(points: &[(usize, f64)], i: usize) -> f64 {
    let (q0, c0) = points[i - 1];
    let (q1, c1) = points[i];
    let (q2, c2) = points[i + 1];
    let after = (c2 - c1) / (q2 - q1) as f64;
    let before = (c1 - c0) / (q1 - q0) as f64;
    after - before
}

/// Heuristic cut-point on `(q, cost)` pairs sorted by `q`: the interior `q`
/// with the largest slope jump, optionally after 3-point median smoothing.
/// Ties go to the smaller `q`.
pub fn detect_cutpoint_points(points: &[(usize, f64)], smooth: bool) -> Result<Cutpoint> {
    if points.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            found: points.len(),
        });
    }
    let pts = if smooth { median3(points) } else { points.to_vec() };
    let mut best: Option<(usize, f64)> = None;
    for i in 1..pts.len() - 1 {
        let s = slope_jump(&pts, i);
        if best.is_none_or(|(_, b)| s.total_cmp(&b) == Ordering::Greater) {
            best = Some((pts[i].0, s));
        }
    }
    let (q, score) = best.expect("at least two interior points");
    Ok(Cutpoint {
        q,
        score,
        low_confidence: !(score >= LOW_CONFIDENCE_SCORE),
    })
}

/// Cut-point of a curve with median smoothing.
pub fn detect_cutpoint(curve: &CostCurve) -> Result<Cutpoint> {
    detect_cutpoint_points(&curve.points(), true)
}

/// Every integer in `[k, n]` when `n <= 500`, otherwise 200 evenly spaced
/// values from `k` to `n`.
pub fn default_q_grid(k: usize, n: usize) -> Vec<usize> {
    if k > n {
        return Vec::new();
    }
    if n <= 500 {
        return (k..=n).collect();
    }
    let steps = 199;
    let mut grid: Vec<usize> = (0..=steps)
        .map(|i| k + ((n - k) as f64 * i as f64 / steps as f64 + 0.5) as usize)
        .collect();
    grid.dedup();
    grid
}

fn check_grid(k: usize, n: usize, q_grid: &[usize]) -> Result<()> {
    if q_grid.is_empty() {
        return Err(Error::InvalidConfig("q grid is empty".into()));
    }
    if q_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("q grid must be strictly increasing".into()));
    }
    if q_grid[0] < k || q_grid[q_grid.len() - 1] > n {
        return Err(Error::InvalidConfig(alloc::format!(
            "q grid must lie in [k, n] = [{k}, {n}]"
        )));
    }
    Ok(())
}

/// Best `(k - 1)`-codebook plus the kept point farthest from it.
fn augmented_start(div: &Divergence, data: &Dataset, q: usize, smaller: &Codebook) -> Option<Codebook> {
    let sel = trimmed::select_trimmed(div, data, smaller, q).ok()?;
    let pick = sel
        .selected
        .iter()
        .copied()
        .filter(|&i| div.check_codepoint(data.point(i)).is_ok())
        .max_by(|&a, &b| {
            sel.per_point[a]
                .divergence
                .total_cmp(&sel.per_point[b].divergence)
                .then(b.cmp(&a))
        })?;
    let mut cb = smaller.clone();
    cb.push(data.point(pick)).ok()?;
    Some(cb)
}

fn fit_cell(
    div: &Divergence,
    data: &Dataset,
    k: usize,
    q: usize,
    config: &TrimConfig,
    smaller: Option<&CostCurve>,
) -> CurveEntry {
    let cell = TrimConfig { k, q, ..*config };
    let extra: Vec<Codebook> = smaller
        .and_then(|c| c.entries.iter().find(|e| e.q == q))
        .and_then(|e| e.codebook.as_ref())
        .and_then(|cb| augmented_start(div, data, q, cb))
        .into_iter()
        .collect();
    match trimmed::fit_with_starts(div, data, &cell, &extra) {
        Ok(f) => CurveEntry {
            q,
            cost: Some(f.cost),
            best_start: Some(f.start_index),
            codebook: Some(f.codebook),
            error: None,
        },
        Err(e) => CurveEntry {
            q,
            cost: None,
            best_start: None,
            codebook: None,
            error: Some(e),
        },
    }
}

/// Cost curve for `k` over `q_grid`.
pub fn cost_curve(
    div: &Divergence,
    data: &Dataset,
    k: usize,
    q_grid: &[usize],
    config: &TrimConfig,
) -> Result<CostCurve> {
    cost_curve_warm(div, data, k, q_grid, config, None)
}

/// Cost curve for `k`, also starting every cell from the `(k - 1)` curve's
/// codebook at the same `q` when `smaller` is given.
pub fn cost_curve_warm(
    div: &Divergence,
    data: &Dataset,
    k: usize,
    q_grid: &[usize],
    config: &TrimConfig,
    smaller: Option<&CostCurve>,
) -> Result<CostCurve> {
    let n = data.len();
    check_grid(k, n, q_grid)?;
    if k == 0 || config.n_starts == 0 || config.max_iter == 0 {
        return Err(Error::InvalidConfig("k, n_starts and max_iter must be positive".into()));
    }
    div.check_dim(data.dim())?;

    #[cfg(feature = "parallel")]
    let mut entries: Vec<CurveEntry> = {
        use rayon::prelude::*;
        q_grid
            .par_iter()
            .map(|&q| fit_cell(div, data, k, q, config, smaller))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut entries: Vec<CurveEntry> = q_grid
        .iter()
        .map(|&q| fit_cell(div, data, k, q, config, smaller))
        .collect();

    // carry codebooks down from larger q
    let carry_start = config.n_starts + 1;
    for i in (0..entries.len().saturating_sub(1)).rev() {
        let Some(cb) = entries[i + 1].codebook.clone() else {
            continue;
        };
        let cell = TrimConfig {
            k,
            q: entries[i].q,
            ..*config
        };
        if let Ok(f) = trimmed::lloyd_fit(div, data, &cell, &cb) {
            let better = match entries[i].cost {
                None => true,
                Some(c) => f.cost < c,
            };
            if better {
                entries[i] = CurveEntry {
                    q: entries[i].q,
                    cost: Some(f.cost),
                    best_start: Some(carry_start),
                    codebook: Some(f.codebook),
                    error: None,
                };
            }
        }
    }
    Ok(CostCurve { k, n, entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub k: usize,
    pub q: usize,
    /// `elbow * (1 + knee gap)`; candidates are ranked by it.
    pub score: f64,
    /// Significant knee of the curve of `k`; `None` means no cut-point was
    /// found and `q` is the largest scanned value.
    pub knee: Option<Knee>,
    /// `d_k / (d_k + d_{k+1})` where `d_k` is the relative cost decrease from
    /// `k - 1` to `k` centers at this `q`. The smallest scanned `k` uses
    /// `d_k = 1`; the largest uses `d_{k+1} = d_k`.
    pub elbow: f64,
}

impl Candidate {
    pub fn low_confidence(&self) -> bool {
        self.knee.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    /// Best first.
    pub candidates: Vec<Candidate>,
    /// Suggested `q` per scanned `k`, strictly inside the scanned range;
    /// `None` when the curve is too short or shows no knee.
    pub suggestions: Vec<(usize, Option<usize>)>,
    pub curves: Vec<CostCurve>,
    /// Every fitted cost is zero.
    pub degenerate: bool,
}

impl SelectionReport {
    pub fn top(&self, m: usize) -> &[Candidate] {
        &self.candidates[..m.min(self.candidates.len())]
    }
}

/// A knee only counts when the mean slope after it is at least this many
/// times the mean slope before it. Clean clusters bend smoothly (ratios of
/// 2 to 4 on Gaussian samples); outliers entering the kept set make the
/// slope jump well beyond that.
pub const KNEE_SLOPE_RATIO: f64 = 4.0;

/// Knee of a convex increasing curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knee {
    pub q: usize,
    /// Largest gap below the chord of the normalized curve, in `[0, 1]`.
    pub gap: f64,
    /// Mean slope after `q` over mean slope before it.
    pub slope_ratio: f64,
}

impl Knee {
    pub fn is_significant(&self) -> bool {
        self.gap >= LOW_CONFIDENCE_SCORE && self.slope_ratio >= KNEE_SLOPE_RATIO
    }
}

/// Rescales the cells with `q >= n / 2` to the unit square and takes the
/// point farthest below the chord joining the first and last of them, so
/// trimming more than half of the sample is never suggested. All cells are
/// used when fewer than four lie in that window.
pub fn chord_knee(points: &[(usize, f64)], n: usize) -> Option<Knee> {
    let upper: Vec<(usize, f64)> = points.iter().copied().filter(|&(q, _)| 2 * q >= n).collect();
    let pts = if upper.len() >= 4 { upper } else { points.to_vec() };
    if pts.len() < 3 {
        return None;
    }
    let (q0, c0) = pts[0];
    let (q1, c1) = pts[pts.len() - 1];
    let span_q = (q1 - q0) as f64;
    let span_c = c1 - c0;
    if !(span_c > 0.0) || !span_c.is_finite() {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for &(q, c) in &pts[1..pts.len() - 1] {
        let gap = (q - q0) as f64 / span_q - (c - c0) / span_c;
        if best.is_none_or(|(_, g, _)| gap > g) {
            best = Some((q, gap, c));
        }
    }
    let (q, gap, c) = best?;
    let before = (c - c0) / (q - q0) as f64;
    let after = (c1 - c) / (q1 - q) as f64;
    let slope_ratio = if before > 0.0 { after / before } else { f64::INFINITY };
    Some(Knee { q, gap, slope_ratio })
}

fn relative_decrease(larger: f64, smaller: f64) -> f64 {
    if larger > 0.0 {
        ((larger - smaller) / larger).max(0.0)
    } else {
        0.0
    }
}

/// Scans `k_grid` (sorted and deduplicated) over `q_grid`, or the default
/// grid of each `k` when `None`, and ranks one `(k, q)` candidate per `k`.
pub fn select_k_q(
    div: &Divergence,
    data: &Dataset,
    k_grid: &[usize],
    q_grid: Option<&[usize]>,
    config: &TrimConfig,
) -> Result<SelectionReport> {
    if k_grid.is_empty() {
        return Err(Error::InvalidConfig("k grid is empty".into()));
    }
    let n = data.len();
    let mut ks = k_grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut curves: Vec<CostCurve> = Vec::new();
    for &k in &ks {
        let grid: Vec<usize> = match q_grid {
            Some(g) => g.iter().copied().filter(|&q| q >= k && q <= n).collect(),
            None => default_q_grid(k, n),
        };
        if grid.is_empty() {
            continue;
        }
        let smaller = curves.last().filter(|c| c.k + 1 == k);
        curves.push(cost_curve_warm(div, data, k, &grid, config, smaller)?);
    }
    if curves.is_empty() {
        return Err(Error::InvalidConfig("no (k, q) cell lies in [1, n]".into()));
    }

    let degenerate = curves
        .iter()
        .flat_map(|c| c.points())
        .all(|(_, cost)| cost == 0.0);

    let mut suggestions = Vec::new();
    let mut candidates = Vec::new();
    for (ci, curve) in curves.iter().enumerate() {
        let points = curve.points();
        let Some(&(q_last, _)) = points.last() else {
            suggestions.push((curve.k, None));
            continue;
        };
        let knee = if degenerate {
            None
        } else {
            chord_knee(&points, n).filter(Knee::is_significant)
        };
        suggestions.push((curve.k, knee.map(|kn| kn.q)));
        let q = knee.map_or(q_last, |kn| kn.q);
        let cost = curve.cost_at(q).expect("fitted cell");
        let previous = ci.checked_sub(1).map(|i| &curves[i]).filter(|p| p.k + 1 == curve.k);
        let next = curves.get(ci + 1).filter(|p| p.k == curve.k + 1);
        let gain = previous
            .and_then(|p| p.cost_at(q))
            .map_or(1.0, |prev| relative_decrease(prev, cost));
        let next_gain = next
            .and_then(|p| p.cost_at(q))
            .map_or(gain, |nc| relative_decrease(cost, nc));
        let elbow = if gain + next_gain > 0.0 {
            gain / (gain + next_gain)
        } else {
            0.0
        };
        candidates.push(Candidate {
            k: curve.k,
            q,
            score: elbow * (1.0 + knee.map_or(0.0, |kn| kn.gap)),
            knee,
            elbow,
        });
    }
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.k.cmp(&b.k))
            .then(a.q.cmp(&b.q))
    });
    Ok(SelectionReport {
        candidates,
        suggestions,
        curves,
        degenerate,
    })
}
