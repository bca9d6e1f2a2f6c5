//! Trimmed Lloyd iterations under a Bregman divergence.
//!
//! Each iteration keeps the `q` points with the smallest divergence to the
//! current codebook, splits them into Bregman-Voronoi cells, and moves every
//! center to the arithmetic mean of its cell. Means minimize Bregman inertia
//! whatever the divergence, so the trimmed cost never increases.
//!
//! Ties are resolved by index everywhere: among equal divergences at the trim
//! threshold the lower point index is kept, and a point equidistant from two
//! centers joins the lower-indexed one.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::index;

use crate::data::{Codebook, Dataset};
use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrimConfig {
    /// Number of clusters.
    pub k: usize,
    /// Number of points kept as signal; the other `n - q` are trimmed.
    pub q: usize,
    pub n_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl TrimConfig {
    pub const DEFAULT_STARTS: usize = 20;
    pub const DEFAULT_MAX_ITER: usize = 100;

    pub fn new(k: usize, q: usize) -> Self {
        TrimConfig {
            k,
            q,
            n_starts: Self::DEFAULT_STARTS,
            max_iter: Self::DEFAULT_MAX_ITER,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, n_starts: usize) -> Self {
        self.n_starts = n_starts;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Trim level `h = q / n`.
    pub fn trim_level(&self, n: usize) -> f64 {
        self.q as f64 / n as f64
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.q < self.k || self.q > n {
            return Err(Error::InvalidConfig(alloc::format!(
                "q = {} must lie in [k, n] = [{}, {n}]",
                self.q,
                self.k
            )));
        }
        if self.n_starts == 0 || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "n_starts and max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Divergence from one point to its nearest center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointAssignment {
    pub divergence: f64,
    pub nearest: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Indices of the `q` kept points, ascending.
    pub selected: Vec<usize>,
    pub per_point: Vec<PointAssignment>,
    /// Divergences of the kept points, ascending.
    kept_values: Vec<f64>,
}

impl Selection {
    /// Sum of kept divergences divided by `n`.
    pub fn cost(&self) -> f64 {
        self.kept_values.iter().sum::<f64>() / self.per_point.len() as f64
    }

    /// Divergence of the last kept point: the squared trimming radius.
    pub fn radius_sq(&self) -> f64 {
        self.kept_values.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// `clusters[j]` holds the point indices of cell `j`, ascending.
    pub clusters: Vec<Vec<usize>>,
    /// `0` for trimmed points, `j + 1` for members of cell `j`.
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidUpdate {
    pub codebook: Codebook,
    pub empty_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrimmedFit {
    pub codebook: Codebook,
    /// `0` marks trimmed points, `1..=k` cluster membership.
    pub labels: Vec<usize>,
    /// Empirical trimmed distortion: kept divergences summed, divided by `n`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub empty_cluster_events: usize,
    pub start_index: usize,
    /// Divergence of the farthest kept point to the codebook.
    pub trim_radius_sq: f64,
    /// Trimmed distortion of the initial codebook and of every update.
    pub cost_trace: Vec<f64>,
}

impl TrimmedFit {
    pub fn k(&self) -> usize {
        self.codebook.k()
    }

    /// Reorders centers lexicographically and renames clusters to match, so
    /// that label `1` goes to the center with the smallest first coordinate.
    pub fn canonicalize(&mut self) {
        let order = self.codebook.lexicographic_order();
        let mut rename = alloc::vec![0; order.len()];
        let mut centers = Vec::with_capacity(self.codebook.as_slice().len());
        for (new, &old) in order.iter().enumerate() {
            rename[old] = new + 1;
            centers.extend_from_slice(self.codebook.center(old));
        }
        self.codebook = Codebook::new(centers, self.codebook.dim()).expect("same shape");
        for l in self.labels.iter_mut() {
            if *l != 0 {
                *l = rename[*l - 1];
            }
        }
    }
}

fn check_data(div: &Divergence, data: &Dataset) -> Result<()> {
    div.check_dim(data.dim())?;
    for (i, row) in data.rows().enumerate() {
        div.check_point(row).map_err(|e| e.with_row(i))?;
    }
    Ok(())
}

fn check_codebook(div: &Divergence, data: &Dataset, codebook: &Codebook) -> Result<()> {
    if codebook.dim() != data.dim() {
        return Err(Error::Dimension {
            expected: data.dim(),
            found: codebook.dim(),
        });
    }
    for c in codebook.centers() {
        div.check_codepoint(c)?;
    }
    Ok(())
}

fn by_value_then_index(per_point: &[PointAssignment]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        per_point[a]
            .divergence
            .total_cmp(&per_point[b].divergence)
            .then(a.cmp(&b))
    }
}

fn select_unchecked(div: &Divergence, data: &Dataset, codebook: &Codebook, q: usize) -> Selection {
    let per_point: Vec<PointAssignment> = data
        .rows()
        .map(|x| {
            let (divergence, nearest) = div.nearest_unchecked(x, codebook);
            PointAssignment { divergence, nearest }
        })
        .collect();
    let mut order: Vec<usize> = (0..per_point.len()).collect();
    {
        let cmp = by_value_then_index(&per_point);
        if q < order.len() {
            order.select_nth_unstable_by(q, &cmp);
            order.truncate(q);
        }
        order.sort_unstable_by(&cmp);
    }
    let kept_values = order.iter().map(|&i| per_point[i].divergence).collect();
    order.sort_unstable();
    Selection {
        selected: order,
        per_point,
        kept_values,
    }
}

/// Keeps the `q` points with smallest divergence to `codebook`.
pub fn select_trimmed(
    div: &Divergence,
    data: &Dataset,
    codebook: &Codebook,
    q: usize,
) -> Result<Selection> {
    if q == 0 || q > data.len() {
        return Err(Error::InvalidConfig(alloc::format!(
            "q = {q} must lie in [1, {}]",
            data.len()
        )));
    }
    check_data(div, data)?;
    check_codebook(div, data, codebook)?;
    Ok(select_unchecked(div, data, codebook, q))
}

/// Splits the kept points into cells by nearest center.
pub fn partition(per_point: &[PointAssignment], selected: &[usize], k: usize) -> Partition {
    let mut clusters = alloc::vec![Vec::new(); k];
    let mut labels = alloc::vec![0; per_point.len()];
    for &i in selected {
        let j = per_point[i].nearest;
        clusters[j].push(i);
        labels[i] = j + 1;
    }
    for c in clusters.iter_mut() {
        c.sort_unstable();
    }
    Partition { clusters, labels }
}

/// Moves every center to the mean of its cell. Empty cells keep their
/// previous center. A mean on the boundary of the codepoint domain (for
/// instance an all-zero Poisson cell) is a domain error.
pub fn centroid_update(
    div: &Divergence,
    data: &Dataset,
    clusters: &[Vec<usize>],
    previous: &Codebook,
) -> Result<CentroidUpdate> {
    if clusters.len() != previous.k() {
        return Err(Error::Dimension {
            expected: previous.k(),
            found: clusters.len(),
        });
    }
    let dim = data.dim();
    let mut codebook = previous.clone();
    let mut empty_clusters = 0;
    for (j, members) in clusters.iter().enumerate() {
        if members.is_empty() {
            empty_clusters += 1;
            continue;
        }
        let center = codebook.center_mut(j);
        center.iter_mut().for_each(|v| *v = 0.0);
        for &i in members {
            for (acc, x) in center.iter_mut().zip(data.point(i)) {
                *acc += x;
            }
        }
        let size = members.len() as f64;
        center.iter_mut().for_each(|v| *v /= size);
        debug_assert_eq!(center.len(), dim);
        div.check_codepoint(codebook.center(j))?;
    }
    Ok(CentroidUpdate {
        codebook,
        empty_clusters,
    })
}

/// Trimmed distortion of `codebook`: the `q` smallest divergences summed and
/// divided by `n`.
pub fn empirical_distortion(
    div: &Divergence,
    data: &Dataset,
    codebook: &Codebook,
    q: usize,
) -> Result<f64> {
    if q < codebook.k() {
        return Err(Error::InvalidConfig(alloc::format!(
            "q = {q} is below k = {}",
            codebook.k()
        )));
    }
    Ok(select_trimmed(div, data, codebook, q)?.cost())
}

/// Runs trimmed Lloyd iterations from `initial` until the kept set and the
/// cells repeat, or `max_iter` updates have been made.
pub fn lloyd_fit(
    div: &Divergence,
    data: &Dataset,
    config: &TrimConfig,
    initial: &Codebook,
) -> Result<TrimmedFit> {
    config.validate(data.len())?;
    if initial.k() != config.k {
        return Err(Error::InvalidConfig(alloc::format!(
            "initial codebook has {} centers, expected k = {}",
            initial.k(),
            config.k
        )));
    }
    check_data(div, data)?;
    check_codebook(div, data, initial)?;
    if data.distinct_count() < config.k {
        return Err(Error::DegenerateInput(alloc::format!(
            "fewer than k = {} distinct points",
            config.k
        )));
    }
    lloyd_unchecked(div, data, config, initial.clone(), 0)
}

fn lloyd_unchecked(
    div: &Divergence,
    data: &Dataset,
    config: &TrimConfig,
    mut codebook: Codebook,
    start_index: usize,
) -> Result<TrimmedFit> {
    let mut previous_labels: Option<Vec<usize>> = None;
    let mut cost_trace = Vec::new();
    let mut iterations = 0;
    let mut empty_cluster_events = 0;
    loop {
        let selection = select_unchecked(div, data, &codebook, config.q);
        let cost = selection.cost();
        cost_trace.push(cost);
        let part = partition(&selection.per_point, &selection.selected, config.k);
        let repeated = previous_labels.as_ref() == Some(&part.labels);
        // More than n - q points at infinite divergence: nothing left to improve.
        let stalled = !cost.is_finite();
        if repeated || stalled || iterations == config.max_iter {
            return Ok(TrimmedFit {
                codebook,
                labels: part.labels,
                cost,
                iterations,
                converged: repeated && !stalled,
                empty_cluster_events,
                start_index,
                trim_radius_sq: selection.radius_sq(),
                cost_trace,
            });
        }
        let update = centroid_update(div, data, &part.clusters, &codebook)?;
        codebook = update.codebook;
        empty_cluster_events += update.empty_clusters;
        iterations += 1;
        previous_labels = Some(part.labels);
    }
}

fn eligible_starts(div: &Divergence, data: &Dataset) -> Vec<usize> {
    data.rows()
        .enumerate()
        .filter(|(_, row)| div.check_codepoint(row).is_ok())
        .map(|(i, _)| i)
        .collect()
}

fn sample_codebook(
    data: &Dataset,
    eligible: &[usize],
    k: usize,
    seed: u64,
    start: usize,
) -> Result<Codebook> {
    if eligible.len() < k {
        return Err(Error::DegenerateInput(alloc::format!(
            "only {} points lie inside the codepoint domain, need k = {k}",
            eligible.len()
        )));
    }
    let mut rng = seed::stream_rng(seed, start as u64);
    let picks: Vec<usize> = index::sample(&mut rng, eligible.len(), k)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    Codebook::from_indices(data, &picks)
}

/// Initial codebook of restart `start`: `k` data points drawn without
/// replacement among those inside the codepoint domain.
pub fn initial_codebook(
    div: &Divergence,
    data: &Dataset,
    k: usize,
    seed: u64,
    start: usize,
) -> Result<Codebook> {
    div.check_dim(data.dim())?;
    sample_codebook(data, &eligible_starts(div, data), k, seed, start)
}

/// Multi-restart fit with random initial codebooks; see [`fit_with_starts`].
pub fn fit(div: &Divergence, data: &Dataset, config: &TrimConfig) -> Result<TrimmedFit> {
    fit_with_starts(div, data, config, &[])
}

/// Runs `config.n_starts` random restarts followed by one restart from each
/// codebook in `extra` (numbered `n_starts`, `n_starts + 1`, ...), and returns
/// the lowest-cost fit, the smallest start index winning ties.
///
/// A restart whose update lands a center on the boundary of the codepoint
/// domain is dropped; the call fails only if every restart fails.
pub fn fit_with_starts(
    div: &Divergence,
    data: &Dataset,
    config: &TrimConfig,
    extra: &[Codebook],
) -> Result<TrimmedFit> {
    config.validate(data.len())?;
    check_data(div, data)?;
    if data.distinct_count() < config.k {
        return Err(Error::DegenerateInput(alloc::format!(
            "fewer than k = {} distinct points",
            config.k
        )));
    }
    for cb in extra {
        if cb.k() != config.k {
            return Err(Error::InvalidConfig("extra start has the wrong k".into()));
        }
        check_codebook(div, data, cb)?;
    }
    let eligible = eligible_starts(div, data);
    let total = config.n_starts + extra.len();
    let run = |start: usize| -> Result<TrimmedFit> {
        let init = if start < config.n_starts {
            sample_codebook(data, &eligible, config.k, config.seed, start)?
        } else {
            extra[start - config.n_starts].clone()
        };
        lloyd_unchecked(div, data, config, init, start)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<TrimmedFit>> = {
        use rayon::prelude::*;
        (0..total).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<TrimmedFit>> = (0..total).map(run).collect();

    let mut best: Option<TrimmedFit> = None;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(f) => {
                let better = match &best {
                    None => true,
                    Some(b) => f.cost.total_cmp(&b.cost) == Ordering::Less,
                };
                if better {
                    best = Some(f);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_error.expect("at least one restart ran"))
}
