//! Replications of the synthetic studies: divergence comparison by NMI,
//! cost-curve selection on a preset, and the two-atom breakdown sweep.

use rayon::prelude::*;
use serde::Serialize;

use bregtrim_core::datagen::{self, MixtureSpec, PresetFamily};
use bregtrim_core::metrics::nmi;
use bregtrim_core::selection::{self, SelectionReport};
use bregtrim_core::trimmed::{self, lloyd_fit};
use bregtrim_core::{seed, Codebook, Dataset, Divergence, TrimConfig};

use crate::error::{Error, Result};
use crate::io::parse_divergence;

/// Divergence matched to the generating family of a preset, if any.
pub fn matching_divergence(family: PresetFamily) -> Option<&'static str> {
    match family {
        PresetFamily::Gaussian => Some("gaussian:1"),
        PresetFamily::Poisson => Some("poisson"),
        PresetFamily::Binomial => Some("binomial:100"),
        PresetFamily::Gamma => Some("gamma:40"),
        PresetFamily::Cauchy | PresetFamily::Heterogeneous => None,
    }
}

fn preset_family(name: &str) -> Option<PresetFamily> {
    let family = name.split(',').next()?.trim();
    PresetFamily::ALL.into_iter().find(|f| f.name() == family)
}

/// Five-number summary with linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Quantiles {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Quantiles {
            min: v[0],
            q25: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q75: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonConfig {
    pub presets: Vec<String>,
    /// Divergence strings; empty means the matching divergence of each
    /// preset (when it has one) plus `sqeuclidean`.
    pub divergences: Vec<String>,
    pub k: usize,
    pub q: usize,
    pub replications: usize,
    pub seed: u64,
    pub n_starts: usize,
    /// Overrides the preset sizes when set.
    pub n_signal: Option<usize>,
    pub n_noise: Option<usize>,
}

impl ComparisonConfig {
    pub fn new(presets: &[&str], k: usize, q: usize) -> Self {
        ComparisonConfig {
            presets: presets.iter().map(|s| s.to_string()).collect(),
            divergences: Vec::new(),
            k,
            q,
            replications: 100,
            seed: 0,
            n_starts: TrimConfig::DEFAULT_STARTS,
            n_signal: None,
            n_noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonCell {
    pub preset: String,
    pub divergence: String,
    pub k: usize,
    pub q: usize,
    /// Dataset seed of every replication.
    pub seeds: Vec<u64>,
    /// NMI against the true labels; `null` where the fit failed.
    pub nmi: Vec<Option<f64>>,
    pub failures: usize,
    pub quantiles: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub replications: usize,
    pub seed: u64,
    pub n_starts: usize,
    pub cells: Vec<ComparisonCell>,
}

impl ComparisonReport {
    pub fn cell(&self, preset: &str, divergence: &str) -> Option<&ComparisonCell> {
        self.cells
            .iter()
            .find(|c| c.preset == preset && c.divergence == divergence)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report is serializable");
        out.push(b'\n');
        out
    }

    /// One summary row per cell.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("preset,divergence,k,q,replications,failures,min,q25,median,q75,max\n");
        for c in &self.cells {
            let qs = c
                .quantiles
                .map(|q| [q.min, q.q25, q.median, q.q75, q.max].map(|v| v.to_string()).join(","))
                .unwrap_or_else(|| ",,,,".into());
            out.push_str(&format!(
                "\"{}\",\"{}\",{},{},{},{},{qs}\n",
                c.preset,
                c.divergence,
                c.k,
                c.q,
                c.seeds.len(),
                c.failures
            ));
        }
        out
    }
}

fn preset_spec(name: &str, config: &ComparisonConfig) -> Result<MixtureSpec> {
    let mut spec = datagen::preset(name)?;
    if let Some(n) = config.n_signal {
        spec.n_signal = n;
    }
    if let Some(n) = config.n_noise {
        spec.n_noise = n;
    }
    Ok(spec)
}

/// Samples every preset `replications` times (replication `r` uses seed
/// `derive(seed, r)` for both data and restarts), fits each divergence and
/// scores the labels by NMI, noise counting as cluster `0`.
pub fn run_comparison(config: &ComparisonConfig) -> Result<ComparisonReport> {
    if config.presets.is_empty() || config.replications == 0 {
        return Err(Error::Usage("need at least one preset and one replication".into()));
    }
    let seeds: Vec<u64> = (0..config.replications)
        .map(|r| seed::derive(config.seed, r as u64))
        .collect();
    let mut cells = Vec::new();
    for preset in &config.presets {
        let spec = preset_spec(preset, config)?;
        let n = spec.n_signal + spec.n_noise;
        TrimConfig::new(config.k, config.q).validate(n)?;
        let names: Vec<String> = if config.divergences.is_empty() {
            let family = preset_family(preset).expect("preset name was validated");
            matching_divergence(family)
                .into_iter()
                .chain(["sqeuclidean"])
                .map(String::from)
                .collect()
        } else {
            config.divergences.clone()
        };
        let divergences = names
            .iter()
            .map(|s| parse_divergence(s))
            .collect::<Result<Vec<Divergence>>>()?;
        // one job per replication: sample once, fit every divergence
        let per_rep: Vec<Vec<Option<f64>>> = seeds
            .par_iter()
            .map(|&s| {
                let data = datagen::sample(&spec.clone().with_seed(s))?;
                let truth = data.labels().expect("generated data are labelled").to_vec();
                let fit_config = TrimConfig::new(config.k, config.q)
                    .with_seed(s)
                    .with_starts(config.n_starts);
                Ok(divergences
                    .iter()
                    .map(|div| {
                        let fit = trimmed::fit(div, &data, &fit_config).ok()?;
                        nmi(&truth, &fit.labels).ok()
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for (j, name) in names.iter().enumerate() {
            let values: Vec<Option<f64>> = per_rep.iter().map(|r| r[j]).collect();
            let ok: Vec<f64> = values.iter().flatten().copied().collect();
            cells.push(ComparisonCell {
                preset: preset.clone(),
                divergence: name.clone(),
                k: config.k,
                q: config.q,
                seeds: seeds.clone(),
                failures: values.len() - ok.len(),
                quantiles: Quantiles::of(&ok),
                nmi: values,
            });
        }
    }
    Ok(ComparisonReport {
        replications: config.replications,
        seed: config.seed,
        n_starts: config.n_starts,
        cells,
    })
}

/// Cost curves and ranked `(k, q)` candidates for one sample of a preset,
/// using its matching divergence (squared Euclidean when it has none).
pub fn run_selection_demo(
    preset: &str,
    k_grid: &[usize],
    q_grid: Option<&[usize]>,
    seed: u64,
) -> Result<SelectionReport> {
    let spec = datagen::preset(preset)?.with_seed(seed);
    let data = datagen::sample(&spec)?;
    let family = preset_family(preset).expect("preset name was validated");
    let div = parse_divergence(matching_divergence(family).unwrap_or("sqeuclidean"))?;
    let config = TrimConfig::new(1, 1).with_seed(seed);
    Ok(selection::select_k_q(&div, &data, k_grid, q_grid, &config)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownConfig {
    /// Mass of the `+1` atom in the clean measure, in `(0, 1/2]`.
    pub p: f64,
    /// Trim level: the fraction of points kept.
    pub h: f64,
    /// Fraction of points moved to the far atom `N`.
    pub gamma: f64,
    /// Sample size.
    pub n: usize,
}

/// Deterministic three-atom sample: `N` with `round(n gamma)` points, then
/// `-1` and `+1` sharing the rest in proportions `1 - p` and `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomCounts {
    pub far: usize,
    pub minus: usize,
    pub plus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRow {
    #[serde(rename = "N")]
    pub big_n: f64,
    /// Fitted centers in increasing order.
    pub codebook: [f64; 2],
    pub max_magnitude: f64,
    pub cost: f64,
    /// Exhaustive optimum over kept counts per atom and atom-to-cluster
    /// assignments.
    pub oracle_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownSweep {
    pub p: f64,
    pub h: f64,
    pub gamma: f64,
    pub n: usize,
    pub q: usize,
    pub atoms: AtomCounts,
    /// Discernability factor `min((h + p - 1) / p, 1 - h)`.
    pub b_h: f64,
    pub rows: Vec<BreakdownRow>,
}

impl BreakdownSweep {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.max_magnitude).collect()
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("sweep is serializable");
        out.push(b'\n');
        out
    }
}

pub fn discernability_factor(p: f64, h: f64) -> f64 {
    ((h + p - 1.0) / p).min(1.0 - h)
}

impl BreakdownConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Usage(m.to_string()));
        if !(self.p > 0.0 && self.p <= 0.5) {
            return bad("p must lie in (0, 1/2]");
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return bad("h must lie in (0, 1)");
        }
        if self.h <= 1.0 - self.p {
            return bad("h must exceed 1 - p, the regime of the two-atom example");
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.n < 2 {
            return bad("n must be at least 2");
        }
        Ok(())
    }

    pub fn atoms(&self) -> AtomCounts {
        let far = (self.n as f64 * self.gamma).round() as usize;
        let rest = self.n - far;
        let minus = (rest as f64 * (1.0 - self.p)).round() as usize;
        AtomCounts {
            far,
            minus,
            plus: rest - minus,
        }
    }

    /// `ceil(n h)`, ignoring rounding noise in the product.
    pub fn q(&self) -> usize {
        ((self.n as f64 * self.h) - 1e-9).ceil() as usize
    }
}

fn atom_values(big_n: f64) -> [f64; 3] {
    [big_n, -1.0, 1.0]
}

fn atom_dataset(atoms: AtomCounts, big_n: f64) -> Result<Dataset> {
    let [far, minus, plus] = atom_values(big_n);
    let mut v = Vec::with_capacity(atoms.far + atoms.minus + atoms.plus);
    v.extend(std::iter::repeat_n(far, atoms.far));
    v.extend(std::iter::repeat_n(minus, atoms.minus));
    v.extend(std::iter::repeat_n(plus, atoms.plus));
    Ok(Dataset::from_scalars(&v)?)
}

/// Optimal 2-center trimmed squared-Euclidean cost on a three-atom sample:
/// every split of `q` among the atoms times every map of atoms to centers.
pub fn three_atom_oracle(atoms: AtomCounts, big_n: f64, q: usize) -> f64 {
    let values = atom_values(big_n);
    let caps = [atoms.far, atoms.minus, atoms.plus];
    let n = caps.iter().sum::<usize>() as f64;
    let mut best = f64::INFINITY;
    for a in 0..=caps[0].min(q) {
        for b in 0..=caps[1].min(q - a) {
            let c = q - a - b;
            if c > caps[2] {
                continue;
            }
            let kept = [a, b, c];
            for assignment in 0..8u32 {
                let mut cost = 0.0;
                for cluster in 0..2 {
                    let members: Vec<usize> = (0..3)
                        .filter(|&i| (assignment >> i) & 1 == cluster && kept[i] > 0)
                        .collect();
                    let size: usize = members.iter().map(|&i| kept[i]).sum();
                    if size == 0 {
                        continue;
                    }
                    let mean = members.iter().map(|&i| kept[i] as f64 * values[i]).sum::<f64>() / size as f64;
                    cost += members
                        .iter()
                        .map(|&i| kept[i] as f64 * (values[i] - mean).powi(2))
                        .sum::<f64>();
                }
                best = best.min(cost / n);
            }
        }
    }
    best
}

/// Fits `k = 2`, `q = ceil(n h)` on the three-atom sample for every `N`,
/// starting Lloyd from each pair of distinct atoms (far atom first, so the
/// earliest pair wins exact ties) and keeping the lowest cost.
pub fn run_breakdown(config: &BreakdownConfig, n_values: &[f64]) -> Result<BreakdownSweep> {
    config.validate()?;
    if n_values.is_empty() || n_values.iter().any(|v| !(v.is_finite() && *v > 1.0)) {
        return Err(Error::Usage("N values must be finite and greater than 1".into()));
    }
    let atoms = config.atoms();
    let q = config.q();
    let fit_config = TrimConfig::new(2, q);
    let mut rows = Vec::with_capacity(n_values.len());
    for &big_n in n_values {
        let data = atom_dataset(atoms, big_n)?;
        let present: Vec<f64> = atom_values(big_n)
            .into_iter()
            .zip([atoms.far, atoms.minus, atoms.plus])
            .filter(|(_, count)| *count > 0)
            .map(|(v, _)| v)
            .collect();
        let mut best: Option<trimmed::TrimmedFit> = None;
        for i in 0..present.len() {
            for j in i + 1..present.len() {
                let init = Codebook::from_scalars(&[present[i], present[j]])?;
                let fit = lloyd_fit(&Divergence::SQUARED_EUCLIDEAN, &data, &fit_config, &init)?;
                if best.as_ref().is_none_or(|b| fit.cost < b.cost) {
                    best = Some(fit);
                }
            }
        }
        let fit = best.ok_or_else(|| Error::Degenerate("fewer than two distinct atoms".into()))?;
        let mut centers = [fit.codebook.center(0)[0], fit.codebook.center(1)[0]];
        centers.sort_by(f64::total_cmp);
        rows.push(BreakdownRow {
            big_n,
            codebook: centers,
            max_magnitude: centers[0].abs().max(centers[1].abs()),
            cost: fit.cost,
            oracle_cost: three_atom_oracle(atoms, big_n, q),
        });
    }
    Ok(BreakdownSweep {
        p: config.p,
        h: config.h,
        gamma: config.gamma,
        n: config.n,
        q,
        atoms,
        b_h: discernability_factor(config.p, config.h),
        rows,
    })
}
