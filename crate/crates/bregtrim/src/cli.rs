//! Argument definitions and subcommand handlers of the `bregtrim` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use bregtrim_core::datagen::{self, Component, CoordinateLaw, MixtureSpec};
use bregtrim_core::metrics::nmi;
use bregtrim_core::selection::select_k_q;
use bregtrim_core::{trimmed, TrimConfig};

use crate::curves::{candidates_table, curves_csv, curves_svg};
use crate::error::{Error, Result};
use crate::experiments::{run_breakdown, run_comparison, BreakdownConfig, ComparisonConfig};
use crate::io::{parse_divergence, read_dataset, read_labels, write_atomic, write_dataset};
use crate::report::FitResultFile;

const AFTER_HELP: &str = "\
Divergences: sqeuclidean, gaussian[:sigma], mahalanobis:<matrix.csv>, poisson,
binomial:<N>, gamma:<shape>, exp, logistic, kl, percoord:<spec>,<spec>,...

Exit codes: 0 success, 2 usage or domain error, 3 IO error, 4 degenerate result.";

#[derive(Debug, Parser)]
#[command(name = "bregtrim", version, about = "Trimmed clustering under Bregman divergences", after_help = AFTER_HELP)]
pub struct Cli {
    /// Worker threads for restarts and grid cells (results do not depend on it).
    #[arg(long, global = true, env = "BREGTRIM_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic mixture and write it as CSV.
    Generate(GenerateArgs),
    /// Fit a trimmed codebook to a CSV dataset.
    Fit(FitArgs),
    /// Compute cost curves over (k, q) grids and rank candidates.
    Sweep(SweepArgs),
    /// Normalized mutual information between two label columns.
    Eval(EvalArgs),
    /// Two-atom breakdown experiment.
    Breakdown(BreakdownArgs),
    /// Compare divergences by NMI over replicated preset samples.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Preset such as `poisson,small` or `gaussian,large`.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub preset: Option<String>,
    /// JSON mixture specification.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the number of signal points.
    #[arg(long)]
    pub n_signal: Option<usize>,
    /// Override the number of noise points.
    #[arg(long)]
    pub n_noise: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset CSV; a `label` column, if any, is ignored.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "sqeuclidean")]
    pub divergence: String,
    #[arg(long)]
    pub k: usize,
    /// Number of points kept; the other n - q are trimmed.
    #[arg(long)]
    pub q: usize,
    #[arg(long, default_value_t = TrimConfig::DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TrimConfig::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Result JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "sqeuclidean")]
    pub divergence: String,
    /// Values of k: `1..5`, `2,3,5` or a mix such as `1..3,6`.
    #[arg(long)]
    pub k_grid: String,
    /// Values of q, same syntax plus `a..b:step`; default every q in [k, n]
    /// (200 evenly spaced values when n > 500).
    #[arg(long)]
    pub q_grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TrimConfig::DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long, default_value_t = TrimConfig::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Curve CSV with header `k,q,cost,score`.
    #[arg(long)]
    pub out_curves: Option<PathBuf>,
    /// SVG plot of the curves.
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// `file[:column]`: a CSV column (name or 1-based index, default
    /// `label`) or a fit result JSON.
    #[arg(long)]
    pub labels_a: String,
    #[arg(long)]
    pub labels_b: String,
}

#[derive(Debug, Args)]
pub struct BreakdownArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Comma-separated positions of the far atom.
    #[arg(long = "n-list", visible_alias = "N-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Preset to replicate; repeat the flag for several.
    #[arg(long = "preset", required = true)]
    pub presets: Vec<String>,
    /// Divergence to compare; repeat the flag for several. Default: the
    /// preset's matching divergence and sqeuclidean.
    #[arg(long = "divergence")]
    pub divergences: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 110)]
    pub q: usize,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = TrimConfig::DEFAULT_STARTS)]
    pub starts: usize,
    #[arg(long)]
    pub n_signal: Option<usize>,
    #[arg(long)]
    pub n_noise: Option<usize>,
    /// Full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One summary row per preset and divergence.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

/// Parses `1..5`, `2,3,5`, `100..120:5` or a comma-separated mix into a
/// sorted list without duplicates.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let bad = |part: &str| Error::Usage(format!("cannot read grid item `{part}` in `{text}`"));
    let mut values = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((h, s)) => (h, s.trim().parse::<usize>().map_err(|_| bad(part))?),
                None => (rest, 1),
            };
            let lo: usize = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(part))?;
            if step == 0 || lo > hi {
                return Err(bad(part));
            }
            values.extend((lo..=hi).step_by(step));
        } else {
            values.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    values.sort_unstable();
    values.dedup();
    if values.is_empty() {
        return Err(Error::Usage(format!("grid `{text}` is empty")));
    }
    Ok(values)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    components: Vec<ComponentFile>,
    n_signal: usize,
    n_noise: usize,
    #[serde(default)]
    noise_box: Vec<(f64, f64)>,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentFile {
    laws: Vec<LawFile>,
    weight: f64,
    #[serde(default)]
    truncation: Option<Vec<(f64, f64)>>,
}

#[derive(Deserialize)]
#[serde(tag = "law", rename_all = "lowercase", deny_unknown_fields)]
enum LawFile {
    Gaussian { mean: f64, sd: f64 },
    Poisson { lambda: f64 },
    Binomial { trials: u64, prob: f64 },
    Gamma { shape: f64, scale: f64 },
    Cauchy { location: f64, scale: f64 },
}

impl From<LawFile> for CoordinateLaw {
    fn from(l: LawFile) -> Self {
        match l {
            LawFile::Gaussian { mean, sd } => CoordinateLaw::Gaussian { mean, sd },
            LawFile::Poisson { lambda } => CoordinateLaw::Poisson { lambda },
            LawFile::Binomial { trials, prob } => CoordinateLaw::Binomial { trials, prob },
            LawFile::Gamma { shape, scale } => CoordinateLaw::Gamma { shape, scale },
            LawFile::Cauchy { location, scale } => CoordinateLaw::Cauchy { location, scale },
        }
    }
}

/// Reads a JSON mixture specification (see the README for the schema).
pub fn read_spec_file(path: &Path) -> Result<MixtureSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: SpecFile = serde_json::from_str(&text).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        line: e.line() as u64,
        column: e.column().to_string(),
        message: e.to_string(),
    })?;
    Ok(MixtureSpec {
        components: file
            .components
            .into_iter()
            .map(|c| Component {
                laws: c.laws.into_iter().map(Into::into).collect(),
                weight: c.weight,
                truncation: c.truncation,
            })
            .collect(),
        n_signal: file.n_signal,
        n_noise: file.n_noise,
        noise_box: file.noise_box,
        dim: file.dim,
        seed: 0,
    })
}

/// Runs one parsed command; the returned text goes to standard output.
pub fn run(cli: Cli) -> Result<String> {
    crate::init_threads(cli.threads)?;
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Eval(a) => eval(a),
        Command::Breakdown(a) => breakdown(a),
        Command::Compare(a) => compare(a),
    }
}

fn generate(a: GenerateArgs) -> Result<String> {
    let mut spec = match (&a.preset, &a.spec) {
        (Some(p), _) => datagen::preset(p)?,
        (None, Some(path)) => read_spec_file(path)?,
        (None, None) => return Err(Error::Usage("give --preset or --spec".into())),
    };
    if let Some(n) = a.n_signal {
        spec.n_signal = n;
    }
    if let Some(n) = a.n_noise {
        spec.n_noise = n;
    }
    let data = datagen::sample(&spec.with_seed(a.seed))?;
    write_dataset(&a.out, &data)?;
    Ok(format!("wrote {} rows to {}\n", data.len(), a.out.display()))
}

fn fit(a: FitArgs) -> Result<String> {
    let div = parse_divergence(&a.divergence)?;
    let loaded = read_dataset(&a.input)?;
    loaded.check_domain(&div)?;
    let data = &loaded.data;
    let config = TrimConfig::new(a.k, a.q)
        .with_seed(a.seed)
        .with_starts(a.starts)
        .with_max_iter(a.max_iter);
    config.validate(data.len())?;
    let result = trimmed::fit(&div, data, &config)?;
    if !result.cost.is_finite() {
        return Err(Error::Degenerate(format!(
            "trimmed cost is infinite: more than n - q = {} points are at infinite divergence from every codebook tried",
            data.len() - a.q
        )));
    }
    let file = FitResultFile::new(&div.to_string(), &config, data, result);
    if let Some(out) = &a.out {
        write_atomic(out, &file.to_json()?)?;
    }
    Ok(format!(
        "cost {}\niterations {}\nconverged {}\n",
        file.cost, file.iterations, file.converged
    ))
}

fn sweep(a: SweepArgs) -> Result<String> {
    let div = parse_divergence(&a.divergence)?;
    let k_grid = parse_grid(&a.k_grid)?;
    if k_grid.contains(&0) {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    let q_grid = a.q_grid.as_deref().map(parse_grid).transpose()?;
    let loaded = read_dataset(&a.input)?;
    loaded.check_domain(&div)?;
    let config = TrimConfig::new(1, 1)
        .with_seed(a.seed)
        .with_starts(a.starts)
        .with_max_iter(a.max_iter);
    let report = select_k_q(&div, &loaded.data, &k_grid, q_grid.as_deref(), &config)?;
    if let Some(path) = &a.out_curves {
        write_atomic(path, curves_csv(&report.curves).as_bytes())?;
    }
    if let Some(path) = &a.out_svg {
        write_atomic(path, curves_svg(&report.curves).as_bytes())?;
    }
    Ok(candidates_table(&report))
}

fn eval(a: EvalArgs) -> Result<String> {
    let la = read_labels(&a.labels_a)?;
    let lb = read_labels(&a.labels_b)?;
    let v = nmi(&la, &lb)?;
    Ok(format!("{v:?}\n"))
}

fn breakdown(a: BreakdownArgs) -> Result<String> {
    let config = BreakdownConfig {
        p: a.p,
        h: a.h,
        gamma: a.gamma,
        n: a.n,
    };
    let sweep = run_breakdown(&config, &a.n_list)?;
    if let Some(out) = &a.out {
        write_atomic(out, &sweep.to_json())?;
    }
    let mut s = format!(
        "B_h {:?}  q {}  atoms N:{} -1:{} +1:{}\nN  c1  c2  max|c|  cost  oracle\n",
        sweep.b_h, sweep.q, sweep.atoms.far, sweep.atoms.minus, sweep.atoms.plus
    );
    for r in &sweep.rows {
        writeln!(
            s,
            "{}  {}  {}  {}  {}  {}",
            r.big_n, r.codebook[0], r.codebook[1], r.max_magnitude, r.cost, r.oracle_cost
        )
        .expect("writing to a string");
    }
    Ok(s)
}

fn compare(a: CompareArgs) -> Result<String> {
    let config = ComparisonConfig {
        presets: a.presets,
        divergences: a.divergences,
        k: a.k,
        q: a.q,
        replications: a.replications,
        seed: a.seed,
        n_starts: a.starts,
        n_signal: a.n_signal,
        n_noise: a.n_noise,
    };
    let report = run_comparison(&config)?;
    if let Some(out) = &a.out {
        write_atomic(out, &report.to_json())?;
    }
    let summary = report.summary_csv();
    if let Some(out) = &a.out_csv {
        write_atomic(out, summary.as_bytes())?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_grid("5,2,2,3").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_grid("100..110:5,1").unwrap(), vec![1, 100, 105, 110]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("3..1").is_err());
        assert!(parse_grid("1..4:0").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
