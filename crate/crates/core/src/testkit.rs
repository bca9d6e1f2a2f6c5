//! Helpers shared by the property and acceptance tests: one instance of every
//! divergence family, in-domain samplers, and an exhaustive optimum for tiny
//! instances.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::data::Dataset;
use crate::divergence::{Divergence, Interval, ScalarFamily, SpdMatrix};
use crate::math::ln;

/// Every scalar family with representative parameters.
pub fn scalar_families() -> Vec<ScalarFamily> {
    vec![
        ScalarFamily::SquaredEuclidean,
        ScalarFamily::GaussianScaled { sigma: 2.5 },
        ScalarFamily::Poisson,
        ScalarFamily::Binomial { trials: 10.0 },
        ScalarFamily::Gamma { shape: 3.0 },
        ScalarFamily::ExponentialLoss,
        ScalarFamily::LogisticLoss,
    ]
}

/// One divergence of every family for dimension `dim`, with a short name.
/// The simplex is omitted for `dim < 2`, where it is a single point.
/// The Mahalanobis matrix is `B B^T + I / 2` for a random `B`.
pub fn all_families<R: Rng>(dim: usize, rng: &mut R) -> Vec<(&'static str, Divergence)> {
    let names = [
        "sqeuclidean",
        "gaussian",
        "poisson",
        "binomial",
        "gamma",
        "exp",
        "logistic",
    ];
    let mut out: Vec<(&'static str, Divergence)> = names
        .iter()
        .zip(scalar_families())
        .map(|(n, f)| (*n, Divergence::Lifted(f)))
        .collect();
    out.push(("mahalanobis", Divergence::Mahalanobis(random_spd(dim, rng))));
    if dim >= 2 {
        out.push(("kl", Divergence::KullbackLeiblerSimplex));
    }
    let fams = scalar_families();
    let mixed = (0..dim).map(|c| fams[(c + 2) % fams.len()]).collect();
    out.push(("percoord", Divergence::PerCoordinate(mixed)));
    out
}

pub fn random_spd<R: Rng>(dim: usize, rng: &mut R) -> SpdMatrix {
    let b: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let s: f64 = (0..dim).map(|l| b[i * dim + l] * b[j * dim + l]).sum();
            a[i * dim + j] = s + if i == j { 0.5 } else { 0.0 };
        }
    }
    for i in 0..dim {
        for j in 0..i {
            a[i * dim + j] = a[j * dim + i];
        }
    }
    SpdMatrix::new(a, dim).expect("B B^T + I/2 is positive definite")
}

fn interior_value<R: Rng>(iv: &Interval, rng: &mut R) -> f64 {
    let u = rng.random_range(0.02..0.98);
    match (iv.lower.is_finite(), iv.upper.is_finite()) {
        (true, true) => iv.lower + (iv.upper - iv.lower) * u,
        (true, false) => iv.lower + 0.05 + 20.0 * u,
        (false, true) => iv.upper - 0.05 - 20.0 * u,
        (false, false) => -4.0 + 8.0 * u,
    }
}

fn simplex_point<R: Rng>(dim: usize, rng: &mut R, allow_zero: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..dim).map(|_| -ln(rng.random_range(1e-3..1.0))).collect();
    if allow_zero && dim > 1 && rng.random_bool(0.3) {
        w[rng.random_range(0..dim)] = 0.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

/// A codepoint strictly inside the domain, away from the boundary.
pub fn random_codepoint<R: Rng>(div: &Divergence, dim: usize, rng: &mut R) -> Vec<f64> {
    let domain = div.domain(dim).expect("dimension matches");
    if domain.simplex {
        return simplex_point(dim, rng, false);
    }
    domain.codepoint.iter().map(|iv| interior_value(iv, rng)).collect()
}

/// A point of the domain; closed ends are hit with probability 0.15 per
/// coordinate.
pub fn random_point<R: Rng>(div: &Divergence, dim: usize, rng: &mut R) -> Vec<f64> {
    let domain = div.domain(dim).expect("dimension matches");
    if domain.simplex {
        return simplex_point(dim, rng, true);
    }
    domain
        .point
        .iter()
        .map(|iv| {
            if iv.lower_closed && rng.random_bool(0.15) {
                iv.lower
            } else if iv.upper_closed && rng.random_bool(0.15) {
                iv.upper
            } else {
                interior_value(iv, rng)
            }
        })
        .collect()
}

/// Coordinate-wise mean of the rows listed in `idx`.
pub fn mean_of(data: &Dataset, idx: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; data.dim()];
    for &i in idx {
        for (a, b) in m.iter_mut().zip(data.point(i)) {
            *a += b;
        }
    }
    for a in &mut m {
        *a /= idx.len() as f64;
    }
    m
}

/// Smallest `(1/n) sum d(x_i, mean of its group)` over every choice of `q`
/// kept points and every assignment of them to at most `k` groups. Groups
/// whose mean leaves the codepoint interior are skipped. Exponential in `n`;
/// meant for `n <= 10`.
pub fn exhaustive_optimum(div: &Divergence, data: &Dataset, k: usize, q: usize) -> f64 {
    let n = data.len();
    assert!(n <= 16 && k >= 1 && q >= 1 && q <= n);
    let mut best = f64::INFINITY;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); k];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != q {
            continue;
        }
        let kept: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let assignments = k.pow(q as u32);
        for code in 0..assignments {
            for g in &mut groups {
                g.clear();
            }
            let mut c = code;
            for &i in &kept {
                groups[c % k].push(i);
                c /= k;
            }
            let mut total = 0.0;
            let mut feasible = true;
            for g in groups.iter().filter(|g| !g.is_empty()) {
                let m = mean_of(data, g);
                if div.check_codepoint(&m).is_err() {
                    feasible = false;
                    break;
                }
                let mut vals: Vec<f64> = g.iter().map(|&i| div.eval_unchecked(data.point(i), &m)).collect();
                vals.sort_by(f64::total_cmp);
                total += vals.iter().sum::<f64>();
            }
            if feasible {
                best = best.min(total / n as f64);
            }
        }
    }
    best
}
