//! Acceptance suite: one numbered criterion per check, one PASS/FAIL line
//! each. Runs under `cargo test`; exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bregtrim::experiments::{
    run_breakdown, run_comparison, run_selection_demo, three_atom_oracle, BreakdownConfig, ComparisonConfig,
};
use bregtrim_core::datagen;
use bregtrim_core::metrics::nmi;
use bregtrim_core::selection::{select_k_q, CostCurve};
use bregtrim_core::testkit::{all_families, exhaustive_optimum, mean_of, random_codepoint, random_point};
use bregtrim_core::trimmed::{self, lloyd_fit};
use bregtrim_core::{Dataset, Divergence, TrimConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_data(div: &Divergence, n: usize, dim: usize, interior: bool, rng: &mut ChaCha8Rng) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            if interior {
                random_codepoint(div, dim, rng)
            } else {
                random_point(div, dim, rng)
            }
        })
        .collect();
    Dataset::from_rows(&rows).unwrap()
}

fn monotone_descent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut fits, mut steps) = (0, 0);
    while fits < 500 {
        let dim = rng.random_range(1..=3);
        for (name, div) in all_families(dim, &mut rng) {
            let n = rng.random_range(10..80);
            let k = rng.random_range(1..=4.min(n));
            let q = rng.random_range(k..=n);
            let data = random_data(&div, n, dim, false, &mut rng);
            let config = TrimConfig::new(k, q).with_seed(rng.random());
            let Ok(init) = trimmed::initial_codebook(&div, &data, k, config.seed, 0) else {
                continue;
            };
            let Ok(fit) = lloyd_fit(&div, &data, &config, &init) else {
                continue;
            };
            for w in fit.cost_trace.windows(2) {
                ensure(w[1] <= w[0] + 1e-9 * w[0].max(1.0), || {
                    format!("{name}: cost rose from {} to {}", w[0], w[1])
                })?;
                steps += 1;
            }
            fits += 1;
        }
    }
    Ok(format!("{fits} fits, {steps} iterations"))
}

fn bias_variance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst = 0.0f64;
    let mut families = 0;
    for dim in 1..=3 {
        for (name, div) in all_families(dim, &mut rng) {
            let mut checked = 0;
            while checked < 100 {
                let n = rng.random_range(2..30);
                let data = random_data(&div, n, dim, false, &mut rng);
                let all: Vec<usize> = (0..n).collect();
                let mean = mean_of(&data, &all);
                if div.check_codepoint(&mean).is_err() {
                    continue;
                }
                let c = random_codepoint(&div, dim, &mut rng);
                let left: f64 = data.rows().map(|x| div.evaluate(x, &c).unwrap()).sum();
                let spread: f64 = data.rows().map(|x| div.evaluate(x, &mean).unwrap()).sum();
                let right = spread + n as f64 * div.evaluate(&mean, &c).unwrap();
                let rel = (left - right).abs() / left.abs().max(1e-300);
                ensure(rel <= 1e-8, || format!("{name} (d={dim}): {left} vs {right}"))?;
                worst = worst.max(rel);
                checked += 1;
            }
            families += 1;
        }
    }
    Ok(format!("{families} family/dimension pairs x 100, worst relative error {worst:.1e}"))
}

fn brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut instances = 0u64;
    let mut worst = 0.0f64;
    while instances < 50 {
        let dim = rng.random_range(1..=3);
        for (name, div) in all_families(dim, &mut rng) {
            if instances == 50 {
                break;
            }
            let n = rng.random_range(3..=8);
            let k = rng.random_range(1..=2);
            let q = rng.random_range(k..=n);
            let data = random_data(&div, n, dim, true, &mut rng);
            let fit = trimmed::fit(&div, &data, &TrimConfig::new(k, q).with_seed(instances))
                .map_err(|e| format!("{name}: {e}"))?;
            let oracle = exhaustive_optimum(&div, &data, k, q);
            let gap = (fit.cost - oracle).abs() / oracle.max(1.0);
            ensure(gap <= 1e-10, || {
                format!("{name} n={n} k={k} q={q}: fit {} oracle {oracle}", fit.cost)
            })?;
            worst = worst.max(gap);
            instances += 1;
        }
    }
    Ok(format!("{instances} instances, worst gap {worst:.1e}"))
}

fn check_lemma2(curve: &CostCurve, what: &str) -> Result<(), String> {
    let avgs = curve.kept_averages();
    for w in avgs.windows(2) {
        ensure(w[1].1 >= w[0].1 - 1e-12 * w[0].1.abs().max(1.0), || {
            format!("{what} k={}: average {} at q={} drops to {} at q={}", curve.k, w[0].1, w[0].0, w[1].1, w[1].0)
        })?;
    }
    Ok(())
}

fn trim_monotonicity() -> Outcome {
    let mut curves = 0;
    for (preset, div) in [
        ("gaussian,small", "gaussian:1"),
        ("poisson,small", "poisson"),
        ("gamma,small", "gamma:40"),
        ("binomial,small", "binomial:100"),
        ("cauchy,small", "sqeuclidean"),
        ("heterogeneous,small", "sqeuclidean"),
    ] {
        for seed in 0..2 {
            let data = datagen::sample(&datagen::preset(preset).unwrap().with_seed(seed)).unwrap();
            let div = bregtrim::io::parse_divergence(div).unwrap();
            let config = TrimConfig::new(1, 1).with_seed(seed).with_starts(5);
            let report = select_k_q(&div, &data, &[1, 2, 3, 4], None, &config).map_err(|e| e.to_string())?;
            for curve in &report.curves {
                check_lemma2(curve, preset)?;
                curves += 1;
            }
        }
    }
    Ok(format!("{curves} cost curves"))
}

fn divergence_correctness() -> Outcome {
    use std::f64::consts::{E, LN_2};
    let cases = [
        ("poisson", Divergence::POISSON, 2.0, 1.0, 2.0 * LN_2 - 1.0),
        ("gamma:1", Divergence::gamma(1.0).unwrap(), 2.0, 1.0, 1.0 - LN_2),
        ("binomial:2", Divergence::binomial(2.0).unwrap(), 2.0, 1.0, 2.0 * LN_2),
        ("exp", Divergence::EXPONENTIAL_LOSS, 1.0, 0.0, E - 2.0),
    ];
    for (name, div, x, y, want) in cases {
        let got = div.evaluate(&[x], &[y]).map_err(|e| e.to_string())?;
        ensure((got - want).abs() <= 1e-12, || format!("{name}: d({x},{y}) = {got}, expected {want}"))?;
    }
    let dim = 3;
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut pairs = 0;
    for (name, div) in all_families(dim, &mut rng) {
        for _ in 0..1000 {
            let x = random_point(&div, dim, &mut rng);
            let y = random_codepoint(&div, dim, &mut rng);
            let grad = div.gradient_phi(&y).unwrap();
            let inner: f64 = grad.iter().zip(x.iter().zip(&y)).map(|(g, (a, b))| g * (a - b)).sum();
            let (px, py) = (div.phi(&x).unwrap(), div.phi(&y).unwrap());
            let closed = div.evaluate(&x, &y).unwrap();
            let scale = px.abs() + py.abs() + inner.abs();
            ensure((px - py - inner - closed).abs() <= 1e-9 * scale.max(closed.abs()).max(1.0), || {
                format!("{name}: definition mismatch at x={x:?} y={y:?}")
            })?;
            ensure(closed >= -1e-12, || format!("{name}: negative divergence {closed}"))?;
            pairs += 1;
        }
        for _ in 0..50 {
            let y = random_codepoint(&div, dim, &mut rng);
            let grad = div.gradient_phi(&y).unwrap();
            let simplex = matches!(div, Divergence::KullbackLeiblerSimplex);
            for i in usize::from(simplex)..dim {
                let mut v = vec![0.0; dim];
                v[i] = 1.0;
                if simplex {
                    v[0] = -1.0;
                }
                let plus: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a + h * b).collect();
                let minus: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a - h * b).collect();
                let fd = (div.phi(&plus).unwrap() - div.phi(&minus).unwrap()) / (2.0 * h);
                let exact: f64 = grad.iter().zip(&v).map(|(g, b)| g * b).sum();
                ensure((fd - exact).abs() <= 1e-4 * exact.abs().max(1.0), || {
                    format!("{name}: gradient {exact} vs finite difference {fd} at {y:?}")
                })?;
            }
        }
    }
    Ok(format!("4 tabulated values, {pairs} definition pairs, gradients for every family"))
}

fn nmi_comparison() -> Outcome {
    let presets = ["poisson,small", "gamma,small", "binomial,small"];
    let report = run_comparison(&ComparisonConfig::new(&presets, 3, 110)).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for (preset, matching) in presets.iter().zip(["poisson", "gamma:40", "binomial:100"]) {
        let median = |div: &str| -> Result<f64, String> {
            let cell = report.cell(preset, div).ok_or(format!("no cell {preset}/{div}"))?;
            cell.quantiles.map(|q| q.median).ok_or(format!("{preset}/{div}: every fit failed"))
        };
        let (m, e) = (median(matching)?, median("sqeuclidean")?);
        lines.push(format!("{preset} {matching} {m:.4} vs sqeuclidean {e:.4}"));
        if m < e {
            failed.push(preset);
        }
    }
    let summary = lines.join("; ");
    ensure(failed.is_empty(), || format!("matching median below sqeuclidean: {summary}"))?;
    Ok(format!("R=100: {summary}"))
}

fn selection_range() -> Outcome {
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..20 {
        let report = run_selection_demo("gaussian,small", &[1, 2, 3, 4, 5], None, seed).map_err(|e| e.to_string())?;
        for curve in &report.curves {
            check_lemma2(curve, "gaussian,small")?;
        }
        if report.top(3).iter().any(|c| c.k == 3 && (100..=115).contains(&c.q)) {
            hits += 1;
        } else {
            let top: Vec<(usize, usize)> = report.top(3).iter().map(|c| (c.k, c.q)).collect();
            misses.push(format!("seed {seed}: {top:?}"));
        }
    }
    ensure(hits >= 16, || format!("{hits}/20 seeds; misses {}", misses.join(", ")))?;
    Ok(format!("{hits}/20 seeds with k=3, q in [100, 115] in the top 3"))
}

fn breakdown_dichotomy() -> Outcome {
    let oracle_ok = |sweep: &bregtrim::experiments::BreakdownSweep| -> Result<(), String> {
        for r in &sweep.rows {
            let oracle = three_atom_oracle(sweep.atoms, r.big_n, sweep.q);
            ensure((r.cost - oracle).abs() <= 1e-10 * oracle.max(1.0), || {
                format!("N={}: fit cost {} but oracle {oracle}", r.big_n, r.cost)
            })?;
        }
        Ok(())
    };
    let err = |e: bregtrim::Error| e.to_string();

    let a = run_breakdown(&BreakdownConfig { p: 0.4, h: 0.9, gamma: 0.15, n: 1000 }, &[10.0, 100.0, 1000.0])
        .map_err(err)?;
    oracle_ok(&a)?;
    let mags = a.magnitudes();
    ensure(mags.windows(2).all(|w| w[1] > w[0]) && mags[2] > 500.0, || {
        format!("(a) magnitudes {mags:?}")
    })?;

    let n_values = [10.0, 100.0, 1000.0];
    let b = run_breakdown(&BreakdownConfig { p: 0.4, h: 0.7, gamma: 0.25, n: 1000 }, &n_values).map_err(err)?;
    oracle_ok(&b)?;
    for r in &b.rows {
        let c = r.codebook;
        ensure((c[0] + 1.0).abs() <= 0.05 && (c[1] - r.big_n).abs() <= 0.05, || {
            format!("(b) N={}: codebook {c:?}", r.big_n)
        })?;
    }

    for h in [0.7, 0.9] {
        let c0 = run_breakdown(&BreakdownConfig { p: 0.4, h, gamma: 0.0, n: 1000 }, &n_values).map_err(err)?;
        oracle_ok(&c0)?;
        for r in &c0.rows {
            let c = r.codebook;
            ensure((c[0] + 1.0).abs() <= 0.05 && (c[1] - 1.0).abs() <= 0.05, || {
                format!("(c) h={h}: codebook {c:?}")
            })?;
        }
    }
    Ok(format!(
        "(a) magnitudes {mags:?}; (b) codebook (-1, N); (c) codebook (-1, 1); all match the oracle"
    ))
}

fn nmi_metric() -> Outcome {
    let one = nmi(&[1, 1, 2, 2, 0, 0], &[1, 1, 2, 2, 0, 0]).unwrap();
    let indep = nmi(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap();
    let constant = nmi(&[1, 1, 1, 1], &[1, 2, 1, 2]).unwrap();
    ensure((one - 1.0).abs() <= 1e-12 && indep.abs() <= 1e-12 && constant.abs() <= 1e-12, || {
        format!("worked examples gave {one}, {indep}, {constant}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    for _ in 0..5000 {
        let n = rng.random_range(1..50);
        let (ka, kb) = (rng.random_range(1..6), rng.random_range(1..6));
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let v = nmi(&a, &b).unwrap();
        ensure((0.0..=1.0 + 1e-12).contains(&v), || format!("out of range: {v}"))?;
        ensure(v == nmi(&b, &a).unwrap(), || format!("asymmetric on {a:?} / {b:?}"))?;
        let mut perm: Vec<usize> = (0..ka).collect();
        perm.shuffle(&mut rng);
        let relabelled: Vec<usize> = a.iter().map(|&l| perm[l]).collect();
        let w = nmi(&relabelled, &b).unwrap();
        ensure((v - w).abs() <= 1e-12, || format!("relabelling changed {v} to {w}"))?;
    }
    Ok("worked examples, 5000 random pairs for range, symmetry and relabelling".into())
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bregtrim"))
        .current_dir(dir)
        .env("BREGTRIM_THREADS", threads)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("bregtrim {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let commands: [&[&str]; 5] = [
        &["generate", "--preset", "poisson,small", "--seed", "7", "--out", "data.csv"],
        &["fit", "--in", "data.csv", "--divergence", "poisson", "--k", "3", "--q", "110", "--seed", "7", "--out", "fit.json"],
        &["sweep", "--in", "data.csv", "--divergence", "poisson", "--k-grid", "2..4", "--q-grid", "90..120",
          "--seed", "7", "--starts", "4", "--out-curves", "curves.csv", "--out-svg", "curves.svg"],
        &["breakdown", "--p", "0.4", "--h", "0.9", "--gamma", "0.15", "--N-list", "10,100,1000", "--out", "breakdown.json"],
        &["compare", "--preset", "gamma,small", "--replications", "4", "--seed", "7",
          "--out", "compare.json", "--out-csv", "compare.csv"],
    ];
    // the two runs also differ in thread count, which must not matter
    for (dir, threads) in dirs.iter().zip(["1", "4"]) {
        for args in commands {
            run_cli(dir.path(), threads, args)?;
        }
    }
    let files = ["data.csv", "fit.json", "curves.csv", "curves.svg", "breakdown.json", "compare.json", "compare.csv"];
    for f in files {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| format!("{f}: {e}"))?;
        ensure(a == b, || format!("{f} differs between runs"))?;
    }
    Ok(format!("{} output files byte-identical across reruns with 1 and 4 threads", files.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("monotone Lloyd descent", monotone_descent),
        ("bias-variance identity", bias_variance),
        ("brute-force equivalence", brute_force),
        ("trim monotonicity of cost curves", trim_monotonicity),
        ("divergence correctness", divergence_correctness),
        ("matching divergence vs trimmed k-means by NMI", nmi_comparison),
        ("parameter-selection range", selection_range),
        ("breakdown dichotomy", breakdown_dichotomy),
        ("NMI metric", nmi_metric),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let number = i + 1;
        if !only.is_empty() && !only.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {number}: PASS  {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {number}: FAIL  {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
