//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any criterion fails.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use citescale::altmodels::{compare_models, sample_model, AltModel, AltParams, Family, Verdict};
use citescale::dataset::CitationSample;
use citescale::gof::gof_test;
use citescale::powerlaw::{
    fit_alpha, fit_power_law, sample_power_law, DiscretePowerLaw, FitOptions, PowerLawFit,
};
use citescale::scaling::{fit_log_line, matthew_factor, scaling_fit, ScalingPoint};
use citescale::special::hurwitz_zeta;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn quick_fit(sample: &CitationSample, fixed: Option<u64>) -> PowerLawFit {
    fit_power_law(
        sample,
        &FitOptions {
            bootstrap_reps: 0,
            fixed_x_min: fixed,
            ..FitOptions::default()
        },
    )
    .expect("fit")
}

fn special_functions() -> Outcome {
    let start = Instant::now();
    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    let err0 = (hurwitz_zeta(2.0, 1.0).unwrap() - pi2_6).abs();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = rng.random_range(1.05..8.0);
        let q = rng.random_range(0.05..60.0);
        let lhs = hurwitz_zeta(s, q + 1.0).unwrap();
        let rhs = hurwitz_zeta(s, q).unwrap() - q.powf(-s);
        worst = worst.max((lhs - rhs).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        err0 < 1e-10 && worst < 1e-10 && elapsed < Duration::from_secs(1),
        format!("|zeta(2,1) - pi^2/6| = {err0:.1e}, worst shift error {worst:.1e}, {elapsed:.2?}"),
    )
}

fn estimator_recovery() -> Outcome {
    let start = Instant::now();
    let model = DiscretePowerLaw::new(1, 2.35).unwrap();
    let sample = sample_power_law(&model, 100_000, 2024).unwrap();
    let (alpha, _) = fit_alpha(&sample, 1).unwrap();
    let elapsed = start.elapsed();
    outcome(
        (alpha - 2.35).abs() <= 0.02 && elapsed < Duration::from_secs(10),
        format!("alpha = {alpha:.4}, {elapsed:.2?}"),
    )
}

// Independent likelihood: direct summation with an integral tail estimate.
fn brute_zeta(s: f64, q: u64) -> f64 {
    let terms = 4000u64;
    let mut sum = 0.0;
    for k in (q..q + terms).rev() {
        sum += (k as f64).powf(-s);
    }
    let m = (q + terms) as f64;
    sum + m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s) + s * m.powf(-s - 1.0) / 12.0
}

fn grid_mle(xs: &[u64], x_min: u64) -> f64 {
    let tail: Vec<u64> = xs.iter().copied().filter(|&x| x >= x_min).collect();
    let n = tail.len() as f64;
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    let ll = |a: f64| -a * sum_ln - n * brute_zeta(a, x_min).ln();
    let (mut best, mut best_ll) = (f64::NAN, f64::NEG_INFINITY);
    let mut a = 1.01;
    while a <= 6.0 {
        let v = ll(a);
        if v > best_ll {
            best = a;
            best_ll = v;
        }
        a += 1e-4;
    }
    best
}

fn oracle_equivalence() -> Outcome {
    let fixtures: [(&[u64], u64); 5] = [
        (&[1, 1, 1, 1, 2, 2, 3, 5, 8, 20], 1),
        (&[3, 3, 4, 4, 5, 7, 9, 12, 15, 30, 64, 200], 3),
        (
            &[
                1, 2, 2, 3, 3, 3, 4, 6, 10, 11, 13, 17, 25, 40, 41, 90, 100, 130, 400, 1000,
            ],
            1,
        ),
        (&[10, 10, 11, 12, 14, 20, 30, 55], 10),
        (&[2, 2, 2, 2, 2, 2, 3, 3, 3, 4, 5, 6, 9], 2),
    ];
    let mut worst: f64 = 0.0;
    for (xs, x_min) in fixtures {
        let sample = CitationSample::new("fixture", xs.to_vec()).unwrap();
        let (alpha, _) = fit_alpha(&sample, x_min).unwrap();
        worst = worst.max((alpha - grid_mle(xs, x_min)).abs());
    }
    outcome(
        worst <= 2e-4,
        format!("largest |MLE - grid| = {worst:.2e} over 5 fixtures"),
    )
}

fn spliced(seed: u64) -> CitationSample {
    let n = 50_000;
    let n_noise = n / 4;
    let tail_model = DiscretePowerLaw::new(10, 2.5).unwrap();
    let tail = sample_power_law(&tail_model, n - n_noise, seed).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts: Vec<u64> = (0..n_noise).map(|_| rng.random_range(1..10)).collect();
    counts.extend_from_slice(tail.counts());
    CitationSample::new("spliced", counts).unwrap()
}

fn x_min_scan() -> Outcome {
    let start = Instant::now();
    let mut hits = 0;
    let mut found = Vec::new();
    for seed in 0..50 {
        let fit = quick_fit(&spliced(seed), None);
        found.push(fit.x_min);
        if (5..=20).contains(&fit.x_min) {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    found.sort_unstable();
    outcome(
        hits >= 45 && elapsed < Duration::from_secs(120),
        format!(
            "{hits}/50 seeds with x_min in [5, 20] (range {}..{}), {elapsed:.2?}",
            found[0], found[49]
        ),
    )
}

fn gof_calibration() -> Outcome {
    let start = Instant::now();
    let model = DiscretePowerLaw::new(1, 2.5).unwrap();
    let datasets = 200;
    let mut ps: Vec<f64> = (0..datasets)
        .map(|i| {
            let sample = sample_power_law(&model, 2000, 10_000 + i).unwrap();
            let fit = quick_fit(&sample, None);
            gof_test(&sample, &fit, 500, 77 + i).unwrap().p_value
        })
        .collect();
    let elapsed = start.elapsed();
    let rejected = ps.iter().filter(|&&p| p <= 0.10).count() as f64 / datasets as f64;
    ps.sort_by(f64::total_cmp);
    let m = ps.len() as f64;
    let ks = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| (p - i as f64 / m).abs().max(((i + 1) as f64 / m - p).abs()))
        .fold(0.0, f64::max);
    outcome(
        (0.04..=0.18).contains(&rejected) && ks <= 0.10 && elapsed < Duration::from_secs(1800),
        format!("rejection rate {rejected:.3}, KS to uniform {ks:.3}, {elapsed:.2?}"),
    )
}

fn model_selection() -> Outcome {
    let n = 10_000;
    let mut notes = String::new();

    let exp = AltModel::new(AltParams::Exponential { lambda: 0.1 }, 1).unwrap();
    let exp_data = sample_model(exp, n, 5).unwrap();
    let exp_fit = quick_fit(&exp_data, Some(1));
    let c = &compare_models(&exp_data, &exp_fit, &[Family::Exponential]).unwrap()[0];
    let exp_ok = c.lr < 0.0 && c.p < 0.05;
    let _ = write!(notes, "exponential data lr={:.1} p={:.1e}; ", c.lr, c.p);

    let pl = DiscretePowerLaw::new(1, 2.35).unwrap();
    let pl_data = sample_power_law(&pl, n, 6).unwrap();
    let pl_fit = quick_fit(&pl_data, Some(1));
    let c = &compare_models(&pl_data, &pl_fit, &[Family::Exponential]).unwrap()[0];
    let pl_ok = c.lr > 0.0;
    let _ = write!(notes, "power-law data vs exponential lr={:.1}; ", c.lr);

    let cut = AltModel::new(
        AltParams::PowerLawCutoff {
            alpha: 2.0,
            lambda: 0.01,
        },
        10,
    )
    .unwrap();
    let cut_data = sample_model(cut, n, 7).unwrap();
    let cut_fit = quick_fit(&cut_data, Some(10));
    let c = &compare_models(&cut_data, &cut_fit, &[Family::PowerLawCutoff]).unwrap()[0];
    let cut_ok = c.verdict == Verdict::AlternativeFavored;
    let _ = write!(
        notes,
        "cutoff data lr={:.1} p={:.1e} {}",
        c.lr,
        c.p,
        c.verdict.name()
    );

    outcome(exp_ok && pl_ok && cut_ok, notes)
}

fn nesting() -> Outcome {
    let mut held = 0;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..50u64 {
        let sample = if seed % 2 == 0 {
            sample_power_law(
                &DiscretePowerLaw::new(1, 2.2 + 0.01 * seed as f64).unwrap(),
                3000,
                seed,
            )
            .unwrap()
        } else {
            let m = AltModel::new(
                AltParams::PowerLawCutoff {
                    alpha: 1.8,
                    lambda: 0.002 * seed as f64,
                },
                1,
            )
            .unwrap();
            sample_model(m, 3000, seed).unwrap()
        };
        let fit = quick_fit(&sample, None);
        let c = &compare_models(&sample, &fit, &[Family::PowerLawCutoff]).unwrap()[0];
        worst = worst.max(c.lr);
        if c.lr <= 0.0 && c.fit.log_likelihood >= fit.log_likelihood {
            held += 1;
        }
    }
    outcome(
        held == 50,
        format!("{held}/50 samples with cutoff LL >= power-law LL (max lr {worst:.2e})"),
    )
}

fn scaling_exactness() -> Outcome {
    let points: Vec<ScalingPoint> = (0..33)
        .map(|i| {
            let size = 40.0 + 113.0 * i as f64;
            ScalingPoint::new(format!("s{i}"), size, 2.5 * size.powf(1.20)).unwrap()
        })
        .collect();
    let fit = scaling_fit(&points).unwrap();
    let b10 = fit_log_line(&points, 10.0).unwrap();
    let be = fit_log_line(&points, std::f64::consts::E).unwrap();
    let d_exp = (fit.exponent - 1.20).abs();
    let d_base = (b10.slope - be.slope).abs().max((b10.r2 - be.r2).abs());
    outcome(
        d_exp <= 1e-12 && (fit.r2 - 1.0).abs() <= 1e-12 && d_base <= 1e-12,
        format!(
            "|n - 1.20| = {d_exp:.1e}, R2 = {}, base difference {d_base:.1e}",
            fit.r2
        ),
    )
}

fn matthew() -> Outcome {
    let a = format!("{:.2}", matthew_factor(1.20));
    let b = format!("{:.2}", matthew_factor(0.85));
    outcome(
        a == "2.30" && b == "1.80",
        format!("2^1.20 -> {a}, 2^0.85 -> {b}"),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_citescale")
}

fn run_in(dir: &Path, args: &[&str]) -> bool {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

const EXPORT_HEADER: &str = "PT\tAU\tTI\tSO\tDT\tTC\tPY\tUT";

fn ingestion() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let journals = [
        "Alpha Letters",
        "Beta & Gamma",
        "Delta Review",
        "Unlisted Monthly",
    ];
    fs::write(
        dir.path().join("map.csv"),
        "journal,field,subfield\nalpha letters,F1,S1\nBeta and Gamma,F1,S2\nDELTA REVIEW,F2,S3\n",
    )
    .unwrap();

    let mut rng = StdRng::seed_from_u64(99);
    let mut text = String::from(EXPORT_HEADER);
    let mut ids = std::collections::HashSet::new();
    let mut expected_mapped = 0u64;
    for i in 0..1000 {
        let id = if i % 37 == 5 && i > 0 {
            format!("WOS:{}", i - 1)
        } else {
            format!("WOS:{i}")
        };
        let journal = journals[rng.random_range(0..journals.len())];
        let doc = if i % 23 == 0 {
            "Book Review"
        } else {
            "Article"
        };
        let n_auth = rng.random_range(1..5);
        let authors: Vec<String> = (0..n_auth).map(|a| format!("Author{a}, X")).collect();
        let _ = write!(
            text,
            "\nJ\t{}\tTitle {i}\t{journal}\t{doc}\t{}\t2006\t{id}",
            authors.join("; "),
            rng.random_range(0..300)
        );
        if doc == "Article" && ids.insert(id) && journal != "Unlisted Monthly" {
            expected_mapped += 1;
        }
    }
    fs::write(dir.path().join("export.txt"), text).unwrap();
    let ok = run_in(
        dir.path(),
        &[
            "ingest",
            "--export",
            "export.txt",
            "--map",
            "map.csv",
            "--out",
            "out",
        ],
    );
    let aggs = fs::read(dir.path().join("out/aggregates.tsv")).unwrap_or_default();
    let total: u64 = citescale::dataset::read_aggregates(aggs.as_slice())
        .map(|v| v.iter().map(|a| a.papers_total).sum())
        .unwrap_or(0);
    let conserved = ok && total == expected_mapped;

    // 7263 collaborative and 996 single-author papers holding 152570 and 12333 citations.
    let dir2 = tempfile::tempdir().unwrap();
    fs::write(
        dir2.path().join("map.csv"),
        "journal,field,subfield\nJ,F,S\n",
    )
    .unwrap();
    let mut text = String::from(EXPORT_HEADER);
    for i in 0..7263u64 {
        let _ = write!(
            text,
            "\nJ\tA; B\tT\tJ\tArticle\t{}\t2006\tc{i}",
            21 + u64::from(i < 47)
        );
    }
    for i in 0..996u64 {
        let _ = write!(
            text,
            "\nJ\tA\tT\tJ\tArticle\t{}\t2006\ts{i}",
            12 + u64::from(i < 381)
        );
    }
    fs::write(dir2.path().join("export.txt"), text).unwrap();
    let ok2 = run_in(
        dir2.path(),
        &[
            "ingest",
            "--export",
            "export.txt",
            "--map",
            "map.csv",
            "--out",
            "out",
        ],
    );
    let doc: serde_json::Value = fs::read(dir2.path().join("out/ingest.json"))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
        .unwrap_or_default();
    let pct = |side: &str, key: &str| {
        doc["result"][side][key]
            .as_f64()
            .map(citescale::dataset::format_percent)
            .unwrap_or_default()
    };
    let shares = [
        pct("collaboration", "share_papers"),
        pct("single", "share_papers"),
        pct("collaboration", "share_citations"),
        pct("single", "share_citations"),
    ];
    let shares_ok = ok2 && shares == ["88%", "12%", "93%", "7%"];
    outcome(
        conserved && shares_ok,
        format!(
            "aggregated papers {total} vs mapped records {expected_mapped}; shares {}",
            shares.join("/")
        ),
    )
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = walk(dir, dir);
    files.sort();
    files
}

fn walk(root: &Path, dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(root, &path));
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.push((rel, fs::read(&path).unwrap()));
        }
    }
    out
}

fn determinism() -> Outcome {
    let runs: Vec<Vec<(String, Vec<u8>)>> = ["1", "2", "8"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let sim = run_in(
                dir.path(),
                &[
                    "--threads",
                    threads,
                    "simulate",
                    "--family",
                    "powerlaw",
                    "--alpha",
                    "2.35",
                    "--xmin",
                    "1",
                    "--n",
                    "3000",
                    "--seed",
                    "7",
                    "--out",
                    "counts.txt",
                ],
            );
            let fit = run_in(
                dir.path(),
                &[
                    "fit",
                    "--input",
                    "counts.txt",
                    "--out",
                    "res",
                    "--gof",
                    "--sims",
                    "200",
                    "--bootstrap",
                    "100",
                    "--seed",
                    "42",
                    "--threads",
                    threads,
                ],
            );
            if sim && fit {
                outputs(dir.path())
            } else {
                Vec::new()
            }
        })
        .collect();
    let identical = !runs[0].is_empty() && runs.iter().all(|r| *r == runs[0]);
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    outcome(
        identical,
        format!("1/2/8 threads compared over {}", names.join(", ")),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("special-function accuracy", special_functions),
        ("estimator recovery", estimator_recovery),
        ("oracle equivalence", oracle_equivalence),
        ("x_min scan", x_min_scan),
        ("goodness-of-fit calibration", gof_calibration),
        ("model selection power", model_selection),
        ("nesting invariant", nesting),
        ("scaling exactness", scaling_exactness),
        ("matthew factors", matthew),
        ("ingestion conservation", ingestion),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<28} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
