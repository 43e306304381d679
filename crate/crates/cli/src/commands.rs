use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use citescale::altmodels::{
    compare_models, sample_model, write_comparison_tsv, AltModel, AltParams, Family,
    ModelComparison,
};
use citescale::dataset::{
    partition_shares, read_aggregates, summarize_partition, write_aggregates, CitationSample,
    SummaryStats,
};
use citescale::gof::{gof_test, GofResult};
use citescale::ingest::{
    build_aggregates, mode_counts, parse_export, write_rejections, ClassificationMap, ColumnNames,
    Omission, Rejection,
};
use citescale::powerlaw::{
    ccdf_rows, fit_power_law, sample_power_law, write_ccdf_csv, DiscretePowerLaw, FitOptions,
    PowerLawFit,
};
use citescale::scaling::{
    matthew_factor, points_from_aggregates, scaling_fit, scatter_rows, write_scatter_csv,
    Exclusion, Mode, ScalingFit,
};

use crate::args::{
    CompareArgs, FitArgs, GofArgs, IngestArgs, ScalingArgs, SimFamily, SimulateArgs,
};
use crate::document::{
    read_document, read_input, write_json, InputDigest, Provenance, TOOL, VERSION,
};

pub const FIT_DOC: &str = "fit.json";
pub const GOF_DOC: &str = "gof.json";
pub const COMPARISON_DOC: &str = "comparison.json";
pub const SCALING_DOC: &str = "scaling.json";
pub const INGEST_DOC: &str = "ingest.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_counts(path: &Path) -> Result<(CitationSample, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sample = CitationSample::read_counts(label, bytes.as_slice())
        .with_context(|| format!("cannot read counts from {}", path.display()))?;
    Ok((sample, digest))
}

fn load_fit(path: &Path) -> Result<(PowerLawFit, InputDigest)> {
    let (bytes, digest) = read_input(path)?;
    let doc = read_document::<PowerLawFit>(&bytes, path)?;
    Ok((doc.result, digest))
}

fn run_gof(
    sample: &CitationSample,
    fit: &PowerLawFit,
    sims: usize,
    seed: u64,
) -> Result<GofResult> {
    eprintln!("{TOOL}: running {sims} goodness-of-fit simulations");
    Ok(gof_test(sample, fit, sims, seed)?)
}

fn run_compare(
    sample: &CitationSample,
    fit: &PowerLawFit,
    families: &[Family],
) -> Result<Vec<ModelComparison>> {
    eprintln!("{TOOL}: comparing against {} alternatives", families.len());
    Ok(compare_models(sample, fit, families)?)
}

fn write_comparison(
    out: &Path,
    prov: &Provenance,
    inputs: Vec<InputDigest>,
    rows: Vec<ModelComparison>,
) -> Result<()> {
    let mut tsv = create_file(&out.join("comparison.tsv"))?;
    write_comparison_tsv(&rows, &mut tsv)?;
    tsv.flush()?;
    write_json(&out.join(COMPARISON_DOC), &prov.wrap(inputs, rows))
}

pub fn fit(args: &FitArgs, prov: &Provenance) -> Result<()> {
    let sims = args.gof.then(|| args.sims.resolve()).transpose()?;
    let (sample, digest) = load_counts(&args.input)?;
    create_dir(&args.out)?;
    eprintln!(
        "{TOOL}: fitting {} observations with {} bootstrap replicates",
        sample.len(),
        args.bootstrap
    );
    let options = FitOptions {
        min_tail: args.min_tail,
        bootstrap_reps: args.bootstrap,
        seed: prov.seed,
        fixed_x_min: args.xmin,
    };
    let fit = fit_power_law(&sample, &options)?;

    let mut ccdf = create_file(&args.out.join("ccdf.csv"))?;
    write_ccdf_csv(&ccdf_rows(&sample, &fit)?, &mut ccdf)?;
    ccdf.flush()?;
    write_json(
        &args.out.join(FIT_DOC),
        &prov.wrap(vec![digest.clone()], fit.clone()),
    )?;

    if let Some(sims) = sims {
        let result = run_gof(&sample, &fit, sims, prov.seed)?;
        write_json(
            &args.out.join(GOF_DOC),
            &prov.wrap(vec![digest.clone()], result),
        )?;
    }
    if args.compare {
        let rows = run_compare(&sample, &fit, &Family::ALL)?;
        write_comparison(&args.out, prov, vec![digest], rows)?;
    }
    Ok(())
}

pub fn gof(args: &GofArgs, prov: &Provenance) -> Result<()> {
    let sims = args.sims.resolve()?;
    let (sample, counts_digest) = load_counts(&args.input)?;
    let (fit, fit_digest) = load_fit(&args.fit)?;
    create_dir(&args.out)?;
    let result = run_gof(&sample, &fit, sims, prov.seed)?;
    write_json(
        &args.out.join(GOF_DOC),
        &prov.wrap(vec![counts_digest, fit_digest], result),
    )
}

pub fn compare(args: &CompareArgs, prov: &Provenance) -> Result<()> {
    let (sample, counts_digest) = load_counts(&args.input)?;
    let (fit, fit_digest) = load_fit(&args.fit)?;
    create_dir(&args.out)?;
    let rows = run_compare(&sample, &fit, &args.families)?;
    write_comparison(&args.out, prov, vec![counts_digest, fit_digest], rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeRegression {
    pub mode: Mode,
    pub fit: ScalingFit,
    pub matthew_factor: f64,
    pub excluded: Vec<Exclusion>,
}

pub fn scaling(args: &ScalingArgs, prov: &Provenance) -> Result<Vec<ModeRegression>> {
    let (bytes, digest) = read_input(&args.input)?;
    let aggregates = read_aggregates(bytes.as_slice())
        .with_context(|| format!("cannot read aggregates from {}", args.input.display()))?;
    create_dir(&args.out)?;
    let mut regressions = Vec::new();
    for &mode in &args.mode {
        let (points, excluded) = points_from_aggregates(&aggregates, mode);
        for e in &excluded {
            eprintln!(
                "{TOOL}: {mode}: excluded subfield `{}` ({})",
                e.subfield_id, e.reason
            );
        }
        let fit = scaling_fit(&points).with_context(|| format!("mode `{mode}`"))?;
        let mut csv = create_file(&args.out.join(format!("scatter_{mode}.csv")))?;
        write_scatter_csv(&scatter_rows(&points, &fit), &mut csv)?;
        csv.flush()?;
        regressions.push(ModeRegression {
            mode,
            matthew_factor: matthew_factor(fit.exponent),
            fit,
            excluded,
        });
    }
    write_json(
        &args.out.join(SCALING_DOC),
        &prov.wrap(vec![digest], regressions.clone()),
    )?;
    Ok(regressions)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    pub outside_years: usize,
    pub mapped: u64,
    pub unmapped: usize,
    pub anonymous: usize,
    pub subfields: usize,
    pub collaboration: Option<SummaryStats>,
    pub single: Option<SummaryStats>,
    /// Citations to collaborative papers per citation to single-author papers.
    pub citation_ratio: Option<f64>,
}

pub fn ingest(args: &IngestArgs, prov: &Provenance) -> Result<()> {
    let names = ColumnNames {
        authors: args.col_authors.clone(),
        title: args.col_title.clone(),
        journal: args.col_journal.clone(),
        doc_type: args.col_doc_type.clone(),
        times_cited: args.col_times_cited.clone(),
        year: args.col_year.clone(),
        record_id: args.col_id.clone(),
    };
    let (export_bytes, export_digest) = read_input(&args.export)?;
    let (map_bytes, map_digest) = read_input(&args.map)?;
    let parsed = parse_export(export_bytes.as_slice(), &names)
        .with_context(|| format!("cannot parse {}", args.export.display()))?;
    let map = ClassificationMap::read_csv(map_bytes.as_slice())
        .with_context(|| format!("cannot read {}", args.map.display()))?;
    let rows_accepted = parsed.records.len();

    let (records, rows): (Vec<_>, Vec<_>) = parsed
        .records
        .into_iter()
        .zip(parsed.rows)
        .filter(|(r, _)| args.years.is_none_or(|y| y.contains(r.year)))
        .unzip();
    let outside_years = rows_accepted - records.len();
    let report = build_aggregates(&records, &map)?;

    let mut rejections = parsed.rejections;
    for &(i, why) in &report.omitted {
        let reason = match why {
            Omission::UnmappedJournal => {
                format!("journal `{}` not in classification map", records[i].journal)
            }
            Omission::Anonymous => format!("anonymous record `{}`", records[i].record_id),
        };
        rejections.push(Rejection {
            row: rows[i],
            reason,
        });
    }
    rejections.sort_by_key(|r| r.row);

    create_dir(&args.out)?;
    let mut agg = create_file(&args.out.join("aggregates.tsv"))?;
    write_aggregates(&report.aggregates, &mut agg)?;
    agg.flush()?;
    let mut rej = create_file(&args.out.join("rejections.tsv"))?;
    write_rejections(&rejections, &mut rej)?;
    rej.flush()?;

    let mut by_mode = Vec::new();
    for mode in Mode::ALL {
        let counts = mode_counts(&records, &map, mode);
        let mut f = create_file(&args.out.join(format!("counts_{mode}.txt")))?;
        for c in &counts {
            writeln!(f, "{c}")?;
        }
        f.flush()?;
        by_mode.push(counts);
    }
    let (collaboration, single, citation_ratio) = match (
        CitationSample::new("collaboration", by_mode[1].clone()),
        CitationSample::new("single", by_mode[2].clone()),
    ) {
        (Ok(c), Ok(s)) => {
            let (a, b) = summarize_partition(&c, &s);
            let ratio = partition_shares(&a, &b).ok().and_then(|p| p.ratio);
            (Some(a), Some(b), ratio)
        }
        _ => (None, None, None),
    };
    let count = |o: Omission| report.omitted.iter().filter(|(_, w)| *w == o).count();
    let summary = IngestSummary {
        rows_accepted,
        rows_rejected: rejections.len(),
        outside_years,
        mapped: report.mapped_records(),
        unmapped: count(Omission::UnmappedJournal),
        anonymous: count(Omission::Anonymous),
        subfields: report.aggregates.len(),
        collaboration,
        single,
        citation_ratio,
    };
    eprintln!(
        "{TOOL}: {} records mapped into {} subfields, {} rows rejected",
        summary.mapped, summary.subfields, summary.rows_rejected
    );
    write_json(
        &args.out.join(INGEST_DOC),
        &prov.wrap(vec![export_digest, map_digest], summary),
    )
}

fn require(value: Option<f64>, flag: &str, family: &str) -> Result<f64> {
    value.ok_or_else(|| anyhow!("--{flag} is required for family {family}"))
}

pub fn simulate(args: &SimulateArgs, prov: &Provenance) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let (sample, params) = match args.family {
        SimFamily::Powerlaw => {
            let alpha = require(args.alpha, "alpha", "powerlaw")?;
            let model = DiscretePowerLaw::new(args.xmin, alpha)?;
            (
                sample_power_law(&model, args.n, prov.seed)?,
                format!("alpha={alpha}"),
            )
        }
        family => {
            let (params, text) = match family {
                SimFamily::PowerlawCutoff => {
                    let alpha = require(args.alpha, "alpha", "powerlaw-cutoff")?;
                    let lambda = require(args.lambda, "lambda", "powerlaw-cutoff")?;
                    (
                        AltParams::PowerLawCutoff { alpha, lambda },
                        format!("alpha={alpha} lambda={lambda}"),
                    )
                }
                SimFamily::Lognormal => {
                    let mu = require(args.mu, "mu", "lognormal")?;
                    let sigma = require(args.sigma, "sigma", "lognormal")?;
                    (
                        AltParams::Lognormal { mu, sigma },
                        format!("mu={mu} sigma={sigma}"),
                    )
                }
                SimFamily::Exponential => {
                    let lambda = require(args.lambda, "lambda", "exponential")?;
                    (
                        AltParams::Exponential { lambda },
                        format!("lambda={lambda}"),
                    )
                }
                SimFamily::Powerlaw => unreachable!(),
            };
            let model = AltModel::new(params, args.xmin)?;
            (sample_model(model, args.n, prov.seed)?, text)
        }
    };
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let mut f = create_file(&args.out)?;
    writeln!(f, "# {TOOL} {VERSION}")?;
    writeln!(f, "# command: {}", prov.command)?;
    writeln!(f, "# family: {}", family_name(args.family))?;
    writeln!(f, "# params: x_min={} {params}", args.xmin)?;
    writeln!(f, "# seed: {}", prov.seed)?;
    writeln!(f, "# n: {}", args.n)?;
    sample.write_counts(&mut f)?;
    f.flush()?;
    Ok(())
}

fn family_name(f: SimFamily) -> &'static str {
    match f {
        SimFamily::Powerlaw => "powerlaw",
        SimFamily::PowerlawCutoff => "powerlaw-cutoff",
        SimFamily::Lognormal => "lognormal",
        SimFamily::Exponential => "exponential",
    }
}
