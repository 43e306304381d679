//! Plain-text tables rendered from result documents.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};

use citescale::altmodels::ModelComparison;
use citescale::dataset::{format_percent, SummaryStats};
use citescale::gof::GofResult;
use citescale::powerlaw::PowerLawFit;

use crate::commands::{
    IngestSummary, ModeRegression, COMPARISON_DOC, FIT_DOC, GOF_DOC, INGEST_DOC, SCALING_DOC,
};
use crate::document::{read_document, read_input};

pub fn fit_table(fit: &PowerLawFit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Power-law fit: {}", fit.label);
    let _ = writeln!(s, "  {:<8} {}", "n", fit.n);
    if fit.x_min_fixed {
        let _ = writeln!(s, "  {:<8} {} (fixed)", "x_min", fit.x_min);
    } else {
        let _ = writeln!(s, "  {:<8} {} ± {:.1}", "x_min", fit.x_min, fit.x_min_sd);
    }
    let _ = writeln!(s, "  {:<8} {:.2} ± {:.2}", "alpha", fit.alpha, fit.alpha_sd);
    let _ = writeln!(s, "  {:<8} {}", "n_tail", fit.n_tail);
    let _ = writeln!(s, "  {:<8} {:.4}", "KS", fit.ks);
    s
}

pub fn gof_table(g: &GofResult) -> String {
    let verdict = if g.ruled_out {
        "ruled out"
    } else {
        "plausible"
    };
    let mut s = format!(
        "Goodness of fit: p = {:.3} ({} of {} synthetic datasets at least as far",
        g.p_value,
        g.n_exceeding,
        g.n_sims - g.n_failed
    );
    if g.n_failed > 0 {
        let _ = write!(s, "; {} could not be refit", g.n_failed);
    }
    let _ = writeln!(s, "); power law {verdict}");
    s
}

pub fn comparison_table(rows: &[ModelComparison]) -> String {
    let mut s = format!(
        "{:<16} {:>10} {:>8}  {}\n",
        "Alternative", "LR", "p", "Verdict"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<16} {:>10.2} {:>8.3}  {}",
            r.alternative.name(),
            r.lr,
            r.p,
            r.verdict.name()
        );
    }
    s
}

pub fn scaling_table(rows: &[ModeRegression]) -> String {
    let mut s = format!(
        "{:<14} {:>6} {:>6} {:>6} {:>8} {:>9} {:>4} {:>6}\n",
        "Mode", "Alpha", "SD", "R2", "t", "p", "n", "2^n"
    );
    for r in rows {
        let t = r
            .fit
            .t_stat
            .map_or("inf".to_string(), |t| format!("{t:.2}"));
        let p = r
            .fit
            .p_value
            .map_or("n/a".to_string(), |p| format!("{p:.2e}"));
        let _ = writeln!(
            s,
            "{:<14} {:>6.2} {:>6.2} {:>6.2} {:>8} {:>9} {:>4} {:>6.2}",
            r.mode.name(),
            r.fit.exponent,
            r.fit.exponent_se,
            r.fit.r2,
            t,
            p,
            r.fit.n_points,
            r.matthew_factor
        );
    }
    s
}

fn partition_row(s: &mut String, name: &str, st: &SummaryStats) {
    let _ = writeln!(
        s,
        "{:<18} {:>10} {:>5} {:>12} {:>5} {:>8}",
        name,
        st.n_papers,
        format_percent(st.share_papers),
        st.n_citations,
        format_percent(st.share_citations),
        st.median_citations
    );
}

pub fn ingest_table(sum: &IngestSummary) -> String {
    let mut s = format!(
        "Ingest: {} records mapped into {} subfields ({} unmapped, {} anonymous, {} rows rejected)\n",
        sum.mapped, sum.subfields, sum.unmapped, sum.anonymous, sum.rows_rejected
    );
    if let (Some(c), Some(n)) = (&sum.collaboration, &sum.single) {
        let _ = writeln!(
            s,
            "{:<18} {:>10} {:>5} {:>12} {:>5} {:>8}",
            "", "Papers", "%", "Citations", "%", "Median"
        );
        partition_row(&mut s, "Collaboration", c);
        partition_row(&mut s, "No collaboration", n);
        if let Some(r) = sum.citation_ratio {
            let _ = writeln!(s, "Citation ratio collaboration / no collaboration: {r:.2}");
        }
    }
    s
}

/// Renders every document found in `dir`.
pub fn render_dir(dir: &Path) -> Result<String> {
    let mut out = String::new();
    let mut found = false;
    let load = |name: &str| -> Result<Option<Vec<u8>>> {
        let path = dir.join(name);
        if path.exists() {
            Ok(Some(read_input(&path)?.0))
        } else {
            Ok(None)
        }
    };
    if let Some(b) = load(INGEST_DOC)? {
        out += &ingest_table(&read_document::<IngestSummary>(&b, &dir.join(INGEST_DOC))?.result);
        found = true;
    }
    if let Some(b) = load(FIT_DOC)? {
        out += &fit_table(&read_document::<PowerLawFit>(&b, &dir.join(FIT_DOC))?.result);
        found = true;
    }
    if let Some(b) = load(GOF_DOC)? {
        out += &gof_table(&read_document::<GofResult>(&b, &dir.join(GOF_DOC))?.result);
        found = true;
    }
    if let Some(b) = load(COMPARISON_DOC)? {
        out += &comparison_table(
            &read_document::<Vec<ModelComparison>>(&b, &dir.join(COMPARISON_DOC))?.result,
        );
        found = true;
    }
    if let Some(b) = load(SCALING_DOC)? {
        out += &scaling_table(
            &read_document::<Vec<ModeRegression>>(&b, &dir.join(SCALING_DOC))?.result,
        );
        found = true;
    }
    if !found {
        bail!("no result documents in {}", dir.display());
    }
    Ok(out)
}
