//! Citation samples, subfield aggregates and the descriptive statistics built on them.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Per-paper citation counts with a label. Counts are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationSample {
    label: String,
    counts: Vec<u64>,
}

impl CitationSample {
    pub fn new(label: impl Into<String>, mut counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyDataset);
        }
        counts.sort_unstable();
        Ok(Self {
            label: label.into(),
            counts,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Sorted counts.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// Always false; samples cannot be empty.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.counts.last().expect("sample is nonempty")
    }

    /// Observations `x >= x_min`. Zeros never belong to a tail.
    pub fn tail(&self, x_min: u64) -> &[u64] {
        let start = self.counts.partition_point(|&c| c < x_min.max(1));
        &self.counts[start..]
    }

    /// Observations strictly below `x_min`, zeros included.
    pub fn below(&self, x_min: u64) -> &[u64] {
        let end = self.counts.partition_point(|&c| c < x_min);
        &self.counts[..end]
    }

    /// Parses the plain-text counts format: one nonnegative integer per line.
    ///
    /// Blank lines and lines starting with `#` are skipped; CRLF is accepted.
    pub fn read_counts(label: impl Into<String>, reader: impl BufRead) -> Result<Self> {
        let mut counts = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let value = trimmed.parse::<u64>().map_err(|e| Error::Parse {
                line: idx + 1,
                reason: format!("invalid citation count `{trimmed}`: {e}"),
            })?;
            counts.push(value);
        }
        Self::new(label, counts)
    }

    pub fn write_counts(&self, mut out: impl Write) -> Result<()> {
        for c in &self.counts {
            writeln!(out, "{c}")?;
        }
        Ok(())
    }
}

/// Paper and citation totals for one subfield, split by collaboration class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubfieldAggregate {
    #[serde(rename = "subfield")]
    pub subfield_id: String,
    #[serde(rename = "field")]
    pub field_id: String,
    pub papers_total: u64,
    pub papers_collab: u64,
    pub papers_single: u64,
    pub citations_total: u64,
    pub citations_collab: u64,
    pub citations_single: u64,
}

impl SubfieldAggregate {
    pub fn from_parts(
        subfield_id: impl Into<String>,
        field_id: impl Into<String>,
        (papers_collab, papers_single): (u64, u64),
        (citations_collab, citations_single): (u64, u64),
    ) -> Self {
        Self {
            subfield_id: subfield_id.into(),
            field_id: field_id.into(),
            papers_total: papers_collab + papers_single,
            papers_collab,
            papers_single,
            citations_total: citations_collab + citations_single,
            citations_collab,
            citations_single,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.papers_total != self.papers_collab + self.papers_single {
            return Err(invalid(
                "papers_total",
                format!(
                    "subfield `{}`: total does not equal collab + single",
                    self.subfield_id
                ),
            ));
        }
        if self.citations_total != self.citations_collab + self.citations_single {
            return Err(invalid(
                "citations_total",
                format!(
                    "subfield `{}`: total does not equal collab + single",
                    self.subfield_id
                ),
            ));
        }
        Ok(())
    }
}

/// Reads the aggregate TSV; every row is validated against the partition identities.
pub fn read_aggregates(reader: impl Read) -> Result<Vec<SubfieldAggregate>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(reader);
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize::<SubfieldAggregate>().enumerate() {
        let agg = row.map_err(|e| Error::Parse {
            line: idx + 2,
            reason: e.to_string(),
        })?;
        agg.validate()?;
        out.push(agg);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("aggregate table has no rows"));
    }
    Ok(out)
}

pub fn write_aggregates(aggregates: &[SubfieldAggregate], writer: impl Write) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(writer);
    for agg in aggregates {
        wtr.serialize(agg)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Descriptive statistics for one partition of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n_papers: u64,
    pub n_citations: u64,
    pub share_papers: f64,
    pub share_citations: f64,
    pub median_citations: f64,
}

/// Summary of a single sample; shares are relative to the sample itself (1.0).
pub fn summarize(sample: &CitationSample) -> SummaryStats {
    let counts = sample.counts();
    SummaryStats {
        n_papers: counts.len() as u64,
        n_citations: counts.iter().sum(),
        share_papers: 1.0,
        share_citations: 1.0,
        median_citations: median_sorted(counts),
    }
}

fn median_sorted(counts: &[u64]) -> f64 {
    let n = counts.len();
    if n % 2 == 1 {
        counts[n / 2] as f64
    } else {
        0.5 * (counts[n / 2 - 1] as f64 + counts[n / 2] as f64)
    }
}

/// Summaries of the collaboration / single-author partition with shares
/// relative to the combined corpus.
pub fn summarize_partition(
    collab: &CitationSample,
    single: &CitationSample,
) -> (SummaryStats, SummaryStats) {
    let mut a = summarize(collab);
    let mut b = summarize(single);
    (a.share_papers, b.share_papers) = split_shares(a.n_papers, b.n_papers);
    let total_citations = a.n_citations + b.n_citations;
    if total_citations == 0 {
        a.share_citations = f64::NAN;
        b.share_citations = f64::NAN;
    } else {
        (a.share_citations, b.share_citations) = split_shares(a.n_citations, b.n_citations);
    }
    (a, b)
}

// Second share is the complement so the pair sums to exactly 1.
fn split_shares(a: u64, b: u64) -> (f64, f64) {
    let first = a as f64 / (a + b) as f64;
    (first, 1.0 - first)
}

/// Citation shares of the two partitions and the ratio of their citation totals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionShares {
    pub collab_share: f64,
    pub single_share: f64,
    /// `None` when the single-author partition has no citations.
    pub ratio: Option<f64>,
}

pub fn partition_shares(collab: &SummaryStats, single: &SummaryStats) -> Result<PartitionShares> {
    let total = collab.n_citations + single.n_citations;
    if total == 0 {
        return Err(invalid(
            "citations",
            "corpus has no citations; shares are undefined",
        ));
    }
    let (collab_share, single_share) = split_shares(collab.n_citations, single.n_citations);
    let ratio =
        (single.n_citations > 0).then(|| collab.n_citations as f64 / single.n_citations as f64);
    Ok(PartitionShares {
        collab_share,
        single_share,
        ratio,
    })
}

/// Renders a fraction as a whole-number percentage, e.g. `0.8794 -> "88%"`.
pub fn format_percent(fraction: f64) -> String {
    if fraction.is_nan() {
        return "n/a".to_string();
    }
    format!("{:.0}%", fraction * 100.0)
}
