//! Scaling law `CBP = k · c^n` across subfields, fitted by ordinary least
//! squares on the logs of size and citations.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::SubfieldAggregate;
use crate::error::{invalid, Error, Result};

/// Which papers of a subfield enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Overall,
    Collaboration,
    Single,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Overall, Mode::Collaboration, Mode::Single];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Overall => "overall",
            Mode::Collaboration => "collaboration",
            Mode::Single => "single",
        }
    }

    /// `(papers, citations)` of an aggregate under this mode.
    pub fn select(self, agg: &SubfieldAggregate) -> (u64, u64) {
        match self {
            Mode::Overall => (agg.papers_total, agg.citations_total),
            Mode::Collaboration => (agg.papers_collab, agg.citations_collab),
            Mode::Single => (agg.papers_single, agg.citations_single),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "overall" => Ok(Mode::Overall),
            "collaboration" => Ok(Mode::Collaboration),
            "single" => Ok(Mode::Single),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub subfield_id: String,
    pub size: f64,
    pub cbp: f64,
}

impl ScalingPoint {
    pub fn new(subfield_id: impl Into<String>, size: f64, cbp: f64) -> Result<Self> {
        if size <= 0.0 || !size.is_finite() {
            return Err(invalid("size", format!("must be positive, got {size}")));
        }
        if cbp <= 0.0 || !cbp.is_finite() {
            return Err(invalid("cbp", format!("must be positive, got {cbp}")));
        }
        Ok(Self {
            subfield_id: subfield_id.into(),
            size,
            cbp,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Slope `n` of the log-log regression.
    pub exponent: f64,
    /// `log10 k`.
    pub intercept_log: f64,
    pub k: f64,
    pub exponent_se: f64,
    pub r2: f64,
    /// `None` when the points lie exactly on a line.
    pub t_stat: Option<f64>,
    /// Two-sided p-value against a zero slope.
    pub p_value: Option<f64>,
    pub df: usize,
    pub n_points: usize,
}

/// Least-squares line through `(log_b size, log_b cbp)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLine {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r2: f64,
}

fn check_points(points: &[ScalingPoint]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    for p in points {
        ScalingPoint::new(p.subfield_id.as_str(), p.size, p.cbp)?;
    }
    if points.iter().all(|p| p.size == points[0].size) {
        return Err(Error::NoSizeVariation);
    }
    Ok(())
}

/// Fits the regression with logarithms in base `base`.
pub fn fit_log_line(points: &[ScalingPoint], base: f64) -> Result<LogLine> {
    if base <= 1.0 || !base.is_finite() {
        return Err(invalid("base", format!("must exceed 1, got {base}")));
    }
    check_points(points)?;
    let ln_base = base.ln();
    let xs: Vec<f64> = points.iter().map(|p| p.size.ln() / ln_base).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.cbp.ln() / ln_base).collect();
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_se = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(LogLine {
        slope,
        intercept,
        slope_se,
        r2,
    })
}

pub fn scaling_fit(points: &[ScalingPoint]) -> Result<ScalingFit> {
    let line = fit_log_line(points, 10.0)?;
    let df = points.len() - 2;
    let (t_stat, p_value) = if line.slope_se > 0.0 {
        let t = line.slope / line.slope_se;
        let dist = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| invalid("df", e.to_string()))?;
        (Some(t), Some(2.0 * dist.sf(t.abs())))
    } else {
        (None, Some(0.0))
    };
    Ok(ScalingFit {
        exponent: line.slope,
        intercept_log: line.intercept,
        k: 10f64.powf(line.intercept),
        exponent_se: line.slope_se,
        r2: line.r2,
        t_stat,
        p_value,
        df,
        n_points: points.len(),
    })
}

/// Multiplier of citations when output doubles: `2^n`.
pub fn matthew_factor(exponent: f64) -> f64 {
    exponent.exp2()
}

/// `k · size^n`.
pub fn expected_cbp(fit: &ScalingFit, size: f64) -> f64 {
    fit.k * size.powf(fit.exponent)
}

/// Observed over expected CBP; 1 means exactly on the fitted curve.
pub fn performance_indicator(point: &ScalingPoint, fit: &ScalingFit) -> f64 {
    point.cbp / expected_cbp(fit, point.size)
}

/// A subfield left out of a mode's regression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub subfield_id: String,
    pub reason: String,
}

/// Regression points for `mode`; subfields with no papers or no citations in
/// that mode are returned as exclusions.
pub fn points_from_aggregates(
    aggregates: &[SubfieldAggregate],
    mode: Mode,
) -> (Vec<ScalingPoint>, Vec<Exclusion>) {
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for agg in aggregates {
        let (papers, citations) = mode.select(agg);
        let reason = match (papers, citations) {
            (0, _) => Some("no papers"),
            (_, 0) => Some("no citations"),
            _ => None,
        };
        match reason {
            Some(r) => excluded.push(Exclusion {
                subfield_id: agg.subfield_id.clone(),
                reason: r.to_string(),
            }),
            None => points.push(ScalingPoint {
                subfield_id: agg.subfield_id.clone(),
                size: papers as f64,
                cbp: citations as f64,
            }),
        }
    }
    (points, excluded)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub subfield: String,
    pub size: f64,
    pub cbp: f64,
    pub expected_cbp: f64,
    pub indicator: f64,
}

pub fn scatter_rows(points: &[ScalingPoint], fit: &ScalingFit) -> Vec<ScatterRow> {
    points
        .iter()
        .map(|p| ScatterRow {
            subfield: p.subfield_id.clone(),
            size: p.size,
            cbp: p.cbp,
            expected_cbp: expected_cbp(fit, p.size),
            indicator: performance_indicator(p, fit),
        })
        .collect()
}

pub fn write_scatter_csv(rows: &[ScatterRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
