//! Decision-threshold error rates for non-mated comparisons.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::Origin;
use crate::error::{Error, Result};
use crate::evidence::Ratio;

pub const STANDARD_THRESHOLDS: [f64; 6] = [1.0, 10.0, 100.0, 1_000.0, 10_000.0, 100_000.0];

/// Default tolerance for [`table_fixture_check`]: each printed rate may be
/// off by half a unit in its third decimal.
pub const FIXTURE_TOLERANCE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdInput {
    pub feature_count: u8,
    pub origin: Origin,
    pub ratio: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub feature_count: u8,
    pub pairs: usize,
    /// One rate in [0, 1] per threshold.
    pub rates: Vec<f64>,
}

/// Rates per feature count (rows, ascending) and threshold (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub thresholds: Vec<f64>,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdTable {
    pub fn row(&self, feature_count: u8) -> Option<&ThresholdRow> {
        self.rows.iter().find(|r| r.feature_count == feature_count)
    }

    pub fn rate(&self, feature_count: u8, threshold: f64) -> Option<f64> {
        let col = self.thresholds.iter().position(|&t| t == threshold)?;
        self.row(feature_count).map(|r| r.rates[col])
    }
}

/// A ratio at or above `threshold` would be reported as an identification.
fn identifies(ratio: Ratio, threshold: f64) -> bool {
    match ratio {
        Ratio::Finite(v) => v >= threshold,
        Ratio::Saturated => true,
    }
}

/// Correct-exclusion and erroneous-identification tables over the non-mated
/// inputs. A ratio equal to a threshold counts as an identification.
pub fn threshold_study(inputs: &[ThresholdInput], thresholds: &[f64]) -> Result<(ThresholdTable, ThresholdTable)> {
    if thresholds.is_empty() {
        return Err(Error::domain("no thresholds given"));
    }
    let mut groups: BTreeMap<u8, Vec<Ratio>> = BTreeMap::new();
    for i in inputs.iter().filter(|i| i.origin == Origin::NonMated) {
        groups.entry(i.feature_count).or_default().push(i.ratio);
    }
    if groups.is_empty() {
        return Err(Error::domain("no non-mated comparisons to evaluate"));
    }
    let mut exclusion = Vec::new();
    let mut error = Vec::new();
    for (fc, ratios) in groups {
        let n = ratios.len() as f64;
        let err: Vec<f64> = thresholds
            .iter()
            .map(|&t| ratios.iter().filter(|&&r| identifies(r, t)).count() as f64 / n)
            .collect();
        let exc: Vec<f64> = thresholds
            .iter()
            .map(|&t| ratios.iter().filter(|&&r| !identifies(r, t)).count() as f64 / n)
            .collect();
        exclusion.push(ThresholdRow { feature_count: fc, pairs: ratios.len(), rates: exc });
        error.push(ThresholdRow { feature_count: fc, pairs: ratios.len(), rates: err });
    }
    Ok((
        ThresholdTable { thresholds: thresholds.to_vec(), rows: exclusion },
        ThresholdTable { thresholds: thresholds.to_vec(), rows: error },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub feature_count: u8,
    pub threshold: f64,
    pub exclusion: f64,
    pub error: f64,
    pub sum: f64,
}

/// Cells where the correct-exclusion and erroneous-identification rates do not
/// add up to one within `tolerance`.
pub fn table_fixture_check(exclusion: &ThresholdTable, error: &ThresholdTable, tolerance: f64) -> Result<Vec<Violation>> {
    if exclusion.rows.is_empty() || error.rows.is_empty() || exclusion.thresholds.is_empty() {
        return Err(Error::domain("threshold tables are empty"));
    }
    if exclusion.thresholds != error.thresholds {
        return Err(Error::domain("threshold tables have different columns"));
    }
    if exclusion.rows.len() != error.rows.len() {
        return Err(Error::domain("threshold tables have different row counts"));
    }
    let mut out = Vec::new();
    for (a, b) in exclusion.rows.iter().zip(&error.rows) {
        if a.feature_count != b.feature_count || a.pairs != b.pairs {
            return Err(Error::domain(format!(
                "row mismatch: feature count {} ({} pairs) vs {} ({} pairs)",
                a.feature_count, a.pairs, b.feature_count, b.pairs
            )));
        }
        let width = exclusion.thresholds.len();
        if a.rates.len() != width || b.rates.len() != width {
            return Err(Error::domain(format!("row {} does not have {width} cells", a.feature_count)));
        }
        for ((&t, &e), &i) in exclusion.thresholds.iter().zip(&a.rates).zip(&b.rates) {
            let sum = e + i;
            if (sum - 1.0).abs() > tolerance {
                out.push(Violation { feature_count: a.feature_count, threshold: t, exclusion: e, error: i, sum });
            }
        }
    }
    Ok(out)
}
