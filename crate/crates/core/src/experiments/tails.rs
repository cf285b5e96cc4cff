//! Expected vs observed right-tail frequencies of non-mated scores.

use serde::{Deserialize, Serialize};

use crate::dist::MixtureModel;
use crate::error::{Error, Result};
use crate::evidence::beta_tail;

pub const PER_100K: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailAudit {
    pub cutpoints: Vec<f64>,
    pub model_expected_per_100k: Vec<f64>,
    pub observed_count: Vec<u64>,
    pub observed_total: u64,
    pub observed_per_100k: Vec<f64>,
}

impl TailAudit {
    /// Builds an audit from pre-tallied exceedance counts.
    pub fn from_counts(model: &MixtureModel, cutpoints: &[f64], counts: &[u64], total: u64) -> Result<Self> {
        if cutpoints.is_empty() {
            return Err(Error::domain("no cutpoints given"));
        }
        if counts.len() != cutpoints.len() {
            return Err(Error::domain(format!(
                "{} counts for {} cutpoints",
                counts.len(),
                cutpoints.len()
            )));
        }
        if total == 0 {
            return Err(Error::EmptySample);
        }
        if let Some(c) = counts.iter().find(|&&c| c > total) {
            return Err(Error::domain(format!("count {c} exceeds total {total}")));
        }
        if cutpoints.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("cutpoints must be finite"));
        }
        Ok(Self {
            cutpoints: cutpoints.to_vec(),
            model_expected_per_100k: cutpoints.iter().map(|&c| PER_100K * beta_tail(model, c)).collect(),
            observed_count: counts.to_vec(),
            observed_total: total,
            observed_per_100k: counts.iter().map(|&c| PER_100K * c as f64 / total as f64).collect(),
        })
    }

    /// Observed over expected frequency at each cutpoint.
    pub fn excess_factor(&self) -> Vec<f64> {
        self.observed_per_100k
            .iter()
            .zip(&self.model_expected_per_100k)
            .map(|(o, e)| o / e)
            .collect()
    }
}

/// Tallies `#{s > c}` for each cutpoint and compares with the model's right
/// tail there.
pub fn tail_audit(model: &MixtureModel, observed: &[f64], cutpoints: &[f64]) -> Result<TailAudit> {
    if observed.is_empty() {
        return Err(Error::EmptySample);
    }
    let counts: Vec<u64> = cutpoints
        .iter()
        .map(|&c| observed.iter().filter(|&&s| s > c).count() as u64)
        .collect();
    TailAudit::from_counts(model, cutpoints, &counts, observed.len() as u64)
}
