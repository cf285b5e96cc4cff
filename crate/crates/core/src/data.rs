//! Labelled similarity scores.

use serde::{Deserialize, Serialize};

use crate::dist::{check_feature_count, Origin};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub score: f64,
    pub origin: Origin,
    pub feature_count: u8,
    pub pair_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

impl ScoreRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.score.is_finite() {
            return Err(Error::domain(format!("pair {}: score is not finite", self.pair_id)));
        }
        check_feature_count(self.feature_count)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreDataset {
    records: Vec<ScoreRecord>,
}

impl ScoreDataset {
    pub fn new(records: Vec<ScoreRecord>) -> Result<Self> {
        for r in &records {
            r.validate()?;
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<ScoreRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Scores of one origin, optionally restricted to one feature count, in
    /// file order.
    pub fn scores(&self, origin: Origin, feature_count: Option<u8>) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.origin == origin && feature_count.map_or(true, |fc| r.feature_count == fc))
            .map(|r| r.score)
            .collect()
    }

    pub fn count(&self, origin: Origin) -> usize {
        self.records.iter().filter(|r| r.origin == origin).count()
    }
}
