//! Synthetic mated / non-mated score datasets with a contaminated right tail.

use serde::{Deserialize, Serialize};

use crate::data::{ScoreDataset, ScoreRecord};
use crate::dist::{check_feature_count, Logistic, LogisticComponent, MixtureModel, Origin};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub mated: MixtureModel,
    pub nonmated_core: MixtureModel,
    /// Probability that a non-mated score comes from `contamination`.
    pub contamination_weight: f64,
    pub contamination: Logistic,
    pub n_mated: usize,
    pub n_nonmated: usize,
    pub feature_count: u8,
    /// Mated pairs per source; ids are assigned round-robin in blocks.
    pub scores_per_source: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            mated: MixtureModel::single(15.0, 8.0).expect("valid"),
            nonmated_core: MixtureModel::frstat_nonmated_15(),
            contamination_weight: 0.013,
            contamination: Logistic::new(-20.0, 25.0).expect("valid"),
            n_mated: 1_996,
            n_nonmated: 2_000,
            feature_count: 15,
            scores_per_source: 10,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let w = self.contamination_weight;
        if !(0.0..0.5).contains(&w) {
            return Err(Error::domain(format!("contamination_weight must lie in [0, 0.5), got {w}")));
        }
        if self.scores_per_source == 0 {
            return Err(Error::domain("scores_per_source must be at least 1"));
        }
        check_feature_count(self.feature_count)?;
        Ok(())
    }

    /// The full non-mated generating distribution `(1 - w) core + w contamination`.
    pub fn nonmated_truth(&self) -> Result<MixtureModel> {
        self.validate()?;
        let w = self.contamination_weight;
        if w == 0.0 {
            return Ok(self.nonmated_core.clone());
        }
        let mut comps: Vec<LogisticComponent> = self
            .nonmated_core
            .components()
            .iter()
            .map(|c| LogisticComponent::new(c.weight * (1.0 - w), c.location, c.scale))
            .collect();
        comps.push(LogisticComponent::new(w, self.contamination.location(), self.contamination.scale()));
        MixtureModel::new(comps)
    }
}

/// Draws `n_mated` mated and `n_nonmated` non-mated scores.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<ScoreDataset> {
    let nonmated = cfg.nonmated_truth()?;
    let mated_scores = draw(&cfg.mated, cfg.n_mated, cfg.seed, 0)?;
    let nonmated_scores = draw(&nonmated, cfg.n_nonmated, cfg.seed, 1)?;

    let mut records = Vec::with_capacity(cfg.n_mated + cfg.n_nonmated);
    for (i, score) in mated_scores.into_iter().enumerate() {
        records.push(ScoreRecord {
            score,
            origin: Origin::Mated,
            feature_count: cfg.feature_count,
            pair_id: format!("m{i:06}"),
            source_id: Some(format!("s{:05}", i / cfg.scores_per_source)),
        });
    }
    for (i, score) in nonmated_scores.into_iter().enumerate() {
        records.push(ScoreRecord {
            score,
            origin: Origin::NonMated,
            feature_count: cfg.feature_count,
            pair_id: format!("n{i:06}"),
            source_id: None,
        });
    }
    ScoreDataset::new(records)
}

fn draw(model: &MixtureModel, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    model.sample_with(n, &mut rng::stream(seed, stream))
}
