//! Held-out and parametric-resample goodness-of-fit p-values over repeated
//! train/test splits.
//!
//! Each replicate splits the data, fits a mixture to the training part, tests
//! the held-out part against the fit ("observed" p-values), then draws a fresh
//! sample from the fit and tests that against the same fit ("null" p-values).
//! Under a correct model both sequences are close to uniform; a model with
//! too light a tail shows up as an excess of small observed p-values, earlier
//! for Anderson-Darling than for Kolmogorov-Smirnov.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Cdf, MixtureModel};
use crate::error::{Error, Result};
use crate::fit::{fit_mixture, split_dataset, FitConfig};
use crate::gof::{gof_test, ks_statistic, EmpiricalDistribution, PMethod, StatisticKind};
use crate::rng::derive_seed;

/// How a p-value is obtained inside the study; bootstrap seeds are derived
/// per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PSource {
    Asymptotic,
    Bootstrap { replicates: usize, refit: bool },
}

impl PSource {
    fn method(self, seed: u64) -> PMethod {
        match self {
            PSource::Asymptotic => PMethod::Asymptotic,
            PSource::Bootstrap { replicates, refit } => PMethod::Bootstrap { replicates, seed, refit },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueStudyConfig {
    pub reps: usize,
    /// Share of the data used for fitting.
    pub fraction: f64,
    /// Size of each parametric resample.
    pub resample_n: usize,
    pub fit: FitConfig,
    pub ks: PSource,
    pub ad: PSource,
    pub seed: u64,
}

impl Default for PValueStudyConfig {
    fn default() -> Self {
        Self {
            reps: 1_000,
            fraction: 0.75,
            resample_n: 1_500,
            fit: FitConfig::default(),
            ks: PSource::Asymptotic,
            ad: PSource::Bootstrap { replicates: 199, refit: false },
            seed: 0,
        }
    }
}

pub const MIN_STUDY_DATA: usize = 100;
pub const MIN_STUDY_REPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PValueRow {
    pub replicate: usize,
    pub ks_observed: f64,
    pub ad_observed: f64,
    pub ks_null: f64,
    pub ad_null: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueStudyResult {
    pub reps: usize,
    /// Completed replicates in replicate order.
    pub rows: Vec<PValueRow>,
    /// Replicates whose fit failed; excluded from `rows`.
    pub missing: Vec<usize>,
}

impl PValueStudyResult {
    pub fn ks_observed(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ks_observed).collect()
    }

    pub fn ad_observed(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ad_observed).collect()
    }

    pub fn ks_null(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ks_null).collect()
    }

    pub fn ad_null(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ad_null).collect()
    }
}

/// Fraction of `p` strictly below `level`.
pub fn rejection_rate(p: &[f64], level: f64) -> f64 {
    if p.is_empty() {
        return f64::NAN;
    }
    p.iter().filter(|&&v| v < level).count() as f64 / p.len() as f64
}

struct Uniform01;

impl Cdf for Uniform01 {
    fn cdf(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }
}

/// Kolmogorov distance between the empirical distribution of `p` and
/// Uniform(0, 1).
pub fn uniformity_distance(p: &[f64]) -> Result<f64> {
    Ok(ks_statistic(&EmpiricalDistribution::new(p)?, &Uniform01))
}

pub fn pvalue_study(data: &[f64], cfg: &PValueStudyConfig) -> Result<PValueStudyResult> {
    if data.len() < MIN_STUDY_DATA {
        return Err(Error::domain(format!(
            "p-value study needs at least {MIN_STUDY_DATA} scores, got {}",
            data.len()
        )));
    }
    if cfg.reps < MIN_STUDY_REPS {
        return Err(Error::domain(format!("p-value study needs at least {MIN_STUDY_REPS} replicates")));
    }
    if cfg.resample_n == 0 {
        return Err(Error::domain("resample_n must be positive"));
    }
    cfg.fit.validate()?;

    let outcomes: Vec<Option<PValueRow>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| replicate(data, cfg, r))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Some(row) => rows.push(row),
            None => missing.push(r),
        }
    }
    Ok(PValueStudyResult { reps: cfg.reps, rows, missing })
}

fn replicate(data: &[f64], cfg: &PValueStudyConfig, r: usize) -> Result<Option<PValueRow>> {
    let seed = derive_seed(cfg.seed, r as u64);
    let split = split_dataset(data, cfg.fraction, derive_seed(seed, 0))?;
    let model = match fit_mixture(&split.train, &cfg.fit.with_seed(derive_seed(seed, 1))) {
        Ok(out) => out.model,
        Err(Error::FitFailure { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let held_out = EmpiricalDistribution::new(&split.test)?;
    let ks_observed = pvalue(&held_out, &model, StatisticKind::Ks, cfg.ks, derive_seed(seed, 2))?;
    let ad_observed = pvalue(&held_out, &model, StatisticKind::Ad, cfg.ad, derive_seed(seed, 3))?;

    let resample = model.sample(cfg.resample_n, derive_seed(seed, 4))?;
    let resample = EmpiricalDistribution::new(&resample)?;
    let ks_null = pvalue(&resample, &model, StatisticKind::Ks, cfg.ks, derive_seed(seed, 5))?;
    let ad_null = pvalue(&resample, &model, StatisticKind::Ad, cfg.ad, derive_seed(seed, 6))?;

    Ok(Some(PValueRow { replicate: r, ks_observed, ad_observed, ks_null, ad_null }))
}

fn pvalue(
    sample: &EmpiricalDistribution,
    model: &MixtureModel,
    kind: StatisticKind,
    source: PSource,
    seed: u64,
) -> Result<f64> {
    let out = gof_test(sample, model, kind, source.method(seed))?;
    Ok(out.p_value.expect("asymptotic and bootstrap methods always yield a p-value"))
}
