//! Maximum likelihood fitting of logistic mixtures and the train/test split
//! used to validate them.
//!
//! The likelihood is maximized directly with a Nelder-Mead simplex over an
//! unconstrained parameterization: locations as-is, log scales, and
//! weight logits relative to the last component. Each restart starts from
//! the quantile-based initializer (restart 0 exactly, later restarts
//! jittered) and the best restart wins, ties going to the lowest index.

mod simplex;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use simplex::{minimize, Minimum, SimplexOptions};

use crate::dist::{ln_mixture_density, LogisticComponent, MixtureModel};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { k: 2, max_iter: 2_000, tol: 1e-8, restarts: 5, seed: 0 }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("k must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be positive, got {}", self.tol)));
        }
        if self.restarts == 0 {
            return Err(Error::domain("restarts must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A random partition of a dataset into a training and a held-out part.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult<T> {
    pub train: Vec<T>,
    pub test: Vec<T>,
    pub fraction: f64,
}

/// Splits `data` uniformly at random without replacement;
/// `|train| = round(fraction * |data|)`.
pub fn split_dataset<T: Clone>(data: &[T], fraction: f64, seed: u64) -> Result<SplitResult<T>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::domain(format!("split fraction must lie in (0, 1), got {fraction}")));
    }
    if data.len() < 4 {
        return Err(Error::domain(format!("need at least 4 items to split, got {}", data.len())));
    }
    let n_train = (fraction * data.len() as f64).round() as usize;
    if n_train == 0 || n_train == data.len() {
        return Err(Error::domain(format!(
            "fraction {fraction} of {} items leaves one side empty",
            data.len()
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let train = idx[..n_train].iter().map(|&i| data[i].clone()).collect();
    let test = idx[n_train..].iter().map(|&i| data[i].clone()).collect();
    Ok(SplitResult { train, test, fraction })
}

/// Linear-interpolation sample quantile of already sorted data.
pub(crate) fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_finite(data: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::domain(format!("scores must be finite, found {bad}")));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Smallest scale the optimizer may use for this sample.
fn scale_floor(sorted: &[f64]) -> f64 {
    let range = sorted[sorted.len() - 1] - sorted[0];
    if range > 0.0 {
        1e-4 * range
    } else {
        1e-12
    }
}

/// Starting point: components at the equally spaced quantiles
/// `(2j - 1) / 2k`, common scale `IQR * (sqrt 3 / pi) / k`, uniform weights.
pub fn init_params(train: &[f64], k: usize) -> Result<MixtureModel> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if train.len() < 10 * k {
        return Err(Error::domain(format!(
            "need at least {} scores to initialise {k} components, got {}",
            10 * k,
            train.len()
        )));
    }
    let sorted = sorted_finite(train)?;
    init_from_sorted(&sorted, k)
}

fn init_from_sorted(sorted: &[f64], k: usize) -> Result<MixtureModel> {
    let iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    let scale = (iqr * 3f64.sqrt() / std::f64::consts::PI / k as f64).max(scale_floor(sorted));
    let comps = (1..=k)
        .map(|j| {
            let p = (2 * j - 1) as f64 / (2 * k) as f64;
            LogisticComponent::new(1.0 / k as f64, sorted_quantile(sorted, p), scale)
        })
        .collect();
    MixtureModel::new(comps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub model: MixtureModel,
    pub log_likelihood: f64,
    pub init_log_likelihood: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

const LOGIT_CLAMP: f64 = 40.0;

/// Maps the unconstrained vector back to mixture components.
struct Param {
    k: usize,
    floor: f64,
}

impl Param {
    fn dim(&self) -> usize {
        3 * self.k - 1
    }

    fn encode(&self, m: &MixtureModel) -> Vec<f64> {
        let c = m.components();
        let last_w = c[self.k - 1].weight;
        let mut v = Vec::with_capacity(self.dim());
        v.extend(c.iter().map(|c| c.location));
        v.extend(c.iter().map(|c| c.scale.ln()));
        v.extend(c[..self.k - 1].iter().map(|c| (c.weight / last_w).ln()));
        v
    }

    fn decode_into(&self, v: &[f64], out: &mut Vec<LogisticComponent>) {
        let k = self.k;
        out.clear();
        let logits = |j: usize| if j + 1 == k { 0.0 } else { v[2 * k + j].clamp(-LOGIT_CLAMP, LOGIT_CLAMP) };
        let m = (0..k).map(logits).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = (0..k).map(|j| (logits(j) - m).exp()).sum();
        for j in 0..k {
            out.push(LogisticComponent {
                weight: (logits(j) - m).exp() / total,
                location: v[j],
                scale: v[k + j].exp().max(self.floor),
            });
        }
    }

    fn steps(&self, m: &MixtureModel) -> Vec<f64> {
        let c = m.components();
        let mut s = Vec::with_capacity(self.dim());
        s.extend(c.iter().map(|c| 0.5 * c.scale));
        s.extend(std::iter::repeat(0.2).take(self.k));
        s.extend(std::iter::repeat(0.5).take(self.k - 1));
        s
    }
}

/// Log-likelihood with the plain density sum, falling back to log-sum-exp
/// only for points where the sum underflows.
fn fast_log_likelihood(comps: &[LogisticComponent], data: &[f64]) -> f64 {
    let mut total = 0.0;
    for &x in data {
        let mut dens = 0.0;
        for c in comps {
            let z = (x - c.location) / c.scale;
            let e = (-z.abs()).exp();
            let d = 1.0 + e;
            dens += c.weight * e / (d * d * c.scale);
        }
        total += if dens > 1e-280 { dens.ln() } else { ln_mixture_density(comps, x) };
    }
    total
}

/// Fits a `cfg.k`-component logistic mixture by maximum likelihood.
pub fn fit_mixture(train: &[f64], cfg: &FitConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    if train.len() < 10 * cfg.k {
        return Err(Error::domain(format!(
            "need at least {} scores to fit {} components, got {}",
            10 * cfg.k,
            cfg.k,
            train.len()
        )));
    }
    let sorted = sorted_finite(train)?;
    let init = init_from_sorted(&sorted, cfg.k)?;
    let param = Param { k: cfg.k, floor: scale_floor(&sorted) };
    let x0 = param.encode(&init);
    let steps = param.steps(&init);
    let init_ll = fast_log_likelihood(init.components(), &sorted);
    let n = sorted.len() as f64;
    let opts = SimplexOptions { max_iter: cfg.max_iter, tol: cfg.tol, max_rebuilds: 10 };

    let runs: Vec<(Vec<f64>, Minimum)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut start = x0.clone();
            if r > 0 {
                let mut g = rng::stream(cfg.seed, r as u64);
                let k = cfg.k;
                for j in 0..k {
                    start[j] += g.gen_range(-1.0..1.0) * init.components()[j].scale;
                    start[k + j] += g.gen_range(-0.5..0.5);
                }
                for v in start.iter_mut().skip(2 * k) {
                    *v += g.gen_range(-1.0..1.0);
                }
            }
            let mut buf = Vec::with_capacity(cfg.k);
            let objective = |v: &[f64]| {
                param.decode_into(v, &mut buf);
                -fast_log_likelihood(&buf, &sorted) / n
            };
            let min = minimize(objective, &start, &steps, opts);
            (start, min)
        })
        .collect();

    let mut summaries = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, f64)> = None;
    for (r, (_, min)) in runs.iter().enumerate() {
        let ll = -min.value * n;
        summaries.push(RestartSummary {
            index: r,
            log_likelihood: ll,
            iterations: min.iterations,
            evaluations: min.evaluations,
        });
        // strict comparison keeps the lowest index on ties
        if ll.is_finite() && best.map_or(true, |(_, b)| ll > b) {
            best = Some((r, ll));
        }
    }

    let mut comps = Vec::with_capacity(cfg.k);
    let best_idx = best.map_or(0, |(r, _)| r);
    param.decode_into(&runs[best_idx].1.x, &mut comps);
    let model = renormalized(comps)?;
    let ll = fast_log_likelihood(model.components(), &sorted);

    match best {
        Some(_) if ll.is_finite() && ll >= init_ll => Ok(FitOutcome {
            model,
            log_likelihood: ll,
            init_log_likelihood: init_ll,
            best_restart: best_idx,
            restarts: summaries,
        }),
        _ => Err(Error::FitFailure {
            restarts: cfg.restarts,
            best: Box::new(if ll.is_finite() && ll >= init_ll { model } else { init }),
            best_log_likelihood: if ll.is_finite() { ll.max(init_ll) } else { init_ll },
        }),
    }
}

fn renormalized(mut comps: Vec<LogisticComponent>) -> Result<MixtureModel> {
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    for c in &mut comps {
        c.weight /= total;
    }
    MixtureModel::new(comps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6() -> MixtureModel {
        MixtureModel::frstat_nonmated_15()
    }

    #[test]
    fn split_sizes_follow_protocol() {
        let data: Vec<u32> = (0..2_000).collect();
        let s = split_dataset(&data, 0.75, 3).unwrap();
        assert_eq!(s.train.len(), 1_500);
        assert_eq!(s.test.len(), 500);
    }

    #[test]
    fn split_is_a_partition() {
        let data: Vec<u32> = (0..10).collect();
        let s = split_dataset(&data, 0.5, 11).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (5, 5));
        let mut all: Vec<u32> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, data);
    }

    #[test]
    fn split_depends_only_on_seed() {
        let data: Vec<u32> = (0..200).collect();
        assert_eq!(split_dataset(&data, 0.75, 5).unwrap(), split_dataset(&data, 0.75, 5).unwrap());
        assert_ne!(split_dataset(&data, 0.75, 5).unwrap().train, split_dataset(&data, 0.75, 6).unwrap().train);
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert!(split_dataset(&data, 0.0, 1).is_err());
        assert!(split_dataset(&data, 1.0, 1).is_err());
        assert!(split_dataset(&data[..3], 0.5, 1).is_err());
        assert!(split_dataset(&data, 0.05, 1).is_err());
    }

    #[test]
    fn init_single_component_sits_at_median() {
        let data: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let m = init_params(&data, 1).unwrap();
        assert_eq!(m.components()[0].location, 50.0);
        assert_eq!(m.components()[0].weight, 1.0);
        let iqr = 50.0;
        assert!((m.components()[0].scale - iqr * 3f64.sqrt() / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn init_two_components_straddle_modes() {
        let truth = MixtureModel::new(vec![
            LogisticComponent::new(0.5, -20.0, 2.0),
            LogisticComponent::new(0.5, 20.0, 2.0),
        ])
        .unwrap();
        let data = truth.sample(2_000, 1).unwrap();
        let m = init_params(&data, 2).unwrap();
        let c = m.components();
        assert!(c[0].location < 0.0 && c[1].location > 0.0);
        assert!(c[0].location < -10.0 && c[1].location > 10.0);
        assert!(c.iter().all(|c| c.weight == 0.5 && c.scale > 0.0));
    }

    #[test]
    fn init_rejects_small_samples() {
        assert!(init_params(&[1.0; 19], 2).is_err());
        assert!(init_params(&[1.0; 20], 0).is_err());
    }

    #[test]
    fn init_on_constant_data_stays_valid() {
        let m = init_params(&[3.0; 30], 2).unwrap();
        assert!(m.components().iter().all(|c| c.scale > 0.0));
    }

    #[test]
    fn single_logistic_recovery() {
        let truth = MixtureModel::single(0.0, 1.0).unwrap();
        let data = truth.sample(10_000, 21).unwrap();
        let cfg = FitConfig { k: 1, ..FitConfig::default() };
        let out = fit_mixture(&data, &cfg).unwrap();
        let c = out.model.components()[0];
        assert!(c.location.abs() < 0.05, "{c:?}");
        assert!((c.scale - 1.0).abs() < 0.05, "{c:?}");
        assert!(out.log_likelihood >= out.init_log_likelihood);
    }

    #[test]
    fn fit_beats_initializer_and_is_reproducible() {
        let data = fig6().sample(1_500, 2).unwrap();
        let cfg = FitConfig { seed: 99, ..FitConfig::default() };
        let a = fit_mixture(&data, &cfg).unwrap();
        let b = fit_mixture(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.log_likelihood >= a.init_log_likelihood);
        for r in &a.restarts {
            assert!(r.log_likelihood <= a.log_likelihood + 1e-9);
        }
        let direct = a.model.log_likelihood(&data).unwrap();
        assert!((direct - a.log_likelihood).abs() < 1e-6 * direct.abs());
        let init = init_params(&data, 2).unwrap().log_likelihood(&data).unwrap();
        assert!(a.log_likelihood >= init);
    }

    #[test]
    fn fitted_model_is_canonical() {
        let data = fig6().sample(3_000, 8).unwrap();
        let out = fit_mixture(&data, &FitConfig::default()).unwrap();
        let c = out.model.components();
        assert!(c.windows(2).all(|w| w[0].location <= w[1].location));
        let total: f64 = c.iter().map(|c| c.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refit_of_fitted_model_is_self_consistent() {
        let data = fig6().sample(2_000, 31).unwrap();
        let first = fit_mixture(&data, &FitConfig::default()).unwrap().model;
        let again = first.sample(2_000, 32).unwrap();
        let refit = fit_mixture(&again, &FitConfig { seed: 1, ..FitConfig::default() }).unwrap();
        let gen_ll = first.log_likelihood(&again).unwrap() / 2_000.0;
        assert!((refit.log_likelihood / 2_000.0 - gen_ll).abs() < 0.05);
    }

    #[test]
    fn config_validation() {
        let data = fig6().sample(100, 1).unwrap();
        for cfg in [
            FitConfig { k: 0, ..FitConfig::default() },
            FitConfig { tol: 0.0, ..FitConfig::default() },
            FitConfig { restarts: 0, ..FitConfig::default() },
        ] {
            assert!(matches!(fit_mixture(&data, &cfg), Err(Error::Domain(_))));
        }
        assert!(fit_mixture(&data[..15], &FitConfig::default()).is_err());
        assert!(fit_mixture(&[f64::NAN; 40], &FitConfig::default()).is_err());
    }

    #[test]
    fn scale_floor_prevents_collapse() {
        // a spike of identical values inside a broad sample
        let mut data = MixtureModel::single(0.0, 5.0).unwrap().sample(200, 4).unwrap();
        data.extend(std::iter::repeat(1.2345).take(30));
        let out = fit_mixture(&data, &FitConfig::default()).unwrap();
        let sorted = sorted_finite(&data).unwrap();
        let floor = scale_floor(&sorted);
        assert!(out.model.components().iter().all(|c| c.scale >= floor));
        assert!(out.log_likelihood.is_finite());
    }
}
