//! Tail-ratio numbers against true likelihood ratios in the normal toy model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{ln_specific_source_lr, toy_frstat_numbers, Hypothesis, Ratio, ToyScenario};
use crate::rng::{self, derive_seed};

pub const MIN_TOY_REPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRecord {
    pub scenario: String,
    pub hypothesis: Hypothesis,
    pub replicate: usize,
    pub x: f64,
    pub alpha: f64,
    pub beta: f64,
    pub true_lr: Ratio,
    pub frstat_like: Ratio,
    /// Natural logs; `+inf` where the ratio saturates.
    pub ln_true_lr: f64,
    pub ln_frstat_like: f64,
}

impl ToyRecord {
    /// `ln(frstat_like / true_lr)`; `None` when both sides are infinite in the
    /// same direction.
    pub fn ln_overstatement(&self) -> Option<f64> {
        let d = self.ln_frstat_like - self.ln_true_lr;
        (!d.is_nan()).then_some(d)
    }
}

/// For each scenario, both hypotheses, `reps` draws of the trace observation.
/// Records come out ordered by scenario, then H0 before H1, then replicate.
pub fn toy_study(scenarios: &[ToyScenario], reps: usize, seed: u64) -> Result<Vec<ToyRecord>> {
    if reps < MIN_TOY_REPS {
        return Err(Error::domain(format!("toy study needs at least {MIN_TOY_REPS} replicates, got {reps}")));
    }
    for sc in scenarios {
        sc.validate()?;
    }
    let mut out = Vec::with_capacity(scenarios.len() * 2 * reps);
    for (i, sc) in scenarios.iter().enumerate() {
        for (j, hyp) in [Hypothesis::H0, Hypothesis::H1].into_iter().enumerate() {
            let cell_seed = derive_seed(seed, (2 * i + j) as u64);
            let rows: Vec<ToyRecord> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut g = rng::stream(cell_seed, r as u64);
                    let x = match hyp {
                        Hypothesis::H0 => sc.source().map_or(sc.source_mean, |d| d.draw(&mut g)),
                        Hypothesis::H1 => sc.population().draw(&mut g),
                    };
                    record(sc, hyp, r, x)
                })
                .collect();
            out.extend(rows);
        }
    }
    Ok(out)
}

fn record(sc: &ToyScenario, hypothesis: Hypothesis, replicate: usize, x: f64) -> ToyRecord {
    let numbers = toy_frstat_numbers(sc, x);
    let ln_true_lr = ln_specific_source_lr(sc, x);
    let ln_frstat_like = numbers.alpha.ln() - numbers.beta.ln();
    ToyRecord {
        scenario: sc.name.clone(),
        hypothesis,
        replicate,
        x,
        alpha: numbers.alpha,
        beta: numbers.beta,
        true_lr: Ratio::from_ln(ln_true_lr),
        frstat_like: numbers.ratio,
        ln_true_lr,
        ln_frstat_like,
    }
}

/// Median of `frstat_like / true_lr` over one scenario and hypothesis.
pub fn median_overstatement(records: &[ToyRecord], scenario: &str, hypothesis: Hypothesis) -> Option<f64> {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.scenario == scenario && r.hypothesis == hypothesis)
        .filter_map(ToyRecord::ln_overstatement)
        .collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mid = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    Some(mid.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_shape_and_order() {
        let set = ToyScenario::standard_set();
        let recs = toy_study(&set, 100, 1).unwrap();
        assert_eq!(recs.len(), 2 * 3 * 100);
        assert_eq!(recs[0].scenario, "a");
        assert_eq!(recs[0].hypothesis, Hypothesis::H0);
        assert_eq!(recs[100].hypothesis, Hypothesis::H1);
        assert_eq!(recs[599].scenario, "c");
        assert_eq!(recs[599].replicate, 99);
        assert!(toy_study(&set, 99, 1).is_err());
    }

    #[test]
    fn deterministic_and_thread_invariant() {
        let set = ToyScenario::standard_set();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| toy_study(&set, 200, 7).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn indistinguishable_source_has_unit_lr() {
        let sc = ToyScenario::new("deg", 0.0, 1e-9, 1.0, 0.0).unwrap();
        let recs = toy_study(&[sc], 100, 3).unwrap();
        for r in &recs {
            assert!((r.true_lr.value().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn h0_draws_support_the_source() {
        let recs = toy_study(&ToyScenario::standard_set(), 400, 11).unwrap();
        let med = |sc: &str, h| {
            let mut v: Vec<f64> = recs
                .iter()
                .filter(|r| r.scenario == sc && r.hypothesis == h)
                .map(|r| r.ln_true_lr)
                .collect();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        for sc in ["a", "b", "c"] {
            assert!(med(sc, Hypothesis::H0) > med(sc, Hypothesis::H1), "{sc}");
        }
        assert!(med("b", Hypothesis::H0) > 0.0);
    }

    #[test]
    fn record_values_match_closed_forms() {
        let sc = &ToyScenario::standard_set()[0];
        let r = record(sc, Hypothesis::H1, 0, 0.4);
        let n = toy_frstat_numbers(sc, 0.4);
        assert_eq!(r.alpha, n.alpha);
        assert!((r.ln_frstat_like - (n.alpha / n.beta).ln()).abs() < 1e-12);
        let t = sc.population_sd();
        let direct = (-(0.4f64 / 0.3).powi(2) / 2.0).exp() / 0.3 / ((-(0.4f64 / t).powi(2) / 2.0).exp() / t);
        assert!((r.true_lr.value().unwrap() / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_overstatement_handles_saturation() {
        let mk = |a: f64, b: f64| ToyRecord {
            scenario: "s".into(),
            hypothesis: Hypothesis::H1,
            replicate: 0,
            x: 0.0,
            alpha: 0.0,
            beta: 0.0,
            true_lr: Ratio::from_ln(b),
            frstat_like: Ratio::from_ln(a),
            ln_true_lr: b,
            ln_frstat_like: a,
        };
        let recs = vec![mk(1.0, 0.0), mk(f64::INFINITY, 0.0), mk(f64::INFINITY, f64::INFINITY), mk(0.0, 0.0)];
        assert!((median_overstatement(&recs, "s", Hypothesis::H1).unwrap() - 1f64.exp()).abs() < 1e-12);
        assert!(median_overstatement(&recs, "s", Hypothesis::H0).is_none());
    }
}
