//! Kolmogorov-Smirnov and Anderson-Darling goodness-of-fit statistics for a
//! sample against a fully specified continuous model, with asymptotic or
//! parametric-bootstrap p-values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Cdf, MixtureModel};
use crate::error::{Error, Result};
use crate::fit::{fit_mixture, FitConfig};
use crate::rng;

/// Bounds applied to model cdf values inside the AD logarithms.
pub const AD_CLAMP: f64 = 1e-12;

/// Sorted sample backing an empirical cdf.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(bad) = sample.iter().find(|x| x.is_nan()) {
            return Err(Error::domain(format!("sample contains {bad}")));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of observations `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.n() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatisticKind {
    #[serde(rename = "KS")]
    Ks,
    #[serde(rename = "AD")]
    Ad,
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(StatisticKind::Ks),
            "ad" => Ok(StatisticKind::Ad),
            other => Err(Error::domain(format!("unknown statistic `{other}` (expected ks or ad)"))),
        }
    }
}

impl std::fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StatisticKind::Ks => "KS",
            StatisticKind::Ad => "AD",
        })
    }
}

/// How a p-value is (or was) obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PMethod {
    None,
    Asymptotic,
    /// Parametric bootstrap from the model; with `refit` every replicate is
    /// refitted before its statistic is taken.
    Bootstrap { replicates: usize, seed: u64, refit: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofOutcome {
    pub statistic_kind: StatisticKind,
    pub statistic: f64,
    pub n: usize,
    pub p_value: Option<f64>,
    pub p_method: PMethod,
}

/// `D_n`: largest vertical gap between the empirical and model cdfs,
/// taken over both sides of every step.
pub fn ks_statistic(sample: &EmpiricalDistribution, model: &impl Cdf) -> f64 {
    let n = sample.n() as f64;
    sample
        .sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = model.cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `A^2_n` via the order-statistic form
/// `-n - (1/n) sum (2i-1) [ln F(x_(i)) + ln(1 - F(x_(n+1-i)))]`,
/// with cdf values clamped into `[AD_CLAMP, 1 - AD_CLAMP]`.
pub fn ad_statistic(sample: &EmpiricalDistribution, model: &impl Cdf) -> f64 {
    let n = sample.n();
    let lo = |p: f64| p.clamp(AD_CLAMP, 1.0 - AD_CLAMP).ln();
    let ln_cdf: Vec<f64> = sample.sorted.iter().map(|&x| lo(model.cdf(x))).collect();
    let ln_sf: Vec<f64> = sample.sorted.iter().map(|&x| lo(model.sf(x))).collect();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (ln_cdf[i] + ln_sf[n - 1 - i]))
        .sum();
    (-(n as f64) - s / n as f64).max(0.0)
}

/// The AD integrand weight `1 / (F (1 - F))`.
pub fn ad_weight(f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::domain(format!("AD weight needs F in (0, 1), got {f}")));
    }
    Ok(1.0 / (f * (1.0 - f)))
}

pub fn statistic(kind: StatisticKind, sample: &EmpiricalDistribution, model: &impl Cdf) -> f64 {
    match kind {
        StatisticKind::Ks => ks_statistic(sample, model),
        StatisticKind::Ad => ad_statistic(sample, model),
    }
}

/// Kolmogorov limiting distribution tail `Q(lambda)` at
/// `lambda = (sqrt n + 0.12 + 0.11 / sqrt n) D_n`.
pub fn asymptotic_ks_pvalue(d: f64, n: usize) -> f64 {
    if n == 0 || !(d > 0.0) {
        return 1.0;
    }
    let rn = (n as f64).sqrt();
    let lambda = (rn + 0.12 + 0.11 / rn) * d.min(1.0);
    kolmogorov_q(lambda)
}

fn kolmogorov_q(lambda: f64) -> f64 {
    let a = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (a * kf * kf).exp();
        sum += term;
        if term.abs() < 1e-10 {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    // the series has not settled: lambda is tiny and Q is 1 to machine precision
    1.0
}

/// Asymptotic AD upper tail with the finite-n correction of Marsaglia and
/// Marsaglia (2004).
pub fn asymptotic_ad_pvalue(a2: f64, n: usize) -> f64 {
    if !(a2 > 0.0) || n == 0 {
        return 1.0;
    }
    let x = ad_inf_cdf(a2);
    // The published correction polynomial does not vanish at x = 1 (it
    // leaves about -1.2e-6 / n), so it is dropped once the limiting tail is
    // below 1e-3, where it is negligible anyway.
    let fix = if x > 0.999 { 0.0 } else { ad_errfix(n as f64, x) };
    (1.0 - (x + fix)).clamp(0.0, 1.0)
}

fn ad_inf_cdf(z: f64) -> f64 {
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012
                + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z).exp()).exp()
    }
}

fn ad_errfix(n: f64, x: f64) -> f64 {
    if x > 0.8 {
        return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n;
    }
    let c = 0.01265 + 0.1757 / n;
    if x < c {
        let t = x / c;
        let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
        return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
    }
    let t = (x - c) / (0.8 - c);
    let t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
    t * (0.04213 + 0.01365 / n) / n
}

/// Minimum replicate count accepted by [`bootstrap_pvalue`].
pub const MIN_BOOTSTRAP: usize = 100;

/// Parametric bootstrap p-value `(1 + #{T_b >= T_obs}) / (B + 1)`, each
/// `T_b` computed on `n` fresh draws from `model`.
pub fn bootstrap_pvalue(
    sample: &EmpiricalDistribution,
    model: &MixtureModel,
    kind: StatisticKind,
    replicates: usize,
    seed: u64,
    refit: bool,
) -> Result<GofOutcome> {
    if replicates < MIN_BOOTSTRAP {
        return Err(Error::domain(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP} replicates, got {replicates}"
        )));
    }
    let n = sample.n();
    let observed = statistic(kind, sample, model);
    let stats: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let mut g = rng::stream(seed, b as u64);
            let draws = model.sample_with(n, &mut g)?;
            let emp = EmpiricalDistribution::new(&draws)?;
            if refit {
                let cfg = FitConfig { k: model.k(), seed: rng::derive_seed(seed, b as u64), ..FitConfig::default() };
                let refitted = match fit_mixture(&draws, &cfg) {
                    Ok(out) => out.model,
                    Err(Error::FitFailure { best, .. }) => *best,
                    Err(e) => return Err(e),
                };
                Ok(statistic(kind, &emp, &refitted))
            } else {
                Ok(statistic(kind, &emp, model))
            }
        })
        .collect::<Result<_>>()?;
    let exceed = stats.iter().filter(|&&t| t >= observed).count();
    Ok(GofOutcome {
        statistic_kind: kind,
        statistic: observed,
        n,
        p_value: Some((1 + exceed) as f64 / (replicates + 1) as f64),
        p_method: PMethod::Bootstrap { replicates, seed, refit },
    })
}

/// Runs one test with the requested p-value method.
pub fn gof_test(
    sample: &EmpiricalDistribution,
    model: &MixtureModel,
    kind: StatisticKind,
    method: PMethod,
) -> Result<GofOutcome> {
    match method {
        PMethod::Bootstrap { replicates, seed, refit } => {
            bootstrap_pvalue(sample, model, kind, replicates, seed, refit)
        }
        PMethod::Asymptotic | PMethod::None => {
            let statistic = statistic(kind, sample, model);
            let n = sample.n();
            let p_value = match (method, kind) {
                (PMethod::None, _) => None,
                (_, StatisticKind::Ks) => Some(asymptotic_ks_pvalue(statistic, n)),
                (_, StatisticKind::Ad) => Some(asymptotic_ad_pvalue(statistic, n)),
            };
            Ok(GofOutcome { statistic_kind: kind, statistic, n, p_value, p_method: method })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{LogisticComponent, MixtureModel};
    use proptest::prelude::*;

    struct Uniform01;
    impl Cdf for Uniform01 {
        fn cdf(&self, x: f64) -> f64 {
            x.clamp(0.0, 1.0)
        }
    }

    fn fig6() -> MixtureModel {
        MixtureModel::frstat_nonmated_15()
    }

    fn emp(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v).unwrap()
    }

    #[test]
    fn empirical_distribution_contract() {
        assert!(matches!(EmpiricalDistribution::new(&[]), Err(Error::EmptySample)));
        assert!(EmpiricalDistribution::new(&[1.0, f64::NAN]).is_err());
        let e = emp(&[3.0, 1.0, 2.0]);
        assert_eq!(e.sorted(), &[1.0, 2.0, 3.0]);
        assert_eq!(e.ecdf(2.0), 2.0 / 3.0);
        assert_eq!(e.ecdf(0.0), 0.0);
    }

    #[test]
    fn ks_single_point_at_median() {
        let m = MixtureModel::single(4.0, 2.0).unwrap();
        assert_eq!(ks_statistic(&emp(&[4.0]), &m), 0.5);
    }

    #[test]
    fn ks_of_midpoint_quantiles_is_half_a_step() {
        let m = fig6();
        for n in [1usize, 7, 50, 400] {
            let xs: Vec<f64> = (1..=n).map(|i| m.quantile((i as f64 - 0.5) / n as f64).unwrap()).collect();
            let d = ks_statistic(&emp(&xs), &m);
            assert!((d - 0.5 / n as f64).abs() < 1e-9, "n={n}: {d}");
        }
    }

    #[test]
    fn ks_of_disjoint_support_approaches_one() {
        let m = MixtureModel::single(0.0, 1.0).unwrap();
        let far = MixtureModel::single(1_000.0, 1.0).unwrap().sample(200, 3).unwrap();
        assert!(ks_statistic(&emp(&far), &m) > 1.0 - 1e-12);
    }

    #[test]
    fn ad_weight_identities() {
        assert_eq!(ad_weight(0.5).unwrap(), 4.0);
        assert!((ad_weight(0.99).unwrap() - 101.01).abs() < 0.01);
        assert!(ad_weight(0.0).is_err());
        assert!(ad_weight(1.0).is_err());
    }

    /// Integrates `(F_n - F)^2 / (F (1 - F)) dF` directly in `u = F(x)`,
    /// piece by piece between the transformed order statistics.
    fn ad_by_quadrature(us: &[f64]) -> f64 {
        let n = us.len();
        let mut knots = vec![0.0];
        knots.extend_from_slice(us);
        knots.push(1.0);
        let mut total = 0.0;
        for i in 0..=n {
            let (a, b) = (knots[i], knots[i + 1]);
            if b <= a {
                continue;
            }
            let level = i as f64 / n as f64;
            let g = |u: f64| {
                let w = u * (1.0 - u);
                if w <= 0.0 {
                    // removable: at u = 0 the level is 0, at u = 1 it is 1
                    if u <= 0.0 { 0.0 } else { 0.0 }
                } else {
                    (level - u).powi(2) / w
                }
            };
            let m = 400;
            let h = (b - a) / m as f64;
            let mut s = g(a) + g(b);
            for j in 1..m {
                s += if j % 2 == 1 { 4.0 } else { 2.0 } * g(a + h * j as f64);
            }
            total += s * h / 3.0;
        }
        n as f64 * total
    }

    #[test]
    fn ad_matches_quadrature_of_the_integral() {
        let m = fig6();
        for seed in [1, 2, 3] {
            let xs = m.sample(500, seed).unwrap();
            let e = emp(&xs);
            let us: Vec<f64> = e.sorted().iter().map(|&x| m.cdf(x)).collect();
            let oracle = ad_by_quadrature(&us);
            let a2 = ad_statistic(&e, &m);
            assert!((a2 / oracle - 1.0).abs() < 0.01, "seed {seed}: {a2} vs {oracle}");
        }
    }

    #[test]
    fn ad_grows_with_mass_in_the_far_tail() {
        let m = fig6();
        let clean = m.sample(500, 4).unwrap();
        let mut last = ad_statistic(&emp(&clean), &m);
        for far in [0.0, 20.0, 40.0, 80.0] {
            let mut xs = clean.clone();
            for (i, x) in xs.iter_mut().take(20).enumerate() {
                *x = far + i as f64;
            }
            let a2 = ad_statistic(&emp(&xs), &m);
            assert!(a2 > last, "{far}: {a2} <= {last}");
            last = a2;
        }
        // 4% of the sample beyond the model's 1e-5 tail: AD rejects, KS does not
        let mut xs = clean.clone();
        for (i, x) in xs.iter_mut().take(20).enumerate() {
            *x = 50.0 + i as f64;
        }
        let e = emp(&xs);
        assert!(asymptotic_ad_pvalue(ad_statistic(&e, &m), 500) < 1e-3);
        assert!(asymptotic_ks_pvalue(ks_statistic(&e, &m), 500) > 0.05);
    }

    #[test]
    fn ad_stays_finite_beyond_the_clamp() {
        let m = MixtureModel::single(0.0, 1.0).unwrap();
        let a2 = ad_statistic(&emp(&[1e4, 2e4]), &m);
        assert!(a2.is_finite() && a2 > 0.0);
    }

    #[test]
    fn kolmogorov_series_values() {
        assert_eq!(asymptotic_ks_pvalue(0.0, 100), 1.0);
        assert!(asymptotic_ks_pvalue(0.5, 1_000) < 1e-10);
        // references from scipy.special.kolmogorov
        assert!((asymptotic_ks_pvalue(0.04301, 1_000) - 0.048_048_895).abs() < 1e-6);
        assert!((kolmogorov_q(1.36) - 0.049_485_877).abs() < 1e-8);
        assert!((kolmogorov_q(1.0) - 0.269_999_672).abs() < 1e-8);
        assert!((kolmogorov_q(0.5) - 0.963_945_244).abs() < 1e-8);
        assert!(kolmogorov_q(0.05) <= 1.0);
    }

    #[test]
    fn ad_asymptotic_critical_points() {
        // classical limiting percentage points of A^2
        for (crit, alpha) in [(1.933, 0.10), (2.492, 0.05), (3.070, 0.025), (3.857, 0.01)] {
            let p = 1.0 - ad_inf_cdf(crit);
            assert!((p - alpha).abs() < 0.001, "{crit}: {p}");
        }
        assert_eq!(asymptotic_ad_pvalue(0.0, 10), 1.0);
        assert!(asymptotic_ad_pvalue(50.0, 500) < 1e-6);
    }

    #[test]
    fn bootstrap_with_zero_statistic_gives_one() {
        // a single point at the median has D = 0.5 for every resample of size 1
        let m = MixtureModel::single(0.0, 1.0).unwrap();
        let out = bootstrap_pvalue(&emp(&[0.0]), &m, StatisticKind::Ks, 199, 1, false).unwrap();
        assert_eq!(out.statistic, 0.5);
        assert_eq!(out.p_value, Some(1.0));
    }

    #[test]
    fn bootstrap_rejects_small_b_and_is_reproducible() {
        let m = fig6();
        let e = emp(&m.sample(300, 8).unwrap());
        assert!(bootstrap_pvalue(&e, &m, StatisticKind::Ad, 99, 1, false).is_err());
        let a = bootstrap_pvalue(&e, &m, StatisticKind::Ad, 199, 5, false).unwrap();
        let b = bootstrap_pvalue(&e, &m, StatisticKind::Ad, 199, 5, false).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| bootstrap_pvalue(&e, &m, StatisticKind::Ad, 199, 5, false).unwrap());
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let d = four.install(|| bootstrap_pvalue(&e, &m, StatisticKind::Ad, 199, 5, false).unwrap());
        assert_eq!(a, c);
        assert_eq!(a, d);
        let p = a.p_value.unwrap();
        assert!(p > 0.0 && p <= 1.0);
        assert!(matches!(a.p_method, PMethod::Bootstrap { replicates: 199, seed: 5, refit: false }));
    }

    #[test]
    fn refit_bootstrap_runs() {
        let m = fig6();
        let e = emp(&m.sample(200, 9).unwrap());
        let out = bootstrap_pvalue(&e, &m, StatisticKind::Ks, 100, 2, true).unwrap();
        assert!(out.p_value.unwrap() > 0.0);
    }

    #[test]
    fn gof_test_reports_method() {
        let m = fig6();
        let e = emp(&m.sample(100, 1).unwrap());
        let none = gof_test(&e, &m, StatisticKind::Ks, PMethod::None).unwrap();
        assert_eq!(none.p_value, None);
        let asy = gof_test(&e, &m, StatisticKind::Ad, PMethod::Asymptotic).unwrap();
        assert!(asy.p_value.is_some());
        assert_eq!(asy.statistic_kind, StatisticKind::Ad);
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        let m = fig6();
        let trials = 600;
        let mut ks_rej = 0;
        let mut ad_rej = 0;
        for t in 0..trials {
            let e = emp(&m.sample(200, 10_000 + t).unwrap());
            if asymptotic_ks_pvalue(ks_statistic(&e, &m), 200) < 0.05 {
                ks_rej += 1;
            }
            if asymptotic_ad_pvalue(ad_statistic(&e, &m), 200) < 0.05 {
                ad_rej += 1;
            }
        }
        let ks = ks_rej as f64 / trials as f64;
        let ad = ad_rej as f64 / trials as f64;
        assert!((ks - 0.05).abs() <= 0.02, "KS rate {ks}");
        assert!((ad - 0.05).abs() <= 0.02, "AD rate {ad}");
    }

    #[test]
    fn bootstrap_null_rejection_rate_is_calibrated() {
        let m = MixtureModel::new(vec![
            LogisticComponent::new(0.7, 0.0, 1.0),
            LogisticComponent::new(0.3, 4.0, 2.0),
        ])
        .unwrap();
        let trials = 500;
        let rej = (0..trials)
            .filter(|&t| {
                let e = emp(&m.sample(50, 50_000 + t).unwrap());
                let out = bootstrap_pvalue(&e, &m, StatisticKind::Ad, 199, t, false).unwrap();
                out.p_value.unwrap() < 0.05
            })
            .count();
        let rate = rej as f64 / trials as f64;
        assert!((rate - 0.05).abs() <= 0.02, "{rate}");
    }

    proptest! {
        #[test]
        fn ks_is_invariant_under_probability_integral_transform(seed in 0u64..1_000, n in 1usize..300) {
            let m = fig6();
            let xs = m.sample(n, seed).unwrap();
            let us: Vec<f64> = xs.iter().map(|&x| m.cdf(x)).collect();
            let d1 = ks_statistic(&emp(&xs), &m);
            let d2 = ks_statistic(&emp(&us), &Uniform01);
            prop_assert!((d1 - d2).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&d1));
        }

        #[test]
        fn ad_is_nonnegative(xs in prop::collection::vec(-300.0f64..300.0, 1..100)) {
            let a2 = ad_statistic(&emp(&xs), &fig6());
            prop_assert!(a2 >= 0.0 && a2.is_finite());
        }
    }
}
