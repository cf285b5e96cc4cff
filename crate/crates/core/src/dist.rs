//! Logistic and Gaussian densities, and finite mixtures of logistics.
//!
//! Every logistic evaluation goes through the `e^{-|z|}` form so that tail
//! probabilities far beyond `|z| = 30` stay representable instead of rounding
//! to exactly zero or one.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Which population a score distribution describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Mated,
    #[serde(rename = "nonmated", alias = "non-mated")]
    NonMated,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Mated => "mated",
            Origin::NonMated => "nonmated",
        }
    }
}

impl std::str::FromStr for Origin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mated" => Ok(Origin::Mated),
            "nonmated" | "non-mated" => Ok(Origin::NonMated),
            other => Err(Error::domain(format!("unknown origin `{other}` (expected mated or nonmated)"))),
        }
    }
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const MIN_FEATURE_COUNT: u8 = 5;
pub const MAX_FEATURE_COUNT: u8 = 15;

pub(crate) fn check_feature_count(fc: u8) -> Result<u8> {
    if (MIN_FEATURE_COUNT..=MAX_FEATURE_COUNT).contains(&fc) {
        Ok(fc)
    } else {
        Err(Error::domain(format!(
            "feature_count {fc} outside [{MIN_FEATURE_COUNT}, {MAX_FEATURE_COUNT}]"
        )))
    }
}

/// Anything with a cumulative distribution function; the goodness-of-fit
/// statistics are written against this.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// Upper tail `1 - cdf(x)`. Implementors override this when they can
    /// compute it without cancellation.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

// Standard logistic pieces, all in the stable branch.

#[inline]
fn std_logistic_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn std_logistic_pdf(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    let d = 1.0 + e;
    e / (d * d)
}

#[inline]
fn std_logistic_ln_pdf(z: f64) -> f64 {
    let a = z.abs();
    -a - 2.0 * (-a).exp().ln_1p()
}

/// A single logistic distribution (no mixture weight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    location: f64,
    scale: f64,
}

impl Logistic {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::domain(format!("logistic location must be finite, got {location}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!("logistic scale must be positive and finite, got {scale}")));
        }
        Ok(Self { location, scale })
    }

    pub fn standard() -> Self {
        Self { location: 0.0, scale: 1.0 }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    fn z(&self, x: f64) -> f64 {
        (x - self.location) / self.scale
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        std_logistic_pdf(self.z(x)) / self.scale
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        std_logistic_ln_pdf(self.z(x)) - self.scale.ln()
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        std_logistic_cdf(self.z(x))
    }

    #[inline]
    pub fn sf(&self, x: f64) -> f64 {
        std_logistic_cdf(-self.z(x))
    }

    /// Closed-form inverse cdf; `p` must lie in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        self.location + self.scale * (p / (1.0 - p)).ln()
    }

    pub fn mean(&self) -> f64 {
        self.location
    }

    pub fn variance(&self) -> f64 {
        PI * PI * self.scale * self.scale / 3.0
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // open interval (0, 1)
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        self.location + self.scale * (u / (1.0 - u)).ln()
    }
}

impl Cdf for Logistic {
    fn cdf(&self, x: f64) -> f64 {
        Logistic::cdf(self, x)
    }
    fn sf(&self, x: f64) -> f64 {
        Logistic::sf(self, x)
    }
}

fn finite_arg(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::domain(format!("argument must be finite, got {x}")))
    }
}

/// Logistic density at `x`; rejects non-finite arguments.
pub fn logistic_pdf(x: f64, c: &Logistic) -> Result<f64> {
    Ok(c.pdf(finite_arg(x)?))
}

/// Logistic cdf at `x`; rejects non-finite arguments.
pub fn logistic_cdf(x: f64, c: &Logistic) -> Result<f64> {
    Ok(c.cdf(finite_arg(x)?))
}

/// One weighted component of a [`MixtureModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticComponent {
    pub weight: f64,
    pub location: f64,
    pub scale: f64,
}

impl LogisticComponent {
    pub fn new(weight: f64, location: f64, scale: f64) -> Self {
        Self { weight, location, scale }
    }

    pub fn distribution(&self) -> Logistic {
        Logistic { location: self.location, scale: self.scale }
    }
}

/// Tolerance on the sum of mixture weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A finite mixture of logistic distributions, components kept in ascending
/// order of location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct MixtureModel {
    components: Vec<LogisticComponent>,
    origin: Option<Origin>,
    feature_count: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct MixtureRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<Origin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature_count: Option<u8>,
    components: Vec<LogisticComponent>,
}

impl TryFrom<MixtureRepr> for MixtureModel {
    type Error = Error;

    fn try_from(r: MixtureRepr) -> Result<Self> {
        let mut m = MixtureModel::new(r.components)?;
        m.origin = r.origin;
        if let Some(fc) = r.feature_count {
            m = m.with_feature_count(fc)?;
        }
        Ok(m)
    }
}

impl From<MixtureModel> for MixtureRepr {
    fn from(m: MixtureModel) -> Self {
        MixtureRepr { origin: m.origin, feature_count: m.feature_count, components: m.components }
    }
}

impl MixtureModel {
    pub fn new(mut components: Vec<LogisticComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::model("a mixture needs at least one component"));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.weight > 0.0 && c.weight <= 1.0) {
                return Err(Error::model(format!("component {i}: weight {} outside (0, 1]", c.weight)));
            }
            if !c.location.is_finite() {
                return Err(Error::model(format!("component {i}: non-finite location")));
            }
            if !(c.scale > 0.0 && c.scale.is_finite()) {
                return Err(Error::model(format!("component {i}: scale {} must be positive", c.scale)));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::model(format!("weights sum to {total}, expected 1")));
        }
        components.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(Self { components, origin: None, feature_count: None })
    }

    pub fn single(location: f64, scale: f64) -> Result<Self> {
        Self::new(vec![LogisticComponent::new(1.0, location, scale)])
    }

    /// The 15-feature non-mated model published with FRStat.
    pub fn frstat_nonmated_15() -> Self {
        Self::new(vec![
            LogisticComponent::new(0.8, -83.75, 5.625),
            LogisticComponent::new(0.2, -61.25, 10.9375),
        ])
        .expect("reference parameters are valid")
        .with_origin(Origin::NonMated)
        .with_feature_count(15)
        .expect("15 is a valid feature count")
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn with_feature_count(mut self, fc: u8) -> Result<Self> {
        self.feature_count = Some(check_feature_count(fc)?);
        Ok(self)
    }

    pub fn components(&self) -> &[LogisticComponent] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn origin(&self) -> Option<Origin> {
        self.origin
    }

    pub fn feature_count(&self) -> Option<u8> {
        self.feature_count
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.distribution().pdf(x)).sum()
    }

    /// Log density through log-sum-exp, finite wherever some component's
    /// log density is.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        ln_mixture_density(&self.components, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.distribution().cdf(x)).sum::<f64>().min(1.0)
    }

    /// Right tail `P(X > x)` summed per component; no `1 - cdf` cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.distribution().sf(x)).sum::<f64>().min(1.0)
    }

    /// Bracket used by the quantile and tipping-point searches.
    pub fn search_bracket(&self) -> (f64, f64) {
        let max_scale = self.components.iter().map(|c| c.scale).fold(0.0, f64::max);
        let lo = self.components.first().unwrap().location - 50.0 * max_scale;
        let hi = self.components.last().unwrap().location + 50.0 * max_scale;
        (lo, hi)
    }

    /// Inverse cdf by bisection; the result satisfies `cdf(x) = p` to within
    /// floating-point resolution of `x`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let (mut lo, mut hi) = self.search_bracket();
        let width = hi - lo;
        // Upper levels are matched on the survival function to keep precision.
        let upper = p > 0.5;
        let q = 1.0 - p;
        let below = |x: f64| if upper { self.sf(x) > q } else { self.cdf(x) < p };
        while !below(lo) {
            lo -= width;
        }
        while below(hi) {
            hi += width;
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `n` i.i.d. draws using a generator seeded from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = rng::seeded(seed);
        self.sample_with(n, &mut rng)
    }

    /// Draws a component by weight, then inverts that component's cdf.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let last = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc || i == last {
                return c.distribution().draw(rng);
            }
        }
        unreachable!()
    }

    pub fn log_likelihood(&self, data: &[f64]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(data.iter().map(|&x| self.ln_pdf(x)).sum())
    }
}

impl Cdf for MixtureModel {
    fn cdf(&self, x: f64) -> f64 {
        MixtureModel::cdf(self, x)
    }
    fn sf(&self, x: f64) -> f64 {
        MixtureModel::sf(self, x)
    }
}

pub(crate) fn ln_mixture_density(components: &[LogisticComponent], x: f64) -> f64 {
    let mut terms = [0.0f64; 8];
    let mut heap;
    let buf: &mut [f64] = if components.len() <= terms.len() {
        &mut terms[..components.len()]
    } else {
        heap = vec![0.0; components.len()];
        &mut heap
    };
    for (t, c) in buf.iter_mut().zip(components) {
        *t = c.weight.ln() + c.distribution().ln_pdf(x);
    }
    let m = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + buf.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

pub fn mixture_pdf(m: &MixtureModel, x: f64) -> f64 {
    m.pdf(x)
}

pub fn mixture_cdf(m: &MixtureModel, x: f64) -> f64 {
    m.cdf(x)
}

pub fn mixture_quantile(m: &MixtureModel, p: f64) -> Result<f64> {
    m.quantile(p)
}

pub fn mixture_sample(m: &MixtureModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    m.sample(n, seed)
}

pub fn log_likelihood(m: &MixtureModel, data: &[f64]) -> Result<f64> {
    m.log_likelihood(data)
}

/// Normal distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    mean: f64,
    sd: f64,
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

impl GaussianParams {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::domain(format!("gaussian mean must be finite, got {mean}")));
        }
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::domain(format!("gaussian sd must be positive, got {sd}")));
        }
        Ok(Self { mean, sd })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z - LN_SQRT_2PI - self.sd.ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-(x - self.mean) / (self.sd * SQRT_2))
    }

    pub fn sf(&self, x: f64) -> f64 {
        0.5 * libm::erfc((x - self.mean) / (self.sd * SQRT_2))
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Box-Muller, cosine branch only so each draw consumes exactly two
        // uniforms.
        let u1 = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        let u2: f64 = rng.gen();
        self.mean + self.sd * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

impl Cdf for GaussianParams {
    fn cdf(&self, x: f64) -> f64 {
        GaussianParams::cdf(self, x)
    }
    fn sf(&self, x: f64) -> f64 {
        GaussianParams::sf(self, x)
    }
}

pub fn gaussian_pdf(x: f64, g: &GaussianParams) -> f64 {
    g.pdf(x)
}

pub fn gaussian_cdf(x: f64, g: &GaussianParams) -> f64 {
    g.cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::*;
    use proptest::prelude::*;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    fn fig6() -> MixtureModel {
        MixtureModel::frstat_nonmated_15()
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + h * i as f64)).sum();
        h * (0.5 * f(a) + inner + 0.5 * f(b))
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn logistic_pdf_mode_values() {
        assert_eq!(logistic_pdf(0.0, &Logistic::standard()).unwrap(), 0.25);
        assert_eq!(logistic_pdf(0.0, &Logistic::new(0.0, 2.0).unwrap()).unwrap(), 0.125);
    }

    #[test]
    fn logistic_pdf_is_symmetric() {
        let c = Logistic::new(3.0, 1.7).unwrap();
        for d in [0.1, 1.0, 5.0, 40.0] {
            assert!(close(c.pdf(3.0 + d), c.pdf(3.0 - d), 1e-18));
        }
    }

    #[test]
    fn logistic_cdf_values() {
        let c = Logistic::new(-4.0, 2.5).unwrap();
        assert_eq!(logistic_cdf(-4.0, &c).unwrap(), 0.5);
        assert_eq!(c.cdf(1e6), 1.0);
        // 1 / (1 + 1/3)
        assert!(close(logistic_cdf(3f64.ln(), &Logistic::standard()).unwrap(), 0.75, 1e-15));
    }

    #[test]
    fn non_finite_or_bad_scale_is_a_domain_error() {
        assert!(matches!(logistic_pdf(f64::NAN, &Logistic::standard()), Err(Error::Domain(_))));
        assert!(matches!(logistic_cdf(f64::INFINITY, &Logistic::standard()), Err(Error::Domain(_))));
        assert!(Logistic::new(0.0, 0.0).is_err());
        assert!(Logistic::new(0.0, -1.0).is_err());
    }

    #[test]
    fn far_tails_do_not_underflow() {
        let c = Logistic::standard();
        assert!(c.sf(40.0) > 0.0);
        assert!(close(c.sf(40.0) / (-40f64).exp(), 1.0, 1e-12));
        assert!(c.cdf(-700.0) > 0.0);
        assert!(c.pdf(700.0) > 0.0);
    }

    #[test]
    fn fig6_density_at_first_location() {
        // 0.8 * 1/(4 * 5.625) + 0.2 * pdf(-83.75; -61.25, 10.9375), by hand
        let z: f64 = (-83.75 - -61.25) / 10.9375;
        let second = (-z).exp() / (10.9375 * (1.0 + (-z).exp()).powi(2));
        let oracle = 0.8 / (4.0 * 5.625) + 0.2 * second;
        assert!(close(oracle, 0.037_393, 1e-5));
        assert!(close(mixture_pdf(&fig6(), -83.75), oracle, 1e-15));
    }

    #[test]
    fn single_component_mixture_matches_logistic() {
        let m = MixtureModel::single(2.0, 3.0).unwrap();
        let c = Logistic::new(2.0, 3.0).unwrap();
        for x in [-10.0, 0.0, 2.0, 7.5] {
            assert_eq!(m.pdf(x), c.pdf(x));
            assert_eq!(m.cdf(x), c.cdf(x));
        }
    }

    #[test]
    fn fig6_density_integrates_to_one() {
        let total = trapezoid(|x| fig6().pdf(x), -300.0, 300.0, 200_000);
        assert!(close(total, 1.0, 1e-6), "integral {total}");
    }

    #[test]
    fn fig6_right_tail_matches_table1_model_row() {
        let m = fig6();
        let t0 = 1.0 - mixture_cdf(&m, 0.0);
        assert!((t0 / 7.3e-4 - 1.0).abs() < 0.05, "{t0}");
        let t25 = 1.0 - mixture_cdf(&m, 25.0);
        assert!((t25 / 7e-5 - 1.0).abs() < 0.10, "{t25}");
        // stable tail agrees with the subtraction where both are accurate
        assert!(close(m.sf(0.0), t0, 1e-15));
    }

    #[test]
    fn symmetric_two_component_midpoint_is_median() {
        let m = MixtureModel::new(vec![
            LogisticComponent::new(0.5, -10.0, 2.0),
            LogisticComponent::new(0.5, 30.0, 2.0),
        ])
        .unwrap();
        assert!(close(m.cdf(10.0), 0.5, 1e-15));
    }

    #[test]
    fn model_invariants_are_enforced() {
        assert!(MixtureModel::new(vec![]).is_err());
        let bad_sum = vec![LogisticComponent::new(0.6, 0.0, 1.0), LogisticComponent::new(0.6, 1.0, 1.0)];
        assert!(matches!(MixtureModel::new(bad_sum), Err(Error::InvalidModel(_))));
        assert!(MixtureModel::new(vec![LogisticComponent::new(1.0, 0.0, 0.0)]).is_err());
        assert!(MixtureModel::new(vec![LogisticComponent::new(0.0, 0.0, 1.0), LogisticComponent::new(1.0, 0.0, 1.0)]).is_err());
        let m = MixtureModel::new(vec![LogisticComponent::new(0.3, 5.0, 1.0), LogisticComponent::new(0.7, -5.0, 1.0)]).unwrap();
        assert_eq!(m.components()[0].location, -5.0);
        assert!(m.clone().with_feature_count(4).is_err());
        assert!(m.with_feature_count(16).is_err());
    }

    #[test]
    fn quantile_examples() {
        let m = MixtureModel::single(0.0, 1.0).unwrap();
        assert!(close(mixture_quantile(&m, 0.75).unwrap(), 3f64.ln(), 1e-12));
        let m = MixtureModel::single(-7.0, 2.0).unwrap();
        assert!(close(m.quantile(0.5).unwrap(), -7.0, 1e-12));
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(m.quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_roundtrip_in_bulk() {
        let m = fig6();
        for x0 in [-100.0, -90.0, -83.75, -70.0, -61.25, -40.0] {
            let back = m.quantile(m.cdf(x0)).unwrap();
            assert!(close(back, x0, 1e-8), "{x0} -> {back}");
        }
    }

    #[test]
    fn quantile_reaches_extreme_levels() {
        let m = fig6();
        let p = 1.0 - 1e-9;
        let x = m.quantile(p).unwrap();
        // target is the representable 1 - p, not the literal 1e-9
        assert!(close(m.sf(x) / (1.0 - p), 1.0, 1e-9));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = fig6();
        assert_eq!(mixture_sample(&m, 100, 42).unwrap(), mixture_sample(&m, 100, 42).unwrap());
        assert_ne!(m.sample(100, 42).unwrap(), m.sample(100, 43).unwrap());
        assert!(matches!(m.sample(0, 1), Err(Error::EmptySample)));
    }

    #[test]
    fn sample_tail_fraction_matches_binomial() {
        let m = fig6();
        let p = m.sf(0.0);
        let n = 1_500.0;
        let sd = (n * p * (1.0 - p)).sqrt();
        // pool several independent seeds so the check has some bite
        for seed in 0..10 {
            let s = m.sample(1_500, seed).unwrap();
            let count = s.iter().filter(|&&x| x > 0.0).count() as f64;
            assert!((count - n * p).abs() <= 3.0 * sd.max(1.0), "seed {seed}: {count}");
        }
    }

    #[test]
    fn sample_mean_of_single_logistic() {
        let c = Logistic::new(12.0, 3.0).unwrap();
        let m = MixtureModel::single(12.0, 3.0).unwrap();
        let n = 100_000;
        let s = m.sample(n, 9).unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        let bound = 4.0 * c.variance().sqrt() / (n as f64).sqrt();
        assert!((mean - 12.0).abs() < bound, "{mean}");
    }

    #[test]
    fn log_likelihood_examples() {
        let m = MixtureModel::single(0.0, 1.0).unwrap();
        assert!(close(log_likelihood(&m, &[0.0]).unwrap(), 0.25f64.ln(), 1e-15));
        assert!(close(m.log_likelihood(&[0.0, 0.0]).unwrap(), 2.0 * 0.25f64.ln(), 1e-15));
        assert!(matches!(m.log_likelihood(&[]), Err(Error::EmptySample)));
        // far outside every component the log-sum-exp path stays finite
        assert!(fig6().log_likelihood(&[5_000.0]).unwrap().is_finite());
    }

    #[test]
    fn mean_log_likelihood_matches_entropy_estimate() {
        let m = fig6();
        let data = m.sample(1_000, 5).unwrap();
        let mean_ll = m.log_likelihood(&data).unwrap() / 1_000.0;
        // independent Monte Carlo estimate of -H = E[ln f(X)] and its spread
        let big = m.sample(200_000, 6).unwrap();
        let lls: Vec<f64> = big.iter().map(|&x| m.ln_pdf(x)).collect();
        let mu = lls.iter().sum::<f64>() / lls.len() as f64;
        let var = lls.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (lls.len() - 1) as f64;
        let se = (var / 1_000.0).sqrt();
        assert!((mean_ll - mu).abs() < 3.0 * se, "{mean_ll} vs {mu} ± {se}");
    }

    #[test]
    fn gaussian_examples() {
        let g = GaussianParams::new(0.0, 1.0).unwrap();
        assert!(close(gaussian_pdf(0.0, &g), 0.398_942_280_401_432_7, 1e-15));
        assert!(close(gaussian_cdf(0.0, &g), 0.5, 1e-16));
        let g2 = GaussianParams::new(4.0, 2.0).unwrap();
        assert!(close(g2.cdf(4.0), 0.5, 1e-16));
        // Simpson over [-12, 1.96] as the independent reference
        let oracle = simpson(|x| g.pdf(x), -12.0, 1.96, 20_000);
        assert!(close(oracle, 0.9750, 1e-4));
        assert!(close(g.cdf(1.96), oracle, 1e-7));
        assert!(GaussianParams::new(0.0, 0.0).is_err());
        assert!(GaussianParams::new(0.0, -2.0).is_err());
    }

    #[test]
    fn gaussian_cdf_matches_quadrature_on_a_grid() {
        let g = GaussianParams::new(1.0, 0.7).unwrap();
        for x in [-2.0, -0.5, 0.3, 1.0, 2.2, 3.5] {
            let oracle = simpson(|t| g.pdf(t), 1.0 - 12.0 * 0.7, x, 20_000);
            assert!(close(g.cdf(x), oracle, 1e-7), "{x}");
            assert!(close(g.sf(x), 1.0 - oracle, 1e-7));
        }
    }

    fn arb_model() -> impl Strategy<Value = MixtureModel> {
        prop::collection::vec((0.05f64..1.0, -100.0f64..100.0, 0.5f64..20.0), 1..4).prop_map(|raw| {
            let total: f64 = raw.iter().map(|r| r.0).sum();
            let comps = raw.iter().map(|&(w, l, s)| LogisticComponent::new(w / total, l, s)).collect();
            MixtureModel::new(comps).unwrap()
        })
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(m in arb_model(), a in -400.0f64..400.0, d in 0.0f64..100.0) {
            prop_assert!(m.cdf(a) <= m.cdf(a + d));
            prop_assert!(m.sf(a) >= m.sf(a + d));
        }

        #[test]
        fn density_integrates_to_one(m in arb_model()) {
            let max_scale = m.components().iter().map(|c| c.scale).fold(0.0, f64::max);
            let lo = m.components().first().unwrap().location - 60.0 * max_scale;
            let hi = m.components().last().unwrap().location + 60.0 * max_scale;
            let total = trapezoid(|x| m.pdf(x), lo, hi, 100_000);
            prop_assert!((total - 1.0).abs() < 1e-6, "{}", total);
        }

        #[test]
        fn quantile_and_cdf_are_inverse(m in arb_model(), p in 0.001f64..0.999) {
            let x = m.quantile(p).unwrap();
            prop_assert!((m.cdf(x) - p).abs() < 1e-10);
            let x0 = x;
            prop_assert!((m.quantile(m.cdf(x0)).unwrap() - x0).abs() < 1e-8 * x0.abs().max(1.0));
        }
    }

    #[test]
    fn empirical_cdf_of_draws_converges() {
        let m = fig6();
        let mut s = m.sample(10_000, 77).unwrap();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let d = s
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = m.cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max);
        assert!(d < 0.02, "{d}");
    }
}
