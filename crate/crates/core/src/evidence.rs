//! Evidence numbers for an observed similarity score.
//!
//! FRStat-style tools report two tail probabilities and their quotient:
//!
//! * `alpha`, the risk of erroneous exclusion: mass of the mated score
//!   distribution *below* the observed score;
//! * `beta`, the risk of erroneous identification: mass of the non-mated
//!   score distribution *above* the observed score;
//! * `alpha / beta`.
//!
//! None of these is a likelihood ratio. The score-based likelihood ratio is a
//! quotient of densities at the observed score, and the two disagree even
//! about where "no support either way" lies; [`tipping_score`] locates the
//! score where `alpha = beta` so the disagreement can be measured.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::{GaussianParams, MixtureModel};
use crate::error::{Error, Result};

/// A non-negative ratio, or a marker that its denominator underflowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Saturated,
}

impl Ratio {
    pub fn from_parts(numerator: f64, denominator: f64) -> Self {
        if denominator > 0.0 {
            let r = numerator / denominator;
            if r.is_finite() {
                return Ratio::Finite(r);
            }
        }
        Ratio::Saturated
    }

    pub fn from_ln(ln: f64) -> Self {
        let r = ln.exp();
        if r.is_finite() {
            Ratio::Finite(r)
        } else {
            Ratio::Saturated
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            Ratio::Saturated => None,
        }
    }

    pub fn is_saturated(self) -> bool {
        matches!(self, Ratio::Saturated)
    }

    /// Sorts saturated values above every finite one.
    pub fn exceeds(self, threshold: f64) -> bool {
        match self {
            Ratio::Finite(v) => v > threshold,
            Ratio::Saturated => true,
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Saturated => f.write_str(SATURATED),
        }
    }
}

pub const SATURATED: &str = "saturated";

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(v) => s.serialize_f64(*v),
            Ratio::Saturated => s.serialize_str(SATURATED),
        }
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Ratio::Finite(v)),
            Repr::Tag(t) if t == SATURATED => Ok(Ratio::Saturated),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("expected a number or \"{SATURATED}\", got {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrstatNumbers {
    pub alpha: f64,
    pub beta: f64,
    pub ratio: Ratio,
}

/// Everything reported for one comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub observed_score: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ratio: Ratio,
    pub slr: Ratio,
    pub mated_model: Option<String>,
    pub nonmated_model: Option<String>,
}

/// Left tail of the mated distribution at `s`.
pub fn alpha_tail(mated: &MixtureModel, s: f64) -> f64 {
    mated.cdf(s)
}

/// Right tail of the non-mated distribution at `s`, summed per component so
/// values down to the smallest normal double survive.
pub fn beta_tail(nonmated: &MixtureModel, s: f64) -> f64 {
    nonmated.sf(s)
}

pub fn frstat_numbers(mated: &MixtureModel, nonmated: &MixtureModel, s: f64) -> FrstatNumbers {
    let alpha = alpha_tail(mated, s);
    let beta = beta_tail(nonmated, s);
    FrstatNumbers { alpha, beta, ratio: Ratio::from_parts(alpha, beta) }
}

pub fn ln_score_lr(mated: &MixtureModel, nonmated: &MixtureModel, s: f64) -> f64 {
    mated.ln_pdf(s) - nonmated.ln_pdf(s)
}

/// Density ratio `f_mated(s) / f_nonmated(s)`, computed in log space.
pub fn score_lr(mated: &MixtureModel, nonmated: &MixtureModel, s: f64) -> Ratio {
    Ratio::from_ln(ln_score_lr(mated, nonmated, s))
}

pub fn evaluate(mated: &MixtureModel, nonmated: &MixtureModel, s: f64) -> EvidenceReport {
    let n = frstat_numbers(mated, nonmated, s);
    EvidenceReport {
        observed_score: s,
        alpha: n.alpha,
        beta: n.beta,
        ratio: n.ratio,
        slr: score_lr(mated, nonmated, s),
        mated_model: None,
        nonmated_model: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TippingPoint {
    pub score: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Score-based likelihood ratio at the same score.
    pub slr: Ratio,
}

/// Score where `alpha = beta`, i.e. where the tail ratio equals one.
pub fn tipping_score(mated: &MixtureModel, nonmated: &MixtureModel) -> Result<TippingPoint> {
    let (a_lo, a_hi) = mated.search_bracket();
    let (b_lo, b_hi) = nonmated.search_bracket();
    let (mut lo, mut hi) = (a_lo.min(b_lo), a_hi.max(b_hi));
    let gap = |s: f64| alpha_tail(mated, s) - beta_tail(nonmated, s);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NoTippingPoint { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = gap(mid);
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // keep whichever end has the smaller gap
    let score = if gap(lo).abs() <= gap(hi).abs() { lo } else { hi };
    Ok(TippingPoint {
        score,
        alpha: alpha_tail(mated, score),
        beta: beta_tail(nonmated, score),
        slr: score_lr(mated, nonmated, score),
    })
}

/// Population frequencies of a discrete trait (e.g. ABO blood groups).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BloodTypeTable {
    entries: Vec<(String, f64)>,
}

impl BloodTypeTable {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::domain("frequency table is empty"));
        }
        for (label, p) in &entries {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::domain(format!("frequency of {label} must lie in (0, 1], got {p}")));
            }
        }
        for (i, (a, _)) in entries.iter().enumerate() {
            if entries[..i].iter().any(|(b, _)| a == b) {
                return Err(Error::domain(format!("duplicate type label {a}")));
            }
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("frequencies sum to {total}, expected 1")));
        }
        Ok(Self { entries })
    }

    /// U.S. ABO frequencies: O 44%, A 42%, B 10%, AB 4%.
    pub fn abo_us() -> Self {
        Self::new(vec![
            ("O".into(), 0.44),
            ("A".into(), 0.42),
            ("B".into(), 0.10),
            ("AB".into(), 0.04),
        ])
        .expect("valid table")
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn frequency(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|e| e.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightOfEvidence {
    /// `1 / sum p_i^2`: ignores which type was actually observed.
    pub correspondence_ratio: f64,
    /// `1 / p_t` for each type.
    pub per_type_lr: BTreeMap<String, f64>,
    pub observed: Option<(String, f64)>,
}

pub fn discrete_woe(table: &BloodTypeTable, observed_type: Option<&str>) -> Result<WeightOfEvidence> {
    let match_prob: f64 = table.entries.iter().map(|(_, p)| p * p).sum();
    let per_type_lr: BTreeMap<String, f64> =
        table.entries.iter().map(|(l, p)| (l.clone(), 1.0 / p)).collect();
    let observed = match observed_type {
        None => None,
        Some(t) => {
            let lr = per_type_lr
                .get(t)
                .copied()
                .ok_or_else(|| Error::domain(format!("unknown type label {t}")))?;
            Some((t.to_string(), lr))
        }
    };
    Ok(WeightOfEvidence { correspondence_ratio: 1.0 / match_prob, per_type_lr, observed })
}

/// Which donor produced the trace observation in the normal toy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Trace and control share a donor: the observation comes from the
    /// named source.
    H0,
    /// Different donors: the observation comes from a random member of the
    /// population.
    H1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

/// Normal two-level toy population: source means spread with `between_sd`
/// around `pop_mean`, observations spread with `within_sd` around their
/// source mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyScenario {
    pub name: String,
    pub pop_mean: f64,
    pub between_sd: f64,
    pub within_sd: f64,
    pub source_mean: f64,
}

impl ToyScenario {
    pub fn new(name: impl Into<String>, pop_mean: f64, between_sd: f64, within_sd: f64, source_mean: f64) -> Result<Self> {
        let sc = Self { name: name.into(), pop_mean, between_sd, within_sd, source_mean };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pop_mean.is_finite() && self.source_mean.is_finite()) {
            return Err(Error::domain("toy scenario means must be finite"));
        }
        if !(self.between_sd >= 0.0 && self.within_sd >= 0.0) {
            return Err(Error::domain("toy scenario standard deviations must be non-negative"));
        }
        if self.between_sd == 0.0 && self.within_sd == 0.0 {
            return Err(Error::domain("between_sd and within_sd cannot both be zero"));
        }
        Ok(())
    }

    /// Spread of a single observation from a random population source.
    pub fn population_sd(&self) -> f64 {
        self.between_sd.hypot(self.within_sd)
    }

    pub fn population(&self) -> GaussianParams {
        GaussianParams::new(self.pop_mean, self.population_sd()).expect("validated scenario")
    }

    /// `None` when the source has no within-source spread (a point mass).
    pub fn source(&self) -> Option<GaussianParams> {
        (self.within_sd > 0.0).then(|| GaussianParams::new(self.source_mean, self.within_sd).expect("validated scenario"))
    }

    /// Rows (a), (b), (c): common source with some variance, rare source with
    /// some variance, common source with virtually no variance.
    pub fn standard_set() -> Vec<ToyScenario> {
        Self::standard_set_for(0.0, 1.0).expect("valid constants")
    }

    /// The same three rows for another population.
    pub fn standard_set_for(pop_mean: f64, between_sd: f64) -> Result<Vec<ToyScenario>> {
        if !(between_sd > 0.0 && between_sd.is_finite()) {
            return Err(Error::domain(format!("between_sd must be positive, got {between_sd}")));
        }
        let some = 0.3 * between_sd;
        Ok(vec![
            ToyScenario::new("a", pop_mean, between_sd, some, pop_mean)?,
            ToyScenario::new("b", pop_mean, between_sd, some, pop_mean + 2.5 * between_sd)?,
            ToyScenario::new("c", pop_mean, between_sd, 0.01 * between_sd, pop_mean)?,
        ])
    }
}

/// `ln` of the specific-source likelihood ratio; `+inf` / `-inf` for a
/// point-mass source hit or missed exactly.
pub fn ln_specific_source_lr(sc: &ToyScenario, x: f64) -> f64 {
    let denom = sc.population().ln_pdf(x);
    match sc.source() {
        Some(src) => src.ln_pdf(x) - denom,
        None if x == sc.source_mean => f64::INFINITY,
        None => f64::NEG_INFINITY,
    }
}

/// Density of `x` under the named source over its density under a random
/// population source.
pub fn specific_source_lr(sc: &ToyScenario, x: f64) -> Ratio {
    Ratio::from_ln(ln_specific_source_lr(sc, x))
}

/// Tail numbers for the toy model with score `s = -|x - source_mean|`.
///
/// Mated scores come from observations of the named source, non-mated scores
/// from observations of random population members, so
/// `alpha = P(|X_src - mu| >= d)` and `beta = P(|X_pop - mu| <= d)` with
/// `d = |x - mu|`, both in closed form.
pub fn toy_frstat_numbers(sc: &ToyScenario, x: f64) -> FrstatNumbers {
    let d = (x - sc.source_mean).abs();
    let alpha = match sc.source() {
        Some(src) => 2.0 * src.sf(sc.source_mean + d),
        None if d == 0.0 => 1.0,
        None => 0.0,
    };
    let pop = sc.population();
    let (a, b) = (sc.source_mean - d, sc.source_mean + d);
    // P(a <= X <= b) from whichever tail keeps precision
    let beta = if a > pop.mean() {
        pop.sf(a) - pop.sf(b)
    } else if b < pop.mean() {
        pop.cdf(b) - pop.cdf(a)
    } else {
        1.0 - pop.cdf(a) - pop.sf(b)
    }
    .max(0.0);
    FrstatNumbers { alpha: alpha.min(1.0), beta, ratio: Ratio::from_parts(alpha.min(1.0), beta) }
}
