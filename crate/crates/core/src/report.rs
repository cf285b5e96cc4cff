//! Plain-language wording of an evidence report.
//!
//! The ratio of tail probabilities compares two error risks, so it is worded
//! as exactly that, and the absolute risk of erroneous identification is
//! always stated next to it: a large ratio says nothing about how small
//! either risk is.

use crate::evidence::{EvidenceReport, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Significant figures for the ratio.
    pub sig_figs: u32,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { sig_figs: 1 }
    }
}

/// Rounds a positive finite value to `sig` significant figures.
pub fn round_sig(x: f64, sig: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let sig = sig.max(1) as i32;
    let exp = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(sig - 1 - exp);
    let r = (x * factor).round() / factor;
    // rounding 9.6 up to 10 may need one fewer decimal; re-round once
    let exp2 = r.abs().log10().floor() as i32;
    if exp2 != exp {
        let f2 = 10f64.powi(sig - 1 - exp2);
        (r * f2).round() / f2
    } else {
        r
    }
}

/// Groups the integer part in thousands; small values keep their decimals,
/// very large ones switch to scientific notation.
pub fn format_magnitude(x: f64) -> String {
    if x >= 1e15 {
        return format!("{x:e}");
    }
    if x.fract() != 0.0 {
        return format!("{x}");
    }
    let digits = format!("{}", x as u64);
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Two significant figures in scientific notation, e.g. `7.4e-4`.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else {
        format!("{p:.1e}")
    }
}

fn beta_sentence(r: &EvidenceReport) -> String {
    format!(
        "The risk of erroneous identification itself is {} (risk of erroneous exclusion {}).",
        format_probability(r.beta),
        format_probability(r.alpha)
    )
}

pub fn render_report(r: &EvidenceReport, opts: ReportOptions) -> String {
    let comparison = match r.ratio {
        Ratio::Saturated => "The risk of erroneous identification is too small to represent, so the risk of \
             erroneous exclusion cannot be expressed as a multiple of it."
            .to_string(),
        Ratio::Finite(v) if v == 0.0 => "The risk of erroneous exclusion is too small to represent, so it \
             cannot be expressed as a multiple of the risk of erroneous identification."
            .to_string(),
        Ratio::Finite(v) => {
            let (magnitude, direction) = if v >= 1.0 { (v, "greater") } else { (1.0 / v, "smaller") };
            let rounded = round_sig(magnitude, opts.sig_figs);
            if rounded == 1.0 {
                "The risk of erroneous exclusion is 1 times the risk of erroneous identification.".to_string()
            } else {
                format!(
                    "The risk of erroneous exclusion is {} times {direction} than the risk of erroneous identification.",
                    format_magnitude(rounded)
                )
            }
        }
    };
    format!("{comparison} {}", beta_sentence(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(alpha: f64, beta: f64) -> EvidenceReport {
        EvidenceReport {
            observed_score: 0.0,
            alpha,
            beta,
            ratio: Ratio::from_parts(alpha, beta),
            slr: Ratio::Finite(1.0),
            mated_model: None,
            nonmated_model: None,
        }
    }

    #[test]
    fn ratio_about_one_hundred() {
        let text = render_report(&report(0.0759, 7.37e-4), ReportOptions::default());
        assert!(text.contains("100 times greater"), "{text}");
        assert!(text.contains("7.4e-4"), "{text}");
    }

    #[test]
    fn unit_ratio_drops_direction() {
        let text = render_report(&report(0.3, 0.3), ReportOptions::default());
        assert!(text.contains("is 1 times the risk"), "{text}");
        assert!(!text.contains("greater") && !text.contains("smaller"));
    }

    #[test]
    fn reciprocal_branch() {
        let text = render_report(&report(0.02, 0.1), ReportOptions::default());
        assert!(text.contains("5 times smaller"), "{text}");
        assert!(text.contains("1.0e-1"), "{text}");
    }

    #[test]
    fn saturated_ratio_still_states_beta() {
        let text = render_report(&report(0.9, 0.0), ReportOptions::default());
        assert!(text.contains("too small to represent"));
        assert!(text.contains("identification itself is 0"));
        let text = render_report(&report(0.0, 0.5), ReportOptions::default());
        assert!(text.contains("erroneous exclusion is too small"));
    }

    #[test]
    fn rounding_and_grouping() {
        assert_eq!(round_sig(102.9, 1), 100.0);
        assert_eq!(round_sig(96.0, 1), 100.0);
        assert_eq!(round_sig(0.0437, 1), 0.04);
        assert_eq!(round_sig(102.9, 2), 100.0);
        assert_eq!(round_sig(156.0, 2), 160.0);
        assert_eq!(format_magnitude(100_000.0), "100,000");
        assert_eq!(format_magnitude(5.0), "5");
        assert_eq!(format_magnitude(2e20), "2e20");
        let text = render_report(&report(0.5, 3.1e-6), ReportOptions { sig_figs: 2 });
        assert!(text.contains("160,000 times greater"), "{text}");
    }
}
