//! Seeded, reproducible study harnesses.
//!
//! Every harness takes a master seed; independent work units draw from
//! `rng::stream(master, index)`, so output never depends on how many worker
//! threads ran them.

pub mod pvalues;
pub mod synth;
pub mod tails;
pub mod thresholds;
pub mod toy;

pub use pvalues::{pvalue_study, uniformity_distance, PSource, PValueRow, PValueStudyConfig, PValueStudyResult};
pub use synth::{generate_synthetic, SynthConfig};
pub use tails::{tail_audit, TailAudit};
pub use thresholds::{
    table_fixture_check, threshold_study, ThresholdInput, ThresholdRow, ThresholdTable, Violation,
    STANDARD_THRESHOLDS,
};
pub use toy::{toy_study, ToyRecord};
