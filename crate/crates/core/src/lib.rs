//! Score-based forensic evidence numbers under logistic mixture models.
//!
//! The crate computes the tail-probability triple (alpha, beta, alpha/beta)
//! reported by FRStat-style tools, the score-based likelihood ratio it is
//! often mistaken for, and the machinery needed to audit both: maximum
//! likelihood mixture fitting, Kolmogorov-Smirnov and Anderson-Darling
//! goodness-of-fit tests, and seeded simulation harnesses.

pub mod data;
pub mod dist;
pub mod error;
pub mod evidence;
pub mod experiments;
pub mod fit;
pub mod gof;
pub mod io;
pub mod report;
pub mod rng;

pub use dist::{GaussianParams, Logistic, LogisticComponent, MixtureModel, Origin};
pub use error::{Error, Result};
