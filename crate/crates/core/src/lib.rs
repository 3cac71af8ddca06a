//! Decision-theoretic evaluation of binary risk prediction models.
//!
//! The crate scores a set of predicted risks against observed binary outcomes
//! with measures that share one cost framework: a cutoff `c` in (0, 1) encodes
//! the relative cost of a false positive versus a false negative, and every
//! score here is either evaluated at a single cutoff or averaged over a weight
//! distribution `w(c)` of cutoffs.
//!
//! * [`weightfn`]: weight distributions over cutoffs and their CDF / first
//!   incomplete moment.
//! * [`metrics`]: cost-weighted misclassification loss, net benefit, the
//!   weighted Brier score and Spiegelhalter-type calibration statistics.
//! * [`decompose`]: miscalibration / discrimination / uncertainty
//!   decomposition, IPA and the scaled weighted Brier score.
//! * [`rocutil`]: ROC curves, AUC, the H measure, decision curves.
//! * [`inference`]: asymptotic variances and bootstrap intervals.
//! * [`simlab`]: reproducible simulation designs.
//! * [`report`]: assembles all of the above into serializable reports.
//! * [`cli`]: the `wbrier` command-line front end.
//!
//! The Brier score carries a factor of one half throughout, so that with the
//! uniform weight `BS_w = mean((r - y)^2) / 2`.

// `!(x > 0.0)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decompose;
mod error;
pub mod inference;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod rocutil;
pub mod simlab;
pub mod special;
pub mod sum;
pub mod weightfn;

#[cfg(test)]
mod oracle;

pub use decompose::{BinningSpec, CalibrationBin, DecompositionReport, McbEstimator};
pub use error::{Error, Result};
pub use inference::{BootstrapConfig, CiMethod, CiRecord, ResamplingUnit};
pub use metrics::ValidationSet;
pub use report::ScoreReport;
pub use weightfn::{Component, WeightMoments, WeightSpec};
