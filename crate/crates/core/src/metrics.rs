//! Pointwise losses and dataset-level scores.
//!
//! Classification at cutoff `c` is "positive iff `r > c`". A risk exactly
//! equal to `c` is counted as neither positive nor negative: `ℓ_c` charges
//! nothing for it and it drops out of every rate. With that convention
//!
//! ```text
//! L(c) = (1 - c) [π - NB_in(c)] = c [1 - π - NB_out(c)]
//! ```
//!
//! holds exactly whenever no risk ties the cutoff.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::sum::par_mean;
use crate::weightfn::WeightSpec;

/// Paired predicted risks and binary outcomes, with optional resampling
/// clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    risks: Vec<f64>,
    outcomes: Vec<bool>,
    clusters: Option<Vec<u32>>,
    cluster_count: usize,
    cases: usize,
}

impl ValidationSet {
    pub fn new(risks: Vec<f64>, outcomes: Vec<bool>) -> Result<Self> {
        if risks.len() != outcomes.len() {
            return Err(Error::InvalidData(format!(
                "{} risks but {} outcomes",
                risks.len(),
                outcomes.len()
            )));
        }
        if risks.is_empty() {
            return Err(Error::InvalidData("dataset is empty".into()));
        }
        if let Some((i, r)) = risks.iter().enumerate().find(|(_, r)| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidData(format!("risk {r} at index {i} is outside [0, 1]")));
        }
        let cases = outcomes.iter().filter(|&&y| y).count();
        Ok(ValidationSet {
            risks,
            outcomes,
            clusters: None,
            cluster_count: 0,
            cases,
        })
    }

    /// Outcomes given as 0/1 integers.
    pub fn from_binary(risks: Vec<f64>, outcomes: &[u8]) -> Result<Self> {
        let outcomes = outcomes
            .iter()
            .enumerate()
            .map(|(i, &y)| match y {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidData(format!(
                    "outcome {other} at index {i} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(risks, outcomes)
    }

    /// Attach cluster identifiers (e.g. patient ids for repeated visits).
    /// Identifiers are relabelled densely in order of first appearance.
    pub fn with_clusters<K, I>(mut self, ids: I) -> Result<Self>
    where
        K: Hash + Eq,
        I: IntoIterator<Item = K>,
    {
        let mut index: HashMap<K, u32> = HashMap::new();
        let dense: Vec<u32> = ids
            .into_iter()
            .map(|id| {
                let next = index.len() as u32;
                *index.entry(id).or_insert(next)
            })
            .collect();
        if dense.len() != self.risks.len() {
            return Err(Error::InvalidData(format!(
                "{} cluster ids for {} observations",
                dense.len(),
                self.risks.len()
            )));
        }
        self.cluster_count = index.len();
        self.clusters = Some(dense);
        Ok(self)
    }

    /// Same outcomes and clusters, different model.
    pub fn with_risks(&self, risks: Vec<f64>) -> Result<Self> {
        let mut other = ValidationSet::new(risks, self.outcomes.clone())?;
        other.clusters = self.clusters.clone();
        other.cluster_count = self.cluster_count;
        Ok(other)
    }

    /// Rows at `indices` (with repetition), keeping cluster labels.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let risks: Vec<f64> = indices.iter().map(|&i| self.risks[i]).collect();
        let outcomes: Vec<bool> = indices.iter().map(|&i| self.outcomes[i]).collect();
        let cases = outcomes.iter().filter(|&&y| y).count();
        ValidationSet {
            risks,
            outcomes,
            clusters: self
                .clusters
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            cluster_count: self.cluster_count,
            cases,
        }
    }

    pub fn risks(&self) -> &[f64] {
        &self.risks
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn clusters(&self) -> Option<&[u32]> {
        self.clusters.as_deref()
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn len(&self) -> usize {
        self.risks.len()
    }

    /// Always false; a validation set has at least one row.
    pub fn is_empty(&self) -> bool {
        self.risks.is_empty()
    }

    pub fn cases(&self) -> usize {
        self.cases
    }

    pub fn controls(&self) -> usize {
        self.len() - self.cases
    }

    /// Sample prevalence `π̂`.
    pub fn prevalence(&self) -> f64 {
        self.cases as f64 / self.len() as f64
    }

    pub fn has_both_classes(&self) -> bool {
        self.cases > 0 && self.cases < self.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.risks.iter().copied().zip(self.outcomes.iter().copied())
    }
}

/// Optimal cutoff `c = C / (C + B)` for relative cost `C = C_FP − C_TN` of
/// treating a control and relative benefit `B = C_FN − C_TP` of treating a case.
pub fn cutoff_from_costs(c_fp: f64, c_tn: f64, c_fn: f64, c_tp: f64) -> Result<f64> {
    let cost = c_fp - c_tn;
    let benefit = c_fn - c_tp;
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::InvalidCost(format!(
            "relative cost of treating a control C_FP - C_TN = {cost} must be positive"
        )));
    }
    if !(benefit > 0.0 && benefit.is_finite()) {
        return Err(Error::InvalidCost(format!(
            "relative benefit of treating a case C_FN - C_TP = {benefit} must be positive"
        )));
    }
    Ok(cost / (cost + benefit))
}

/// Cost-weighted misclassification loss `ℓ_c(r, y)`.
#[inline]
pub fn loss_cw(risk: f64, outcome: bool, c: f64) -> f64 {
    if outcome {
        if risk < c {
            1.0 - c
        } else {
            0.0
        }
    } else if risk > c {
        c
    } else {
        0.0
    }
}

/// Cells of the 2x2 table at one cutoff. Ties with the cutoff are in neither
/// the `above_*` nor the `below_*` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CutoffCounts {
    pub above_cases: usize,
    pub above_controls: usize,
    pub below_cases: usize,
    pub below_controls: usize,
    pub n: usize,
}

impl CutoffCounts {
    pub fn tally(data: &ValidationSet, c: f64) -> Self {
        let mut counts = CutoffCounts {
            n: data.len(),
            ..Default::default()
        };
        for (r, y) in data.iter() {
            match (r > c, r < c, y) {
                (true, _, true) => counts.above_cases += 1,
                (true, _, false) => counts.above_controls += 1,
                (_, true, true) => counts.below_cases += 1,
                (_, true, false) => counts.below_controls += 1,
                _ => {}
            }
        }
        counts
    }

    /// `L(c) = c P(r > c, Y = 0) + (1 − c) P(r < c, Y = 1)`.
    pub fn loss(&self, c: f64) -> f64 {
        let n = self.n as f64;
        c * (self.above_controls as f64 / n) + (1.0 - c) * (self.below_cases as f64 / n)
    }

    /// `NB_in(c) = P(r > c, Y = 1) − c / (1 − c) P(r > c, Y = 0)`.
    pub fn net_benefit_opt_in(&self, c: f64) -> f64 {
        let n = self.n as f64;
        self.above_cases as f64 / n - c / (1.0 - c) * (self.above_controls as f64 / n)
    }

    /// `NB_out(c) = P(r < c, Y = 0) − (1 − c) / c P(r < c, Y = 1)`.
    pub fn net_benefit_opt_out(&self, c: f64) -> f64 {
        let n = self.n as f64;
        self.below_controls as f64 / n - (1.0 - c) / c * (self.below_cases as f64 / n)
    }
}

pub fn loss_at(data: &ValidationSet, c: f64) -> Result<f64> {
    let c = check_open_unit("cutoff", c)?;
    Ok(CutoffCounts::tally(data, c).loss(c))
}

pub fn net_benefit_opt_in(data: &ValidationSet, c: f64) -> Result<f64> {
    let c = check_open_unit("cutoff", c)?;
    Ok(CutoffCounts::tally(data, c).net_benefit_opt_in(c))
}

pub fn net_benefit_opt_out(data: &ValidationSet, c: f64) -> Result<f64> {
    let c = check_open_unit("cutoff", c)?;
    Ok(CutoffCounts::tally(data, c).net_benefit_opt_out(c))
}

/// `ℓ_w(r, y) = y A(r) + (1 − y) B(r)`, the cutoff loss averaged over `w`.
pub fn loss_w(risk: f64, outcome: bool, w: &WeightSpec) -> Result<f64> {
    Ok(w.moments(check_unit("risk", risk)?)?.outcome_loss(outcome))
}

/// Weighted Brier score `BS_w = mean ℓ_w(r_i, y_i)`.
pub fn weighted_brier(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let (risks, outcomes) = (data.risks(), data.outcomes());
    par_mean(data.len(), |i| w.moments_unchecked(risks[i]).outcome_loss(outcomes[i]))
}

/// `BS^c_w = mean ℓ_w(r_i, r_i)`: the weighted Brier score each prediction
/// would earn if it were well calibrated.
pub fn weighted_brier_calibrated(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let risks = data.risks();
    par_mean(data.len(), |i| w.moments_unchecked(risks[i]).loss(risks[i]))
}

/// Spiegelhalter's calibration statistic
/// `Σ (y − r)(1 − 2r) / sqrt(Σ (1 − 2r)² r (1 − r))`.
pub fn spiegelhalter_z(data: &ValidationSet) -> Result<f64> {
    let (risks, outcomes) = (data.risks(), data.outcomes());
    let n = data.len();
    let numerator = par_mean(n, |i| {
        let r = risks[i];
        (f64::from(u8::from(outcomes[i])) - r) * (1.0 - 2.0 * r)
    });
    let variance = par_mean(n, |i| {
        let r = risks[i];
        (1.0 - 2.0 * r).powi(2) * r * (1.0 - r)
    });
    if !(variance > 0.0) {
        return Err(Error::Degenerate(
            "Spiegelhalter variance is zero (all risks in {0, 0.5, 1})".into(),
        ));
    }
    Ok(numerator * (n as f64).sqrt() / variance.sqrt())
}

/// Weighted Spiegelhalter statistic: `(BS_w − BS^c_w) / (σ_0n / √n)` with
/// `BS_w − BS^c_w = mean (y − r)(1 − F_w(r) − μ_w)` and the null variance
/// `σ²_0n = mean r (1 − r) (1 − F_w(r) − μ_w)²`.
pub fn spiegelhalter_z_weighted(data: &ValidationSet, w: &WeightSpec) -> Result<f64> {
    let (risks, outcomes) = (data.risks(), data.outcomes());
    let n = data.len();
    let numerator = par_mean(n, |i| {
        let r = risks[i];
        (f64::from(u8::from(outcomes[i])) - r) * w.moments_unchecked(r).contrast()
    });
    let null_variance = null_variance(data, w);
    if !(null_variance > 0.0) {
        return Err(Error::Degenerate("weighted Spiegelhalter null variance is zero".into()));
    }
    Ok(numerator / (null_variance / n as f64).sqrt())
}

/// `σ²_0n`: conditional variance of `ℓ_w(r, Y)` under well-calibration.
pub(crate) fn null_variance(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let risks = data.risks();
    par_mean(data.len(), |i| {
        let r = risks[i];
        r * (1.0 - r) * w.moments_unchecked(r).contrast().powi(2)
    })
}
