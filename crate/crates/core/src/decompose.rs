//! Miscalibration / discrimination / uncertainty decomposition.
//!
//! Risks are grouped into bins and the recalibrated risk `r̃` is estimated by
//! the event rate of each bin. With `d(p, q) = ℓ_w(p, q) − ℓ_w(q, q)`:
//!
//! ```text
//! BS_w ≈ MCB_w − DSC_w + UNC_w
//! MCB_w = E d(r̂, r̃),  DSC_w = E d(π, r̃),  UNC_w = ℓ_w(π, π)
//! ```
//!
//! The identity is exact when every bin holds a single risk value
//! ([`BinningSpec::UniqueValues`]); otherwise the grouping error is reported
//! as [`DecompositionReport::residual`].

use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::metrics::{weighted_brier, ValidationSet};
use crate::weightfn::WeightSpec;

/// How risks are grouped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningSpec {
    /// `k` groups by quantiles of the risks. Tied cut points are merged, so
    /// fewer than `k` bins may result.
    Quantile(usize),
    /// One bin per distinct risk value.
    UniqueValues,
    /// Bins `[e0, e1], (e1, e2], …`; every risk must fall inside and every
    /// bin must be occupied.
    FixedEdges(Vec<f64>),
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec::Quantile(10)
    }
}

impl BinningSpec {
    fn validate(&self) -> Result<()> {
        match self {
            BinningSpec::Quantile(k) if *k < 2 => Err(Error::InvalidBinning(format!(
                "need at least 2 quantile bins, got {k}"
            ))),
            BinningSpec::FixedEdges(edges) => {
                if edges.len() < 2 {
                    return Err(Error::InvalidBinning("need at least two edges".into()));
                }
                if edges.iter().any(|e| !(0.0..=1.0).contains(e)) {
                    return Err(Error::InvalidBinning("edges must lie in [0, 1]".into()));
                }
                if edges.windows(2).any(|pair| pair[0] >= pair[1]) {
                    return Err(Error::InvalidBinning("edges must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Which divergence average estimates `MCB_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McbEstimator {
    /// `Σ (n_k / n) d(r̄_k, ȳ_k)`, the grouped form.
    #[default]
    BinMean,
    /// `(1 / n) Σ d(r̂_i, ȳ_{k(i)})`.
    PerSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationBin {
    pub n: usize,
    pub mean_risk: f64,
    pub event_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub mcb_w: f64,
    pub dsc_w: f64,
    pub unc_w: f64,
    pub bs_w: f64,
    /// `BS_w − (MCB_w − DSC_w + UNC_w)`.
    pub residual: f64,
    pub bins: Vec<CalibrationBin>,
    pub weight: WeightSpec,
    pub estimator: McbEstimator,
}

/// `ℓ_w(p, q)`: expected loss of predicting `p` when the event probability is `q`.
pub fn expected_loss(p: f64, q: f64, w: &WeightSpec) -> Result<f64> {
    let q = check_unit("event probability", q)?;
    Ok(w.moments(p)?.loss(q))
}

/// `d(p, q) = ℓ_w(p, q) − ℓ_w(q, q)`.
pub fn divergence(p: f64, q: f64, w: &WeightSpec) -> Result<f64> {
    check_unit("risk", p)?;
    check_unit("event probability", q)?;
    Ok(divergence_unchecked(p, q, w))
}

fn divergence_unchecked(p: f64, q: f64, w: &WeightSpec) -> f64 {
    (w.moments_unchecked(p).loss(q) - w.moments_unchecked(q).loss(q)).max(0.0)
}

/// `UNC_w = ℓ_w(π, π)`.
pub fn uncertainty(prevalence: f64, w: &WeightSpec) -> Result<f64> {
    let pi = check_unit("prevalence", prevalence)?;
    Ok(w.moments_unchecked(pi).loss(pi))
}

/// Index ranges into the risk-sorted order, one per bin.
struct Grouping {
    order: Vec<usize>,
    ranges: Vec<(usize, usize)>,
}

fn group(data: &ValidationSet, spec: &BinningSpec) -> Result<Grouping> {
    spec.validate()?;
    let risks = data.risks();
    let n = risks.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| risks[i].total_cmp(&risks[j]));
    let sorted = |pos: usize| risks[order[pos]];

    // each bin is described by its inclusive upper boundary
    let uppers: Vec<f64> = match spec {
        BinningSpec::Quantile(k) => {
            let mut cuts: Vec<f64> = (1..*k)
                .filter_map(|j| (j * n / k).checked_sub(1).map(sorted))
                .collect();
            cuts.push(sorted(n - 1));
            cuts.dedup();
            cuts
        }
        BinningSpec::UniqueValues => {
            let mut values: Vec<f64> = (0..n).map(sorted).collect();
            values.dedup();
            values
        }
        BinningSpec::FixedEdges(edges) => {
            let (lo, hi) = (edges[0], edges[edges.len() - 1]);
            if sorted(0) < lo || sorted(n - 1) > hi {
                return Err(Error::InvalidBinning(format!(
                    "risks span [{}, {}] but edges span [{lo}, {hi}]",
                    sorted(0),
                    sorted(n - 1)
                )));
            }
            edges[1..].to_vec()
        }
    };

    let mut ranges = Vec::with_capacity(uppers.len());
    let mut start = 0;
    for (index, &upper) in uppers.iter().enumerate() {
        let end = start + order[start..].partition_point(|&i| risks[i] <= upper);
        if end == start {
            if matches!(spec, BinningSpec::FixedEdges(_)) {
                return Err(Error::EmptyBin { index });
            }
            continue;
        }
        ranges.push((start, end));
        start = end;
    }
    debug_assert_eq!(start, n);
    Ok(Grouping { order, ranges })
}

fn summarize(data: &ValidationSet, grouping: &Grouping) -> Vec<CalibrationBin> {
    let (risks, outcomes) = (data.risks(), data.outcomes());
    grouping
        .ranges
        .iter()
        .map(|&(start, end)| {
            let members = &grouping.order[start..end];
            let n = members.len();
            let risk_sum: f64 = crate::sum::compensated_sum(members.iter().map(|&i| risks[i]));
            let events = members.iter().filter(|&&i| outcomes[i]).count();
            CalibrationBin {
                n,
                mean_risk: risk_sum / n as f64,
                event_rate: events as f64 / n as f64,
            }
        })
        .collect()
}

/// Group-level calibration summary `(n_k, r̄_k, ȳ_k)`.
pub fn calibration_bins(data: &ValidationSet, spec: &BinningSpec) -> Result<Vec<CalibrationBin>> {
    Ok(summarize(data, &group(data, spec)?))
}

pub fn decompose(data: &ValidationSet, w: &WeightSpec, spec: &BinningSpec) -> Result<DecompositionReport> {
    decompose_with(data, w, spec, McbEstimator::default())
}

pub fn decompose_with(
    data: &ValidationSet,
    w: &WeightSpec,
    spec: &BinningSpec,
    estimator: McbEstimator,
) -> Result<DecompositionReport> {
    if !data.has_both_classes() {
        return Err(Error::Degenerate(
            "decomposition needs both outcome classes (UNC_w = 0)".into(),
        ));
    }
    let grouping = group(data, spec)?;
    let bins = summarize(data, &grouping);
    let n = data.len() as f64;
    let pi = data.prevalence();

    let mcb_w = match estimator {
        McbEstimator::BinMean => crate::sum::compensated_sum(
            bins.iter()
                .map(|b| b.n as f64 / n * divergence_unchecked(b.mean_risk, b.event_rate, w)),
        ),
        McbEstimator::PerSample => {
            let risks = data.risks();
            crate::sum::compensated_sum(grouping.ranges.iter().zip(&bins).flat_map(
                |(&(start, end), bin)| {
                    grouping.order[start..end]
                        .iter()
                        .map(move |&i| divergence_unchecked(risks[i], bin.event_rate, w))
                },
            )) / n
        }
    };
    let dsc_w = crate::sum::compensated_sum(
        bins.iter()
            .map(|b| b.n as f64 / n * divergence_unchecked(pi, b.event_rate, w)),
    );
    let unc_w = w.moments_unchecked(pi).loss(pi);
    let bs_w = weighted_brier(data, w);
    Ok(DecompositionReport {
        mcb_w,
        dsc_w,
        unc_w,
        bs_w,
        residual: bs_w - (mcb_w - dsc_w + unc_w),
        bins,
        weight: w.clone(),
        estimator,
    })
}

/// `sBS_w = 1 − BS_w / UNC_w`, which equals `(DSC_w − MCB_w) / UNC_w`
/// whenever the decomposition is exact and needs no binning.
pub fn scaled_weighted_brier(data: &ValidationSet, w: &WeightSpec) -> Result<f64> {
    let pi = data.prevalence();
    if !data.has_both_classes() {
        return Err(Error::Degenerate(format!(
            "scaled score undefined at prevalence {pi} (UNC_w = 0)"
        )));
    }
    let unc = w.moments_unchecked(pi).loss(pi);
    if !(unc > 0.0) {
        return Err(Error::Degenerate("UNC_w is zero for this weight".into()));
    }
    Ok(1.0 - weighted_brier(data, w) / unc)
}

/// Index of prediction accuracy: the scaled Brier score with uniform weight.
pub fn ipa(data: &ValidationSet) -> Result<f64> {
    scaled_weighted_brier(data, &WeightSpec::uniform())
}
