//! Asymptotic variances and bootstrap confidence intervals.
//!
//! With `A(r) = 1 − F_w(r) + m_w(r) − μ_w` and `B(r) = m_w(r)`:
//!
//! ```text
//! σ²    = E_n[Y A² + (1 − Y) B²] − BS_w²          (BS_w, any calibration)
//! σ²_0  = E_n[r A² + (1 − r) B²] − (BS^c_w)²       (BS_w, well-calibrated)
//! σ²_c  = var_n ℓ_w(r, r)                          (BS^c_w)
//! σ²_0n = E_n[r (1 − r) (A − B)²] = σ²_0 − σ²_c     (null variance for Z_w)
//! ```
//!
//! All functions return the variance of a single term; divide by `n` for the
//! variance of the mean.
//!
//! Bootstrap replicate `b` draws from its own ChaCha8 stream
//! `(seed, b)`, so results do not depend on the number of threads. A
//! replicate whose statistic fails (e.g. a resample with a single outcome
//! class) is redrawn from the same stream up to [`MAX_REDRAWS`] times.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_open_unit, Error, Result};
use crate::metrics::{null_variance, weighted_brier, weighted_brier_calibrated, ValidationSet};
use crate::rng::stream;
use crate::sum::par_mean;
use crate::weightfn::WeightSpec;
use rand::Rng;

pub const MAX_REDRAWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    AsymptoticNormal,
    BootstrapPercentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplingUnit {
    #[default]
    Observation,
    Cluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiRecord {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
    /// Set when a percentile interval does not contain the estimate.
    pub off_center: bool,
}

impl CiRecord {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub unit: ResamplingUnit,
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replicates: 2000,
            seed: 0,
            unit: ResamplingUnit::Observation,
            level: 0.95,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self, data: &ValidationSet) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Bootstrap("need at least one replicate".into()));
        }
        check_open_unit("confidence level", self.level)?;
        if self.unit == ResamplingUnit::Cluster && data.clusters().is_none() {
            return Err(Error::Bootstrap("cluster resampling requires cluster ids".into()));
        }
        if self.replicates < 100 {
            log::warn!(
                "{} bootstrap replicates is too few for reliable percentile intervals",
                self.replicates
            );
        }
        Ok(())
    }
}

/// `σ²`: plug-in variance of `ℓ_w(r̂, Y)`.
pub fn var_bsw(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let (risks, outcomes) = (data.risks(), data.outcomes());
    let second = par_mean(data.len(), |i| w.moments_unchecked(risks[i]).outcome_loss(outcomes[i]).powi(2));
    (second - weighted_brier(data, w).powi(2)).max(0.0)
}

/// `σ²_0`: variance of `ℓ_w(r̂, Y)` when `Y ~ Bernoulli(r̂)`.
pub fn var_bsw_well_calibrated(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let risks = data.risks();
    let second = par_mean(data.len(), |i| {
        let r = risks[i];
        let m = w.moments_unchecked(r);
        r * m.case_loss().powi(2) + (1.0 - r) * m.control_loss().powi(2)
    });
    (second - weighted_brier_calibrated(data, w).powi(2)).max(0.0)
}

/// `σ²_0n`, the denominator of the weighted Spiegelhalter statistic.
pub fn var_bsw_null(data: &ValidationSet, w: &WeightSpec) -> f64 {
    null_variance(data, w)
}

/// `σ²_c`: plug-in variance of `ℓ_w(r̂, r̂)`.
pub fn var_bsw_calibrated(data: &ValidationSet, w: &WeightSpec) -> f64 {
    let risks = data.risks();
    let second = par_mean(data.len(), |i| w.moments_unchecked(risks[i]).loss(risks[i]).powi(2));
    (second - weighted_brier_calibrated(data, w).powi(2)).max(0.0)
}

/// Two-sided standard normal quantile for `level`.
pub fn normal_quantile(level: f64) -> Result<f64> {
    let level = check_open_unit("confidence level", level)?;
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

fn normal_ci(estimate: f64, variance: f64, n: usize, level: f64) -> Result<CiRecord> {
    let half = normal_quantile(level)? * (variance / n as f64).sqrt();
    Ok(CiRecord {
        estimate,
        lower: estimate - half,
        upper: estimate + half,
        level,
        method: CiMethod::AsymptoticNormal,
        off_center: false,
    })
}

/// Normal-approximation interval for `BS_w` using `σ²`.
pub fn asymptotic_ci_bsw(data: &ValidationSet, w: &WeightSpec, level: f64) -> Result<CiRecord> {
    normal_ci(weighted_brier(data, w), var_bsw(data, w), data.len(), level)
}

/// Normal-approximation interval for `BS^c_w` using `σ²_c`.
pub fn asymptotic_ci_bsw_calibrated(data: &ValidationSet, w: &WeightSpec, level: f64) -> Result<CiRecord> {
    normal_ci(weighted_brier_calibrated(data, w), var_bsw_calibrated(data, w), data.len(), level)
}

/// Type-7 (linear interpolation) sample quantile of sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile interval from bootstrap replicates of a scalar.
pub fn percentile_ci(estimate: f64, replicates: &[f64], level: f64) -> Result<CiRecord> {
    let level = check_open_unit("confidence level", level)?;
    if replicates.is_empty() {
        return Err(Error::Bootstrap("no replicates".into()));
    }
    if replicates.iter().any(|v| v.is_nan()) {
        return Err(Error::Bootstrap("statistic returned NaN on a resample".into()));
    }
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lower = quantile_sorted(&sorted, alpha);
    let upper = quantile_sorted(&sorted, 1.0 - alpha);
    let off_center = !(lower <= estimate && estimate <= upper);
    if off_center {
        log::warn!("bootstrap interval [{lower}, {upper}] excludes the estimate {estimate}");
    }
    Ok(CiRecord {
        estimate,
        lower,
        upper,
        level,
        method: CiMethod::BootstrapPercentile,
        off_center,
    })
}

/// Draws resample index sets for each replicate.
struct Resampler {
    n: usize,
    members: Option<Vec<Vec<usize>>>,
}

impl Resampler {
    fn new(data: &ValidationSet, unit: ResamplingUnit) -> Self {
        let members = match (unit, data.clusters()) {
            (ResamplingUnit::Cluster, Some(ids)) => {
                let mut members = vec![Vec::new(); data.cluster_count()];
                for (i, &id) in ids.iter().enumerate() {
                    members[id as usize].push(i);
                }
                Some(members)
            }
            _ => None,
        };
        Resampler { n: data.len(), members }
    }

    fn draw<R: Rng>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        match &self.members {
            None => out.extend((0..self.n).map(|_| rng.random_range(0..self.n))),
            Some(members) => {
                for _ in 0..members.len() {
                    out.extend_from_slice(&members[rng.random_range(0..members.len())]);
                }
            }
        }
    }
}

/// Runs `statistic` on the row indices of every bootstrap resample and
/// returns one vector of values per replicate, in replicate order.
///
/// The index sets depend only on `data`'s size and clusters and on `cfg`, so
/// several models sharing the same outcomes can be evaluated on identical
/// resamples by indexing into each inside one call.
pub fn bootstrap_indices<F>(data: &ValidationSet, cfg: &BootstrapConfig, statistic: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    cfg.validate(data)?;
    let resampler = Resampler::new(data, cfg.unit);
    (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(cfg.seed, b as u64);
            let mut indices = Vec::with_capacity(data.len());
            let mut last_error = None;
            for attempt in 0..=MAX_REDRAWS {
                resampler.draw(&mut rng, &mut indices);
                match statistic(&indices) {
                    Ok(values) => return Ok(values),
                    Err(e) => {
                        log::debug!("replicate {b} attempt {attempt} redrawn: {e}");
                        last_error = Some(e);
                    }
                }
            }
            Err(Error::Bootstrap(format!(
                "replicate {b} failed after {MAX_REDRAWS} redraws: {}",
                last_error.expect("at least one attempt")
            )))
        })
        .collect()
}

/// Percentile intervals for a vector-valued statistic.
pub fn bootstrap_vector<F>(data: &ValidationSet, statistic: F, cfg: &BootstrapConfig) -> Result<Vec<CiRecord>>
where
    F: Fn(&ValidationSet) -> Result<Vec<f64>> + Sync,
{
    let estimates = statistic(data)?;
    let replicates = bootstrap_indices(data, cfg, |idx| {
        let values = statistic(&data.subset(idx))?;
        if values.len() != estimates.len() {
            return Err(Error::Bootstrap("statistic changed length between resamples".into()));
        }
        Ok(values)
    })?;
    percentile_cis(&estimates, &replicates, cfg.level)
}

/// Column-wise percentile intervals for replicate vectors.
pub fn percentile_cis(estimates: &[f64], replicates: &[Vec<f64>], level: f64) -> Result<Vec<CiRecord>> {
    estimates
        .iter()
        .enumerate()
        .map(|(k, &estimate)| {
            let column: Vec<f64> = replicates.iter().map(|r| r[k]).collect();
            percentile_ci(estimate, &column, level)
        })
        .collect()
}

/// Percentile interval for a scalar statistic.
pub fn bootstrap<F>(data: &ValidationSet, statistic: F, cfg: &BootstrapConfig) -> Result<CiRecord>
where
    F: Fn(&ValidationSet) -> Result<f64> + Sync,
{
    let cis = bootstrap_vector(data, |d| statistic(d).map(|v| vec![v]), cfg)?;
    Ok(cis[0])
}
