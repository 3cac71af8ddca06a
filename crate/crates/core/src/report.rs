//! Evaluation and comparison reports.
//!
//! Every scalar in a report is addressed by a [`MetricKey`]. Bootstrap
//! intervals evaluate all keys on the same resample, and comparisons
//! evaluate every model on the same resample indices, so differences are
//! paired.

use serde::Serialize;

use crate::decompose::{decompose_with, ipa, scaled_weighted_brier, BinningSpec, DecompositionReport, McbEstimator};
use crate::error::{check_open_unit, Error, Result};
use crate::inference::{
    asymptotic_ci_bsw, asymptotic_ci_bsw_calibrated, bootstrap_indices, percentile_cis, BootstrapConfig, CiRecord,
};
use crate::metrics::{
    spiegelhalter_z, spiegelhalter_z_weighted, weighted_brier, weighted_brier_calibrated, CutoffCounts,
    ValidationSet,
};
use crate::rocutil::{auc, h_measure};
use crate::weightfn::WeightSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub weights: Vec<WeightSpec>,
    pub cutoffs: Vec<f64>,
    pub binning: BinningSpec,
    pub estimator: McbEstimator,
    pub bootstrap: Option<BootstrapConfig>,
    /// Level of the asymptotic intervals for `BS_w` and `BS^c_w`.
    pub level: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            weights: vec![WeightSpec::uniform()],
            cutoffs: Vec::new(),
            binning: BinningSpec::default(),
            estimator: McbEstimator::default(),
            bootstrap: None,
            level: 0.95,
        }
    }
}

impl EvalOptions {
    fn validate(&self) -> Result<()> {
        for &c in &self.cutoffs {
            check_open_unit("cutoff", c)?;
        }
        check_open_unit("confidence level", self.level)?;
        Ok(())
    }
}

/// One scalar entry of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKey {
    Auc,
    Ipa,
    SpiegelhalterZ,
    LossAt(usize),
    NetBenefitOptIn(usize),
    NetBenefitOptOut(usize),
    WeightedBrier(usize),
    WeightedBrierCalibrated(usize),
    ScaledWeightedBrier(usize),
    SpiegelhalterZWeighted(usize),
    HMeasure(usize),
}

impl MetricKey {
    fn all(opts: &EvalOptions) -> Vec<MetricKey> {
        use MetricKey::*;
        let mut keys = vec![Auc, Ipa, SpiegelhalterZ];
        for k in 0..opts.cutoffs.len() {
            keys.extend([LossAt(k), NetBenefitOptIn(k), NetBenefitOptOut(k)]);
        }
        for j in 0..opts.weights.len() {
            keys.extend([
                WeightedBrier(j),
                WeightedBrierCalibrated(j),
                ScaledWeightedBrier(j),
                SpiegelhalterZWeighted(j),
                HMeasure(j),
            ]);
        }
        keys
    }

    /// Stable name, e.g. `bs_w@beta:2,5` or `nb_opt_in@0.3`.
    pub fn name(&self, opts: &EvalOptions) -> String {
        use MetricKey::*;
        let at_cutoff = |base: &str, k: usize| format!("{base}@{}", opts.cutoffs[k]);
        let at_weight = |base: &str, j: usize| format!("{base}@{}", opts.weights[j]);
        match *self {
            Auc => "auc".into(),
            Ipa => "ipa".into(),
            SpiegelhalterZ => "z_spiegelhalter".into(),
            LossAt(k) => at_cutoff("loss_at", k),
            NetBenefitOptIn(k) => at_cutoff("nb_opt_in", k),
            NetBenefitOptOut(k) => at_cutoff("nb_opt_out", k),
            WeightedBrier(j) => at_weight("bs_w", j),
            WeightedBrierCalibrated(j) => at_weight("bs_w_calibrated", j),
            ScaledWeightedBrier(j) => at_weight("sbs_w", j),
            SpiegelhalterZWeighted(j) => at_weight("z_spiegelhalter_weighted", j),
            HMeasure(j) => at_weight("h_measure", j),
        }
    }

    pub fn evaluate(&self, data: &ValidationSet, opts: &EvalOptions) -> Result<f64> {
        use MetricKey::*;
        let counts = |k: usize| CutoffCounts::tally(data, opts.cutoffs[k]);
        match *self {
            Auc => auc(data),
            Ipa => ipa(data),
            SpiegelhalterZ => spiegelhalter_z(data),
            LossAt(k) => Ok(counts(k).loss(opts.cutoffs[k])),
            NetBenefitOptIn(k) => Ok(counts(k).net_benefit_opt_in(opts.cutoffs[k])),
            NetBenefitOptOut(k) => Ok(counts(k).net_benefit_opt_out(opts.cutoffs[k])),
            WeightedBrier(j) => Ok(weighted_brier(data, &opts.weights[j])),
            WeightedBrierCalibrated(j) => Ok(weighted_brier_calibrated(data, &opts.weights[j])),
            ScaledWeightedBrier(j) => scaled_weighted_brier(data, &opts.weights[j]),
            SpiegelhalterZWeighted(j) => spiegelhalter_z_weighted(data, &opts.weights[j]),
            HMeasure(j) => Ok(h_measure(data, &opts.weights[j])?.h),
        }
    }
}

fn undefined(e: &Error) -> bool {
    matches!(e, Error::Degenerate(_) | Error::SingleClass)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scalar {
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic_ci: Option<CiRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffScores {
    pub cutoff: f64,
    pub loss_at: Scalar,
    pub nb_opt_in: Scalar,
    pub nb_opt_out: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightScores {
    pub weight: WeightSpec,
    pub bs_w: Scalar,
    pub bs_w_calibrated: Scalar,
    pub sbs_w: Option<Scalar>,
    pub z_spiegelhalter_weighted: Option<Scalar>,
    pub h_measure: Option<Scalar>,
    pub decomposition: Option<DecompositionReport>,
}

/// All scores of one model on one dataset. Entries that are undefined for
/// the data (e.g. scaled scores with a single outcome class) are `None` and
/// explained in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub n: usize,
    pub prevalence: f64,
    pub auc: Option<Scalar>,
    pub ipa: Option<Scalar>,
    pub z_spiegelhalter: Option<Scalar>,
    pub cutoffs: Vec<CutoffScores>,
    pub weights: Vec<WeightScores>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapConfig>,
    pub notes: Vec<String>,
}

/// One flattened report row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub metric: String,
    pub estimate: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub level: Option<f64>,
    pub method: Option<crate::inference::CiMethod>,
}

impl MetricRow {
    fn new(metric: String, scalar: &Scalar) -> Self {
        let ci = scalar.ci.or(scalar.asymptotic_ci);
        MetricRow {
            metric,
            estimate: scalar.estimate,
            lower: ci.map(|c| c.lower),
            upper: ci.map(|c| c.upper),
            level: ci.map(|c| c.level),
            method: ci.map(|c| c.method),
        }
    }

    fn bare(metric: String, estimate: f64) -> Self {
        MetricRow {
            metric,
            estimate,
            lower: None,
            upper: None,
            level: None,
            method: None,
        }
    }
}

impl ScoreReport {
    /// Flat `(metric, estimate, interval)` rows; a bootstrap interval takes
    /// precedence over an asymptotic one.
    pub fn rows(&self) -> Vec<MetricRow> {
        let mut rows = vec![
            MetricRow::bare("n".into(), self.n as f64),
            MetricRow::bare("prevalence".into(), self.prevalence),
        ];
        fn push(rows: &mut Vec<MetricRow>, name: String, s: &Option<Scalar>) {
            if let Some(s) = s {
                rows.push(MetricRow::new(name, s));
            }
        }
        push(&mut rows, "auc".into(), &self.auc);
        push(&mut rows, "ipa".into(), &self.ipa);
        push(&mut rows, "z_spiegelhalter".into(), &self.z_spiegelhalter);
        for c in &self.cutoffs {
            push(&mut rows, format!("loss_at@{}", c.cutoff), &Some(c.loss_at));
            push(&mut rows, format!("nb_opt_in@{}", c.cutoff), &Some(c.nb_opt_in));
            push(&mut rows, format!("nb_opt_out@{}", c.cutoff), &Some(c.nb_opt_out));
        }
        for w in &self.weights {
            push(&mut rows, format!("bs_w@{}", w.weight), &Some(w.bs_w));
            push(&mut rows, format!("bs_w_calibrated@{}", w.weight), &Some(w.bs_w_calibrated));
            push(&mut rows, format!("sbs_w@{}", w.weight), &w.sbs_w);
            push(&mut rows, format!("z_spiegelhalter_weighted@{}", w.weight), &w.z_spiegelhalter_weighted);
            push(&mut rows, format!("h_measure@{}", w.weight), &w.h_measure);
            if let Some(d) = &w.decomposition {
                rows.push(MetricRow::bare(format!("mcb_w@{}", w.weight), d.mcb_w));
                rows.push(MetricRow::bare(format!("dsc_w@{}", w.weight), d.dsc_w));
                rows.push(MetricRow::bare(format!("unc_w@{}", w.weight), d.unc_w));
                rows.push(MetricRow::bare(format!("decomposition_residual@{}", w.weight), d.residual));
            }
        }
        rows
    }
}

/// Keys defined on `data`, their estimates, and notes for the rest.
fn defined_keys(data: &ValidationSet, opts: &EvalOptions) -> Result<(Vec<MetricKey>, Vec<f64>, Vec<String>)> {
    let (mut keys, mut values, mut notes) = (Vec::new(), Vec::new(), Vec::new());
    for key in MetricKey::all(opts) {
        match key.evaluate(data, opts) {
            Ok(v) => {
                keys.push(key);
                values.push(v);
            }
            Err(e) if undefined(&e) => notes.push(format!("{}: {e}", key.name(opts))),
            Err(e) => return Err(e),
        }
    }
    Ok((keys, values, notes))
}

pub fn evaluate(data: &ValidationSet, opts: &EvalOptions) -> Result<ScoreReport> {
    opts.validate()?;
    let (keys, estimates, mut notes) = defined_keys(data, opts)?;
    let cis: Option<Vec<CiRecord>> = match &opts.bootstrap {
        Some(cfg) => {
            let replicates = bootstrap_indices(data, cfg, |idx| {
                let resample = data.subset(idx);
                keys.iter().map(|k| k.evaluate(&resample, opts)).collect()
            })?;
            Some(percentile_cis(&estimates, &replicates, cfg.level)?)
        }
        None => None,
    };
    let scalar = |key: MetricKey| -> Option<Scalar> {
        keys.iter().position(|&k| k == key).map(|i| Scalar {
            estimate: estimates[i],
            ci: cis.as_ref().map(|c| c[i]),
            asymptotic_ci: None,
        })
    };
    let required = |key: MetricKey| scalar(key).expect("always defined");

    let cutoffs = opts
        .cutoffs
        .iter()
        .enumerate()
        .map(|(k, &cutoff)| CutoffScores {
            cutoff,
            loss_at: required(MetricKey::LossAt(k)),
            nb_opt_in: required(MetricKey::NetBenefitOptIn(k)),
            nb_opt_out: required(MetricKey::NetBenefitOptOut(k)),
        })
        .collect();

    let mut weights = Vec::with_capacity(opts.weights.len());
    for (j, w) in opts.weights.iter().enumerate() {
        let mut bs_w = required(MetricKey::WeightedBrier(j));
        bs_w.asymptotic_ci = Some(asymptotic_ci_bsw(data, w, opts.level)?);
        let mut bs_w_calibrated = required(MetricKey::WeightedBrierCalibrated(j));
        bs_w_calibrated.asymptotic_ci = Some(asymptotic_ci_bsw_calibrated(data, w, opts.level)?);
        let decomposition = match decompose_with(data, w, &opts.binning, opts.estimator) {
            Ok(d) => Some(d),
            Err(e) if undefined(&e) => {
                notes.push(format!("decomposition@{w}: {e}"));
                None
            }
            Err(e) => return Err(e),
        };
        weights.push(WeightScores {
            weight: w.clone(),
            bs_w,
            bs_w_calibrated,
            sbs_w: scalar(MetricKey::ScaledWeightedBrier(j)),
            z_spiegelhalter_weighted: scalar(MetricKey::SpiegelhalterZWeighted(j)),
            h_measure: scalar(MetricKey::HMeasure(j)),
            decomposition,
        });
    }

    Ok(ScoreReport {
        n: data.len(),
        prevalence: data.prevalence(),
        auc: scalar(MetricKey::Auc),
        ipa: scalar(MetricKey::Ipa),
        z_spiegelhalter: scalar(MetricKey::SpiegelhalterZ),
        cutoffs,
        weights,
        bootstrap: opts.bootstrap,
        notes,
    })
}

/// Checks that all datasets share the same outcomes (and clusters).
pub fn check_aligned(models: &[&ValidationSet]) -> Result<()> {
    let Some(first) = models.first() else {
        return Ok(());
    };
    for (i, other) in models.iter().enumerate().skip(1) {
        if other.len() != first.len() {
            return Err(Error::Alignment(format!(
                "model {i} has {} rows, model 0 has {}",
                other.len(),
                first.len()
            )));
        }
        if let Some(row) = (0..first.len()).find(|&r| other.outcomes()[r] != first.outcomes()[r]) {
            return Err(Error::Alignment(format!("outcomes of model {i} differ from model 0 at row {row}")));
        }
        if other.clusters() != first.clusters() {
            return Err(Error::Alignment(format!("cluster ids of model {i} differ from model 0")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Difference {
    pub metric: String,
    pub estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<CiRecord>,
}

/// `first − second` for every metric defined on both models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub first: String,
    pub second: String,
    pub differences: Vec<Difference>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub models: Vec<String>,
    pub reports: Vec<ScoreReport>,
    pub pairs: Vec<PairComparison>,
}

/// Evaluates each model and all pairwise differences. Bootstrap intervals
/// for the differences use one set of resample indices for all models.
pub fn compare(models: &[(String, ValidationSet)], opts: &EvalOptions) -> Result<CompareReport> {
    if models.len() < 2 {
        return Err(Error::InvalidData("comparison needs at least two models".into()));
    }
    let datasets: Vec<&ValidationSet> = models.iter().map(|(_, d)| d).collect();
    check_aligned(&datasets)?;
    let reports = datasets.iter().map(|d| evaluate(d, opts)).collect::<Result<Vec<_>>>()?;

    let defined: Vec<Vec<MetricKey>> = datasets
        .iter()
        .map(|d| defined_keys(d, opts).map(|(k, _, _)| k))
        .collect::<Result<_>>()?;
    let keys: Vec<MetricKey> = defined[0]
        .iter()
        .copied()
        .filter(|k| defined.iter().all(|ks| ks.contains(k)))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|i| (i + 1..models.len()).map(move |j| (i, j)))
        .collect();

    let differences = |sets: &[ValidationSet]| -> Result<Vec<f64>> {
        let values = sets
            .iter()
            .map(|d| keys.iter().map(|k| k.evaluate(d, opts)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(pairs
            .iter()
            .flat_map(|&(i, j)| (0..keys.len()).map(move |k| (i, j, k)))
            .map(|(i, j, k)| values[i][k] - values[j][k])
            .collect())
    };
    let owned: Vec<ValidationSet> = datasets.iter().map(|d| (*d).clone()).collect();
    let estimates = differences(&owned)?;
    let cis = match &opts.bootstrap {
        Some(cfg) => {
            let replicates = bootstrap_indices(datasets[0], cfg, |idx| {
                let resampled: Vec<ValidationSet> = datasets.iter().map(|d| d.subset(idx)).collect();
                differences(&resampled)
            })?;
            Some(percentile_cis(&estimates, &replicates, cfg.level)?)
        }
        None => None,
    };

    let pairs = pairs
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| PairComparison {
            first: models[i].0.clone(),
            second: models[j].0.clone(),
            differences: keys
                .iter()
                .enumerate()
                .map(|(k, key)| {
                    let at = p * keys.len() + k;
                    Difference {
                        metric: key.name(opts),
                        estimate: estimates[at],
                        ci: cis.as_ref().map(|c| c[at]),
                    }
                })
                .collect(),
        })
        .collect();
    Ok(CompareReport {
        models: models.iter().map(|(name, _)| name.clone()).collect(),
        reports,
        pairs,
    })
}
