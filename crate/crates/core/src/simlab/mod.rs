//! Reproducible simulation designs.
//!
//! * Set A: three models with equal AUC but different clinical utility.
//! * Set B: one calibrated model and two miscalibrated in the high- or
//!   low-risk region.
//! * A clustered cohort with misclassified (surrogate) outcomes.
//!
//! Binormal generators work in blocks of [`BLOCK_LEN`] rows; block `k` draws
//! from ChaCha8 stream `(seed, k)`, so the output depends only on `(n, seed)`
//! and never on the thread count. Models within a set share one outcome
//! vector, so comparisons between them are paired.

pub mod logistic;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_open_unit, check_unit, Error, Result};
use crate::metrics::ValidationSet;
use crate::rng::{stream, StreamRng, BLOCK_LEN};
use crate::special::{expit, logit};
use logistic::{fit_logistic, LogisticFit};

/// Outcome `Y ~ Bernoulli(prevalence)`, score `X | Y ~ N(mean_Y, sd_Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinormalDesign {
    pub prevalence: f64,
    pub case_mean: f64,
    pub case_sd: f64,
    pub control_mean: f64,
    pub control_sd: f64,
    pub n: usize,
    pub seed: u64,
}

impl BinormalDesign {
    pub fn validate(&self) -> Result<()> {
        check_open_unit("prevalence", self.prevalence)?;
        if !(self.case_sd > 0.0 && self.control_sd > 0.0) {
            return Err(Error::InvalidData("standard deviations must be positive".into()));
        }
        if !(self.case_mean.is_finite() && self.control_mean.is_finite()) {
            return Err(Error::InvalidData("means must be finite".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidData("n must be at least 1".into()));
        }
        Ok(())
    }

    /// Set A Model 1: cases `N(2, 2²)`, controls `N(0, 1)`.
    pub fn set_a_model1(n: usize, seed: u64) -> Self {
        Self::with_cases(2.0, 2.0, n, seed)
    }

    /// Set A Model 2: cases `N(1, 0.5²)`, controls `N(0, 1)`.
    pub fn set_a_model2(n: usize, seed: u64) -> Self {
        Self::with_cases(1.0, 0.5, n, seed)
    }

    /// Set B true model: cases `N(1, 1)`, controls `N(0, 1)`.
    pub fn set_b(n: usize, seed: u64) -> Self {
        Self::with_cases(1.0, 1.0, n, seed)
    }

    fn with_cases(case_mean: f64, case_sd: f64, n: usize, seed: u64) -> Self {
        BinormalDesign {
            prevalence: 0.5,
            case_mean,
            case_sd,
            control_mean: 0.0,
            control_sd: 1.0,
            n,
            seed,
        }
    }

    fn score(&self, outcome: bool, z: f64) -> f64 {
        if outcome {
            self.case_mean + self.case_sd * z
        } else {
            self.control_mean + self.control_sd * z
        }
    }
}

/// `P(Y = 1 | X = x)` by Bayes' formula, evaluated on the log-odds scale.
pub fn bayes_risk(x: f64, design: &BinormalDesign) -> f64 {
    let log_density = |mean: f64, sd: f64| {
        let z = (x - mean) / sd;
        -0.5 * z * z - sd.ln()
    };
    let log_odds = logit(design.prevalence) + log_density(design.case_mean, design.case_sd)
        - log_density(design.control_mean, design.control_sd);
    expit(log_odds)
}

/// Piecewise logit-scale shift: `expit(logit r + shift_above)` for
/// `r ≥ threshold`, `expit(logit r + shift_below)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitShift {
    pub threshold: f64,
    pub shift_above: f64,
    pub shift_below: f64,
}

impl LogitShift {
    pub fn new(threshold: f64, shift_above: f64, shift_below: f64) -> Result<Self> {
        check_open_unit("shift threshold", threshold)?;
        Ok(LogitShift {
            threshold,
            shift_above,
            shift_below,
        })
    }

    pub fn apply(&self, r: f64) -> f64 {
        let shift = if r >= self.threshold {
            self.shift_above
        } else {
            self.shift_below
        };
        if shift == 0.0 {
            r
        } else {
            expit(logit(r) + shift)
        }
    }
}

/// Rows `[k·BLOCK_LEN, (k+1)·BLOCK_LEN)` are produced by `row(rng)` with the
/// stream of block `k`.
fn blocked<T, F>(n: usize, seed: u64, row: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    let blocks: Vec<Vec<T>> = (0..n.div_ceil(BLOCK_LEN))
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let len = BLOCK_LEN.min(n - k * BLOCK_LEN);
            (0..len).map(|_| row(&mut rng)).collect()
        })
        .collect();
    blocks.into_iter().flatten().collect()
}

/// A single binormal model with Bayes-formula risks.
pub fn generate_binormal(design: &BinormalDesign) -> Result<ValidationSet> {
    design.validate()?;
    let rows = blocked(design.n, design.seed, |rng| {
        let y = rng.random::<f64>() < design.prevalence;
        let z: f64 = rng.sample(StandardNormal);
        (bayes_risk(design.score(y, z), design), y)
    });
    let (risks, outcomes) = rows.into_iter().unzip();
    ValidationSet::new(risks, outcomes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetA {
    pub model1: ValidationSet,
    pub model2: ValidationSet,
    pub model3: ValidationSet,
}

/// Model 3 shift: `+1` on the logit scale for `r₂ ≥ 0.3`, `−1` below.
pub const SET_A_SHIFT: LogitShift = LogitShift {
    threshold: 0.3,
    shift_above: 1.0,
    shift_below: -1.0,
};

pub fn generate_set_a(n: usize, seed: u64) -> Result<SetA> {
    let d1 = BinormalDesign::set_a_model1(n, seed);
    let d2 = BinormalDesign::set_a_model2(n, seed);
    d1.validate()?;
    let rows = blocked(n, seed, |rng| {
        let y = rng.random::<f64>() < 0.5;
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        (y, bayes_risk(d1.score(y, z1), &d1), bayes_risk(d2.score(y, z2), &d2))
    });
    let outcomes: Vec<bool> = rows.iter().map(|r| r.0).collect();
    let r1: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let r2: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let r3: Vec<f64> = r2.iter().map(|&r| SET_A_SHIFT.apply(r)).collect();
    let model1 = ValidationSet::new(r1, outcomes)?;
    Ok(SetA {
        model2: model1.with_risks(r2)?,
        model3: model1.with_risks(r3)?,
        model1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetB {
    pub truth: ValidationSet,
    pub over_high: ValidationSet,
    pub over_low: ValidationSet,
}

/// Overfit in the high-risk region: `+1` on the logit scale for `r ≥ 0.5`.
pub const SET_B_OVER_HIGH: LogitShift = LogitShift {
    threshold: 0.5,
    shift_above: 1.0,
    shift_below: 0.0,
};

/// Overfit in the low-risk region: `−1` on the logit scale for `r < 0.5`.
pub const SET_B_OVER_LOW: LogitShift = LogitShift {
    threshold: 0.5,
    shift_above: 0.0,
    shift_below: -1.0,
};

pub fn generate_set_b(n: usize, seed: u64) -> Result<SetB> {
    let truth = generate_binormal(&BinormalDesign::set_b(n, seed))?;
    let shifted = |shift: LogitShift| truth.risks().iter().map(|&r| shift.apply(r)).collect();
    Ok(SetB {
        over_high: truth.with_risks(shifted(SET_B_OVER_HIGH))?,
        over_low: truth.with_risks(shifted(SET_B_OVER_LOW))?,
        truth,
    })
}

/// Flip rates `(P(S = 0 | Y = 1), P(S = 1 | Y = 0))` of the more specific surrogate.
pub const SURROGATE_1: (f64, f64) = (0.25, 0.05);
/// Flip rates of the symmetric surrogate.
pub const SURROGATE_2: (f64, f64) = (0.15, 0.15);

const COHORT_STREAM: u64 = 0;
const FLIP_STREAM: u64 = 1;
const SPLIT_STREAM: u64 = 3;

/// Patients with repeated visits. Visit covariate
/// `x1 = u_patient + e_visit` drives the true risk
/// `expit(intercept + slope·x1)`; `x2` is pure noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortDesign {
    pub n_patients: usize,
    pub visits_per_patient: usize,
    pub intercept: f64,
    pub slope: f64,
    pub patient_sd: f64,
    pub visit_sd: f64,
}

impl Default for CohortDesign {
    /// Prevalence about 0.23.
    fn default() -> Self {
        CohortDesign {
            n_patients: 1600,
            visits_per_patient: 2,
            intercept: -1.55,
            slope: 1.2,
            patient_sd: 0.8,
            visit_sd: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub patient: Vec<u32>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub risk: Vec<f64>,
    pub truth: Vec<bool>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    fn covariates(&self, i: usize) -> Vec<f64> {
        vec![self.x1[i], self.x2[i]]
    }
}

pub fn generate_cohort(design: &CohortDesign, seed: u64) -> Result<Cohort> {
    if design.n_patients == 0 || design.visits_per_patient == 0 {
        return Err(Error::InvalidData("cohort needs at least one patient and visit".into()));
    }
    if !(design.patient_sd >= 0.0 && design.visit_sd >= 0.0) {
        return Err(Error::InvalidData("standard deviations must be nonnegative".into()));
    }
    let mut rng = stream(seed, COHORT_STREAM);
    let n = design.n_patients * design.visits_per_patient;
    let mut cohort = Cohort {
        patient: Vec::with_capacity(n),
        x1: Vec::with_capacity(n),
        x2: Vec::with_capacity(n),
        risk: Vec::with_capacity(n),
        truth: Vec::with_capacity(n),
    };
    for p in 0..design.n_patients {
        let u = design.patient_sd * rng.sample::<f64, _>(StandardNormal);
        for _ in 0..design.visits_per_patient {
            let x1 = u + design.visit_sd * rng.sample::<f64, _>(StandardNormal);
            let x2: f64 = rng.sample(StandardNormal);
            let risk = expit(design.intercept + design.slope * x1);
            cohort.patient.push(p as u32);
            cohort.x1.push(x1);
            cohort.x2.push(x2);
            cohort.risk.push(risk);
            cohort.truth.push(rng.random::<f64>() < risk);
        }
    }
    Ok(cohort)
}

/// Non-differential misclassification of `truth`.
pub fn flip_outcomes<R: Rng>(truth: &[bool], flip01: f64, flip10: f64, rng: &mut R) -> Result<Vec<bool>> {
    for (what, rate) in [("P(S=0|Y=1)", flip01), ("P(S=1|Y=0)", flip10)] {
        check_unit(what, rate)?;
        if rate >= 1.0 {
            return Err(Error::Domain {
                what: "flip rate",
                value: rate,
                range: "[0, 1)",
            });
        }
    }
    Ok(truth
        .iter()
        .map(|&y| {
            let u: f64 = rng.random();
            if y {
                u >= flip01
            } else {
                u < flip10
            }
        })
        .collect())
}

/// A cohort with one surrogate outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Misclassified {
    /// True risks against surrogate outcomes, clustered by patient.
    pub data: ValidationSet,
    pub truth: Vec<bool>,
}

pub fn generate_misclassified(
    n_patients: usize,
    visits_per_patient: usize,
    seed: u64,
    flip01: f64,
    flip10: f64,
) -> Result<Misclassified> {
    let design = CohortDesign {
        n_patients,
        visits_per_patient,
        ..CohortDesign::default()
    };
    let cohort = generate_cohort(&design, seed)?;
    let surrogate = flip_outcomes(&cohort.truth, flip01, flip10, &mut stream(seed, FLIP_STREAM))?;
    let data = ValidationSet::new(cohort.risk, surrogate)?.with_clusters(cohort.patient)?;
    Ok(Misclassified {
        data,
        truth: cohort.truth,
    })
}

/// Models fitted on a training half and evaluated against the true outcome
/// on the validation half.
#[derive(Debug, Clone, PartialEq)]
pub struct MisclassificationStudy {
    /// Trained on the true outcome.
    pub model_y: ValidationSet,
    /// Trained on surrogate 1.
    pub model_s1: ValidationSet,
    /// Trained on surrogate 2.
    pub model_s2: ValidationSet,
    pub fits: [LogisticFit; 3],
    /// Event rates of `Y`, `S1`, `S2` in the whole cohort.
    pub event_rates: [f64; 3],
}

/// Patients are split 1:1 into training and validation; logistic models on
/// `(x1, x2)` are fitted to `Y`, `S1` and `S2`.
pub fn misclassification_study(design: &CohortDesign, seed: u64) -> Result<MisclassificationStudy> {
    let cohort = generate_cohort(design, seed)?;
    let s1 = flip_outcomes(&cohort.truth, SURROGATE_1.0, SURROGATE_1.1, &mut stream(seed, FLIP_STREAM))?;
    let s2 = flip_outcomes(&cohort.truth, SURROGATE_2.0, SURROGATE_2.1, &mut stream(seed, FLIP_STREAM + 1))?;

    let mut patients: Vec<u32> = (0..design.n_patients as u32).collect();
    patients.shuffle(&mut stream(seed, SPLIT_STREAM));
    let mut in_train = vec![false; design.n_patients];
    for &p in &patients[..design.n_patients / 2] {
        in_train[p as usize] = true;
    }
    let (train, valid): (Vec<usize>, Vec<usize>) =
        (0..cohort.len()).partition(|&i| in_train[cohort.patient[i] as usize]);
    if train.is_empty() || valid.is_empty() {
        return Err(Error::InvalidData("need at least two patients to split".into()));
    }

    let rows: Vec<Vec<f64>> = train.iter().map(|&i| cohort.covariates(i)).collect();
    let fit = |outcome: &[bool]| {
        let ys: Vec<bool> = train.iter().map(|&i| outcome[i]).collect();
        fit_logistic(&rows, &ys)
    };
    let fits = [fit(&cohort.truth)?, fit(&s1)?, fit(&s2)?];

    let outcomes: Vec<bool> = valid.iter().map(|&i| cohort.truth[i]).collect();
    let clusters: Vec<u32> = valid.iter().map(|&i| cohort.patient[i]).collect();
    let evaluate = |model: &LogisticFit| -> Result<ValidationSet> {
        let risks = valid.iter().map(|&i| model.predict(&cohort.covariates(i))).collect();
        ValidationSet::new(risks, outcomes.clone())?.with_clusters(clusters.iter().copied())
    };
    let rate = |v: &[bool]| v.iter().filter(|&&y| y).count() as f64 / v.len() as f64;
    Ok(MisclassificationStudy {
        model_y: evaluate(&fits[0])?,
        model_s1: evaluate(&fits[1])?,
        model_s2: evaluate(&fits[2])?,
        event_rates: [rate(&cohort.truth), rate(&s1), rate(&s2)],
        fits,
    })
}
