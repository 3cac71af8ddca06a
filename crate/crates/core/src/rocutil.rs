//! ROC curves, AUC, the H measure and decision curves.
//!
//! All ROC geometry is done on integer counts `(FP, TP)` so that hulls and
//! breakpoints do not depend on floating-point rounding of rates. The H
//! measure minimises the expected cost over thresholds exactly: the minimum
//! of `c·FP + (1 − c)·FN` over all thresholds is attained at a vertex of the
//! upper convex hull of the ROC, and between consecutive hull slopes the
//! optimal vertex is constant, so the integral against `w(c)` is a finite sum
//! of `F_w` and `m_w` increments. For non-invertible empirical score
//! distributions this argmin form can differ from integrating at a single
//! inverse threshold.

use serde::Serialize;

use crate::decompose::{calibration_bins, BinningSpec, CalibrationBin};
use crate::error::{Error, Result};
use crate::metrics::{CutoffCounts, ValidationSet};
use crate::weightfn::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive; the first point uses `+∞`.
    pub threshold: f64,
}

/// Empirical ROC with tied scores grouped into single steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub cases: u64,
    pub controls: u64,
    #[serde(skip)]
    counts: Vec<(u64, u64)>,
}

impl RocCurve {
    /// `(FP, TP)` at each point.
    pub fn counts(&self) -> &[(u64, u64)] {
        &self.counts
    }
}

/// ROC of a general real-valued score, higher meaning more likely a case.
pub fn roc_of(scores: &[f64], outcomes: &[bool]) -> Result<RocCurve> {
    if scores.len() != outcomes.len() {
        return Err(Error::InvalidData(format!(
            "{} scores but {} outcomes",
            scores.len(),
            outcomes.len()
        )));
    }
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::InvalidData(format!("score at index {i} is NaN")));
    }
    let cases = outcomes.iter().filter(|&&y| y).count() as u64;
    let controls = outcomes.len() as u64 - cases;
    if cases == 0 || controls == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let mut counts = vec![(0u64, 0u64)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut fp, mut tp) = (0u64, 0u64);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if outcomes[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        counts.push((fp, tp));
        thresholds.push(s);
    }

    // trapezoids in exact integer arithmetic: Σ ΔFP (TP_prev + TP) / (2 N0 N1)
    let twice_area: u128 = counts
        .windows(2)
        .map(|p| u128::from(p[1].0 - p[0].0) * u128::from(p[0].1 + p[1].1))
        .sum();
    let auc = twice_area as f64 / (2.0 * cases as f64 * controls as f64);
    let points = counts
        .iter()
        .zip(&thresholds)
        .map(|(&(fp, tp), &threshold)| RocPoint {
            fpr: fp as f64 / controls as f64,
            tpr: tp as f64 / cases as f64,
            threshold,
        })
        .collect();
    Ok(RocCurve {
        points,
        auc,
        cases,
        controls,
        counts,
    })
}

pub fn roc(data: &ValidationSet) -> Result<RocCurve> {
    roc_of(data.risks(), data.outcomes())
}

pub fn auc(data: &ValidationSet) -> Result<f64> {
    Ok(roc(data)?.auc)
}

/// Upper convex hull of an ROC, vertices as integer `(FP, TP)` counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RocHull {
    pub vertices: Vec<(u64, u64)>,
    pub cases: u64,
    pub controls: u64,
}

impl RocHull {
    pub fn from_curve(curve: &RocCurve) -> Self {
        let mut hull: Vec<(u64, u64)> = Vec::with_capacity(curve.counts.len());
        for &p in &curve.counts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        RocHull {
            vertices: hull,
            cases: curve.cases,
            controls: curve.controls,
        }
    }

    /// Cutoffs `c_j = ΔTP / (ΔTP + ΔFP)` at which the cost-optimal vertex
    /// moves from `j + 1` to `j`; decreasing in `j`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|p| {
                let dfp = (p[1].0 - p[0].0) as f64;
                let dtp = (p[1].1 - p[0].1) as f64;
                dtp / (dtp + dfp)
            })
            .collect()
    }
}

fn cross(o: (u64, u64), a: (u64, u64), b: (u64, u64)) -> i128 {
    let (ox, oy) = (i128::from(o.0), i128::from(o.1));
    (i128::from(a.0) - ox) * (i128::from(b.1) - oy) - (i128::from(a.1) - oy) * (i128::from(b.0) - ox)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HMeasure {
    pub h: f64,
    /// Expected minimum cost `∫ min_t Q(t; c) w(c) dc`.
    pub v: f64,
    /// Same for the better of treat-all / treat-none, `ℓ_w(π, π)`.
    pub v_max: f64,
}

pub fn h_measure_of(scores: &[f64], outcomes: &[bool], w: &WeightSpec) -> Result<HMeasure> {
    let hull = RocHull::from_curve(&roc_of(scores, outcomes)?);
    h_measure_from_hull(&hull, w)
}

pub fn h_measure(data: &ValidationSet, w: &WeightSpec) -> Result<HMeasure> {
    h_measure_of(data.risks(), data.outcomes(), w)
}

pub fn h_measure_from_hull(hull: &RocHull, w: &WeightSpec) -> Result<HMeasure> {
    let n = (hull.cases + hull.controls) as f64;
    let pi = hull.cases as f64 / n;
    let v_max = w.moments_unchecked(pi).loss(pi);
    if !(v_max > 0.0) {
        return Err(Error::Degenerate("V_max is zero for this weight".into()));
    }
    let breaks = hull.breakpoints();
    let mut upper = w.moments_unchecked(1.0);
    let mut v = crate::sum::NeumaierSum::new();
    for (j, &(fp, tp)) in hull.vertices.iter().enumerate() {
        let lower = if j < breaks.len() {
            w.moments_unchecked(breaks[j])
        } else {
            w.moments_unchecked(0.0)
        };
        let d_cdf = upper.cdf - lower.cdf;
        let d_moment = upper.inc_moment - lower.inc_moment;
        v.add(fp as f64 / n * d_moment + (hull.cases - tp) as f64 / n * (d_cdf - d_moment));
        upper = lower;
    }
    let v = v.value().max(0.0);
    Ok(HMeasure {
        h: (1.0 - v / v_max).clamp(0.0, 1.0),
        v,
        v_max,
    })
}

/// Net benefit and loss across a grid of cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionCurve {
    pub grid: Vec<f64>,
    pub nb_opt_in: Vec<f64>,
    pub nb_opt_out: Vec<f64>,
    pub loss: Vec<f64>,
}

/// `0.01, 0.02, …, 0.99`.
pub fn default_grid() -> Vec<f64> {
    (1..100).map(|i| f64::from(i) / 100.0).collect()
}

pub fn decision_curve(data: &ValidationSet, grid: &[f64]) -> Result<DecisionCurve> {
    if let Some(&c) = grid.iter().find(|&&c| !(c > 0.0 && c < 1.0)) {
        return Err(Error::Domain {
            what: "cutoff",
            value: c,
            range: "(0, 1)",
        });
    }
    let mut cases: Vec<f64> = Vec::with_capacity(data.cases());
    let mut controls: Vec<f64> = Vec::with_capacity(data.controls());
    for (r, y) in data.iter() {
        if y {
            cases.push(r);
        } else {
            controls.push(r);
        }
    }
    cases.sort_by(f64::total_cmp);
    controls.sort_by(f64::total_cmp);
    let split = |sorted: &[f64], c: f64| {
        let below = sorted.partition_point(|&r| r < c);
        let above = sorted.len() - sorted.partition_point(|&r| r <= c);
        (above, below)
    };
    let mut curve = DecisionCurve {
        grid: grid.to_vec(),
        nb_opt_in: Vec::with_capacity(grid.len()),
        nb_opt_out: Vec::with_capacity(grid.len()),
        loss: Vec::with_capacity(grid.len()),
    };
    for &c in grid {
        let (above_cases, below_cases) = split(&cases, c);
        let (above_controls, below_controls) = split(&controls, c);
        let counts = CutoffCounts {
            above_cases,
            above_controls,
            below_cases,
            below_controls,
            n: data.len(),
        };
        curve.nb_opt_in.push(counts.net_benefit_opt_in(c));
        curve.nb_opt_out.push(counts.net_benefit_opt_out(c));
        curve.loss.push(counts.loss(c));
    }
    Ok(curve)
}

/// Binned calibration summary for reliability plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationBins {
    pub bins: Vec<CalibrationBin>,
}

pub fn calibration_curve(data: &ValidationSet, spec: &BinningSpec) -> Result<CalibrationBins> {
    Ok(CalibrationBins {
        bins: calibration_bins(data, spec)?,
    })
}

/// Everything needed to draw ROC, decision and calibration plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSet {
    pub roc: RocCurve,
    pub decision: DecisionCurve,
    pub calibration: CalibrationBins,
}

pub fn curves(data: &ValidationSet, grid: &[f64], spec: &BinningSpec) -> Result<CurveSet> {
    Ok(CurveSet {
        roc: roc(data)?,
        decision: decision_curve(data, grid)?,
        calibration: calibration_curve(data, spec)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{loss_at, net_benefit_opt_in, net_benefit_opt_out};
    use crate::oracle;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_scores(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> (Vec<f64>, Vec<bool>) {
        let outcomes: Vec<bool> = (0..n).map(|i| i % 2 == 0 || rng.random::<f64>() < 0.2).collect();
        let scores = outcomes
            .iter()
            .map(|&y| rng.random::<f64>() + if y { shift } else { 0.0 })
            .collect();
        (scores, outcomes)
    }

    #[test]
    fn separated_scores() {
        let curve = roc_of(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(curve.auc, 1.0);
        let path: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.fpr, p.tpr)).collect();
        assert_eq!(path, vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]);
        let hull = RocHull::from_curve(&curve);
        assert_eq!(hull.vertices, vec![(0, 0), (0, 2), (2, 2)]);
        let h = h_measure_of(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false], &WeightSpec::beta(2.0, 8.0).unwrap())
            .unwrap();
        assert_eq!(h.h, 1.0);
        assert!(h.v.abs() < 1e-15);
    }

    #[test]
    fn ties_form_one_step() {
        let curve = roc_of(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap();
        assert_eq!(curve.points.len(), 2);
        assert_eq!(curve.auc, 0.5);
        // brute-force Mann–Whitney count with half credit for ties
        let scores = [0.3, 0.7, 0.7, 0.1, 0.9, 0.3];
        let outcomes = [true, false, true, false, true, false];
        let mut wins = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                if outcomes[i] && !outcomes[j] {
                    wins += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
        }
        assert_eq!(roc_of(&scores, &outcomes).unwrap().auc, wins / 9.0);
    }

    #[test]
    fn roc_errors() {
        assert_eq!(roc_of(&[0.1, 0.2], &[true, true]).unwrap_err(), Error::SingleClass);
        assert!(roc_of(&[0.1], &[true, false]).is_err());
        assert!(roc_of(&[f64::NAN, 0.2], &[true, false]).is_err());
    }

    #[test]
    fn uninformative_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (scores, outcomes) = random_scores(&mut rng, 200_000, 0.0);
        let curve = roc_of(&scores, &outcomes).unwrap();
        assert!((curve.auc - 0.5).abs() < 0.005);
        let h = h_measure_of(&scores, &outcomes, &WeightSpec::uniform()).unwrap();
        assert!(h.h < 0.01, "{}", h.h);
    }

    #[test]
    fn h_matches_brute_force_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (scores, outcomes) = random_scores(&mut rng, 60, 0.4);
        let curve = roc_of(&scores, &outcomes).unwrap();
        let n = scores.len() as f64;
        let n1 = curve.cases;
        // minimum over every raw ROC point, not only hull vertices
        let min_cost = |c: f64| {
            curve
                .counts()
                .iter()
                .map(|&(fp, tp)| (c * fp as f64 + (1.0 - c) * (n1 - tp) as f64) / n)
                .fold(f64::INFINITY, f64::min)
        };
        let hull = RocHull::from_curve(&curve);
        let breaks = hull.breakpoints();
        for (a, b) in [(1.0, 1.0), (2.0, 8.0), (3.0, 15.0)] {
            let v = oracle::integrate_pieces(|c| min_cost(c) * oracle::beta_pdf(c, a, b), 0.0, 1.0, &breaks, 1e-13);
            let got = h_measure_from_hull(&hull, &WeightSpec::beta(a, b).unwrap()).unwrap();
            assert!((got.v - v).abs() < 1e-10, "{} vs {v}", got.v);
        }
    }

    #[test]
    fn point_mass_h_uses_best_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (scores, outcomes) = random_scores(&mut rng, 500, 0.5);
        let curve = roc_of(&scores, &outcomes).unwrap();
        let n = scores.len() as f64;
        for c in [0.2, 0.5, 0.7] {
            let best = curve
                .counts()
                .iter()
                .map(|&(fp, tp)| (c * fp as f64 + (1.0 - c) * (curve.cases - tp) as f64) / n)
                .fold(f64::INFINITY, f64::min);
            let h = h_measure_of(&scores, &outcomes, &WeightSpec::point_mass(c).unwrap()).unwrap();
            assert!((h.v - best).abs() < 1e-15);
        }
    }

    #[test]
    fn decision_curve_agrees_with_metrics() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let risks: Vec<f64> = (0..700).map(|_| rng.random()).collect();
        let outcomes = risks.iter().map(|&r| rng.random::<f64>() < r).collect();
        let data = ValidationSet::new(risks, outcomes).unwrap();
        let grid = default_grid();
        assert_eq!(grid.len(), 99);
        let curve = decision_curve(&data, &grid).unwrap();
        let pi = data.prevalence();
        for (k, &c) in grid.iter().enumerate() {
            assert_eq!(curve.nb_opt_in[k], net_benefit_opt_in(&data, c).unwrap());
            assert_eq!(curve.nb_opt_out[k], net_benefit_opt_out(&data, c).unwrap());
            assert_eq!(curve.loss[k], loss_at(&data, c).unwrap());
            assert!((curve.loss[k] - (1.0 - c) * (pi - curve.nb_opt_in[k])).abs() < 1e-12);
        }
        let none = data.with_risks(vec![0.0; 700]).unwrap();
        assert!(decision_curve(&none, &grid).unwrap().nb_opt_in.iter().all(|&v| v == 0.0));
        assert!(decision_curve(&data, &[0.5, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn hull_invariant_to_monotone_transform(seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (scores, outcomes) = random_scores(&mut rng, 150, 0.3);
            let transformed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            let a = RocHull::from_curve(&roc_of(&scores, &outcomes).unwrap());
            let b = RocHull::from_curve(&roc_of(&transformed, &outcomes).unwrap());
            prop_assert_eq!(&a, &b);
            let w = WeightSpec::beta(2.0, 8.0).unwrap();
            let ha = h_measure_from_hull(&a, &w).unwrap();
            prop_assert_eq!(ha.h.to_bits(), h_measure_from_hull(&b, &w).unwrap().h.to_bits());
            prop_assert!((0.0..=1.0).contains(&ha.h));
        }

        #[test]
        fn hull_is_concave_and_spans_the_square(seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (scores, outcomes) = random_scores(&mut rng, 120, 0.2);
            let curve = roc_of(&scores, &outcomes).unwrap();
            let hull = RocHull::from_curve(&curve);
            prop_assert_eq!(hull.vertices[0], (0, 0));
            prop_assert_eq!(*hull.vertices.last().unwrap(), (curve.controls, curve.cases));
            let breaks = hull.breakpoints();
            prop_assert!(breaks.windows(2).all(|p| p[0] > p[1]));
            for &p in curve.counts() {
                for edge in hull.vertices.windows(2) {
                    if edge[0].0 <= p.0 && p.0 <= edge[1].0 {
                        prop_assert!(cross(edge[0], edge[1], p) <= 0);
                    }
                }
            }
        }
    }
}
