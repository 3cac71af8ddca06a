//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../src/oracle.rs"]
mod oracle;

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use wbrier::decompose::{decompose, decompose_with, ipa, scaled_weighted_brier};
use wbrier::inference::{
    bootstrap, bootstrap_indices, percentile_ci, var_bsw_calibrated, var_bsw_null, var_bsw_well_calibrated,
};
use wbrier::metrics::{
    loss_at, loss_w, net_benefit_opt_in, net_benefit_opt_out, spiegelhalter_z, spiegelhalter_z_weighted,
    weighted_brier,
};
use wbrier::rocutil::{auc, h_measure, h_measure_of, roc_of, RocHull};
use wbrier::simlab::{generate_set_a, generate_set_b, misclassification_study, CohortDesign, SetA, SetB};
use wbrier::{BinningSpec, BootstrapConfig, McbEstimator, ValidationSet, WeightSpec};

const N_LARGE: usize = 1_000_000;
const SEED: u64 = 20240601;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Accumulates named checks; a criterion passes when all of its checks do.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(&format!("{what}: got {got:.5}, want {want} ± {tol}"), (got - want).abs() <= tol);
    }

    fn check(&mut self, what: &str, ok: bool) {
        self.count += 1;
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn finish(self, summary: String) -> Outcome {
        let pass = self.failures.is_empty();
        let detail = if pass {
            format!("{summary} ({} checks)", self.count)
        } else {
            format!("{summary}; {} of {} checks failed: {}", self.failures.len(), self.count, self.failures.join("; "))
        };
        Outcome { pass, detail }
    }
}

fn set_a() -> &'static SetA {
    static DATA: OnceLock<SetA> = OnceLock::new();
    DATA.get_or_init(|| generate_set_a(N_LARGE, SEED).unwrap())
}

fn set_b() -> &'static SetB {
    static DATA: OnceLock<SetB> = OnceLock::new();
    DATA.get_or_init(|| generate_set_b(N_LARGE, SEED).unwrap())
}

fn beta(a: f64, b: f64) -> WeightSpec {
    WeightSpec::beta(a, b).unwrap()
}

/// Independent well-calibrated data: `r = u²`, `Y ~ Bernoulli(r)`.
fn calibrated(rng: &mut ChaCha8Rng, n: usize) -> ValidationSet {
    let risks: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(2)).collect();
    let outcomes = risks.iter().map(|&r| rng.random::<f64>() < r).collect();
    ValidationSet::new(risks, outcomes).unwrap()
}

fn table2() -> Outcome {
    let start = Instant::now();
    let a = set_a();
    let models = [&a.model1, &a.model2, &a.model3];
    let mut checks = Checks::default();
    let nb = [0.327, 0.384, 0.384];
    let ipas = [0.372, 0.372, 0.289];
    // (weight, BS_w, MCB_w, DSC_w) per model
    let rows = [
        ((1.0, 1.0), [0.078, 0.078, 0.089], [0.000, 0.000, 0.010], [0.046, 0.046, 0.046]),
        ((2.0, 5.0), [0.096, 0.073, 0.076], [0.000, 0.000, 0.003], [0.036, 0.059, 0.059]),
        ((4.0, 8.0), [0.110, 0.084, 0.087], [0.000, 0.000, 0.002], [0.048, 0.074, 0.074]),
    ];
    for (k, data) in models.iter().enumerate() {
        let m = k + 1;
        checks.close(&format!("model {m} AUC"), auc(data).unwrap(), 0.831, 0.003);
        checks.close(&format!("model {m} NB_in(0.3)"), net_benefit_opt_in(data, 0.3).unwrap(), nb[k], 0.003);
        checks.close(&format!("model {m} IPA"), ipa(data).unwrap(), ipas[k], 0.005);
        for &((wa, wb), bs, mcb, dsc) in &rows {
            let w = beta(wa, wb);
            let d = decompose(data, &w, &BinningSpec::Quantile(10)).unwrap();
            checks.close(&format!("model {m} BS_w({wa},{wb})"), d.bs_w, bs[k], 0.002);
            checks.close(&format!("model {m} MCB_w({wa},{wb})"), d.mcb_w, mcb[k], 0.003);
            checks.close(&format!("model {m} DSC_w({wa},{wb})"), d.dsc_w, dsc[k], 0.003);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    checks.check(&format!("runtime {elapsed:.1} s under 60 s"), elapsed < 60.0);
    checks.finish(format!("Set A, N=1e6, seed {SEED}, {elapsed:.1} s including simulation"))
}

fn table3() -> Outcome {
    let b = set_b();
    let models = [("true", &b.truth), ("OH", &b.over_high), ("OL", &b.over_low)];
    let rows = [
        ((1.0, 1.0), [0.0996, 0.1068, 0.1068], [0.0000, 0.0072, 0.0072], [0.0250, 0.0250, 0.0250]),
        ((2.0, 5.0), [0.1068, 0.1077, 0.1227], [0.0000, 0.0009, 0.0158], [0.0257, 0.0257, 0.0257]),
        ((4.0, 8.0), [0.1239, 0.1245, 0.1408], [0.0000, 0.0006, 0.0168], [0.0345, 0.0345, 0.0345]),
    ];
    let mut checks = Checks::default();
    let mut bs25 = [0.0; 3];
    let mut bs11 = [0.0; 3];
    for (k, (name, data)) in models.iter().enumerate() {
        for &((wa, wb), bs, mcb, dsc) in &rows {
            let d = decompose(data, &beta(wa, wb), &BinningSpec::Quantile(10)).unwrap();
            checks.close(&format!("{name} BS_w({wa},{wb})"), d.bs_w, bs[k], 0.002);
            checks.close(&format!("{name} MCB_w({wa},{wb})"), d.mcb_w, mcb[k], 0.003);
            checks.close(&format!("{name} DSC_w({wa},{wb})"), d.dsc_w, dsc[k], 0.002);
            if (wa, wb) == (2.0, 5.0) {
                bs25[k] = d.bs_w;
            }
            if (wa, wb) == (1.0, 1.0) {
                bs11[k] = d.bs_w;
            }
        }
    }
    checks.check("BS_w(2,5): OH < OL", bs25[1] < bs25[2]);
    checks.close("BS_w(1,1) OH", bs11[1], 0.1068, 0.002);
    checks.close("BS_w(1,1) OL", bs11[2], 0.1068, 0.002);
    checks.finish(format!(
        "Set B, N=1e6: BS_w(2,5) OH {:.4} < OL {:.4}; BS_w(1,1) OH {:.4}, OL {:.4}",
        bs25[1], bs25[2], bs11[1], bs11[2]
    ))
}

fn schervish() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let uniform = WeightSpec::uniform();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let r: f64 = rng.random();
        let y = rng.random::<bool>();
        let target = 0.5 * (r - f64::from(u8::from(y))).powi(2);
        let by_quadrature = oracle::integrate_pieces(|c| oracle::cost_loss(r, y, c), 0.0, 1.0, &[r], 1e-13);
        let by_library = loss_w(r, y, &uniform).unwrap();
        worst = worst.max((target - by_quadrature).abs()).max((target - by_library).abs());
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("1000 pairs, max |½(r−y)² − ∫ℓ_c dc| = {worst:.2e} (bound 1e-8)"),
    }
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let uniform = WeightSpec::uniform();
    let mut worst = [0.0f64; 5];
    for _ in 0..100 {
        let n = rng.random_range(20..400);
        let mut data = calibrated(&mut rng, n);
        while !data.has_both_classes() {
            data = calibrated(&mut rng, n);
        }
        let pi = data.prevalence();
        for _ in 0..5 {
            let c: f64 = rng.random_range(0.01..0.99);
            let l = loss_at(&data, c).unwrap();
            let via_in = (1.0 - c) * (pi - net_benefit_opt_in(&data, c).unwrap());
            let via_out = c * (1.0 - pi - net_benefit_opt_out(&data, c).unwrap());
            worst[0] = worst[0].max((l - via_in).abs()).max((l - via_out).abs());
            let point = weighted_brier(&data, &WeightSpec::point_mass(c).unwrap());
            worst[1] = worst[1].max((point - l).abs());
        }
        let mse = data.iter().map(|(r, y)| (r - f64::from(u8::from(y))).powi(2)).sum::<f64>() / n as f64;
        worst[2] = worst[2].max((weighted_brier(&data, &uniform) - 0.5 * mse).abs());
        let z = spiegelhalter_z(&data).unwrap();
        let zw = spiegelhalter_z_weighted(&data, &uniform).unwrap();
        worst[3] = worst[3].max((z - zw).abs());
        worst[4] = worst[4].max((scaled_weighted_brier(&data, &uniform).unwrap() - ipa(&data).unwrap()).abs());
    }
    let names = ["L/NB", "point mass", "uniform ½MSE", "uniform Z_w", "sBS = IPA"];
    let detail = names
        .iter()
        .zip(worst)
        .map(|(name, e)| format!("{name} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        pass: worst.iter().all(|&e| e <= 1e-12),
        detail: format!("100 datasets, max errors: {detail} (bound 1e-12)"),
    }
}

fn additivity() -> Outcome {
    let mut checks = Checks::default();
    let a = set_a();
    let mut continuous: f64 = 0.0;
    for data in [&a.model1, &a.model2, &a.model3] {
        for (wa, wb) in [(1.0, 1.0), (2.0, 5.0), (4.0, 8.0)] {
            let d = decompose(data, &beta(wa, wb), &BinningSpec::Quantile(10)).unwrap();
            continuous = continuous.max(d.residual.abs());
        }
    }
    checks.check(&format!("deciles residual {continuous:.2e}"), continuous <= 0.002);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let levels = [0.05, 0.2, 0.35, 0.5, 0.8];
    let mut discrete: f64 = 0.0;
    for _ in 0..50 {
        let risks: Vec<f64> = (0..500).map(|_| levels[rng.random_range(0..levels.len())]).collect();
        let outcomes = risks.iter().map(|&r| rng.random::<f64>() < r + 0.05).collect();
        let data = ValidationSet::new(risks, outcomes).unwrap();
        for w in [WeightSpec::uniform(), beta(2.0, 5.0), beta(4.0, 8.0)] {
            for est in [McbEstimator::BinMean, McbEstimator::PerSample] {
                let d = decompose_with(&data, &w, &BinningSpec::UniqueValues, est).unwrap();
                discrete = discrete.max(d.residual.abs());
            }
        }
    }
    checks.check(&format!("discrete residual {discrete:.2e}"), discrete <= 1e-12);
    checks.finish(format!(
        "max |residual| {continuous:.2e} at N=1e6 deciles (bound 0.002), {discrete:.2e} for discrete risks (bound 1e-12)"
    ))
}

fn h_cross_check() -> Outcome {
    let data = &set_b().truth;
    let mut checks = Checks::default();
    let mut parts = Vec::new();
    for (wa, wb) in [(1.0, 1.0), (2.0, 8.0), (3.0, 15.0)] {
        let w = beta(wa, wb);
        let h = h_measure(data, &w).unwrap().h;
        let s = scaled_weighted_brier(data, &w).unwrap();
        checks.check(&format!("Beta({wa},{wb}) H {h:.4} vs sBS_w {s:.4}"), (h - s).abs() <= 0.01);
        parts.push(format!("Beta({wa},{wb}) |H−sBS_w| {:.4}", (h - s).abs()));
    }
    let risks = data.risks();
    let logits: Vec<f64> = risks.iter().map(|&r| (r / (1.0 - r)).ln()).collect();
    let distinct = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    };
    checks.check("logit keeps ties", distinct(risks) == distinct(&logits));
    let hull = RocHull::from_curve(&roc_of(risks, data.outcomes()).unwrap());
    let hull_t = RocHull::from_curve(&roc_of(&logits, data.outcomes()).unwrap());
    checks.check("hull equal under logit", hull == hull_t);
    let w = beta(2.0, 8.0);
    let h = h_measure(data, &w).unwrap().h;
    let h_t = h_measure_of(&logits, data.outcomes(), &w).unwrap().h;
    checks.check("H bitwise equal under logit", h.to_bits() == h_t.to_bits());
    parts.push(format!("hull of {} vertices invariant to logit", hull.vertices.len()));
    checks.finish(parts.join(", "))
}

fn variance_properties() -> Outcome {
    let mut checks = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let weights = [WeightSpec::uniform(), beta(2.0, 5.0), beta(4.0, 8.0), beta(3.0, 15.0)];
    let mut identity: f64 = 0.0;
    let mut ordered = true;
    for _ in 0..100 {
        let data = calibrated(&mut rng, 1000);
        for w in &weights {
            let mu = w.mean();
            let direct = data
                .risks()
                .iter()
                .map(|&r| r * (1.0 - r) * (1.0 - w.cdf(r).unwrap() - mu).powi(2))
                .sum::<f64>()
                / data.len() as f64;
            let s0 = var_bsw_well_calibrated(&data, w);
            let sc = var_bsw_calibrated(&data, w);
            identity = identity.max((s0 - sc - direct).abs()).max((var_bsw_null(&data, w) - direct).abs());
            ordered &= s0 >= sc;
        }
    }
    checks.check(&format!("identity error {identity:.1e}"), identity <= 1e-12);
    checks.check("σ²_0 ≥ σ²_c", ordered);

    let w = beta(2.0, 5.0);
    let zs: Vec<f64> = (0..10_000)
        .map(|_| spiegelhalter_z_weighted(&calibrated(&mut rng, 500), &w).unwrap())
        .collect();
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (zs.len() - 1) as f64;
    checks.check(&format!("Z_w mean {mean:.4}"), (-0.05..=0.05).contains(&mean));
    checks.check(&format!("Z_w variance {var:.4}"), (0.9..=1.1).contains(&var));
    checks.finish(format!(
        "identity error {identity:.1e} (bound 1e-12), σ²_0 ≥ σ²_c on 400 cases, Z_w null over 10000×n=500: mean {mean:.4}, variance {var:.4}"
    ))
}

/// `E ℓ_w(r(X), Y)` for the Set B true model, `r(x) = expit(x − ½)`,
/// by quadrature over the cutoff.
fn set_b_truth(a: f64, b: f64) -> f64 {
    let phi = Normal::standard();
    let integrand = |c: f64| {
        if c <= 0.0 || c >= 1.0 {
            return 0.0;
        }
        let t = 0.5 + (c / (1.0 - c)).ln();
        0.5 * c * (1.0 - phi.cdf(t)) + 0.5 * (1.0 - c) * phi.cdf(t - 1.0)
    };
    oracle::beta_integral(integrand, 0.0, 1.0, a, b)
}

fn coverage() -> Outcome {
    let (a, b) = (2.0, 5.0);
    let w = beta(a, b);
    let truth = set_b_truth(a, b);
    let sims = 1000;
    let mut covered = 0;
    for sim in 0..sims {
        let data = generate_set_b(2000, 10_000 + sim).unwrap().truth;
        let losses: Vec<f64> = data.iter().map(|(r, y)| loss_w(r, y, &w).unwrap()).collect();
        let estimate = losses.iter().sum::<f64>() / losses.len() as f64;
        let cfg = BootstrapConfig {
            seed: sim,
            ..BootstrapConfig::default()
        };
        let reps = bootstrap_indices(&data, &cfg, |idx| {
            Ok(vec![idx.iter().map(|&i| losses[i]).sum::<f64>() / idx.len() as f64])
        })
        .unwrap();
        let column: Vec<f64> = reps.iter().map(|r| r[0]).collect();
        if percentile_ci(estimate, &column, cfg.level).unwrap().contains(truth) {
            covered += 1;
        }
    }
    let rate = f64::from(covered) / sims as f64;

    let data = generate_set_b(3000, 99).unwrap().truth;
    let cfg = BootstrapConfig {
        replicates: 500,
        seed: 42,
        ..BootstrapConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bootstrap(&data, |d| Ok(weighted_brier(d, &w)), &cfg).unwrap())
    };
    let (one, four) = (run(1), run(4));
    let deterministic = one.lower.to_bits() == four.lower.to_bits() && one.upper.to_bits() == four.upper.to_bits();

    let mut checks = Checks::default();
    checks.check(&format!("coverage {rate:.3}"), (0.93..=0.97).contains(&rate));
    checks.check("1 vs 4 threads bitwise equal", deterministic);
    checks.finish(format!(
        "Beta(2,5) truth {truth:.6}, coverage {covered}/{sims} = {rate:.3} (93–97%), 1 vs 4 threads identical: {deterministic}"
    ))
}

fn misclassification() -> Outcome {
    let design = CohortDesign {
        n_patients: 10_000,
        ..CohortDesign::default()
    };
    let weights = [beta(2.0, 8.0), beta(3.0, 15.0)];
    let seeds = 200u64;
    let mut ordered = 0;
    let mut max_auc_gap: f64 = 0.0;
    for seed in 0..seeds {
        let study = misclassification_study(&design, seed).unwrap();
        let holds = weights.iter().all(|w| {
            let y = weighted_brier(&study.model_y, w);
            y < weighted_brier(&study.model_s1, w) && y < weighted_brier(&study.model_s2, w)
        });
        ordered += u32::from(holds);
        let auc_y = auc(&study.model_y).unwrap();
        for other in [&study.model_s1, &study.model_s2] {
            max_auc_gap = max_auc_gap.max((auc_y - auc(other).unwrap()).abs());
        }
    }
    let share = f64::from(ordered) / seeds as f64;
    let mut checks = Checks::default();
    checks.check(&format!("ordering in {share:.3} of seeds"), share >= 0.95);
    checks.check(&format!("max AUC gap {max_auc_gap:.4}"), max_auc_gap <= 0.01);
    checks.finish(format!(
        "{} patients × {} visits: Y beats S1 and S2 on BS_w(2,8) and BS_w(3,15) in {ordered}/{seeds} seeds (need ≥ 95%), max |ΔAUC| {max_auc_gap:.4} (bound 0.01)",
        design.n_patients, design.visits_per_patient
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("C1 Set A golden values", table2),
        ("C2 Set B golden values", table3),
        ("C3 Schervish representation", schervish),
        ("C4 exact identities", identities),
        ("C5 decomposition additivity", additivity),
        ("C6 H measure cross-check", h_cross_check),
        ("C7 variance properties and Z_w null", variance_properties),
        ("C8 bootstrap coverage and determinism", coverage),
        ("C9 misclassification direction", misclassification),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!outcome.pass);
        println!("{status} {name}: {} [{:.1} s]", outcome.detail, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
