//! Independent numerical oracles for tests: adaptive Gauss-Kronrod
//! quadrature and quadrature-normalized Beta densities. Nothing here calls
//! into the library's special functions.
#![allow(dead_code)]

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || (b - a) < 1e-15 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth - 1) + adapt(f, mid, b, 0.5 * tol, depth - 1)
}

/// Integral of `f` over `[a, b]` to roughly `tol` absolute error.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adapt(&f, a, b, tol, 50)
}

/// Integral with the interval pre-split at `breaks` (discontinuities).
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.sort_by(f64::total_cmp);
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / points.len() as f64))
        .sum()
}

fn beta_kernel(c: f64, a: f64, b: f64) -> f64 {
    if c <= 0.0 || c >= 1.0 {
        return 0.0;
    }
    c.powf(a - 1.0) * (1.0 - c).powf(b - 1.0)
}

pub fn beta_norm(a: f64, b: f64) -> f64 {
    integrate(|c| beta_kernel(c, a, b), 0.0, 1.0, 1e-15)
}

pub fn beta_pdf(c: f64, a: f64, b: f64) -> f64 {
    beta_kernel(c, a, b) / beta_norm(a, b)
}

/// Integral of `g(c) * beta_pdf(c)` over `[lo, hi]`.
pub fn beta_integral<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    let norm = beta_norm(a, b);
    integrate(|c| g(c) * beta_kernel(c, a, b), lo, hi, 1e-15) / norm
}

pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    beta_integral(|_| 1.0, 0.0, x, a, b)
}

/// Cost-weighted misclassification loss written out from its definition.
pub fn cost_loss(risk: f64, y: bool, c: f64) -> f64 {
    let fp = if risk > c && !y { c } else { 0.0 };
    let fnl = if risk < c && y { 1.0 - c } else { 0.0 };
    fp + fnl
}
