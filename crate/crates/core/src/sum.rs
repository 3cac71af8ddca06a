//! Compensated summation.
//!
//! Dataset-level scores at N = 1e6 are means of a million terms of very
//! different magnitude; plain accumulation loses several digits. All
//! reductions go through [`NeumaierSum`], and the parallel helpers split the
//! index range into fixed-size chunks whose partial sums are combined in
//! chunk order, so the result does not depend on the thread count.

use rayon::prelude::*;

const CHUNK: usize = 1 << 14;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Sum of `term(i)` for `i` in `0..n`, parallel over fixed chunks.
pub fn par_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    if n <= CHUNK {
        return compensated_sum((0..n).map(&term));
    }
    let partials: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n);
            compensated_sum((start..end).map(&term))
        })
        .collect();
    compensated_sum(partials)
}

pub fn par_mean<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    debug_assert!(n > 0);
    par_sum(n, term) / n as f64
}
