//! Small statistical helpers shared by the experiments and the test suites.
//!
//! All reductions run in slice order with compensated summation, so results
//! depend only on the order of the input, never on how it was produced.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Neumaier compensated summation.
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

    /// Multiplies the accumulated value (and its error term) by `factor`.
    #[inline]
    pub fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.compensation *= factor;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Sample mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let count = xs.len();
    if count == 0 {
        return Moments { count, mean: f64::NAN, variance: f64::NAN, stderr: f64::NAN };
    }
    let mean = compensated_sum(xs.iter().copied()) / count as f64;
    if count < 2 {
        return Moments { count, mean, variance: 0.0, stderr: 0.0 };
    }
    let variance =
        compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (count - 1) as f64;
    let stderr = (variance / count as f64).sqrt();
    Moments { count, mean, variance, stderr }
}

/// Delete-one jackknife standard error of the unbiased sample variance.
pub fn jackknife_variance_stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 3 {
        return f64::NAN;
    }
    let nf = n as f64;
    let total = compensated_sum(xs.iter().copied());
    let total_sq = compensated_sum(xs.iter().map(|x| x * x));
    let leave_one_out: Vec<f64> = xs
        .iter()
        .map(|x| {
            let m = nf - 1.0;
            let s = total - x;
            let s2 = total_sq - x * x;
            ((s2 - s * s / m) / (m - 1.0)).max(0.0)
        })
        .collect();
    let mean = compensated_sum(leave_one_out.iter().copied()) / nf;
    let spread = compensated_sum(leave_one_out.iter().map(|v| (v - mean) * (v - mean)));
    ((nf - 1.0) / nf * spread).sqrt()
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    sxy / sxx
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            let above = (k + 1) as f64 / n - f;
            let below = f - k as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value at level `level` for `n` samples.
pub fn ks_critical(n: usize, level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square goodness of fit. Returns `(statistic, p_value)`.
///
/// `observed` and `expected` are parallel bin counts; `constraints` is the
/// number of degrees of freedom lost beyond the sum constraint.
pub fn chi_square_test(observed: &[u64], expected: &[f64], constraints: usize) -> (f64, f64) {
    assert_eq!(observed.len(), expected.len());
    let statistic = compensated_sum(
        observed
            .iter()
            .zip(expected)
            .map(|(&o, &e)| (o as f64 - e) * (o as f64 - e) / e),
    );
    let dof = observed.len().saturating_sub(1 + constraints).max(1);
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    (statistic, 1.0 - dist.cdf(statistic))
}

/// Two-sided binomial test of a fair coin via the normal approximation.
/// Returns the z-score of `successes` out of `trials`.
pub fn fair_coin_z(successes: u64, trials: u64) -> f64 {
    let n = trials as f64;
    (successes as f64 - n / 2.0) / (n / 4.0).sqrt()
}

/// Two-sided normal critical value at 1%.
pub const Z_CRIT_1PCT: f64 = 2.575_829_303_548_901;
