use std::time::Instant;

use rand_distr::{Binomial, Distribution};
use statrs::distribution::{Binomial as ExactBinomial, DiscreteCDF};

use super::{run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Error, Result};
use crate::stats::moments;

const MIN_SAMPLES: usize = 1000;
const EXCEEDANCE_CAP: f64 = 0.01;

/// `P(|M - E M| > t)` for `M ~ Binomial(trials, p)`.
fn binomial_two_sided_tail(trials: u64, p: f64, t: f64) -> f64 {
    let law = ExactBinomial::new(p, trials).expect("valid binomial");
    let mean = trials as f64 * p;
    let upper = (mean + t).floor();
    let above = if upper >= trials as f64 { 0.0 } else { law.sf(upper as u64) };
    let lower = (mean - t).ceil();
    let below = if lower <= 0.0 { 0.0 } else { law.cdf(lower as u64 - 1) };
    above + below
}

/// Number `M` of couplings above `N^(1/alpha - epsilon)` among the
/// `N(N-1)/2` pairs: exact and empirical mean, and the frequency of
/// `|M - E M| > N^(1/2 + alpha epsilon/2 + epsilon)`.
pub fn edge_count_concentration(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.samples < MIN_SAMPLES {
        return invalid(format!("edge_count_concentration needs >= {MIN_SAMPLES} samples, got {}", cfg.samples));
    }
    if cfg.n < 2 {
        return invalid("edge_count_concentration needs n >= 2");
    }
    let start = Instant::now();
    let law = cfg.law()?;
    let (n, a, e) = (cfg.n, cfg.alpha, cfg.epsilon);
    let nf = n as f64;
    let pairs = (n * (n - 1) / 2) as u64;
    let p = law.tail_prob(nf.powf(1.0 / a - e))?;
    let exact_mean = pairs as f64 * p;
    let formula = cfg.c0 / 2.0 * nf.powf(1.0 + a * e);
    let threshold = nf.powf(0.5 + a * e / 2.0 + e);
    let sampler = Binomial::new(pairs, p).map_err(|err| Error::InvalidArgument(err.to_string()))?;

    let draws = run_tasks(cfg.samples, |i| {
        let mut rng = task_rng(cfg.seed, "chernoff", &[n as u64, i as u64]);
        Ok(sampler.sample(&mut rng) as f64)
    })?;
    let m = moments(&draws);
    let exceed = draws.iter().filter(|&&x| (x - exact_mean).abs() > threshold).count() as f64
        / draws.len() as f64;

    let mut report = ExperimentReport::new("edge_count", cfg);
    report.push(ReportRow::info(Some(n), "tail_probability", p, None));
    report.push(ReportRow::check(
        Some(n),
        "exact_mean_vs_formula",
        exact_mean,
        None,
        formula,
        2.0 * nf.powf(a * e) - (exact_mean - formula).abs(),
    ));
    report.push(ReportRow::check(
        Some(n),
        "empirical_mean",
        m.mean,
        Some(m.stderr),
        exact_mean,
        3.0 * m.stderr - (m.mean - exact_mean).abs(),
    ));
    report.push(ReportRow::info(Some(n), "exceedance_threshold", threshold, None));
    report.push(ReportRow::info(
        Some(n),
        "exact_exceedance_probability",
        binomial_two_sided_tail(pairs, p, threshold),
        None,
    ));
    report.push(ReportRow::at_most(Some(n), "exceedance_frequency", exceed, None, EXCEEDANCE_CAP, 0.0));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_tail_matches_direct_sum() {
        let (trials, p, t) = (30u64, 0.2, 3.5);
        let law = ExactBinomial::new(p, trials).unwrap();
        let mean = 6.0;
        let direct: f64 = (0..=trials)
            .filter(|&k| (k as f64 - mean).abs() > t)
            .map(|k| statrs::distribution::Discrete::pmf(&law, k))
            .sum();
        assert!((binomial_two_sided_tail(trials, p, t) - direct).abs() < 1e-12);
    }

    #[test]
    fn mean_formulas_at_hundred() {
        let cfg = ExperimentConfig { n: 100, samples: 1000, ..Default::default() };
        let r = edge_count_concentration(&cfg).unwrap();
        let row = r.row("exact_mean_vs_formula", Some(100)).unwrap();
        assert!((row.estimate - 4950.0 * 100f64.powf(-0.85)).abs() < 1e-9);
        assert!((row.estimate - 98.77).abs() < 0.01);
        assert!(row.pass);
    }

    #[test]
    fn tiny_tail_concentrates_at_zero() {
        let cfg = ExperimentConfig { n: 4, c0: 0.01, samples: 1000, ..Default::default() };
        let r = edge_count_concentration(&cfg).unwrap();
        assert!(r.row("empirical_mean", None).unwrap().estimate < 0.2);
    }
}
