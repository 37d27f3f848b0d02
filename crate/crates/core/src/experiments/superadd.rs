use std::time::Instant;

use rand_distr::{Binomial, Distribution};

use super::{paired, run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Result};
use crate::exact::{log_partition, ENUMERATION_CAP};
use crate::model::{build_multiedge, s_n};
use crate::stats::moments;

fn in_block_window(n: usize, n1: usize) -> bool {
    3 * n1 >= n && 3 * n1 <= 2 * n
}

/// `log Z°_N(S_N, N)` against `log Z°_{N1}(M1, N) + log Z°_{N2}(M2, N)` with
/// `M1 ~ Binomial(S_N, N1/N)` redrawn per replica.
pub fn superadditivity_trial(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (n, n1) = (cfg.n, cfg.n1());
    cfg.check_n(n, ENUMERATION_CAP)?;
    if n1 == 0 || n1 >= n || !in_block_window(n, n1) {
        return invalid(format!("n1 = {n1} outside [n/3, 2n/3] for n = {n}"));
    }
    let start = Instant::now();
    let law = cfg.law()?;
    let s = s_n(n, cfg.alpha, cfg.epsilon, cfg.c0);
    let split = Binomial::new(s as u64, n1 as f64 / n as f64)
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let pairs = run_tasks(cfg.samples, |i| {
        let mut rng = task_rng(cfg.seed, "superadd", &[n as u64, n1 as u64, i as u64]);
        let whole = build_multiedge(s, n, n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
        let m1 = split.sample(&mut rng) as usize;
        let a = build_multiedge(m1, n1, n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
        let b = build_multiedge(s - m1, n - n1, n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
        let lhs = log_partition(&whole)?.log_z;
        let rhs = log_partition(&a)?.log_z + log_partition(&b)?.log_z;
        Ok((lhs, rhs))
    })?;
    let (lhs, rhs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (ml, mr, d) = (moments(&lhs), moments(&rhs), paired(&lhs, &rhs));
    let mut report = ExperimentReport::new("superadditivity", cfg);
    report.push(ReportRow::info(Some(n), "S_N", s as f64, None));
    report.push(ReportRow::info(Some(n), "lhs_log_z", ml.mean, Some(ml.stderr)));
    report.push(ReportRow::info(Some(n), "rhs_log_z", mr.mean, Some(mr.stderr)));
    report.push(ReportRow::at_least(
        Some(n),
        "lhs_minus_rhs",
        d.mean,
        Some(d.stderr),
        0.0,
        2.0 * d.stderr,
    ));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `(N, a_N, stderr)` with `a_N = -E log Z°_N(S_N, N)` for each `N` in `ns`.
pub fn multiedge_series(cfg: &ExperimentConfig, ns: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    cfg.validate()?;
    let law = cfg.law()?;
    ns.iter()
        .map(|&n| {
            cfg.check_n(n, ENUMERATION_CAP)?;
            let s = s_n(n, cfg.alpha, cfg.epsilon, cfg.c0);
            let values = run_tasks(cfg.samples, |i| {
                let mut rng = task_rng(cfg.seed, "multiedge_series", &[n as u64, i as u64]);
                let inst = build_multiedge(s, n, n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
                Ok(-log_partition(&inst)?.log_z)
            })?;
            let m = moments(&values);
            Ok((n, m.mean, m.stderr))
        })
        .collect()
}

/// Checks `a_N <= a_{N1} + a_{N-N1} + C N^gamma` for every `N` and every
/// `N1` in `[N/3, 2N/3]` whose parts lie in the series' range.
///
/// `series` must cover a contiguous range of `N`, in increasing order.
pub fn subadditivity_hypothesis_check(
    cfg: &ExperimentConfig,
    series: &[(usize, f64)],
    gamma: f64,
    c: f64,
) -> Result<ExperimentReport> {
    let Some(&(lo, _)) = series.first() else {
        return invalid("subadditivity check needs a nonempty series");
    };
    if series.iter().enumerate().any(|(k, &(n, _))| n != lo + k) {
        return invalid("series must cover a contiguous increasing range of N");
    }
    if !(gamma < 1.0) || !(c >= 0.0) || !c.is_finite() {
        return invalid(format!("need gamma < 1 and C >= 0, got gamma={gamma}, C={c}"));
    }
    let start = Instant::now();
    let value = |n: usize| (n >= lo && n - lo < series.len()).then(|| series[n - lo].1);
    let mut report = ExperimentReport::new("subadditivity_check", cfg);
    let mut total = 0usize;
    for &(n, a_n) in series {
        let mut violations = 0usize;
        let mut worst = f64::INFINITY;
        let mut tested = 0usize;
        for n1 in n.div_ceil(3)..=(2 * n) / 3 {
            if n1 == 0 || n1 >= n || !in_block_window(n, n1) {
                continue;
            }
            let (Some(a1), Some(a2)) = (value(n1), value(n - n1)) else { continue };
            tested += 1;
            let slack = a1 + a2 + c * (n as f64).powf(gamma) - a_n;
            worst = worst.min(slack);
            if slack < 0.0 {
                violations += 1;
            }
        }
        report.push(ReportRow::info(Some(n), "a_N_over_N", a_n / n as f64, None));
        if tested > 0 {
            report.push(ReportRow::info(Some(n), "min_slack", worst, None));
            report.push(ReportRow::at_most(Some(n), "violations", violations as f64, None, 0.0, 0.0));
        }
        total += violations;
    }
    report.push(ReportRow::at_most(None, "total_violations", total as f64, None, 0.0, 0.0));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
