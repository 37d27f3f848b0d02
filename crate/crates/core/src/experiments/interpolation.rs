use std::time::Instant;

use super::{run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Result};
use crate::exact::{interpolation_step_gap, log_partition};
use crate::model::{build_interpolated, s_n};
use crate::stats::moments;

const SWEEP_CAP: usize = 16;
const MAX_CERTIFICATE_BASES: usize = 100;
const GAP_TOLERANCE: f64 = 1e-9;

/// `E log Z^(r)` along the r-grid plus the exact one-step certificate on
/// sampled base instances.
pub fn interpolation_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (n, n1) = (cfg.n, cfg.n1());
    cfg.check_n(n, SWEEP_CAP)?;
    if n1 == 0 || n1 >= n {
        return invalid(format!("block split needs 1 <= n1 <= n - 1, got n={n}, n1={n1}"));
    }
    let start = Instant::now();
    let law = cfg.law()?;
    let s = s_n(n, cfg.alpha, cfg.epsilon, cfg.c0);
    let grid = cfg.r_grid.clone().unwrap_or_else(|| vec![0, s / 2, s]);
    if let Some(&bad) = grid.iter().find(|&&r| r > s) {
        return invalid(format!("r-grid entry {bad} exceeds S = {s}"));
    }
    let mut report = ExperimentReport::new("interpolation_sweep", cfg);
    report.push(ReportRow::info(Some(n), "S_N", s as f64, None));

    let mut means = Vec::with_capacity(grid.len());
    for &r in &grid {
        let values = run_tasks(cfg.samples, |i| {
            let mut rng = task_rng(cfg.seed, "interp", &[n as u64, n1 as u64, r as u64, i as u64]);
            let (inst, _) = build_interpolated(n, n1, r, &law, cfg.epsilon, cfg.beta, &mut rng)?;
            Ok(log_partition(&inst)?.log_z)
        })?;
        let m = moments(&values);
        report.push(ReportRow::info(Some(n), &format!("log_z_r{r}"), m.mean, Some(m.stderr)));
        means.push((r, m.mean, m.stderr));
    }
    for w in means.windows(2) {
        let ((r0, m0, s0), (r1, m1, s1)) = (w[0], w[1]);
        let se = s0.hypot(s1);
        let q = format!("increment_r{r0}_to_r{r1}");
        report.push(ReportRow::at_least(Some(n), &q, m1 - m0, Some(se), 0.0, 2.0 * se));
    }

    let bases = if s == 0 { 0 } else { cfg.samples.min(MAX_CERTIFICATE_BASES) };
    let slacks = run_tasks(bases, |b| {
        let mut rng = task_rng(cfg.seed, "interp_certificate", &[n as u64, n1 as u64, b as u64]);
        let r = 1 + b % s;
        let (inst, _) = build_interpolated(n, n1, r, &law, cfg.epsilon, cfg.beta, &mut rng)?;
        let base = inst.drop_edge(r - 1)?;
        cfg.x_grid
            .iter()
            .map(|&x| {
                let gap = interpolation_step_gap(&base, x, n1)?;
                Ok(gap.gap_r - gap.gap_rminus1)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let slacks: Vec<f64> = slacks.into_iter().flatten().collect();
    let violations = slacks.iter().filter(|&&d| d < -GAP_TOLERANCE).count();
    report.push(ReportRow::info(Some(n), "certificate_checks", slacks.len() as f64, None));
    if let Some(min) = slacks.iter().copied().reduce(f64::min) {
        report.push(ReportRow::info(Some(n), "certificate_min_slack", min, None));
    }
    report.push(ReportRow::at_most(Some(n), "certificate_violations", violations as f64, None, 0.0, 0.0));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
