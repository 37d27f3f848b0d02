use std::time::Instant;

use super::free_energy::{log_z_samples, sandwich_row, ModelKind, DISORDER_STREAM};
use super::{run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Result};
use crate::exact::log_partition;
use crate::model::build_full;
use crate::stats::{jackknife_variance_stderr, moments, ols_slope};

const PROFILE_CAP: usize = 16;

/// `g(p) = 2 - p (1 + 1/alpha)`.
pub fn g_exponent(p: f64, alpha: f64) -> f64 {
    2.0 - p * (1.0 + 1.0 / alpha)
}

/// Sample variance of `log Z_N` on the N-grid against `N^(3 - alpha + delta)`.
pub fn concentration_scaling(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.n_grid.len() < 3 {
        return invalid(format!("concentration_scaling needs >= 3 grid points, got {}", cfg.n_grid.len()));
    }
    if cfg.samples < 200 {
        return invalid(format!("concentration_scaling needs >= 200 samples, got {}", cfg.samples));
    }
    let start = Instant::now();
    let exponent = 3.0 - cfg.alpha + cfg.delta;
    let mut report = ExperimentReport::new("concentration_scaling", cfg);
    report.push(ReportRow::info(None, "comparator_exponent", exponent, None));
    let mut points = Vec::new();
    let mut all = Vec::new();
    for &n in &cfg.n_grid {
        let s = log_z_samples(cfg, ModelKind::Full, n)?;
        let values: Vec<f64> = s.iter().map(|x| x.log_z).collect();
        let m = moments(&values);
        let var_se = jackknife_variance_stderr(&values);
        let nf = n as f64;
        report.push(ReportRow::at_most(
            Some(n),
            "var_log_z",
            m.variance,
            Some(var_se),
            nf.powf(exponent),
            0.0,
        ));
        let scaled = m.variance / (nf * nf);
        report.push(ReportRow::info(Some(n), "var_log_z_over_n2", scaled, Some(var_se / (nf * nf))));

        let t = nf.powf(-cfg.delta / 2.0);
        let exceed = values.iter().filter(|&&v| ((v - m.mean) / nf).abs() > t).count() as f64
            / values.len() as f64;
        let rate = nf.powf(1.0 - cfg.alpha + cfg.delta) / (t * t);
        report.push(ReportRow::info(Some(n), "tail_frequency", exceed, None));
        report.push(ReportRow::info(Some(n), "tail_implied_constant", exceed / rate, None));
        points.push((nf, scaled, var_se / (nf * nf), m.variance));
        all.extend(s);
    }
    for (k, w) in points.windows(2).enumerate() {
        let ((_, v0, s0, _), (_, v1, s1, _)) = (w[0], w[1]);
        let n1 = cfg.n_grid[k + 1];
        report.push(ReportRow::at_most(
            Some(n1),
            "var_over_n2_decreasing",
            v1,
            Some(s1),
            v0,
            2.0 * s0.hypot(s1),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.3.ln()).collect();
    report.push(ReportRow::at_most(None, "loglog_slope", ols_slope(&xs, &ys), None, 2.0, 0.0));
    report.push(sandwich_row(None, &all));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Per-coupling deviations `log Z - log Z^(x)` of the full model.
///
/// Every deviation must satisfy `|dev| <= beta N^(-1/alpha) |J_x|`; the mean
/// of `N^(-p) sum_x |dev|^p` is compared against the expectation of the same
/// bound, `beta^p N^(-p - p/alpha) N(N-1)/2 E|J|^p`.
pub fn coupling_deviation_profile(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.n_grid.is_empty() {
        return invalid("coupling_deviation_profile needs a nonempty n-grid");
    }
    let start = Instant::now();
    let law = cfg.law()?;
    let p = cfg.burkholder_p();
    let abs_p = law.abs_moment(p)?;
    let mut report = ExperimentReport::new("coupling_deviation", cfg);
    report.push(ReportRow::info(None, "burkholder_p", p, None));
    report.push(ReportRow::info(None, "g_p", g_exponent(p, cfg.alpha), None));
    if cfg.alpha - 0.1 > 1.0 {
        let g = g_exponent(cfg.alpha - 0.1, cfg.alpha);
        report.push(ReportRow::at_most(None, "g_alpha_minus_0.1", g, None, 0.0, 0.0));
    }
    for &n in &cfg.n_grid {
        cfg.check_n(n, PROFILE_CAP)?;
        let per_replica = run_tasks(cfg.samples, |i| {
            let mut rng = task_rng(cfg.seed, DISORDER_STREAM, &[n as u64, i as u64]);
            let inst = build_full(n, &law, cfg.beta, &mut rng)?;
            let log_z = log_partition(&inst)?.log_z;
            let scale = inst.scale();
            let mut violations = 0usize;
            let mut sum_p = 0.0;
            for (x, e) in inst.edges().iter().enumerate() {
                let dev = log_z - log_partition(&inst.drop_edge(x)?)?.log_z;
                let bound = cfg.beta * scale * e.w.abs();
                if dev.abs() > bound * (1.0 + 1e-12) + 1e-12 {
                    violations += 1;
                }
                sum_p += dev.abs().powf(p);
            }
            Ok((violations, sum_p))
        })?;
        let nf = n as f64;
        let violations: usize = per_replica.iter().map(|r| r.0).sum();
        let sums: Vec<f64> = per_replica.iter().map(|r| r.1 / nf.powf(p)).collect();
        let m = moments(&sums);
        let pairs = nf * (nf - 1.0) / 2.0;
        let comparator = cfg.beta.powf(p) * nf.powf(-p - p / cfg.alpha) * pairs * abs_p;
        report.push(ReportRow::at_most(Some(n), "bound_violations", violations as f64, None, 0.0, 0.0));
        report.push(ReportRow::at_most(
            Some(n),
            "sum_dev_p_per_spin",
            m.mean,
            Some(m.stderr),
            comparator,
            2.0 * m.stderr,
        ));
        report.push(ReportRow::info(
            Some(n),
            "scaling_reference",
            nf.powf(g_exponent(p, cfg.alpha)) * abs_p,
            None,
        ));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
