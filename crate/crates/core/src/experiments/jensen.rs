use std::time::Instant;

use super::free_energy::DISORDER_STREAM;
use super::{paired, run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Result};
use crate::exact::{gibbs_expectation, log_gibbs_mean_exp, log_partition, SpinConfig};
use crate::model::{build_full, build_multiedge, s_n, ModelInstance, SplitInstance};
use crate::stats::{compensated_sum, moments};

const JENSEN_CAP: usize = 12;

/// The three members of the Jensen sandwich for one split, with `y = beta`
/// times the dropped energy and `<.>` the Gibbs measure of the kept part:
/// `<y> <= log Z(full) - log Z(kept) <= log <e^y>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenTerms {
    pub mean_y: f64,
    pub delta: f64,
    pub log_mean_exp: f64,
}

impl JensenTerms {
    pub fn compute(split: &SplitInstance) -> Result<Self> {
        let kept = &split.kept;
        let dropped = &split.dropped;
        let factor = dropped.beta() * dropped.scale();
        let y = |s: &SpinConfig| {
            factor
                * compensated_sum(
                    dropped.edges().iter().map(|e| e.w * s.product(e.i as usize, e.j as usize)),
                )
        };
        let mean_y = gibbs_expectation(kept, y)?;
        let delta = log_partition(&split.recombine())?.log_z - log_partition(kept)?.log_z;
        let log_mean_exp = log_gibbs_mean_exp(kept, y)?;
        Ok(Self { mean_y, delta, log_mean_exp })
    }

    pub fn holds(&self) -> bool {
        let tol = 1e-9 * (1.0 + self.delta.abs());
        self.mean_y <= self.delta + tol && self.delta <= self.log_mean_exp + tol
    }
}

fn split_truncated(cfg: &ExperimentConfig, n: usize, replica: usize) -> Result<SplitInstance> {
    let law = cfg.law()?;
    let mut rng = task_rng(cfg.seed, DISORDER_STREAM, &[n as u64, replica as u64]);
    let inst = build_full(n, &law, cfg.beta, &mut rng)?;
    inst.split_by_threshold((n as f64).powf(-cfg.epsilon))
}

/// `H°_{S1, N1, N}` with `S1 = round(S_N N1 / N)`, cut at `N1^(-epsilon)`.
fn split_block(cfg: &ExperimentConfig, n: usize, replica: usize) -> Result<SplitInstance> {
    let law = cfg.law()?;
    let n1 = cfg.n1();
    let s1 = (s_n(n, cfg.alpha, cfg.epsilon, cfg.c0) as f64 * n1 as f64 / n as f64).round() as usize;
    let mut rng = task_rng(cfg.seed, "jensen_block", &[n as u64, n1 as u64, replica as u64]);
    let inst: ModelInstance = build_multiedge(s1, n1, n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
    inst.split_by_threshold((n1 as f64).powf(-cfg.epsilon))
}

/// Jensen sandwich per instance (zero violations) and in expectation, for the
/// truncation split and the block threshold split.
pub fn jensen_sandwich_audit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let n = cfg.n;
    cfg.check_n(n, JENSEN_CAP)?;
    if cfg.n1() == 0 || cfg.n1() >= n {
        return invalid(format!("block split needs 1 <= n1 <= n - 1, got n={n}, n1={}", cfg.n1()));
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new("jensen_sandwich", cfg);
    type Splitter = fn(&ExperimentConfig, usize, usize) -> Result<SplitInstance>;
    let kinds: [(&str, Splitter); 2] = [("truncated", split_truncated), ("block", split_block)];
    for (label, split) in kinds {
        let terms = run_tasks(cfg.samples, |i| JensenTerms::compute(&split(cfg, n, i)?))?;
        let ys: Vec<f64> = terms.iter().map(|t| t.mean_y).collect();
        let ds: Vec<f64> = terms.iter().map(|t| t.delta).collect();
        let ls: Vec<f64> = terms.iter().map(|t| t.log_mean_exp).collect();
        let violations = terms.iter().filter(|t| !t.holds()).count();
        let (my, md, ml) = (moments(&ys), moments(&ds), moments(&ls));
        let q = |s: &str| format!("{label}_{s}");
        report.push(ReportRow::info(Some(n), &q("mean_y"), my.mean, Some(my.stderr)));
        report.push(ReportRow::info(Some(n), &q("delta_log_z"), md.mean, Some(md.stderr)));
        report.push(ReportRow::info(Some(n), &q("log_mean_exp_y"), ml.mean, Some(ml.stderr)));
        let mean_exp = compensated_sum(ls.iter().map(|l| l.exp())) / ls.len() as f64;
        report.push(ReportRow::info(Some(n), &q("log_of_mean_exp_y"), mean_exp.ln(), None));
        report.push(ReportRow::at_most(Some(n), &q("instance_violations"), violations as f64, None, 0.0, 0.0));
        let lower = paired(&ds, &ys);
        report.push(ReportRow::at_least(Some(n), &q("lower_gap"), lower.mean, Some(lower.stderr), 0.0, 2.0 * lower.stderr));
        let upper = paired(&ls, &ds);
        report.push(ReportRow::at_least(Some(n), &q("upper_gap"), upper.mean, Some(upper.stderr), 0.0, 2.0 * upper.stderr));
        report.push(ReportRow::check(
            Some(n),
            &q("mean_y_centered"),
            my.mean,
            Some(my.stderr),
            0.0,
            2.0 * my.stderr - my.mean.abs(),
        ));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
