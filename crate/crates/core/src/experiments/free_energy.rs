use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{paired, run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::dist::TailLaw;
use crate::error::{invalid, Error, Result};
use crate::exact::{log_partition, ExactSummary, ENUMERATION_CAP};
use crate::model::{build_fixed_edge, build_full, build_multiedge, s_n, ModelInstance};
use crate::stats::moments;

/// Stream name shared by every experiment that samples plain disorder, so
/// the four model kinds of one replica are built from the same seed.
pub(super) const DISORDER_STREAM: &str = "disorder";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Full,
    Truncated,
    FixedEdge,
    MultiEdge,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::Full, ModelKind::Truncated, ModelKind::FixedEdge, ModelKind::MultiEdge];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Truncated => "truncated",
            ModelKind::FixedEdge => "fixed-edge",
            ModelKind::MultiEdge => "multi-edge",
        }
    }

    /// Builds one instance of this kind on `n` sites.
    pub fn build<R: rand::Rng + ?Sized>(
        &self,
        n: usize,
        law: &TailLaw,
        epsilon: f64,
        beta: f64,
        rng: &mut R,
    ) -> Result<ModelInstance> {
        match self {
            ModelKind::Full => build_full(n, law, beta, rng),
            ModelKind::Truncated => {
                let full = build_full(n, law, beta, rng)?;
                Ok(full.split_by_threshold((n as f64).powf(-epsilon))?.kept)
            }
            ModelKind::FixedEdge => {
                let s = s_n(n, law.alpha(), epsilon, law.c0());
                let pairs = n * n.saturating_sub(1) / 2;
                if s > pairs {
                    return invalid(format!(
                        "S_N = {s} exceeds the {pairs} distinct pairs at n = {n}"
                    ));
                }
                build_fixed_edge(n, s, law, epsilon, beta, rng)
            }
            ModelKind::MultiEdge => {
                let s = s_n(n, law.alpha(), epsilon, law.c0());
                build_multiedge(s, n, n, law, epsilon, beta, rng)
            }
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model kind '{s}'")))
    }
}

/// Exact `log Z` of disorder replica `replica` of `kind` on `n` sites.
pub fn replica_log_partition(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    n: usize,
    replica: usize,
) -> Result<ExactSummary> {
    let law = cfg.law()?;
    let mut rng = task_rng(cfg.seed, DISORDER_STREAM, &[n as u64, replica as u64]);
    let inst = kind.build(n, &law, cfg.epsilon, cfg.beta, &mut rng)?;
    log_partition(&inst)
}

pub(super) fn log_z_samples(
    cfg: &ExperimentConfig,
    kind: ModelKind,
    n: usize,
) -> Result<Vec<ExactSummary>> {
    cfg.check_n(n, ENUMERATION_CAP)?;
    run_tasks(cfg.samples, |i| replica_log_partition(cfg, kind, n, i))
}

pub(super) fn sandwich_row(n: Option<usize>, summaries: &[ExactSummary]) -> ReportRow {
    let bad = summaries.iter().filter(|s| !s.sandwich_holds()).count() as f64;
    ReportRow::at_most(n, "sandwich_violations", bad, None, 0.0, 0.0)
}

fn per_spin(summaries: &[ExactSummary]) -> Vec<f64> {
    summaries.iter().map(|s| s.log_z / s.n as f64).collect()
}

/// Mean of `(1/n) log Z` over disorder replicas.
pub fn quenched_free_energy(cfg: &ExperimentConfig, kind: ModelKind) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let name = format!("free_energy_{}", kind.name().replace('-', "_"));
    let mut report = ExperimentReport::new(&name, cfg);
    let summaries = log_z_samples(cfg, kind, cfg.n)?;
    let m = moments(&per_spin(&summaries));
    report.push(ReportRow::info(Some(cfg.n), "free_energy", m.mean, Some(m.stderr)));
    report.push(sandwich_row(Some(cfg.n), &summaries));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `F`, `F^`, `F~` and `F°` side by side with paired differences.
///
/// Each adjacent difference passes when its magnitude at the largest `N` is
/// below the one at the smallest `N`, or within two standard errors of zero.
pub fn reduction_chain(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.n_grid.is_empty() {
        return invalid("reduction_chain needs a nonempty n-grid");
    }
    let start = Instant::now();
    let mut report = ExperimentReport::new("reduction_chain", cfg);
    let labels = ["full_minus_truncated", "truncated_minus_fixed_edge", "fixed_edge_minus_multiedge"];
    let mut diffs: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 3];
    let mut all_summaries = Vec::new();
    for &n in &cfg.n_grid {
        let mut values = Vec::new();
        for kind in ModelKind::ALL {
            let s = log_z_samples(cfg, kind, n)?;
            let v = per_spin(&s);
            let m = moments(&v);
            let q = format!("F_{}", kind.name().replace('-', "_"));
            report.push(ReportRow::info(Some(n), &q, m.mean, Some(m.stderr)));
            all_summaries.extend(s);
            values.push(v);
        }
        for k in 0..3 {
            let d = paired(&values[k], &values[k + 1]);
            report.push(ReportRow::info(Some(n), labels[k], d.mean, Some(d.stderr)));
            diffs[k].push((d.mean, d.stderr));
        }
    }
    let n_last = *cfg.n_grid.last().expect("nonempty grid");
    for k in 0..3 {
        let (first, _) = diffs[k][0];
        let (last, se) = *diffs[k].last().expect("nonempty grid");
        let shrink = if cfg.n_grid.len() > 1 { first.abs() - last.abs() } else { f64::NEG_INFINITY };
        let margin = shrink.max(2.0 * se - last.abs());
        let q = format!("{}_shrinks", labels[k]);
        report.push(ReportRow::check(Some(n_last), &q, last.abs(), Some(se), first.abs(), margin));
    }
    report.push(sandwich_row(None, &all_summaries));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Rigorous upper bound on `(1/N) E log Z_N` of the full model.
///
/// Couplings are split at `R = N^(1/alpha)`. The large ones shift `log Z` by
/// at most `beta N^(-1/alpha) |J|`; the small ones give, by Jensen and
/// `cosh y - 1 <= y^2 (cosh b - 1)/b^2` for `|y| <= b = beta`,
/// `log 2 + (N - 1)/2 * [beta N^(-1/alpha) E|J|1{|J|>=R}
///  + kappa(beta) beta^2 N^(-2/alpha) E J^2 1{|J|<R}]`.
pub fn boundedness_bound(law: &TailLaw, n: usize, beta: f64) -> Result<f64> {
    if n == 0 {
        return invalid("boundedness_bound needs n >= 1");
    }
    let nf = n as f64;
    let a = law.alpha();
    let r = nf.powf(1.0 / a);
    let kappa = if beta < 1e-4 { 0.5 + beta * beta / 24.0 } else { (beta.cosh() - 1.0) / (beta * beta) };
    let large = beta * nf.powf(-1.0 / a) * law.tail_mean_above(r)?;
    let small = kappa * beta * beta * nf.powf(-2.0 / a) * law.truncated_second_moment(r)?;
    Ok(std::f64::consts::LN_2 + (nf - 1.0) / 2.0 * (large + small))
}

/// `F_N` of the full model against [`boundedness_bound`] on the N-grid.
pub fn boundedness_audit(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.n_grid.is_empty() {
        return invalid("boundedness_audit needs a nonempty n-grid");
    }
    let start = Instant::now();
    let law = cfg.law()?;
    let mut report = ExperimentReport::new("boundedness_audit", cfg);
    let mut all = Vec::new();
    let mut worst: Option<(usize, f64, f64)> = None;
    let mut sup_bound = f64::NEG_INFINITY;
    for &n in &cfg.n_grid {
        let s = log_z_samples(cfg, ModelKind::Full, n)?;
        let m = moments(&per_spin(&s));
        let bound = boundedness_bound(&law, n, cfg.beta)?;
        sup_bound = sup_bound.max(bound);
        report.push(ReportRow::at_most(
            Some(n),
            "free_energy_vs_bound",
            m.mean,
            Some(m.stderr),
            bound,
            2.0 * m.stderr,
        ));
        if worst.is_none_or(|(_, f, _)| m.mean > f) {
            worst = Some((n, m.mean, m.stderr));
        }
        all.extend(s);
    }
    let (n_max, f_max, se) = worst.expect("nonempty grid");
    report.push(ReportRow::at_most(Some(n_max), "max_free_energy", f_max, Some(se), sup_bound, 2.0 * se));
    report.push(sandwich_row(None, &all));
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}
