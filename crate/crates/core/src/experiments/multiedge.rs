use std::time::Instant;

use rand::Rng;

use super::{run_tasks, task_rng, ExperimentConfig, ExperimentReport, ReportRow};
use crate::error::{invalid, Result};
use crate::model::{duplicate_count, s_n, PairSpace};
use crate::stats::{chi_square_test, moments};

const MIN_SAMPLES: usize = 1000;
const MIN_EXPECTED: f64 = 5.0;

/// One run of the distinct-edge acquisition process: pairs `i <= j` are
/// drawn uniformly with replacement until `k` distinct non-loop pairs exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthTrace {
    /// Distinct non-loop pairs after each draw.
    pub distinct_counts: Vec<usize>,
    /// `T_i`: draws between the `(i-1)`-th and `i`-th new pair.
    pub first_passage: Vec<u64>,
    /// `T = sum_i T_i`.
    pub total: u64,
}

fn available(n: usize, k: usize) -> Result<usize> {
    let pairs = n * n.saturating_sub(1) / 2;
    if k > pairs {
        return invalid(format!("K = {k} exceeds the {pairs} distinct non-loop pairs on {n} sites"));
    }
    Ok(n * (n + 1) / 2)
}

pub fn growth_trace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<GrowthTrace> {
    if n == 0 {
        return invalid("growth process needs n >= 1");
    }
    available(n, k)?;
    let space = PairSpace::with_loops(n);
    let distinct = PairSpace::without_loops(n);
    let mut seen = vec![false; distinct.len()];
    let mut trace = GrowthTrace { distinct_counts: Vec::new(), first_passage: Vec::with_capacity(k), total: 0 };
    let mut last = 0u64;
    let mut count = 0usize;
    while count < k {
        trace.total += 1;
        let (i, j) = space.sample(rng);
        if i != j {
            let slot = distinct.index(i, j);
            if !seen[slot] {
                seen[slot] = true;
                count += 1;
                trace.first_passage.push(trace.total - last);
                last = trace.total;
            }
        }
        trace.distinct_counts.push(count);
    }
    Ok(trace)
}

/// `E[T] = A sum_{i=1}^{k} 1/(A - N - i + 1)` with `A = N(N+1)/2`.
pub fn expected_growth_time(n: usize, k: usize) -> Result<f64> {
    let a = available(n, k)? as f64;
    let nf = n as f64;
    Ok(a * crate::stats::compensated_sum((1..=k).map(|i| 1.0 / (a - nf - i as f64 + 1.0))))
}

/// Chi-square p-value of `draws` against Geometric(`p`) on `{1, 2, ...}`.
fn geometric_p_value(draws: &[u64], p: f64) -> f64 {
    let total = draws.len() as f64;
    let mut edges = Vec::new();
    let mut mass_left = 1.0;
    let mut k = 1u64;
    loop {
        let pk = (1.0 - p).powi(k as i32 - 1) * p;
        if total * pk < MIN_EXPECTED || total * (mass_left - pk) < MIN_EXPECTED {
            break;
        }
        edges.push((k, pk));
        mass_left -= pk;
        k += 1;
    }
    if edges.is_empty() {
        return 1.0;
    }
    let cut = edges.len() as u64;
    let mut observed = vec![0u64; edges.len() + 1];
    for &d in draws {
        let bin = if d <= cut { d as usize - 1 } else { edges.len() };
        observed[bin] += 1;
    }
    let mut expected: Vec<f64> = edges.iter().map(|&(_, pk)| total * pk).collect();
    expected.push(total * (1.0 - p).powi(cut as i32));
    chi_square_test(&observed, &expected, 0).1
}

/// Mean `T` against the harmonic sum and each `T_i` against its geometric
/// law (Bonferroni-corrected chi-square at 1% overall).
pub fn growth_process_check(cfg: &ExperimentConfig, n: usize, k: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let exact = expected_growth_time(n, k)?;
    let traces = run_tasks(cfg.samples, |i| {
        let mut rng = task_rng(cfg.seed, "growth", &[n as u64, k as u64, i as u64]);
        growth_trace(n, k, &mut rng)
    })?;
    let mut report = ExperimentReport::new("growth_process", cfg);
    report.push(ReportRow::info(Some(n), "K", k as f64, None));
    report.push(ReportRow::info(Some(n), "expected_T", exact, None));
    let totals: Vec<f64> = traces.iter().map(|t| t.total as f64).collect();
    let m = moments(&totals);
    report.push(ReportRow::check(
        Some(n),
        "mean_T",
        m.mean,
        Some(m.stderr),
        exact,
        3.0 * m.stderr - (m.mean - exact).abs(),
    ));
    let monotone = traces.iter().all(|t| {
        t.distinct_counts.windows(2).all(|w| w[1] == w[0] || w[1] == w[0] + 1)
            && t.first_passage.iter().sum::<u64>() == t.total
    });
    report.push(ReportRow::at_least(Some(n), "trace_consistent", monotone as u8 as f64, None, 1.0, 0.0));
    let a = (n * (n + 1) / 2) as f64;
    let level = 0.01 / k.max(1) as f64;
    for i in 1..=k {
        let p_i = (a - n as f64 - i as f64 + 1.0) / a;
        let draws: Vec<u64> = traces.iter().map(|t| t.first_passage[i - 1]).collect();
        let p_value = geometric_p_value(&draws, p_i);
        report.push(ReportRow::at_least(
            Some(n),
            &format!("geometric_T{i}_p_value"),
            p_value,
            None,
            level,
            0.0,
        ));
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Loop and multi-edge count `f_{S_N,N}` of the multi-edge model plus the
/// growth-process checks with `K = floor(S_N - N^(3 alpha epsilon))`.
pub fn multiedge_loop_stats(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.samples < MIN_SAMPLES {
        return invalid(format!("multiedge_loop_stats needs >= {MIN_SAMPLES} samples, got {}", cfg.samples));
    }
    let start = Instant::now();
    let n = cfg.n;
    let nf = n as f64;
    let s = s_n(n, cfg.alpha, cfg.epsilon, cfg.c0);
    let space = PairSpace::with_loops(n);
    let counts = run_tasks(cfg.samples, |i| {
        let mut rng = task_rng(cfg.seed, "multiedge_f", &[n as u64, i as u64]);
        let pairs = (0..s).map(|_| {
            let (a, b) = space.sample(&mut rng);
            (a as u32, b as u32)
        });
        Ok(duplicate_count(pairs.collect::<Vec<_>>().into_iter()) as f64)
    })?;
    let m = moments(&counts);
    let cut = nf.powf(3.0 * cfg.alpha * cfg.epsilon);
    let freq = counts.iter().filter(|&&f| f >= cut).count() as f64 / counts.len() as f64;
    let mut report = ExperimentReport::new("multiedge_loops", cfg);
    report.push(ReportRow::info(Some(n), "S_N", s as f64, None));
    report.push(ReportRow::info(Some(n), "mean_f", m.mean, Some(m.stderr)));
    report.push(ReportRow::info(Some(n), "f_threshold", cut, None));
    report.push(ReportRow::reference(Some(n), "f_tail_frequency", freq, (-nf.powf(cfg.epsilon)).exp()));

    let k = (s as f64 - cut).floor().max(0.0) as usize;
    let growth = growth_process_check(cfg, n, k)?;
    report.absorb(growth);
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hand_expectation() {
        assert!((expected_growth_time(3, 2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(expected_growth_time(3, 0).unwrap(), 0.0);
        assert!(expected_growth_time(3, 4).is_err());
    }

    #[test]
    fn trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = growth_trace(3, 0, &mut rng).unwrap();
        assert_eq!(t.total, 0);
        for _ in 0..100 {
            let t = growth_trace(5, 6, &mut rng).unwrap();
            assert_eq!(t.first_passage.len(), 6);
            assert_eq!(t.first_passage.iter().sum::<u64>(), t.total);
            assert_eq!(t.distinct_counts.len() as u64, t.total);
            assert_eq!(*t.distinct_counts.last().unwrap(), 6);
            assert!(t.distinct_counts.windows(2).all(|w| w[1] - w[0] <= 1));
        }
    }

    #[test]
    fn single_edge_loop_frequency() {
        let space = PairSpace::with_loops(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let loops = (0..trials)
            .filter(|_| {
                let (i, j) = space.sample(&mut rng);
                let f = duplicate_count(std::iter::once((i as u32, j as u32)));
                assert!(f <= 1);
                f == 1
            })
            .count() as f64;
        let p = 4.0 / 10.0;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((loops / trials as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn geometric_fit_accepts_geometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = 0.3;
        let draws: Vec<u64> = (0..5000)
            .map(|_| {
                let mut k = 1;
                while rng.gen::<f64>() >= p {
                    k += 1;
                }
                k
            })
            .collect();
        assert!(geometric_p_value(&draws, p) > 0.001);
        assert!(geometric_p_value(&draws, 0.5) < 1e-6);
    }
}
