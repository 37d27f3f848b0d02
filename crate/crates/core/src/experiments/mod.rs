//! Reproducible Monte Carlo audits.
//!
//! Each experiment draws its disorder replicas from seeds derived from
//! `(base_seed, experiment name, N, replica index, ...)`, evaluates replicas
//! in parallel on the ambient rayon pool, collects them in index order and
//! reduces sequentially with compensated sums. Reports are therefore
//! independent of the thread count.
//!
//! Statistical inequalities in expectation pass within two combined standard
//! errors; distributional tests run at the 1% level. Exact per-instance
//! inequalities must hold with zero violations.

mod chernoff;
mod concentration;
mod free_energy;
mod interpolation;
mod jensen;
mod multiedge;
mod report;
mod superadd;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::TailLaw;
use crate::error::{invalid, Result};
use crate::exact::ENUMERATION_CAP;

pub use chernoff::edge_count_concentration;
pub use concentration::{concentration_scaling, coupling_deviation_profile, g_exponent};
pub use free_energy::{
    boundedness_audit, boundedness_bound, quenched_free_energy, reduction_chain, replica_log_partition,
    ModelKind,
};
pub use interpolation::interpolation_sweep;
pub use jensen::{jensen_sandwich_audit, JensenTerms};
pub use multiedge::{
    expected_growth_time, growth_process_check, growth_trace, multiedge_loop_stats, GrowthTrace,
};
pub use report::{ExperimentReport, ReportRow, CSV_HEADER};
pub use superadd::{multiedge_series, subadditivity_hypothesis_check, superadditivity_trial};

/// Upper limit on `epsilon` besides `1/alpha`.
pub const EPSILON_MAX: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub c0: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// Slack exponent of the variance comparator.
    pub delta: f64,
    pub n: usize,
    pub n_grid: Vec<usize>,
    /// Block split; `None` means `floor(n/2)`.
    pub n1: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// `None` means `(1 + alpha) / 2`.
    pub burkholder_p: Option<f64>,
    /// `None` means `{0, S/2, S}`.
    pub r_grid: Option<Vec<usize>>,
    pub x_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            c0: 1.0,
            epsilon: 0.1,
            beta: 1.0,
            delta: 0.2,
            n: 10,
            n_grid: vec![8, 12, 16],
            n1: None,
            samples: 200,
            seed: 0,
            burkholder_p: None,
            r_grid: None,
            x_grid: vec![0.1, 0.5, 1.0, 2.0],
        }
    }
}

impl ExperimentConfig {
    pub fn law(&self) -> Result<TailLaw> {
        TailLaw::new(self.alpha, self.c0)
    }

    pub fn n1(&self) -> usize {
        self.n1.unwrap_or(self.n / 2)
    }

    pub fn burkholder_p(&self) -> f64 {
        self.burkholder_p.unwrap_or((1.0 + self.alpha) / 2.0)
    }

    /// Checks the parameter windows shared by every experiment.
    pub fn validate(&self) -> Result<()> {
        self.law()?;
        let eps_max = EPSILON_MAX.min(1.0 / self.alpha);
        if !(self.epsilon > 0.0 && self.epsilon < eps_max) {
            return invalid(format!("epsilon must lie in (0, {eps_max}), got {}", self.epsilon));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return invalid(format!("beta must be finite and positive, got {}", self.beta));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return invalid(format!("delta must be finite and positive, got {}", self.delta));
        }
        if self.samples < 2 {
            return invalid(format!("samples must be >= 2, got {}", self.samples));
        }
        let p = self.burkholder_p();
        if !(p > 1.0 && p < self.alpha) {
            return invalid(format!("burkholder_p must lie in (1, alpha), got {p}"));
        }
        if self.n == 0 {
            return invalid("n must be >= 1");
        }
        if self.n_grid.contains(&0) {
            return invalid("n-grid entries must be >= 1");
        }
        if let Some(&x) = self.x_grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return invalid(format!("x-grid entries must be finite and >= 0, got {x}"));
        }
        Ok(())
    }

    fn check_n(&self, n: usize, cap: usize) -> Result<()> {
        if n > cap.min(ENUMERATION_CAP) {
            return Err(crate::Error::CapacityExceeded { n, cap: cap.min(ENUMERATION_CAP) });
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// 64-bit seed for one task, mixing the base seed, an experiment name and
/// any number of integer coordinates.
pub fn derive_seed(base: u64, name: &str, parts: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ splitmix64(fnv1a(name)));
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

pub fn task_rng(base: u64, name: &str, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, name, parts))
}

/// Runs `count` independent tasks in parallel and returns their results in
/// index order.
pub(crate) fn run_tasks<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Paired estimate of `mean(a - b)` with its standard error.
pub(crate) fn paired(a: &[f64], b: &[f64]) -> crate::stats::Moments {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    crate::stats::moments(&d)
}
