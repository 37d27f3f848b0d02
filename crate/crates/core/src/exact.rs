//! Exact partition functions and Gibbs averages by full enumeration.
//!
//! Configurations are visited in Gray-code order so each step flips one spin.
//! Local fields are updated in `O(n)` per step and the energy in `O(1)`; both
//! are recomputed from scratch every [`RESYNC_PERIOD`] steps to stop rounding
//! drift. `Z` is accumulated as a running-max log-sum-exp with compensated
//! summation.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::model::{ModelInstance, PairSpace};
use crate::stats::NeumaierSum;

/// Hard limit on the number of enumerated sites.
pub const ENUMERATION_CAP: usize = 30;
/// Limit for [`interpolation_step_gap`].
pub const STEP_GAP_CAP: usize = 20;
const RESYNC_PERIOD: u64 = 1 << 10;

/// A `±1` assignment to `n` sites; bit `i` set means `sigma_i = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    n: usize,
    bits: u32,
}

impl SpinConfig {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n == 0 || n > ENUMERATION_CAP {
            return invalid(format!("spin configurations hold 1..={ENUMERATION_CAP} sites, got {n}"));
        }
        if bits >> n != 0 {
            return invalid(format!("bits {bits:#b} set above site {n}"));
        }
        Ok(Self { n, bits })
    }

    pub fn all_up(n: usize) -> Result<Self> {
        Self::new(n, low_mask(n))
    }

    /// From a slice of `+1` / `-1` entries.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                other => return invalid(format!("spin {i} is {other}, expected +1 or -1")),
            }
        }
        Self::new(spins.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn is_up(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        if self.is_up(i) {
            1.0
        } else {
            -1.0
        }
    }

    /// `sigma_i * sigma_j`.
    #[inline]
    pub fn product(&self, i: usize, j: usize) -> f64 {
        if (self.bits >> i ^ self.bits >> j) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self { n: self.n, bits: !self.bits & low_mask(self.n) }
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.n).map(|i| if self.is_up(i) { 1 } else { -1 }).collect()
    }
}

fn low_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSummary {
    pub log_z: f64,
    pub n: usize,
    pub beta: f64,
    /// `sum_a |w_a| * m^(-1/alpha)`.
    pub scaled_weight_sum: f64,
}

impl ExactSummary {
    /// `n log 2 - beta W <= log Z <= n log 2 + beta W`, up to rounding.
    pub fn sandwich_holds(&self) -> bool {
        let free = self.n as f64 * std::f64::consts::LN_2;
        let spread = self.beta * self.scaled_weight_sum;
        let tol = 1e-9 * (1.0 + self.log_z.abs());
        self.log_z >= free - spread - tol && self.log_z <= free + spread + tol
    }
}

/// Dense pair couplings with `beta` and the energy scale folded in.
struct Couplings {
    n: usize,
    k: Vec<f64>,
    constant: f64,
}

impl Couplings {
    fn from_instance(inst: &ModelInstance) -> Result<Self> {
        let n = inst.n_sites();
        if n > ENUMERATION_CAP {
            return Err(Error::CapacityExceeded { n, cap: ENUMERATION_CAP });
        }
        let factor = inst.beta() * inst.scale();
        let mut k = vec![0.0; n * n];
        let mut constant = NeumaierSum::new();
        for e in inst.edges() {
            let (i, j) = (e.i as usize, e.j as usize);
            if i == j {
                constant.add(factor * e.w);
            } else {
                k[i * n + j] += factor * e.w;
                k[j * n + i] += factor * e.w;
            }
        }
        Ok(Self { n, k, constant: constant.value() })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }

    /// Fields `h_i = sum_j K_ij sigma_j` and exponent `beta H`.
    fn resync(&self, bits: u32, fields: &mut [f64]) -> f64 {
        let spin = |i: usize| if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut energy = NeumaierSum::new();
        energy.add(self.constant);
        for (i, h) in fields.iter_mut().enumerate() {
            let mut acc = NeumaierSum::new();
            for (j, &kij) in self.row(i).iter().enumerate() {
                acc.add(kij * spin(j));
            }
            *h = acc.value();
            energy.add(0.5 * spin(i) * *h);
        }
        energy.value()
    }

    /// Calls `visit(bits, beta * H)` once for each of the `2^n` configurations.
    fn for_each_state(&self, mut visit: impl FnMut(u32, f64)) {
        let n = self.n;
        let mut fields = vec![0.0; n];
        let mut bits = 0u32;
        let mut exponent = self.resync(bits, &mut fields);
        visit(bits, exponent);
        let total: u64 = 1 << n;
        for t in 1..total {
            let site = t.trailing_zeros() as usize;
            let s = if bits >> site & 1 == 1 { 1.0 } else { -1.0 };
            bits ^= 1 << site;
            if t % RESYNC_PERIOD == 0 {
                exponent = self.resync(bits, &mut fields);
            } else {
                exponent -= 2.0 * s * fields[site];
                let shift = -2.0 * s;
                for (h, &k) in fields.iter_mut().zip(self.row(site)) {
                    *h += shift * k;
                }
            }
            visit(bits, exponent);
        }
    }
}

/// Streaming `log sum exp` with a running maximum.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    acc: NeumaierSum,
}

impl LogSumExp {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, acc: NeumaierSum::new() }
    }

    #[inline]
    fn add(&mut self, x: f64) {
        if x > self.max {
            if self.max > f64::NEG_INFINITY {
                self.acc.scale((self.max - x).exp());
            }
            self.max = x;
        }
        self.acc.add((x - self.max).exp());
    }

    fn value(&self) -> f64 {
        self.max + self.acc.value().ln()
    }
}

fn check_cap(inst: &ModelInstance, cap: usize) -> Result<()> {
    if inst.n_sites() > cap {
        return Err(Error::CapacityExceeded { n: inst.n_sites(), cap });
    }
    Ok(())
}

/// Exact `log Z = log sum_sigma exp(beta H(sigma))`.
pub fn log_partition(inst: &ModelInstance) -> Result<ExactSummary> {
    check_cap(inst, ENUMERATION_CAP)?;
    let couplings = Couplings::from_instance(inst)?;
    let mut lse = LogSumExp::new();
    couplings.for_each_state(|_, x| lse.add(x));
    Ok(ExactSummary {
        log_z: lse.value(),
        n: inst.n_sites(),
        beta: inst.beta(),
        scaled_weight_sum: inst.scaled_weight_sum(),
    })
}

/// Gibbs average `<f>` of a configuration function.
pub fn gibbs_expectation(inst: &ModelInstance, f: impl Fn(&SpinConfig) -> f64) -> Result<f64> {
    check_cap(inst, ENUMERATION_CAP)?;
    let couplings = Couplings::from_instance(inst)?;
    let log_z = log_partition(inst)?.log_z;
    let n = inst.n_sites();
    let mut acc = NeumaierSum::new();
    couplings.for_each_state(|bits, x| {
        let sigma = SpinConfig { n, bits };
        acc.add(f(&sigma) * (x - log_z).exp());
    });
    Ok(acc.value())
}

/// `log <exp(g)>` under the Gibbs measure of `inst`.
pub fn log_gibbs_mean_exp(inst: &ModelInstance, g: impl Fn(&SpinConfig) -> f64) -> Result<f64> {
    check_cap(inst, ENUMERATION_CAP)?;
    let couplings = Couplings::from_instance(inst)?;
    let n = inst.n_sites();
    let mut base = LogSumExp::new();
    let mut tilted = LogSumExp::new();
    couplings.for_each_state(|bits, x| {
        base.add(x);
        tilted.add(x + g(&SpinConfig { n, bits }));
    });
    Ok(tilted.value() - base.value())
}

/// Row-major `n x n` matrix of `<sigma_i sigma_j>` (ones on the diagonal).
pub fn correlation_matrix(inst: &ModelInstance) -> Result<Vec<f64>> {
    check_cap(inst, ENUMERATION_CAP)?;
    let couplings = Couplings::from_instance(inst)?;
    let log_z = log_partition(inst)?.log_z;
    let n = inst.n_sites();
    let mut agree = vec![NeumaierSum::new(); n * n];
    couplings.for_each_state(|bits, x| {
        let p = (x - log_z).exp();
        for i in 0..n {
            for j in i + 1..n {
                if (bits >> i ^ bits >> j) & 1 == 0 {
                    agree[i * n + j].add(p);
                }
            }
        }
    });
    let mut corr = vec![1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let c = 2.0 * agree[i * n + j].value() - 1.0;
            corr[i * n + j] = c;
            corr[j * n + i] = c;
        }
    }
    Ok(corr)
}

/// Gibbs probability that `sigma_i = sigma_j`.
pub fn agree_probability(inst: &ModelInstance, i: usize, j: usize) -> Result<f64> {
    let n = inst.n_sites();
    if i >= n || j >= n {
        return invalid(format!("sites ({i}, {j}) outside 0..{n}"));
    }
    if i == j {
        return Ok(1.0);
    }
    gibbs_expectation(inst, |s| if s.product(i, j) > 0.0 { 1.0 } else { 0.0 })
}

/// Partition of the sites into classes agreeing in every replica, with the
/// pairing between classes that disagree in every replica.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaClasses {
    pub k: usize,
    pub n: usize,
    /// Classes ordered by their smallest site; sites ascending within a class.
    pub classes: Vec<Vec<usize>>,
    pub partner: Vec<Option<usize>>,
}

pub fn replica_partition(replicas: &[SpinConfig]) -> Result<ReplicaClasses> {
    let Some(first) = replicas.first() else {
        return invalid("replica_partition needs at least one replica");
    };
    let n = first.n();
    if let Some(bad) = replicas.iter().find(|r| r.n() != n) {
        return invalid(format!("replica lengths differ: {} vs {n}", bad.n()));
    }
    let signature = |i: usize| -> Vec<bool> { replicas.iter().map(|r| r.is_up(i)).collect() };
    let mut lookup: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut signatures: Vec<Vec<bool>> = Vec::new();
    for i in 0..n {
        let sig = signature(i);
        match lookup.get(&sig) {
            Some(&c) => classes[c].push(i),
            None => {
                lookup.insert(sig.clone(), classes.len());
                classes.push(vec![i]);
                signatures.push(sig);
            }
        }
    }
    let partner = signatures
        .iter()
        .map(|sig| {
            let opposite: Vec<bool> = sig.iter().map(|b| !b).collect();
            lookup.get(&opposite).copied()
        })
        .collect();
    Ok(ReplicaClasses { k: replicas.len(), n, classes, partner })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Both sides of the block-convexity inequality for one pair of site sets:
/// `lhs = (n1/N)((|S∩A| + |R∩A|)/n1)^2 + (n2/N)((|S∩B| + |R∩B|)/n2)^2` and
/// `rhs = ((|S| + |R|)/N)^2` with `A = [0, n1)` and `B = [n1, N)`.
pub fn convexity_terms(
    n1: usize,
    n2: usize,
    set_s: &[usize],
    set_r: &[usize],
) -> Result<ConvexityCheck> {
    if n1 == 0 || n2 == 0 {
        return invalid(format!("both blocks must be nonempty, got n1={n1}, n2={n2}"));
    }
    let n = n1 + n2;
    if let Some(&bad) = set_s.iter().chain(set_r).find(|&&i| i >= n) {
        return invalid(format!("site {bad} outside 0..{n}"));
    }
    let in_a = |set: &[usize]| set.iter().filter(|&&i| i < n1).count() as f64;
    let a = in_a(set_s) + in_a(set_r);
    let total = (set_s.len() + set_r.len()) as f64;
    let b = total - a;
    let (nf, n1f, n2f) = (n as f64, n1 as f64, n2 as f64);
    let lhs = n1f / nf * (a / n1f).powi(2) + n2f / nf * (b / n2f).powi(2);
    let rhs = (total / nf).powi(2);
    Ok(ConvexityCheck { lhs, rhs, pass: lhs >= rhs - 1e-12 })
}

/// Convexity check for class `s` and its partner.
pub fn convexity_certificate(
    classes: &ReplicaClasses,
    s: usize,
    n1: usize,
    n2: usize,
) -> Result<ConvexityCheck> {
    if n1 + n2 != classes.n {
        return invalid(format!("n1 + n2 = {} but the replicas have {} sites", n1 + n2, classes.n));
    }
    let Some(class) = classes.classes.get(s) else {
        return invalid(format!("class {s} out of range"));
    };
    let Some(r) = classes.partner[s] else {
        return Err(Error::NotApplicable(format!("class {s} has no partner")));
    };
    convexity_terms(n1, n2, class, &classes.classes[r])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGap {
    /// Mean change of `log Z` when one edge `(i, j, ±x)` is added with `(i, j)`
    /// uniform over all pairs `i <= j`.
    pub gap_r: f64,
    /// Same with the pair drawn by the two-block rule.
    pub gap_rminus1: f64,
}

/// Exact expected `log Z` increments of one interpolation step.
///
/// `x` is the scaled magnitude of the inserted coupling (its contribution to
/// `H` is `±x sigma_i sigma_j`). Averaging the two signs gives
/// `log Z(+) + log Z(-) - 2 log Z = log(cosh^2(bx) - m^2 sinh^2(bx))` with
/// `m = <sigma_i sigma_j>` of the base measure.
pub fn interpolation_step_gap(base: &ModelInstance, x: f64, n1: usize) -> Result<StepGap> {
    check_cap(base, STEP_GAP_CAP)?;
    if !x.is_finite() || x < 0.0 {
        return invalid(format!("step magnitude must be finite and >= 0, got {x}"));
    }
    let n = base.n_sites();
    if n1 == 0 || n1 >= n {
        return invalid(format!("block split needs 1 <= n1 <= n - 1, got n={n}, n1={n1}"));
    }
    let corr = correlation_matrix(base)?;
    let a = base.beta() * x;
    let (c2, s2) = (a.cosh().powi(2), a.sinh().powi(2));
    let pair_gap = |i: usize, j: usize| {
        let m = corr[i * n + j];
        0.5 * (c2 - m * m * s2).ln()
    };
    let mean_over = |offset: usize, size: usize| {
        let space = PairSpace::with_loops(size);
        let mut acc = NeumaierSum::new();
        for (i, j) in space.iter() {
            acc.add(pair_gap(i + offset, j + offset));
        }
        acc.value() / space.len() as f64
    };
    let n2 = n - n1;
    let gap_r = mean_over(0, n);
    let gap_rminus1 =
        n1 as f64 / n as f64 * mean_over(0, n1) + n2 as f64 / n as f64 * mean_over(n1, n2);
    Ok(StepGap { gap_r, gap_rminus1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Edge;

    fn inst(n: usize, edges: &[(u32, u32, f64)], beta: f64) -> ModelInstance {
        let edges = edges.iter().map(|&(i, j, w)| Edge::new(i, j, w)).collect();
        ModelInstance::new(n, edges, n, 1.5, beta).unwrap()
    }

    /// Instance whose single coupling has scaled value `w`.
    fn pair(w: f64, beta: f64) -> ModelInstance {
        let probe = inst(2, &[], beta);
        inst(2, &[(0, 1, w / probe.scale())], beta)
    }

    #[test]
    fn spin_config_basics() {
        let s = SpinConfig::from_spins(&[1, -1, 1]).unwrap();
        assert_eq!(s.bits(), 0b101);
        assert_eq!(s.flipped().bits(), 0b010);
        assert_eq!(s.product(0, 2), 1.0);
        assert_eq!(s.product(0, 1), -1.0);
        assert_eq!(s.spins(), vec![1, -1, 1]);
        assert!(SpinConfig::new(3, 0b1000).is_err());
        assert!(SpinConfig::new(31, 0).is_err());
        assert!(SpinConfig::from_spins(&[1, 0]).is_err());
    }

    #[test]
    fn free_spins() {
        let z = log_partition(&inst(5, &[], 1.0)).unwrap();
        assert!((z.log_z - 5.0 * std::f64::consts::LN_2).abs() < 1e-14);
    }

    #[test]
    fn two_site_hand_values() {
        let g = pair(1.0, 1.0);
        let z = log_partition(&g).unwrap();
        assert!((z.log_z - (4.0 * 1f64.cosh()).ln()).abs() < 1e-14);
        assert!((z.log_z - 1.820_075).abs() < 1e-6);
        let c = gibbs_expectation(&g, |s| s.product(0, 1)).unwrap();
        assert!((c - 1f64.tanh()).abs() < 1e-14);
        let p = agree_probability(&g, 0, 1).unwrap();
        let e = std::f64::consts::E;
        assert!((p - e / (e + 1.0 / e)).abs() < 1e-14);
        assert!((p - 0.880_797).abs() < 1e-6);
    }

    #[test]
    fn gibbs_trivial_cases() {
        let g = inst(4, &[(0, 1, 1.5), (2, 3, -0.7), (1, 1, 2.0)], 1.3);
        assert!((gibbs_expectation(&g, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
        let free = inst(3, &[], 1.0);
        assert!(gibbs_expectation(&free, |s| s.spin(0)).unwrap().abs() < 1e-15);
        assert!((agree_probability(&free, 0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(agree_probability(&g, 2, 2).unwrap(), 1.0);
        assert!(agree_probability(&g, 0, 4).is_err());
    }

    #[test]
    fn loops_shift_by_constant() {
        let g = inst(3, &[(1, 1, 2.0), (0, 2, 1.0)], 0.8);
        let h = inst(3, &[(0, 2, 1.0)], 0.8);
        let shift = 0.8 * 2.0 * g.scale();
        let diff = log_partition(&g).unwrap().log_z - log_partition(&h).unwrap().log_z;
        assert!((diff - shift).abs() < 1e-13);
    }

    #[test]
    fn capacity() {
        let big = inst(31, &[], 1.0);
        assert!(matches!(log_partition(&big), Err(Error::CapacityExceeded { n: 31, .. })));
        let mid = inst(21, &[], 1.0);
        assert!(matches!(
            interpolation_step_gap(&mid, 1.0, 10),
            Err(Error::CapacityExceeded { n: 21, .. })
        ));
    }

    #[test]
    fn resync_path_matches_hand_formula() {
        // 12 sites forces several resyncs; a chain has a closed form:
        // Z = 2 prod_k 2 cosh(K_k) for an open chain.
        let n = 12;
        let probe = inst(n, &[], 1.0);
        let ks: Vec<f64> = (0..n - 1).map(|k| 0.3 + 0.1 * k as f64).collect();
        let edges: Vec<(u32, u32, f64)> = ks
            .iter()
            .enumerate()
            .map(|(k, &v)| (k as u32, k as u32 + 1, v / probe.scale()))
            .collect();
        let g = inst(n, &edges, 1.0);
        let expected = 2f64.ln() + ks.iter().map(|k| (2.0 * k.cosh()).ln()).sum::<f64>();
        assert!((log_partition(&g).unwrap().log_z - expected).abs() < 1e-12);
    }

    #[test]
    fn replica_examples() {
        let one = replica_partition(&[SpinConfig::from_spins(&[1, 1, -1]).unwrap()]).unwrap();
        assert_eq!(one.classes, vec![vec![0, 1], vec![2]]);
        assert_eq!(one.partner, vec![Some(1), Some(0)]);

        let up = replica_partition(&[SpinConfig::all_up(3).unwrap()]).unwrap();
        assert_eq!(up.classes, vec![vec![0, 1, 2]]);
        assert_eq!(up.partner, vec![None]);

        let two = replica_partition(&[
            SpinConfig::from_spins(&[1, -1]).unwrap(),
            SpinConfig::from_spins(&[1, 1]).unwrap(),
        ])
        .unwrap();
        assert_eq!(two.classes, vec![vec![0], vec![1]]);
        assert_eq!(two.partner, vec![None, None]);

        assert!(replica_partition(&[]).is_err());
        assert!(replica_partition(&[
            SpinConfig::all_up(2).unwrap(),
            SpinConfig::all_up(3).unwrap()
        ])
        .is_err());
    }

    #[test]
    fn convexity_examples() {
        let eq = convexity_terms(2, 2, &[0], &[1, 2, 3]).unwrap();
        assert!((eq.lhs - 1.0).abs() < 1e-15 && (eq.rhs - 1.0).abs() < 1e-15 && eq.pass);
        let c = convexity_terms(2, 2, &[0], &[1]).unwrap();
        assert!((c.lhs - 0.5).abs() < 1e-15 && (c.rhs - 0.25).abs() < 1e-15 && c.pass);
        let alone = convexity_terms(2, 2, &[1, 2], &[]).unwrap();
        let single = convexity_terms(2, 2, &[], &[1, 2]).unwrap();
        assert_eq!(alone, single);
        assert!(alone.pass);

        let classes = replica_partition(&[SpinConfig::all_up(4).unwrap()]).unwrap();
        assert!(matches!(convexity_certificate(&classes, 0, 2, 2), Err(Error::NotApplicable(_))));
        let classes =
            replica_partition(&[SpinConfig::from_spins(&[1, -1, -1, -1]).unwrap()]).unwrap();
        let check = convexity_certificate(&classes, 0, 2, 2).unwrap();
        assert!((check.lhs - 1.0).abs() < 1e-15 && check.pass);
        assert!(convexity_certificate(&classes, 0, 2, 1).is_err());
    }

    #[test]
    fn step_gap_trivial_cases() {
        let g = inst(6, &[(0, 3, 2.0), (1, 4, -1.0), (2, 2, 0.4)], 1.0);
        let zero = interpolation_step_gap(&g, 0.0, 3).unwrap();
        assert_eq!(zero.gap_r, 0.0);
        assert_eq!(zero.gap_rminus1, 0.0);
        // Free base: only non-loop pairs move log Z, by log cosh(x), and a
        // block holds a larger share of loops than the whole system.
        let free = inst(6, &[], 1.0);
        for x in [0.1, 0.5, 1.0, 2.0] {
            let gap = interpolation_step_gap(&free, x, 2).unwrap();
            let lc = f64::cosh(x).ln();
            let share = |m: f64| (m - 1.0) / (m + 1.0);
            assert!((gap.gap_r - share(6.0) * lc).abs() < 1e-13);
            let blocks = 2.0 / 6.0 * share(2.0) + 4.0 / 6.0 * share(4.0);
            assert!((gap.gap_rminus1 - blocks * lc).abs() < 1e-13);
            assert!(gap.gap_r >= gap.gap_rminus1);
        }
        assert!(interpolation_step_gap(&g, -1.0, 3).is_err());
        assert!(interpolation_step_gap(&g, 1.0, 6).is_err());
    }

    #[test]
    fn step_gap_matches_direct_enumeration() {
        let g = inst(5, &[(0, 1, 2.0), (1, 2, -3.0), (3, 4, 1.0), (0, 4, 0.5), (2, 2, 1.0)], 0.9);
        let x = 0.7;
        let base = log_partition(&g).unwrap().log_z;
        let delta = |i: u32, j: u32| {
            [1.0, -1.0]
                .iter()
                .map(|s| {
                    let w = s * x / g.scale();
                    log_partition(&g.with_edge(Edge::new(i, j, w)).unwrap()).unwrap().log_z - base
                })
                .sum::<f64>()
                / 2.0
        };
        let mean = |pairs: Vec<(u32, u32)>| {
            let len = pairs.len() as f64;
            pairs.into_iter().map(|(i, j)| delta(i, j)).sum::<f64>() / len
        };
        let all: Vec<(u32, u32)> =
            (0..5).flat_map(|i| (i..5).map(move |j| (i, j))).collect();
        let a: Vec<(u32, u32)> = (0..2).flat_map(|i| (i..2).map(move |j| (i, j))).collect();
        let b: Vec<(u32, u32)> = (2..5).flat_map(|i| (i..5).map(move |j| (i, j))).collect();
        let gap = interpolation_step_gap(&g, x, 2).unwrap();
        assert!((gap.gap_r - mean(all)).abs() < 1e-12);
        assert!((gap.gap_rminus1 - (0.4 * mean(a) + 0.6 * mean(b))).abs() < 1e-12);
        assert!(gap.gap_r >= gap.gap_rminus1 - 1e-9);
    }
}
