use levyglass::exact::{
    agree_probability, convexity_terms, correlation_matrix, gibbs_expectation, log_partition, replica_partition,
};
use levyglass::experiments::{derive_seed, ExperimentConfig, ExperimentReport, ReportRow, CSV_HEADER};
use levyglass::model::{build_fixed_edge, PairSpace};
use levyglass::{Edge, ModelInstance, SpinConfig, TailLaw};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = ModelInstance> {
    (2usize..=8, 1.1f64..1.9, 0.05f64..3.0).prop_flat_map(|(n, alpha, beta)| {
        let edge = (0..n as u32, 0..n as u32, -6.0f64..6.0).prop_map(|(i, j, w)| Edge::new(i, j, w));
        prop::collection::vec(edge, 0..20)
            .prop_map(move |edges| ModelInstance::new(n, edges, n, alpha, beta).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gibbs_measure_is_flip_symmetric(inst in instance()) {
        let n = inst.n_sites();
        let f = |s: &SpinConfig| s.bits() as f64 / (1u64 << n) as f64;
        let a = gibbs_expectation(&inst, f).unwrap();
        let b = gibbs_expectation(&inst, |s| f(&s.flipped())).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        let m = gibbs_expectation(&inst, |s| s.spin(0)).unwrap();
        prop_assert!(m.abs() < 1e-9);
        let s = SpinConfig::new(n, 0b1011 & ((1 << n) - 1)).unwrap();
        prop_assert!((inst.hamiltonian(&s).unwrap() - inst.hamiltonian(&s.flipped()).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn split_partitions_and_recombines(inst in instance(), t in 0.0f64..4.0) {
        let split = inst.split_by_threshold(t).unwrap();
        prop_assert_eq!(split.kept.edges().len() + split.dropped.edges().len(), inst.edges().len());
        prop_assert!(split.kept.edges().iter().all(|e| e.w.abs() * inst.scale() >= t));
        prop_assert!(split.dropped.edges().iter().all(|e| e.w.abs() * inst.scale() < t));
        let whole = split.recombine();
        let mut a: Vec<_> = whole.edges().iter().map(|e| (e.i, e.j, e.w.to_bits())).collect();
        let mut b: Vec<_> = inst.edges().iter().map(|e| (e.i, e.j, e.w.to_bits())).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        let (x, y) = (log_partition(&whole).unwrap().log_z, log_partition(&inst).unwrap().log_z);
        prop_assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()));
    }

    #[test]
    fn agree_and_disagree_sum_to_one(inst in instance(), i in 0usize..8, j in 0usize..8) {
        let n = inst.n_sites();
        let (i, j) = (i % n, j % n);
        let agree = agree_probability(&inst, i, j).unwrap();
        let disagree = gibbs_expectation(&inst, |s| if s.product(i, j) < 0.0 { 1.0 } else { 0.0 }).unwrap();
        prop_assert!((agree + disagree - 1.0).abs() < 1e-12);
        let corr = correlation_matrix(&inst).unwrap()[i * n + j];
        prop_assert!((corr - (2.0 * agree - 1.0)).abs() < 1e-9);
        if i == j {
            prop_assert!((agree - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge_changes_log_z_by_at_most_its_weight(inst in instance(), i in 0u32..8, j in 0u32..8, w in -8.0f64..8.0) {
        let n = inst.n_sites() as u32;
        let before = log_partition(&inst).unwrap().log_z;
        let after = log_partition(&inst.with_edge(Edge::new(i % n, j % n, w)).unwrap()).unwrap().log_z;
        let bound = inst.beta() * inst.scale() * w.abs();
        prop_assert!((after - before).abs() <= bound * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn sandwich_always_holds(inst in instance()) {
        prop_assert!(log_partition(&inst).unwrap().sandwich_holds());
    }

    #[test]
    fn replica_classes_partition_sites(n in 1usize..=10, words in prop::collection::vec(any::<u32>(), 1..5)) {
        let replicas: Vec<SpinConfig> =
            words.iter().map(|w| SpinConfig::new(n, w & ((1u32 << n) - 1)).unwrap()).collect();
        let rc = replica_partition(&replicas).unwrap();
        let mut sites: Vec<usize> = rc.classes.iter().flatten().copied().collect();
        sites.sort();
        prop_assert_eq!(sites, (0..n).collect::<Vec<_>>());
        for (s, p) in rc.partner.iter().enumerate() {
            if let Some(r) = *p {
                prop_assert_eq!(rc.partner[r], Some(s));
                let (a, b) = (rc.classes[s][0], rc.classes[r][0]);
                prop_assert!(replicas.iter().all(|x| x.is_up(a) != x.is_up(b)));
            }
        }
    }

    #[test]
    fn block_convexity(n1 in 1usize..8, n2 in 1usize..8, mask in any::<u32>()) {
        let n = n1 + n2;
        let set_s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let set_r: Vec<usize> = (0..n).filter(|i| mask >> (i + 16) & 1 == 1 && !set_s.contains(i)).collect();
        prop_assert!(convexity_terms(n1, n2, &set_s, &set_r).unwrap().pass);
    }

    #[test]
    fn tail_law_is_a_distribution(alpha in 1.05f64..1.95, c0 in 0.01f64..1.0, t in 0.0f64..50.0, dt in 0.0f64..5.0) {
        let law = TailLaw::new(alpha, c0).unwrap();
        let (a, b) = (law.magnitude_cdf(t), law.magnitude_cdf(t + dt));
        prop_assert!((0.0..=1.0).contains(&a) && a <= b + 1e-15);
        prop_assert!((law.tail_prob(t).unwrap() - (1.0 - a)).abs() < 1e-12);
        let r = 1.0 + t;
        prop_assert!(law.truncated_second_moment(r).unwrap() <= law.truncated_second_moment(r + dt).unwrap() + 1e-12);
        prop_assert!(law.tail_mean_above(r).unwrap() >= law.tail_mean_above(r + dt).unwrap() - 1e-12);
    }

    #[test]
    fn fixed_edge_graphs_are_simple(n in 2usize..12, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let law = TailLaw::new(1.5, 1.0).unwrap();
        let s = (frac * (n * (n - 1) / 2) as f64) as usize;
        let inst = build_fixed_edge(n, s, &law, 0.1, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(inst.edges().len(), s);
        prop_assert!(inst.is_simple());
        let cut = (n as f64).powf(1.0 / 1.5 - 0.1);
        prop_assert!(inst.edges().iter().all(|e| e.w.abs() >= cut));
    }

    #[test]
    fn pair_space_round_trips(n in 1usize..40, k in any::<usize>()) {
        for space in [PairSpace::with_loops(n), PairSpace::without_loops(n)] {
            if space.is_empty() {
                continue;
            }
            let k = k % space.len();
            let (i, j) = space.pair(k);
            prop_assert!(i <= j && j < n);
            prop_assert_eq!(space.index(i, j), k);
        }
    }

    #[test]
    fn reports_round_trip(values in prop::collection::vec((any::<f64>(), 0.0f64..1e6, any::<bool>()), 0..12)) {
        let mut report = ExperimentReport::new("prop", &ExperimentConfig::default());
        for (k, (x, se, with_n)) in values.iter().enumerate() {
            let n = with_n.then_some(k);
            let x = if x.is_finite() { *x } else { 0.0 };
            report.push(ReportRow::at_most(n, &format!("q{k}"), x, Some(*se), 1.0, 0.5));
        }
        let back = ExperimentReport::from_json(&report.to_json()).unwrap();
        prop_assert_eq!(&back, &report);
        let csv = report.to_csv();
        prop_assert_eq!(csv.lines().count(), values.len() + 1);
        prop_assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn seeds_are_pure(base in any::<u64>(), parts in prop::collection::vec(any::<u64>(), 0..4)) {
        prop_assert_eq!(derive_seed(base, "x", &parts), derive_seed(base, "x", &parts));
    }
}
