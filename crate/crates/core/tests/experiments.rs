use std::f64::consts::LN_2;

use levyglass::exact::interpolation_step_gap;
use levyglass::experiments::{
    boundedness_audit, boundedness_bound, concentration_scaling, multiedge_series, quenched_free_energy,
    reduction_chain, subadditivity_hypothesis_check, superadditivity_trial, ExperimentConfig, ModelKind,
};
use levyglass::model::s_n;
use levyglass::{Edge, ModelInstance, TailLaw};

#[test]
fn same_seed_same_report() {
    let cfg = ExperimentConfig { n: 8, samples: 40, seed: 3, ..Default::default() };
    for kind in ModelKind::ALL {
        let a = quenched_free_energy(&cfg, kind).unwrap();
        let b = quenched_free_energy(&cfg, kind).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.to_csv(), b.to_csv());
        let other = quenched_free_energy(&ExperimentConfig { seed: 4, ..cfg.clone() }, kind).unwrap();
        if kind != ModelKind::FixedEdge || s_n(8, 1.5, 0.1, 1.0) > 0 {
            assert_ne!(a.rows, other.rows, "{kind}");
        }
    }
}

#[test]
fn superadditivity_at_window_edge() {
    let cfg = ExperimentConfig { n: 9, n1: Some(3), samples: 1000, seed: 1, ..Default::default() };
    let r = superadditivity_trial(&cfg).unwrap();
    assert!(r.row("lhs_minus_rhs", Some(9)).unwrap().pass);
}

#[test]
fn weak_coupling_controls() {
    let cfg = ExperimentConfig { c0: 0.01, n_grid: vec![6, 8, 10], samples: 300, ..Default::default() };
    // S_N = 0: the sparse models have no edges at all.
    let r = reduction_chain(&cfg).unwrap();
    for n in [6, 8, 10] {
        assert_eq!(s_n(n, 1.5, 0.1, 0.01), 0);
        assert_eq!(r.row("F_fixed_edge", Some(n)).unwrap().estimate, LN_2);
        assert_eq!(r.row("F_multi_edge", Some(n)).unwrap().estimate, LN_2);
        // The uniform body still couples the spins of the full model.
        let full = r.row("F_full", Some(n)).unwrap().estimate;
        assert!(full > LN_2 && full < LN_2 + 0.1, "{full}");
    }
    let b = boundedness_audit(&cfg).unwrap();
    assert!(b.all_pass());

    let c = concentration_scaling(&ExperimentConfig { samples: 200, ..cfg }).unwrap();
    for n in [6, 8, 10] {
        let row = c.row("var_log_z", Some(n)).unwrap();
        assert!(row.pass && row.estimate < 0.1 * row.comparator.unwrap(), "{row:?}");
    }
}

#[test]
fn bound_tends_to_log_two() {
    let law = TailLaw::new(1.5, 1.0).unwrap();
    for n in [2, 8, 16] {
        let b = boundedness_bound(&law, n, 1e-9).unwrap();
        assert!((b - LN_2).abs() < 1e-6);
        assert!(boundedness_bound(&law, n, 1.0).unwrap() > boundedness_bound(&law, n, 0.5).unwrap());
    }
}

#[test]
fn zero_weight_bases_are_monotone() {
    for (n, n1) in [(4, 2), (6, 3), (7, 3)] {
        let edges = vec![Edge::new(0, 1, 0.0), Edge::new(1, n as u32 - 1, 0.0)];
        let base = ModelInstance::new(n, edges, n, 1.5, 1.0).unwrap();
        for x in [0.1, 0.5, 1.0, 2.0] {
            let gap = interpolation_step_gap(&base, x, n1).unwrap();
            assert!(gap.gap_r >= gap.gap_rminus1 - 1e-12);
        }
    }
}

#[test]
fn measured_multiedge_series_feeds_the_hypothesis_check() {
    let cfg = ExperimentConfig { samples: 30, ..Default::default() };
    let series = multiedge_series(&cfg, &[2, 3, 4, 5, 6]).unwrap();
    assert_eq!(series.len(), 5);
    let values: Vec<(usize, f64)> = series.iter().map(|&(n, a, _)| (n, a)).collect();
    let r = subadditivity_hypothesis_check(&cfg, &values, 0.5, 50.0).unwrap();
    assert!(r.row("total_violations", None).is_some());
    assert!(subadditivity_hypothesis_check(&cfg, &values, 1.5, 1.0).is_err());
}
