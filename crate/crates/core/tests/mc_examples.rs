use projtest_core::mc::{ecdf_comparison, run_experiment, McConfig};
use projtest_core::Estimator;

#[test]
fn ecdf_columns_are_monotone_from_zero_to_one() {
    let t = ecdf_comparison(300, 5).unwrap();
    for w in t.rows.windows(2) {
        assert!(w[1].u > w[0].u);
        assert!(w[1].ecdf_misspecified >= w[0].ecdf_misspecified);
        assert!(w[1].ecdf_correct >= w[0].ecdf_correct);
    }
    let last = t.rows.last().unwrap();
    assert_eq!(last.ecdf_misspecified, 1.0);
    assert_eq!(last.ecdf_correct, 1.0);
    assert!(t.rows[0].ecdf_misspecified >= 0.0);
}

#[test]
fn ecdf_models_close_at_n1000() {
    for seed in 1..=10 {
        let d = ecdf_comparison(1000, seed).unwrap().sup_distance();
        println!("seed {seed}: sup distance {d:.4}");
        assert!(d <= 0.10, "seed {seed}: {d}");
    }
}

#[test]
fn ecdf_output_is_deterministic() {
    let a = ecdf_comparison(500, 77).unwrap().to_csv();
    let b = ecdf_comparison(500, 77).unwrap().to_csv();
    assert_eq!(a, b);
    assert!(a.starts_with("u,ecdf_misspecified,ecdf_correct\n"));
}

#[test]
fn dgp9_cvm_rate_in_band() {
    let cfg = McConfig {
        dgps: vec![9],
        sample_sizes: vec![1000],
        reps: 500,
        bootstrap: 499,
        seed: 31,
        ..McConfig::default()
    };
    let t = run_experiment(&cfg).unwrap();
    let r = t.get(9, 1000, "CvM", 0.05).unwrap().rate;
    assert!((0.40..=0.62).contains(&r), "rate {r}");
}

#[test]
fn experiment_tables_are_reproducible() {
    let cfg = McConfig {
        dgps: vec![1, 2],
        sample_sizes: vec![100],
        reps: 20,
        bootstrap: 99,
        bandwidths: vec![0.1],
        seed: 9,
        estimator: Estimator::Mle,
        ..McConfig::default()
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_markdown(), b.to_markdown());
}
