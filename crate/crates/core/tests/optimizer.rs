use polygap::constructions::{balanced_config, ConfigStatus};
use polygap::optimizer::{
    balanced_partition, detect_support, estimate_bn2, fit_support, refine_with_support, sweep::tetrahedral_level,
    PairObjective, Space, DEFAULT_ANGLE_TOL, DEFAULT_LENGTH_TOL,
};
use polygap::{Error, OptimizerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-6;
    for point in 0..100 {
        let n = rng.gen_range(3..10);
        let dim = if point % 2 == 0 { 2 } else { 3 };
        let obj = PairObjective::full(n, dim);
        let beta = 2f64.powi(rng.gen_range(2..9));
        let eps = 10f64.powi(-rng.gen_range(1..4));
        let z = random_point(&mut rng, obj.n_vars());
        let mut g = vec![0.0; z.len()];
        obj.smoothed(&z, beta, eps, Some(&mut g));
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..z.len() {
            let (mut zp, mut zm) = (z.clone(), z.clone());
            zp[k] += h;
            zm[k] -= h;
            let fd = (obj.smoothed(&zp, beta, eps, None) - obj.smoothed(&zm, beta, eps, None)) / (2.0 * h);
            diff += (fd - g[k]).powi(2);
            scale += fd.powi(2);
        }
        let rel = diff.sqrt() / scale.sqrt().max(1e-8);
        assert!(rel <= 1e-5, "point {point}: n={n} dim={dim} beta={beta} eps={eps} rel={rel:e}");
    }
}

#[test]
fn clustered_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let obj = PairObjective::clustered(&[3, 2, 2, 1], 3);
    let h = 1e-6;
    for _ in 0..20 {
        let z = random_point(&mut rng, obj.n_vars());
        let mut g = vec![0.0; z.len()];
        obj.smoothed(&z, 64.0, 1e-2, Some(&mut g));
        for k in 0..z.len() {
            let (mut zp, mut zm) = (z.clone(), z.clone());
            zp[k] += h;
            zm[k] -= h;
            let fd = (obj.smoothed(&zp, 64.0, 1e-2, None) - obj.smoothed(&zm, 64.0, 1e-2, None)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-5 * fd.abs().max(1.0));
        }
    }
}

#[test]
fn smoothing_gap_is_bounded_by_log_pairs_over_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let n = rng.gen_range(3..12);
        let obj = PairObjective::full(n, 3);
        let z = random_point(&mut rng, obj.n_vars());
        let truth = obj.true_value(&z);
        let pairs = (n * (n - 1) / 2) as f64;
        for beta in [1.0, 16.0, 256.0, 16384.0] {
            let s = obj.smoothed(&z, beta, 0.0, None);
            assert!(s >= truth - 1e-12);
            assert!(s - truth <= pairs.ln() / beta + 1e-12);
        }
    }
}

#[test]
fn true_objective_is_scale_invariant_on_certificates() {
    let report = estimate_bn2(&OptimizerConfig::new(6, Space::Spatial).with_restarts(8)).unwrap();
    let obj = PairObjective::full(6, 3);
    let z: Vec<f64> = report.certificate.edge_vecs().into_iter().flatten().collect();
    let base = obj.true_value(&z);
    assert!((base - report.best_value).abs() <= 1e-12);
    for lambda in [10.0, 0.1] {
        let scaled: Vec<f64> = z.iter().map(|v| v * lambda).collect();
        assert!((obj.true_value(&scaled) - base).abs() <= 1e-12 * base);
    }
}

#[test]
fn same_config_gives_identical_report() {
    let config = OptimizerConfig::new(7, Space::Spatial).with_restarts(6).with_seed(42);
    let a = serde_json::to_string(&estimate_bn2(&config).unwrap()).unwrap();
    let b = serde_json::to_string(&estimate_bn2(&config).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_string(&estimate_bn2(&config.clone().with_seed(43)).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn certificates_close_with_unit_perimeter() {
    for (n, space) in [(5, Space::Spatial), (9, Space::Spatial), (5, Space::Planar)] {
        let report = estimate_bn2(&OptimizerConfig::new(n, space).with_restarts(8)).unwrap();
        let cert = &report.certificate;
        assert!(cert.closure_gap() <= 1e-12);
        assert!((cert.perimeter() - 1.0).abs() <= 1e-12);
        assert!((cert.max_pair_deficit().0 - report.best_value).abs() <= 1e-9);
        assert_eq!(report.restarts.len(), 8);
        let best = report.restarts.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
        assert!(report.best_value <= best + 1e-12);
    }
}

#[test]
fn small_n_is_rejected() {
    let err = estimate_bn2(&OptimizerConfig::new(2, Space::Spatial)).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn tetrahedron_level_at_four() {
    let report = estimate_bn2(&OptimizerConfig::new(4, Space::Spatial)).unwrap();
    assert!((report.n_times_value - 0.845299462).abs() <= 2e-3);
    assert_eq!(report.multiplicities(), vec![1, 1, 1, 1]);
}

#[test]
fn six_spatial_estimate() {
    let report = estimate_bn2(&OptimizerConfig::new(6, Space::Spatial)).unwrap();
    assert!((report.n_times_value - 0.857142).abs() <= 2e-3);
}

#[test]
fn planar_four_matches_equality_family() {
    let report = estimate_bn2(&OptimizerConfig::new(4, Space::Planar)).unwrap();
    assert!((report.best_value - 0.25).abs() <= 1e-4);
    assert_eq!(report.support.len(), 3);
}

#[test]
fn seven_spatial_support_is_balanced() {
    let report = estimate_bn2(&OptimizerConfig::new(7, Space::Spatial)).unwrap();
    assert_eq!(report.multiplicities(), vec![2, 2, 2, 1]);
}

#[test]
fn refinement_reaches_tetrahedron_at_eight() {
    let config = OptimizerConfig::new(8, Space::Spatial);
    let report = estimate_bn2(&config).unwrap();
    let refined = refine_with_support(&report, &[2, 2, 2, 2], &config.schedule()).unwrap();
    assert!((refined.n_times_value - tetrahedral_level()).abs() <= 1e-9);
    assert!(refined.best_value <= report.best_value + 1e-12);
    assert_eq!(refined.refinements.len(), 1);
}

#[test]
fn refinement_never_worsens_the_estimate() {
    for n in [5, 9, 10] {
        let config = OptimizerConfig::new(n, Space::Spatial).with_restarts(4);
        let report = estimate_bn2(&config).unwrap();
        for m in [balanced_partition(n, 4), vec![n - 3, 1, 1, 1]] {
            let refined = refine_with_support(&report, &m, &config.schedule()).unwrap();
            assert!(refined.best_value <= report.best_value + 1e-12, "n={n} m={m:?}");
            assert!(refined.certificate.closure_gap() <= 1e-12);
        }
    }
}

#[test]
fn refinement_rejects_bad_multiplicities() {
    let config = OptimizerConfig::new(6, Space::Spatial).with_restarts(2);
    let report = estimate_bn2(&config).unwrap();
    assert!(refine_with_support(&report, &[3, 3], &config.schedule()).is_err());
    assert!(refine_with_support(&report, &[3, 2, 1, 1], &config.schedule()).is_err());
    assert!(refine_with_support(&report, &[6, 0, 0, 0], &config.schedule()).is_err());
}

#[test]
fn fit_support_from_tetrahedron_at_five() {
    let config = OptimizerConfig::new(5, Space::Spatial);
    let init: Vec<Vec<f64>> = polygap::constructions::TETRAHEDRON.iter().map(|d| d.to_vec()).collect();
    let fit = fit_support(Space::Spatial, &[2, 1, 1, 1], &init, &config.schedule()).unwrap();
    assert!((5.0 * fit.value - 0.85509).abs() <= 2e-3);
    assert!(!fit.collapsed);
    let support = detect_support(&fit.polygon, DEFAULT_ANGLE_TOL, DEFAULT_LENGTH_TOL);
    assert_eq!(support.len(), 4);
}

#[test]
fn balanced_configurations() {
    let (poly, cfg) = balanced_config(8, 0).unwrap();
    assert_eq!(cfg.status, ConfigStatus::Exact);
    assert!((8.0 * poly.max_pair_deficit().0 - tetrahedral_level()).abs() <= 1e-12);
    let (poly, cfg) = balanced_config(5, 0).unwrap();
    assert_eq!(cfg.status, ConfigStatus::ConjecturedOptimum);
    assert_eq!(cfg.multiplicities, [2, 1, 1, 1]);
    assert!((5.0 * poly.max_pair_deficit().0 - 0.85509).abs() <= 2e-3);
}
