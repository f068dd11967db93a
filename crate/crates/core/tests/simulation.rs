use bindet::detection::detection_probability;
use bindet::montecarlo::{
    ml_estimate, mse_report, run_campaign, run_trial, sample_decisions, sample_field,
    MonteCarloError, TrialOutcome,
};
use bindet::{DecisionRecord, DetectorConfig, FieldConfig, SimConfig, TargetParams};

fn config(alpha: f64, tau: f64, trials: usize, seed: u64) -> SimConfig {
    SimConfig::new(
        FieldConfig::new(0.05).unwrap(),
        DetectorConfig::new(tau, 0.25, 1.0, alpha).unwrap(),
        TargetParams::new(2.0, 0.0, 0.0).unwrap(),
        trials,
        seed,
    )
    .unwrap()
}

#[test]
fn mean_sensor_count_matches_density() {
    let cfg = config(2.0, 0.4, 1, 3).with_region_radius(50.0).unwrap();
    let n = 10_000;
    let counts: Vec<f64> = (0..n).map(|t| sample_field(&cfg, t).len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let want = 0.05 * std::f64::consts::PI * 2500.0;
    // Poisson: the standard error of the mean is sqrt(want / n)
    assert!(
        (mean - want).abs() <= 3.0 * (want / n as f64).sqrt(),
        "{mean} vs {want}"
    );
    let inside = (0..50).all(|t| sample_field(&cfg, t).iter().all(|p| p.x.hypot(p.y) <= 50.0));
    assert!(inside);
}

#[test]
fn detection_frequency_at_fixed_distance() {
    let cfg = config(2.0, 0.4, 1, 11);
    let sensors = vec![bindet::Point::new(2.0, 0.0); 1000];
    let mut hits = 0usize;
    let draws = 100;
    for trial in 0..draws {
        let recs = sample_decisions(&cfg, &sensors, trial).unwrap();
        hits += recs.iter().filter(|r| r.detected).count();
    }
    let n = (draws as usize * sensors.len()) as f64;
    let p = detection_probability(&cfg.detector, 2.0, 2.0).unwrap();
    let se = (p * (1.0 - p) / n).sqrt();
    assert!((hits as f64 / n - p).abs() <= 3.0 * se);
}

#[test]
fn trials_are_reproducible_and_independent_of_campaign_order() {
    let cfg = config(4.0, 0.38, 6, 99);
    let all = run_campaign(&cfg);
    assert_eq!(all.len(), 6);
    for (k, r) in all.iter().enumerate() {
        assert_eq!(r.trial, k as u64);
        assert_eq!(format!("{r:?}"), format!("{:?}", run_trial(&cfg, k as u64)));
    }
    let other = run_trial(&config(4.0, 0.38, 6, 100), 0);
    assert_ne!(format!("{other:?}"), format!("{:?}", all[0]));
}

#[test]
fn ml_recovers_a_noiseless_target() {
    // Thresholded (not sampled) decisions on a dense lattice; compare the
    // estimate against a brute-force grid minimum at the estimated power.
    let cfg = DetectorConfig::new(0.4, 0.25, 1.0, 2.0).unwrap();
    let truth = TargetParams::new(2.0, 1.3, -0.8).unwrap();
    let mut recs = Vec::new();
    for i in -12..=12 {
        for j in -12..=12 {
            let (x, y) = (i as f64 * 0.8 + 0.1, j as f64 * 0.8 + 0.05);
            let r = (x - truth.x).hypot(y - truth.y);
            let p = detection_probability(&cfg, truth.power, r).unwrap();
            recs.push(DecisionRecord::new(x, y, p > 0.5));
        }
    }
    let est = ml_estimate(&cfg, &recs, &TargetParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    // grid points on top of a sensor are skipped
    let nll = |t: &TargetParams| {
        bindet::detection::log_likelihood(&cfg, t, &recs).map_or(f64::INFINITY, |l| -l)
    };
    let mut best = f64::INFINITY;
    for a in -20..=20 {
        for b in -20..=20 {
            let t = TargetParams::new(
                est.theta.power,
                1.3 + a as f64 * 0.05,
                -0.8 + b as f64 * 0.05,
            )
            .unwrap();
            best = best.min(nll(&t));
        }
    }
    assert!(est.neg_log_lik <= best + 1e-9);
    assert!((est.theta.x - truth.x).abs() < 0.8 && (est.theta.y - truth.y).abs() < 0.8);
}

#[test]
fn no_detections_is_reported() {
    let cfg = DetectorConfig::new(0.4, 0.25, 1.0, 2.0).unwrap();
    let recs = vec![
        DecisionRecord::new(1.0, 1.0, false),
        DecisionRecord::new(-2.0, 0.5, false),
    ];
    let err = ml_estimate(&cfg, &recs, &TargetParams::new(2.0, 0.0, 0.0).unwrap()).unwrap_err();
    assert_eq!(err, MonteCarloError::NoDetections);
}

#[test]
fn small_campaign_mse_is_finite() {
    let cfg = config(4.0, 0.38, 20, 5);
    let res = run_campaign(&cfg);
    let ok = res
        .iter()
        .filter(|r| r.outcome == TrialOutcome::Converged)
        .count();
    let rep = mse_report(&res, &cfg.truth).unwrap();
    assert_eq!(rep.n_used, ok);
    assert_eq!(rep.n_used + rep.n_failed, 20);
    assert!(rep.mse_x.is_finite() && rep.mse_y.is_finite());
}
