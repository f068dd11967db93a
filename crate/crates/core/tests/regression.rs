//! Frozen reference values for the expected Fisher information at
//! P = 2, T = 1, sigma2 = 0.25, rho = 0.05.
//!
//! The references were produced independently with SciPy (`ncx2.sf` for Q1,
//! `ive` for the Bessel factor, `quad` at rel. tolerance 1e-11).

use bindet::closedform::closed_form_fim;
use bindet::fisher::expected_fim_quadrature;
use bindet::{DetectorConfig, FieldConfig, QuadratureSpec};

const REFERENCE: [(f64, f64, f64, f64); 7] = [
    // (alpha, tau, crb_P, crb_x)
    (2.0, 0.1, 5.852_323_495, 8.502_669_653),
    (2.0, 0.4, 3.058_723_751_2, 4.448_991_817_4),
    (2.0, 0.5, 3.154_942_237, 4.562_184_791),
    (2.0, 1.0, 6.043_172_083, 8.273_582_693),
    (4.0, 0.4, 168.595_507_8, 35.669_270_64),
    (4.0, 1.0, 367.509_618_3, 77.699_299_14),
    (4.0, 0.38, f64::NAN, 35.667_850_7),
];

fn field() -> FieldConfig {
    FieldConfig::new(0.05).unwrap()
}

#[test]
fn quadrature_matches_frozen_values() {
    let quad = QuadratureSpec::default();
    for &(alpha, tau, crb_p, crb_x) in &REFERENCE {
        let cfg = DetectorConfig::new(tau, 0.25, 1.0, alpha).unwrap();
        let r = expected_fim_quadrature(&cfg, 2.0, &field(), &quad).unwrap();
        if crb_p.is_finite() {
            let rel = (r.crb_p - crb_p).abs() / crb_p;
            assert!(
                rel < 1e-8,
                "alpha={alpha} tau={tau}: crb_P {} vs {crb_p}",
                r.crb_p
            );
        }
        let rel = (r.crb_x - crb_x).abs() / crb_x;
        assert!(
            rel < 1e-8,
            "alpha={alpha} tau={tau}: crb_x {} vs {crb_x}",
            r.crb_x
        );
    }
}

#[test]
fn closed_form_is_in_the_right_neighbourhood() {
    // loose sanity band; the tight comparison lives in the acceptance suite
    let quad = QuadratureSpec::default();
    for &(alpha, tau, _, _) in &REFERENCE {
        let cfg = DetectorConfig::new(tau, 0.25, 1.0, alpha).unwrap();
        let exact = expected_fim_quadrature(&cfg, 2.0, &field(), &quad).unwrap();
        let m = if alpha == 2.0 { 3 } else { 1 };
        let (cf, quality) = closed_form_fim(&cfg, 2.0, &field(), m).unwrap();
        assert!(
            (cf.f11 / exact.f11 - 1.0).abs() < 0.25,
            "alpha={alpha} tau={tau}"
        );
        assert!(
            (cf.f22 / exact.f22 - 1.0).abs() < 0.25,
            "alpha={alpha} tau={tau}"
        );
        assert!(!quality.negative);
    }
}
