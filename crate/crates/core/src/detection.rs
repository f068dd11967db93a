//! Binary energy-detector model: detection probability versus distance, its
//! partial derivatives and the fusion-center log-likelihood.
//!
//! A sensor at distance `r` from an emitter of power `P` detects with
//! probability `Q1(x, t)` where `x = sqrt(T P / (sigma2 r^alpha))` and
//! `t = sqrt(2 tau / sigma2)`.

use thiserror::Error;

use crate::specfun::{bessel_i_scaled, marcum_q_parts, MarcumQ, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid detector configuration: {0}")]
    InvalidConfig(String),
    #[error("power must be finite and > 0, got {0}")]
    InvalidPower(f64),
    #[error("distance must be finite and > 0, got {0}")]
    InvalidDistance(f64),
    #[error("sensor at ({x}, {y}) coincides with the target location")]
    SensorAtTarget { x: f64, y: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Sensing physics shared by every sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Power threshold.
    pub tau: f64,
    /// Noise power.
    pub sigma2: f64,
    /// Observation time.
    pub t_obs: f64,
    /// Pathloss exponent.
    pub alpha: f64,
}

impl DetectorConfig {
    pub fn new(tau: f64, sigma2: f64, t_obs: f64, alpha: f64) -> Result<Self, ModelError> {
        let cfg = Self {
            tau,
            sigma2,
            t_obs,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("tau", self.tau),
            ("sigma2", self.sigma2),
            ("T", self.t_obs),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(ModelError::InvalidConfig(format!(
                "alpha must be finite and >= 1, got {}",
                self.alpha
            )));
        }
        let t = self.t();
        if !(t.is_finite() && t > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "normalised threshold sqrt(2 tau / sigma2) = {t} is not usable"
            )));
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Normalised threshold `t = sqrt(2 tau / sigma2)`.
    pub fn t(&self) -> f64 {
        (2.0 * self.tau / self.sigma2).sqrt()
    }

    /// Signal variable `x = sqrt(T P / (sigma2 r^alpha))`.
    pub fn x_at(&self, power: f64, r: f64) -> f64 {
        (self.t_obs * power / self.sigma2).sqrt() * r.powf(-0.5 * self.alpha)
    }

    /// Distance at which the signal variable equals `x`; inverse of [`Self::x_at`].
    pub fn r_at(&self, power: f64, x: f64) -> f64 {
        (self.t_obs * power / (self.sigma2 * x * x)).powf(1.0 / self.alpha)
    }

    /// Detection probability far from the emitter, `exp(-tau / sigma2)`.
    pub fn false_alarm(&self) -> f64 {
        (-self.tau / self.sigma2).exp()
    }
}

/// Emitter power at unit distance and planar location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetParams {
    pub power: f64,
    pub x: f64,
    pub y: f64,
}

impl TargetParams {
    pub fn new(power: f64, x: f64, y: f64) -> Result<Self, ModelError> {
        check_power(power)?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(ModelError::InvalidConfig(format!(
                "target location ({x}, {y}) is not finite"
            )));
        }
        Ok(Self { power, x, y })
    }

    pub fn location(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A sensor's location and its binary decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub x: f64,
    pub y: f64,
    pub detected: bool,
}

impl DecisionRecord {
    pub fn new(x: f64, y: f64, detected: bool) -> Self {
        Self { x, y, detected }
    }

    pub fn location(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

fn check_power(power: f64) -> Result<(), ModelError> {
    if !(power.is_finite() && power > 0.0) {
        return Err(ModelError::InvalidPower(power));
    }
    Ok(())
}

fn check_distance(r: f64) -> Result<(), ModelError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(ModelError::InvalidDistance(r));
    }
    Ok(())
}

/// `P_D(r) = Q1(x, t)`.
pub fn detection_probability(cfg: &DetectorConfig, power: f64, r: f64) -> Result<f64, ModelError> {
    Ok(detection_parts(cfg, power, r)?.q)
}

/// Detection probability together with its complement and both logs.
pub fn detection_parts(cfg: &DetectorConfig, power: f64, r: f64) -> Result<MarcumQ, ModelError> {
    check_power(power)?;
    check_distance(r)?;
    Ok(marcum_q_parts(cfg.x_at(power, r), cfg.t())?)
}

/// `(dP_D/dr, dP_D/dP)`.
///
/// Both share the factor `(t x / 2) exp(-(t^2 + x^2)/2) I1(t x)`, scaled by
/// `-alpha / r` and `1 / P` respectively.
pub fn detection_probability_derivatives(
    cfg: &DetectorConfig,
    power: f64,
    r: f64,
) -> Result<(f64, f64), ModelError> {
    check_power(power)?;
    check_distance(r)?;
    let common = derivative_factor(cfg.x_at(power, r), cfg.t())?;
    Ok((-cfg.alpha * common / r, common / power))
}

// (t x / 2) e^{-(t^2+x^2)/2} I1(tx), via the scaled Bessel function.
pub(crate) fn derivative_factor(x: f64, t: f64) -> Result<f64, SpecFunError> {
    let z = t * x;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * z * bessel_i_scaled(1, z)? * (-0.5 * (x - t) * (x - t)).exp())
}

/// `sum ln P_D` over detections plus `sum ln(1 - P_D)` over the rest.
///
/// Records exactly at the target location are rejected.
pub fn log_likelihood(
    cfg: &DetectorConfig,
    theta: &TargetParams,
    records: &[DecisionRecord],
) -> Result<f64, ModelError> {
    check_power(theta.power)?;
    let target = theta.location();
    let t = cfg.t();
    let scale = (cfg.t_obs * theta.power / cfg.sigma2).sqrt();
    let mut sum = 0.0;
    for rec in records {
        let r = rec.location().distance(&target);
        if r == 0.0 {
            return Err(ModelError::SensorAtTarget { x: rec.x, y: rec.y });
        }
        check_distance(r)?;
        let parts = marcum_q_parts(scale * r.powf(-0.5 * cfg.alpha), t)?;
        sum += if rec.detected {
            parts.ln_q
        } else {
            parts.ln_qc
        };
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sec5(tau: f64) -> DetectorConfig {
        DetectorConfig::new(tau, 0.25, 1.0, 2.0).unwrap()
    }

    // Poisson-mixture form of Q1, independent of the crate's evaluation path.
    fn marcum_oracle(a: f64, b: f64) -> f64 {
        let lambda = 0.5 * a * a;
        let y = 0.5 * b * b;
        let (mut w, mut pmf, mut cdf, mut sum) = ((-lambda).exp(), (-y).exp(), 0.0, 0.0);
        for k in 0..3000 {
            cdf += pmf;
            sum += w * cdf;
            w *= lambda / (k + 1) as f64;
            pmf *= y / (k + 1) as f64;
            if k as f64 > lambda + 10.0 && w < 1e-18 {
                break;
            }
        }
        sum
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(0.0, 0.25, 1.0, 2.0).is_err());
        assert!(DetectorConfig::new(0.5, 0.0, 1.0, 2.0).is_err());
        assert!(DetectorConfig::new(0.5, 0.25, -1.0, 2.0).is_err());
        assert!(DetectorConfig::new(0.5, 0.25, 1.0, 0.5).is_err());
        assert!(DetectorConfig::new(0.5, 0.25, 1.0, 3.0).is_ok());
        assert!(TargetParams::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn reference_point() {
        let cfg = sec5(0.5);
        assert_relative_eq!(cfg.t(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(cfg.x_at(2.0, 1.0), 8f64.sqrt(), max_relative = 1e-15);
        let pd = detection_probability(&cfg, 2.0, 1.0).unwrap();
        assert!((pd - marcum_oracle(8f64.sqrt(), 2.0)).abs() < 1e-13);
        assert_relative_eq!(cfg.r_at(2.0, cfg.x_at(2.0, 3.7)), 3.7, max_relative = 1e-14);
    }

    #[test]
    fn limits() {
        let tiny = sec5(1e-300);
        assert_eq!(detection_probability(&tiny, 2.0, 5.0).unwrap(), 1.0);
        let (dr, dp) = detection_probability_derivatives(&tiny, 2.0, 5.0).unwrap();
        assert!(dr.abs() < 1e-140 && dp.abs() < 1e-140);
        let cfg = sec5(0.5);
        let far = detection_probability(&cfg, 2.0, 1e8).unwrap();
        assert_relative_eq!(far, cfg.false_alarm(), max_relative = 1e-12);
        assert!(detection_probability(&cfg, 2.0, 0.0).is_err());
        assert!(detection_probability(&cfg, -2.0, 1.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let cfg = sec5(0.5);
        let (dr, dp) = detection_probability_derivatives(&cfg, 2.0, 2.0).unwrap();
        let h = 1e-5;
        let pd = |p: f64, r: f64| detection_probability(&cfg, p, r).unwrap();
        let fd_r = (pd(2.0, 2.0 + h) - pd(2.0, 2.0 - h)) / (2.0 * h);
        let fd_p = (pd(2.0 + h, 2.0) - pd(2.0 - h, 2.0)) / (2.0 * h);
        assert!((dr - fd_r).abs() < 1e-6);
        assert!((dp - fd_p).abs() < 1e-6);
        assert!(dr < 0.0 && dp > 0.0);
    }

    #[test]
    fn scale_identity() {
        for &alpha in &[2.0, 3.0, 4.0] {
            let cfg = DetectorConfig::new(0.7, 0.25, 1.0, alpha).unwrap();
            for &r in &[0.3, 1.0, 4.0, 20.0] {
                let (dr, dp) = detection_probability_derivatives(&cfg, 3.0, r).unwrap();
                assert_relative_eq!(r * dr, -alpha * 3.0 * dp, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn log_likelihood_matches_term_by_term() {
        let cfg = sec5(0.5);
        let theta = TargetParams::new(2.0, 0.0, 0.0).unwrap();
        assert_eq!(log_likelihood(&cfg, &theta, &[]).unwrap(), 0.0);
        let recs = [
            DecisionRecord::new(1.0, 0.0, true),
            DecisionRecord::new(0.0, 2.0, false),
            DecisionRecord::new(-3.0, 0.0, false),
        ];
        let mut want = 0.0;
        for (r, d) in [(1.0f64, true), (2.0, false), (3.0, false)] {
            let q = marcum_oracle(cfg.x_at(2.0, r), 2.0);
            want += if d { q.ln() } else { (1.0 - q).ln() };
        }
        assert_relative_eq!(
            log_likelihood(&cfg, &theta, &recs).unwrap(),
            want,
            max_relative = 1e-12
        );
        let at_target = [DecisionRecord::new(0.0, 0.0, true)];
        assert!(matches!(
            log_likelihood(&cfg, &theta, &at_target),
            Err(ModelError::SensorAtTarget { .. })
        ));
        let tiny = sec5(1e-300);
        let one = [DecisionRecord::new(1.0, 1.0, true)];
        assert_eq!(log_likelihood(&tiny, &theta, &one).unwrap(), 0.0);
    }

    #[test]
    fn log_likelihood_stays_finite_in_far_tails() {
        let cfg = sec5(0.5);
        let theta = TargetParams::new(2.0, 0.0, 0.0).unwrap();
        // non-detection right next to a strong emitter, detection at a huge distance
        let recs = [
            DecisionRecord::new(1e-3, 0.0, false),
            DecisionRecord::new(1e6, 0.0, true),
        ];
        let ll = log_likelihood(&cfg, &theta, &recs).unwrap();
        assert!(ll.is_finite() && ll < -1e5);
    }
}
