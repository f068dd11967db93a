//! Monte Carlo validation: Poisson sensor fields, sampled decisions and a
//! maximum-likelihood fusion estimator.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the master seed,
//! the trial index and a purpose tag, so a campaign is a pure function of its
//! [`SimConfig`] regardless of how trials are scheduled.

mod simplex;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::detection::{
    detection_parts, detection_probability, log_likelihood, DecisionRecord, DetectorConfig,
    ModelError, Point, TargetParams,
};
use crate::fisher::FieldConfig;

pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

const STREAM_FIELD: u64 = 1;
const STREAM_DECISIONS: u64 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("no sensor detected the target; its location is not identifiable")]
    NoDetections,
    #[error("all {0} trials failed")]
    AllTrialsFailed(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub field: FieldConfig,
    pub detector: DetectorConfig,
    pub truth: TargetParams,
    pub trials: usize,
    /// Sensors are scattered on a disk of this radius around the target.
    pub region_radius: f64,
    pub master_seed: u64,
}

impl SimConfig {
    /// Builds a configuration with the default truncation radius from
    /// [`default_region_radius`].
    pub fn new(
        field: FieldConfig,
        detector: DetectorConfig,
        truth: TargetParams,
        trials: usize,
        master_seed: u64,
    ) -> Result<Self, MonteCarloError> {
        let region_radius = default_region_radius(&detector, truth.power)?;
        let cfg = Self {
            field,
            detector,
            truth,
            trials,
            region_radius,
            master_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_region_radius(mut self, r: f64) -> Result<Self, MonteCarloError> {
        self.region_radius = r;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        self.detector.validate()?;
        if self.trials == 0 {
            return Err(MonteCarloError::InvalidConfig("trials must be >= 1".into()));
        }
        if !(self.region_radius.is_finite() && self.region_radius > 0.0) {
            return Err(MonteCarloError::InvalidConfig(format!(
                "region_radius must be finite and > 0, got {}",
                self.region_radius
            )));
        }
        Ok(())
    }

    /// Expected number of sensors per field, `rho pi R^2`.
    pub fn expected_sensors(&self) -> f64 {
        self.field.rho * PI * self.region_radius * self.region_radius
    }
}

/// Smallest radius (to 1e-9 relative) beyond which `P_D(r)` is within 1e-6
/// of the false-alarm floor `exp(-tau / sigma2)`.
pub fn default_region_radius(cfg: &DetectorConfig, power: f64) -> Result<f64, ModelError> {
    const GAP: f64 = 1e-6;
    let floor = cfg.false_alarm();
    let excess =
        |r: f64| -> Result<f64, ModelError> { Ok(detection_probability(cfg, power, r)? - floor) };
    let mut hi = 1.0;
    while excess(hi)? >= GAP {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(ModelError::InvalidConfig(
                "detection probability does not settle to its floor".into(),
            ));
        }
    }
    let mut lo = 1e-6;
    if excess(lo)? < GAP {
        return Err(ModelError::InvalidConfig(
            "detection probability is at its floor everywhere; no truncation radius".into(),
        ));
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? >= GAP {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn stream(master_seed: u64, trial: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial << 4) | purpose);
    rng
}

fn scatter_disk<R: Rng>(rng: &mut R, rho: f64, radius: f64, center: Point) -> Vec<Point> {
    let mean = rho * PI * radius * radius;
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map(|p| p.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = radius * rng.random::<f64>().sqrt();
        if r == 0.0 {
            // the model is undefined on top of the target; draw again
            continue;
        }
        let phi = 2.0 * PI * rng.random::<f64>();
        out.push(Point::new(
            center.x + r * phi.cos(),
            center.y + r * phi.sin(),
        ));
    }
    out
}

/// Sensor positions for one trial: a Poisson count with mean `rho pi R^2`,
/// uniform on the disk of radius `R` around the true target.
pub fn sample_field(cfg: &SimConfig, trial: u64) -> Vec<Point> {
    let mut rng = stream(cfg.master_seed, trial, STREAM_FIELD);
    scatter_disk(
        &mut rng,
        cfg.field.rho,
        cfg.region_radius,
        cfg.truth.location(),
    )
}

/// Independent Bernoulli(`P_D(r_i)`) decisions for the given sensors.
pub fn sample_decisions(
    cfg: &SimConfig,
    sensors: &[Point],
    trial: u64,
) -> Result<Vec<DecisionRecord>, ModelError> {
    let mut rng = stream(cfg.master_seed, trial, STREAM_DECISIONS);
    let target = cfg.truth.location();
    sensors
        .iter()
        .map(|s| {
            let r = s.distance(&target);
            if r == 0.0 {
                return Err(ModelError::SensorAtTarget { x: s.x, y: s.y });
            }
            let p = detection_probability(&cfg.detector, cfg.truth.power, r)?;
            Ok(DecisionRecord::new(s.x, s.y, rng.random::<f64>() < p))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlOptions {
    pub simplex: SimplexOptions,
    /// The location pre-search covers `(2 h + 1)^2` points around the
    /// detection centroid.
    pub grid_half_width: usize,
    /// Grid spacing; estimated from the sensor layout when `None`.
    pub grid_spacing: Option<f64>,
    /// Multipliers applied to the count-matched power in the pre-search.
    pub power_factors: Vec<f64>,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            grid_half_width: 3,
            grid_spacing: None,
            power_factors: vec![0.25, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEstimate {
    pub theta: TargetParams,
    pub neg_log_lik: f64,
    /// `false` when the simplex hit its iteration cap.
    pub converged: bool,
    pub iterations: usize,
}

fn neg_log_lik(cfg: &DetectorConfig, records: &[DecisionRecord], v: &[f64]) -> f64 {
    let theta = TargetParams {
        power: v[0].exp(),
        x: v[1],
        y: v[2],
    };
    match log_likelihood(cfg, &theta, records) {
        Ok(ll) => -ll,
        Err(_) => f64::INFINITY,
    }
}

fn centroid(points: impl Iterator<Item = Point>) -> Point {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        sx += p.x;
        sy += p.y;
        n += 1;
    }
    Point::new(sx / n as f64, sy / n as f64)
}

/// Power whose expected detection count, for a target at `at`, equals the
/// observed count (bisection in `ln P`).
pub fn count_matched_power(
    cfg: &DetectorConfig,
    records: &[DecisionRecord],
    at: Point,
) -> Result<f64, ModelError> {
    let observed = records.iter().filter(|r| r.detected).count() as f64;
    let expected = |ln_p: f64| -> Result<f64, ModelError> {
        let mut s = 0.0;
        for rec in records {
            let r = rec.location().distance(&at);
            if r > 0.0 {
                s += detection_parts(cfg, ln_p.exp(), r)?.q;
            } else {
                s += 1.0;
            }
        }
        Ok(s)
    };
    let (mut lo, mut hi) = ((1e-8f64).ln(), (1e8f64).ln());
    if expected(lo)? >= observed {
        return Ok(lo.exp());
    }
    if expected(hi)? <= observed {
        return Ok(hi.exp());
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if expected(mid)? < observed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Maximum-likelihood estimate of `(P, x_T, y_T)` from binary decisions.
pub fn ml_estimate(
    cfg: &DetectorConfig,
    records: &[DecisionRecord],
    init: &TargetParams,
) -> Result<MlEstimate, MonteCarloError> {
    ml_estimate_with(cfg, records, init, &MlOptions::default())
}

/// [`ml_estimate`] with explicit options.
///
/// The search runs over `(ln P, x, y)`. A grid around the centroid of the
/// detecting sensors (with powers around the count-matched value) and `init`
/// itself are scored first; the best of them seeds the simplex, which is then
/// restarted once from its own optimum. The result is never worse than `init`.
pub fn ml_estimate_with(
    cfg: &DetectorConfig,
    records: &[DecisionRecord],
    init: &TargetParams,
    opts: &MlOptions,
) -> Result<MlEstimate, MonteCarloError> {
    let n_det = records.iter().filter(|r| r.detected).count();
    if n_det == 0 {
        return Err(MonteCarloError::NoDetections);
    }
    let nll = |v: &[f64]| neg_log_lik(cfg, records, v);
    let center = centroid(records.iter().filter(|r| r.detected).map(|r| r.location()));
    let spacing = opts.grid_spacing.unwrap_or_else(|| {
        let all = centroid(records.iter().map(|r| r.location()));
        let extent = records
            .iter()
            .map(|r| r.location().distance(&all))
            .fold(0.0, f64::max);
        if extent > 0.0 && records.len() > 1 {
            0.5 / (records.len() as f64 / (PI * extent * extent)).sqrt()
        } else {
            1.0
        }
    });
    let p0 = count_matched_power(cfg, records, center)?;

    let mut best = vec![init.power.ln(), init.x, init.y];
    let mut best_f = nll(&best);
    let h = opts.grid_half_width as i64;
    for &factor in &opts.power_factors {
        let lp = (p0 * factor).ln();
        for i in -h..=h {
            for j in -h..=h {
                let v = [
                    lp,
                    center.x + i as f64 * spacing,
                    center.y + j as f64 * spacing,
                ];
                let f = nll(&v);
                if f < best_f {
                    best_f = f;
                    best = v.to_vec();
                }
            }
        }
    }

    let first = nelder_mead(
        nll,
        &best,
        &[0.5, 0.5 * spacing, 0.5 * spacing],
        &opts.simplex,
    );
    let restart = nelder_mead(
        nll,
        &first.x,
        &[0.1, 0.1 * spacing, 0.1 * spacing],
        &opts.simplex,
    );
    let (x, f) = if restart.f <= first.f {
        (restart.x, restart.f)
    } else {
        (first.x, first.f)
    };
    Ok(MlEstimate {
        theta: TargetParams {
            power: x[0].exp(),
            x: x[1],
            y: x[2],
        },
        neg_log_lik: f,
        converged: first.converged && restart.converged,
        iterations: first.iterations + restart.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialOutcome {
    Converged,
    /// The optimizer stopped at its iteration cap.
    IterationCap,
    NoDetections,
    /// A numerical error aborted the trial.
    Failed,
}

impl TrialOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialOutcome::Converged => "converged",
            TrialOutcome::IterationCap => "iteration-cap",
            TrialOutcome::NoDetections => "no-detections",
            TrialOutcome::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    /// NaN components when no estimate was produced.
    pub theta_hat: TargetParams,
    pub n_sensors: usize,
    pub n_detections: usize,
    pub converged: bool,
    pub neg_log_lik: f64,
    pub outcome: TrialOutcome,
}

/// One complete trial: field, decisions and ML estimate, with the truth as
/// the initial point.
pub fn run_trial(cfg: &SimConfig, trial: u64) -> TrialResult {
    let sensors = sample_field(cfg, trial);
    let failed = |n_det: usize, outcome: TrialOutcome| TrialResult {
        trial,
        theta_hat: TargetParams {
            power: f64::NAN,
            x: f64::NAN,
            y: f64::NAN,
        },
        n_sensors: sensors.len(),
        n_detections: n_det,
        converged: false,
        neg_log_lik: f64::NAN,
        outcome,
    };
    let records = match sample_decisions(cfg, &sensors, trial) {
        Ok(r) => r,
        Err(_) => return failed(0, TrialOutcome::Failed),
    };
    let n_det = records.iter().filter(|r| r.detected).count();
    match ml_estimate(&cfg.detector, &records, &cfg.truth) {
        Ok(est) => TrialResult {
            trial,
            theta_hat: est.theta,
            n_sensors: sensors.len(),
            n_detections: n_det,
            converged: est.converged,
            neg_log_lik: est.neg_log_lik,
            outcome: if est.converged {
                TrialOutcome::Converged
            } else {
                TrialOutcome::IterationCap
            },
        },
        Err(MonteCarloError::NoDetections) => failed(n_det, TrialOutcome::NoDetections),
        Err(_) => failed(n_det, TrialOutcome::Failed),
    }
}

/// All trials of a campaign, in trial order.
pub fn run_campaign(cfg: &SimConfig) -> Vec<TrialResult> {
    let trials = 0..cfg.trials as u64;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        trials.into_par_iter().map(|i| run_trial(cfg, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        trials.map(|i| run_trial(cfg, i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub mse_p: f64,
    pub mse_x: f64,
    pub mse_y: f64,
    /// Mean error of `(P, x, y)`.
    pub bias: [f64; 3],
    pub n_used: usize,
    pub n_failed: usize,
}

/// Sample MSE and bias over converged trials; every other trial is counted
/// in `n_failed`.
pub fn mse_report(
    results: &[TrialResult],
    truth: &TargetParams,
) -> Result<MseReport, MonteCarloError> {
    let used: Vec<&TrialResult> = results.iter().filter(|r| r.converged).collect();
    if used.is_empty() {
        return Err(MonteCarloError::AllTrialsFailed(results.len()));
    }
    let n = used.len() as f64;
    let mut sq = [0.0; 3];
    let mut bias = [0.0; 3];
    for r in &used {
        let e = [
            r.theta_hat.power - truth.power,
            r.theta_hat.x - truth.x,
            r.theta_hat.y - truth.y,
        ];
        for k in 0..3 {
            sq[k] += e[k] * e[k];
            bias[k] += e[k];
        }
    }
    Ok(MseReport {
        mse_p: sq[0] / n,
        mse_x: sq[1] / n,
        mse_y: sq[2] / n,
        bias: bias.map(|b| b / n),
        n_used: used.len(),
        n_failed: results.len() - used.len(),
    })
}

/// Distance from `target` to the closest sensor.
pub fn nearest_distance(sensors: &[Point], target: Point) -> Option<f64> {
    sensors
        .iter()
        .map(|s| s.distance(&target))
        .min_by(f64::total_cmp)
}

/// Nearest-sensor distance from the origin for `fields` independent Poisson
/// fields of density `rho` on a disk of radius `radius`. Empty fields are
/// skipped.
pub fn nearest_distance_samples(rho: f64, radius: f64, fields: usize, seed: u64) -> Vec<f64> {
    let one = |i: u64| {
        let mut rng = stream(seed, i, STREAM_FIELD);
        let sensors = scatter_disk(&mut rng, rho, radius, Point::new(0.0, 0.0));
        nearest_distance(&sensors, Point::new(0.0, 0.0))
    };
    let idx = 0..fields as u64;
    #[cfg(feature = "parallel")]
    let out: Vec<Option<f64>> = {
        use rayon::prelude::*;
        idx.into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Option<f64>> = idx.map(one).collect();
    out.into_iter().flatten().collect()
}

/// CDF of the nearest-sensor distance in an unbounded Poisson field,
/// `1 - exp(-pi rho r^2)` (Rayleigh with scale `1 / sqrt(2 pi rho)`).
pub fn rayleigh_cdf(r: f64, rho: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        -(-PI * rho * r * r).exp_m1()
    }
}

/// Kolmogorov-Smirnov sup-distance between the empirical CDF of `samples`
/// and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Detection counts in one distance bin, with the model expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub samples: usize,
    pub detections: usize,
    /// Sum of `P_D` over the samples in the bin.
    pub expected: f64,
    /// Sum of `P_D (1 - P_D)`.
    pub variance: f64,
}

impl CalibrationBin {
    pub fn frequency(&self) -> f64 {
        self.detections as f64 / self.samples as f64
    }

    pub fn expected_frequency(&self) -> f64 {
        self.expected / self.samples as f64
    }

    pub fn standard_error(&self) -> f64 {
        self.variance.sqrt() / self.samples as f64
    }

    /// Deviation of the observed frequency in standard errors.
    pub fn z_score(&self) -> f64 {
        let se = self.standard_error();
        let d = self.frequency() - self.expected_frequency();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Pools the sampled decisions of the first `trials` trials of `cfg` into
/// distance bins of width `bin_width`.
pub fn calibration_bins(
    cfg: &SimConfig,
    trials: usize,
    bin_width: f64,
) -> Result<Vec<CalibrationBin>, ModelError> {
    let n_bins = (cfg.region_radius / bin_width).ceil() as usize;
    let mut bins: Vec<CalibrationBin> = (0..n_bins)
        .map(|i| CalibrationBin {
            r_lo: i as f64 * bin_width,
            r_hi: (i + 1) as f64 * bin_width,
            samples: 0,
            detections: 0,
            expected: 0.0,
            variance: 0.0,
        })
        .collect();
    let target = cfg.truth.location();
    for trial in 0..trials as u64 {
        let sensors = sample_field(cfg, trial);
        let records = sample_decisions(cfg, &sensors, trial)?;
        for rec in &records {
            let r = rec.location().distance(&target);
            let p = detection_probability(&cfg.detector, cfg.truth.power, r)?;
            let b = &mut bins[((r / bin_width) as usize).min(n_bins - 1)];
            b.samples += 1;
            b.detections += rec.detected as usize;
            b.expected += p;
            b.variance += p * (1.0 - p);
        }
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sim(tau: f64, alpha: f64, trials: usize) -> SimConfig {
        SimConfig::new(
            FieldConfig::new(0.05).unwrap(),
            DetectorConfig::new(tau, 0.25, 1.0, alpha).unwrap(),
            TargetParams::new(2.0, 0.0, 0.0).unwrap(),
            trials,
            7,
        )
        .unwrap()
    }

    #[test]
    fn region_radius_meets_floor_gap() {
        let cfg = sim(0.38, 4.0, 1);
        let r = cfg.region_radius;
        let floor = cfg.detector.false_alarm();
        let pd = |r: f64| detection_probability(&cfg.detector, 2.0, r).unwrap();
        assert!(pd(r) - floor < 1e-6);
        assert!(pd(0.999 * r) - floor >= 1e-6);
        assert!(r > 30.0 && r < 40.0, "{r}");
    }

    #[test]
    fn fields_are_deterministic_and_inside_the_disk() {
        let cfg = sim(0.38, 4.0, 1);
        let a = sample_field(&cfg, 3);
        assert_eq!(a, sample_field(&cfg, 3));
        assert_ne!(a, sample_field(&cfg, 4));
        assert!(a
            .iter()
            .all(|p| p.distance(&Point::new(0.0, 0.0)) <= cfg.region_radius));
        let d = sample_decisions(&cfg, &a, 3).unwrap();
        assert_eq!(d, sample_decisions(&cfg, &a, 3).unwrap());
        let other_seed = SimConfig {
            master_seed: 8,
            ..cfg
        };
        assert_ne!(a, sample_field(&other_seed, 3));
    }

    #[test]
    fn threshold_limits_of_decisions() {
        let base = sim(0.4, 2.0, 1);
        let low = SimConfig {
            detector: DetectorConfig::new(1e-300, 0.25, 1.0, 2.0).unwrap(),
            region_radius: 20.0,
            ..base
        };
        assert!(default_region_radius(&low.detector, 2.0).is_err());
        let sensors = sample_field(&low, 0);
        assert!(!sensors.is_empty());
        assert!(sample_decisions(&low, &sensors, 0)
            .unwrap()
            .iter()
            .all(|d| d.detected));
        let high = SimConfig {
            detector: DetectorConfig::new(50.0, 0.25, 1.0, 2.0).unwrap(),
            ..low
        };
        assert!(sample_decisions(&high, &sensors, 0)
            .unwrap()
            .iter()
            .all(|d| !d.detected));
    }

    #[test]
    fn mse_report_basics() {
        let truth = TargetParams::new(2.0, 0.0, 0.0).unwrap();
        let ok = |x: f64| TrialResult {
            trial: 0,
            theta_hat: TargetParams {
                power: 2.0,
                x,
                y: 0.0,
            },
            n_sensors: 10,
            n_detections: 2,
            converged: true,
            neg_log_lik: 1.0,
            outcome: TrialOutcome::Converged,
        };
        let r = mse_report(&[ok(0.0), ok(0.0)], &truth).unwrap();
        assert_eq!((r.mse_p, r.mse_x, r.mse_y), (0.0, 0.0, 0.0));
        let r = mse_report(&[ok(1.0)], &truth).unwrap();
        assert_eq!(r.mse_x, 1.0);
        assert_eq!(r.bias[1], 1.0);
        let bad = TrialResult {
            converged: false,
            outcome: TrialOutcome::NoDetections,
            ..ok(5.0)
        };
        let r = mse_report(&[ok(1.0), bad], &truth).unwrap();
        assert_eq!((r.n_used, r.n_failed, r.mse_x), (1, 1, 1.0));
        assert!(matches!(
            mse_report(&[bad], &truth),
            Err(MonteCarloError::AllTrialsFailed(1))
        ));
    }

    #[test]
    fn estimator_moves_toward_detections() {
        let cfg = DetectorConfig::new(0.4, 0.25, 1.0, 2.0).unwrap();
        let mut recs = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                let (x, y) = (i as f64 * 2.0 + 0.3, j as f64 * 2.0 + 0.1);
                recs.push(DecisionRecord::new(x, y, (x - 0.3).hypot(y - 0.1) < 1.0));
            }
        }
        let init = TargetParams::new(2.0, 8.0, -8.0).unwrap();
        let est = ml_estimate(&cfg, &recs, &init).unwrap();
        let c = Point::new(0.3, 0.1);
        assert!(est.theta.location().distance(&c) < init.location().distance(&c));
        let init_nll = -log_likelihood(&cfg, &init, &recs).unwrap();
        assert!(est.neg_log_lik <= init_nll);
        let none: Vec<_> = recs
            .iter()
            .map(|r| DecisionRecord {
                detected: false,
                ..*r
            })
            .collect();
        assert!(matches!(
            ml_estimate(&cfg, &none, &init),
            Err(MonteCarloError::NoDetections)
        ));
    }

    #[test]
    fn count_matched_power_inverts_expected_count() {
        let cfg = DetectorConfig::new(0.4, 0.25, 1.0, 2.0).unwrap();
        let recs: Vec<_> = (1..40)
            .map(|i| DecisionRecord::new(i as f64 * 0.5, 0.0, i % 3 == 0))
            .collect();
        let p = count_matched_power(&cfg, &recs, Point::new(0.0, 0.0)).unwrap();
        let expected: f64 = recs
            .iter()
            .map(|r| detection_probability(&cfg, p, r.x).unwrap())
            .sum();
        assert_relative_eq!(expected, 13.0, max_relative = 1e-9);
    }

    #[test]
    fn ks_distance_and_rayleigh() {
        assert_eq!(rayleigh_cdf(0.0, 0.05), 0.0);
        assert_relative_eq!(
            rayleigh_cdf(1.0, 1.0 / PI),
            1.0 - (-1.0f64).exp(),
            max_relative = 1e-15
        );
        // quantiles of the exact distribution are within 1/n of it
        let n = 1000;
        let rho = 0.05;
        let q: Vec<f64> = (0..n)
            .map(|i| ((-(1.0 - (i as f64 + 0.5) / n as f64).ln()) / (PI * rho)).sqrt())
            .collect();
        assert!(ks_distance(&q, |r| rayleigh_cdf(r, rho)) <= 0.5 / n as f64 + 1e-12);
    }
}
