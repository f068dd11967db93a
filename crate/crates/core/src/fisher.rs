//! Fisher information for the emitter parameters `(P, x_T, y_T)`.
//!
//! [`per_sensor_fim`] is the contribution of one sensor. The expected
//! information of a Poisson field of density `rho` is the density-weighted
//! integral of that contribution over the plane outside the mean
//! nearest-sensor distance `r_breve = 1 / sqrt(4 rho)`; the angular part is
//! done analytically, which makes the matrix diagonal and leaves two
//! one-dimensional integrals in the signal variable `x`:
//!
//! ```text
//! F11 = 2 pi^2 t^2 rho T^(2/a) P^(2/a-2) / (a sigma^(4/a))
//!         * int_0^x_breve x^(1-4/a) e^(-x^2-t^2) I1(tx)^2 / (Q (1-Q)) dx
//! F22 = F33 = pi^2 rho a t^2 int_0^x_breve x e^(-x^2-t^2) I1(tx)^2 / (Q (1-Q)) dx
//! ```
//!
//! Both carry the normalisation `2 pi rho` per unit of `r dr dpsi`, which
//! [`expected_fim_2d`] and [`f22_r_domain`] reproduce.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::detection::{
    derivative_factor, detection_parts, detection_probability_derivatives, DetectorConfig,
    ModelError, Point, TargetParams,
};
use crate::quadrature::{integrate, QuadratureError, QuadratureSpec};
use crate::specfun::{bessel_i_scaled, marcum_q_parts, SpecFunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FisherError {
    #[error("invalid field configuration: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

impl From<SpecFunError> for FisherError {
    fn from(e: SpecFunError) -> Self {
        FisherError::Model(ModelError::SpecFun(e))
    }
}

/// Sensor density and the lower radial cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub rho: f64,
    /// Replaces `1 / sqrt(4 rho)` as the cutoff; for sensitivity studies only.
    pub r_breve_override: Option<f64>,
}

impl FieldConfig {
    pub fn new(rho: f64) -> Result<Self, FisherError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(FisherError::InvalidField(format!(
                "rho must be finite and > 0, got {rho}"
            )));
        }
        Ok(Self {
            rho,
            r_breve_override: None,
        })
    }

    pub fn with_r_breve(mut self, r: f64) -> Result<Self, FisherError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(FisherError::InvalidField(format!(
                "r_breve must be finite and > 0, got {r}"
            )));
        }
        self.r_breve_override = Some(r);
        Ok(self)
    }

    pub fn r_breve(&self) -> f64 {
        self.r_breve_override.unwrap_or_else(|| rmin_expected(self))
    }
}

/// Mean distance from the target to its nearest sensor, `1 / sqrt(4 rho)`.
pub fn rmin_expected(field: &FieldConfig) -> f64 {
    1.0 / (4.0 * field.rho).sqrt()
}

/// Upper limit of the `x` integrals, the signal variable at `r_breve`.
pub fn x_breve(cfg: &DetectorConfig, power: f64, field: &FieldConfig) -> f64 {
    cfg.x_at(power, field.r_breve())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    ClosedForm { m: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Quadrature => f.write_str("quadrature"),
            Method::ClosedForm { .. } => f.write_str("closed-form"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub f11: f64,
    pub f22: f64,
    pub f33: f64,
    pub offdiag_max_abs: f64,
    pub crb_p: f64,
    pub crb_x: f64,
    pub crb_y: f64,
    pub method: Method,
}

impl FisherResult {
    /// Diagonal result with `F33 = F22` and exact-zero off-diagonals.
    pub fn diagonal(f11: f64, f22: f64, method: Method) -> Self {
        Self {
            f11,
            f22,
            f33: f22,
            offdiag_max_abs: 0.0,
            crb_p: 1.0 / f11,
            crb_x: 1.0 / f22,
            crb_y: 1.0 / f22,
            method,
        }
    }
}

/// Fisher information of a single sensor at `sensor`, as a symmetric 3x3
/// matrix over `(P, x_T, y_T)`.
pub fn per_sensor_fim(
    cfg: &DetectorConfig,
    theta: &TargetParams,
    sensor: Point,
) -> Result<[[f64; 3]; 3], FisherError> {
    let dx = sensor.x - theta.x;
    let dy = sensor.y - theta.y;
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(ModelError::SensorAtTarget {
            x: sensor.x,
            y: sensor.y,
        }
        .into());
    }
    let parts = detection_parts(cfg, theta.power, r)?;
    let (d_r, d_p) = detection_probability_derivatives(cfg, theta.power, r)?;
    let (c, s) = (dx / r, dy / r);
    // 1 / (Q (1 - Q)) applied as a log to survive deep tails
    let w = |a: f64, b: f64| {
        let prod = a * b;
        if prod == 0.0 {
            return 0.0;
        }
        prod.signum() * (prod.abs().ln() - parts.ln_q - parts.ln_qc).exp()
    };
    // moving the target by +dx changes r by -cos(psi) dx
    let g = [d_p, -d_r * c, -d_r * s];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            out[i][j] = w(g[i], g[j]);
            out[j][i] = out[i][j];
        }
    }
    Ok(out)
}

// ln[e^{-x^2-t^2} I1(tx)^2 / (Q(1-Q))], -inf at x = 0.
fn ln_core(x: f64, t: f64) -> Result<f64, SpecFunError> {
    let z = x * t;
    if z == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let q = marcum_q_parts(x, t)?;
    Ok(2.0 * bessel_i_scaled(1, z)?.ln() - (x - t) * (x - t) - q.ln_q - q.ln_qc)
}

fn integrate_x(
    cfg: &DetectorConfig,
    upper: f64,
    power_of_x: f64,
    quad: &QuadratureSpec,
) -> Result<f64, FisherError> {
    let t = cfg.t();
    let mut failure = None;
    let res = integrate(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            match ln_core(x, t) {
                Ok(l) => (l + power_of_x * x.ln()).exp(),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        upper,
        quad,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(res?.value)
}

/// Expected `F11` by adaptive quadrature in the `x` domain.
pub fn expected_f11(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<f64, FisherError> {
    cfg.validate()?;
    let (a, t) = (cfg.alpha, cfg.t());
    let pre =
        2.0 * PI * PI * t * t * field.rho * cfg.t_obs.powf(2.0 / a) * power.powf(2.0 / a - 2.0)
            / (a * cfg.sigma2.powf(2.0 / a));
    let upper = x_breve(cfg, power, field);
    Ok(pre * integrate_x(cfg, upper, 1.0 - 4.0 / a, quad)?)
}

/// Expected `F22` (= `F33`) by adaptive quadrature in the `x` domain.
pub fn expected_f22(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<f64, FisherError> {
    cfg.validate()?;
    let t = cfg.t();
    let pre = PI * PI * field.rho * cfg.alpha * t * t;
    let upper = x_breve(cfg, power, field);
    Ok(pre * integrate_x(cfg, upper, 1.0, quad)?)
}

/// Expected Fisher matrix by one-dimensional quadrature; off-diagonals are
/// zero by the angular symmetry.
pub fn expected_fim_quadrature(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<FisherResult, FisherError> {
    let f11 = expected_f11(cfg, power, field, quad)?;
    let f22 = expected_f22(cfg, power, field, quad)?;
    Ok(FisherResult::diagonal(f11, f22, Method::Quadrature))
}

/// `F22` integrated over distance instead of `x`:
/// `2 pi^2 rho int_{r_breve}^inf (dP_D/dr)^2 / (P_D (1 - P_D)) r dr`.
pub fn f22_r_domain(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<f64, FisherError> {
    cfg.validate()?;
    let rb = field.r_breve();
    let t = cfg.t();
    let mut failure = None;
    // r = r_breve / u maps [r_breve, inf) onto (0, 1]
    let res = integrate(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let r = rb / u;
            let x = cfg.x_at(power, r);
            let eval = || -> Result<f64, SpecFunError> {
                let d_r = cfg.alpha * derivative_factor(x, t)? / r;
                if d_r == 0.0 {
                    return Ok(0.0);
                }
                let q = marcum_q_parts(x, t)?;
                Ok((2.0 * d_r.ln() - q.ln_q - q.ln_qc).exp() * r * rb / (u * u))
            };
            match eval() {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1.0,
        quad,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(2.0 * PI * PI * field.rho * res?.value)
}

/// Full expected Fisher matrix by nested two-dimensional quadrature of
/// [`per_sensor_fim`] over `r >= r_breve` and `psi` in `[0, 2 pi)`.
///
/// Uses the same normalisation as [`expected_fim_quadrature`]. Slow; meant
/// for cross-checking the diagonal structure.
pub fn expected_fim_2d(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    quad: &QuadratureSpec,
) -> Result<[[f64; 3]; 3], FisherError> {
    cfg.validate()?;
    let rb = field.r_breve();
    let theta = TargetParams {
        power,
        x: 0.0,
        y: 0.0,
    };
    let t = cfg.t();
    let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let mut out = [[0.0; 3]; 3];
    let mut diag_scale: f64 = 0.0;
    for &(i, j) in &pairs {
        let mut failure: Option<FisherError> = None;
        let outer_spec = if i == j {
            *quad
        } else {
            // off-diagonals integrate to zero; ask only for an absolute error
            QuadratureSpec {
                abs_tol: quad.rel_tol * 1e-2 * diag_scale,
                ..*quad
            }
        };
        let res = integrate(
            |u| {
                if u <= 0.0 {
                    return 0.0;
                }
                let r = rb / u;
                let jac = r * rb / (u * u);
                // magnitude of the radial weight, used to scale the inner tolerance
                let radial = match (|| -> Result<f64, FisherError> {
                    let (d_r, d_p) = detection_probability_derivatives(cfg, power, r)?;
                    let q = marcum_q_parts(cfg.x_at(power, r), t)?;
                    let m = d_r.abs().max(d_p.abs());
                    if m == 0.0 {
                        return Ok(0.0);
                    }
                    Ok((2.0 * m.ln() - q.ln_q - q.ln_qc).exp())
                })() {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return f64::NAN;
                    }
                };
                if radial == 0.0 {
                    return 0.0;
                }
                let inner_spec = QuadratureSpec {
                    abs_tol: radial * 2.0 * PI * quad.rel_tol * 1e-3,
                    ..*quad
                };
                let inner = integrate(
                    |psi| {
                        let sensor = Point::new(r * psi.cos(), r * psi.sin());
                        match per_sensor_fim(cfg, &theta, sensor) {
                            Ok(m) => m[i][j],
                            Err(_) => f64::NAN,
                        }
                    },
                    0.0,
                    2.0 * PI,
                    &inner_spec,
                );
                match inner {
                    Ok(v) => v.value * jac,
                    Err(e) => {
                        failure.get_or_insert(e.into());
                        f64::NAN
                    }
                }
            },
            0.0,
            1.0,
            &outer_spec,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let v = 2.0 * PI * field.rho * res?.value;
        out[i][j] = v;
        out[j][i] = v;
        if i == j {
            diag_scale = diag_scale.max(v.abs() / (2.0 * PI * field.rho));
        }
    }
    Ok(out)
}

/// Evenly spaced `tau` grid from `start` to `stop` inclusive.
///
/// The step is adjusted to the nearest whole number of intervals; `start ==
/// stop` gives a single point.
pub fn tau_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if start == stop {
        return vec![start];
    }
    let n = ((stop - start) / step).round().max(1.0) as usize;
    (0..=n)
        .map(|i| start + (stop - start) * i as f64 / n as f64)
        .collect()
}
