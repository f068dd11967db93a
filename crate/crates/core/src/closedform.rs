//! Closed-form approximation of the expected Fisher information.
//!
//! `f(x) = -ln(Q(x,t) (1 - Q(x,t)))` is replaced by its second-order Taylor
//! polynomial `f0 + f1 x + f2 x^2` around `x_breve`, and `I1(tx)^2` by its
//! first `m + 1` series terms. With `y = t x` the exponent completes to a
//! square,
//!
//! ```text
//! e^(-x^2 - t^2) / (Q (1 - Q)) ~ C exp(-(A y + B)^2),
//! A = sqrt(1 - f2) / t,  B = -f1 / (2 sqrt(1 - f2)),  C = exp(f1^2 / (4 (1 - f2)) + f0 - t^2),
//! ```
//!
//! and every remaining integral is a partial moment of a Gaussian, i.e. a
//! difference of incomplete gamma functions.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::detection::{DetectorConfig, ModelError};
use crate::fisher::{x_breve, FieldConfig, FisherResult, Method};
use crate::quadrature::gauss_legendre;
use crate::specfun::{
    bessel_i_scaled, binomial, i1_squared_taylor_coeff, lower_gamma, marcum_q_parts, upper_gamma,
    SpecFunError,
};

/// Largest series order accepted by the closed forms.
pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("quadratic model is not integrable: f2 = {f2} >= 1")]
    ModelInvalid { f2: f64 },
    #[error("closed-form F11 exists only for alpha = 2 or 4, got {0}")]
    UnsupportedAlpha(f64),
    #[error("series order {m} exceeds the supported maximum {MAX_ORDER}")]
    OrderTooLarge { m: usize },
    #[error("Q(x_breve, t) = {q} leaves no room for ln(Q (1 - Q))")]
    Degenerate { q: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// How `int_B^s (s' - B)^n e^(-s'^2) ds'` is turned into gamma functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaSumMode {
    /// Split at `s = 0` when `B < 0`, so the result is exact for any sign.
    #[default]
    Split,
    /// Upper-gamma differences `Gamma(a, B^2) - Gamma(a, s^2)` throughout,
    /// which silently assumes `B >= 0`.
    Unsplit,
}

/// Quadratic model of `f` around `x_breve` and the derived Gaussian constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorModel {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x_breve: f64,
    pub t: f64,
    pub s_breve: f64,
}

/// `(f, f', f'')` of `f(x) = -ln(Q(x,t) (1 - Q(x,t)))` with respect to `x`.
pub fn log_inverse_variance(x: f64, t: f64) -> Result<[f64; 3], ClosedFormError> {
    let q = marcum_q_parts(x, t)?;
    if !(q.ln_q.is_finite() && q.ln_qc.is_finite()) {
        return Err(ClosedFormError::Degenerate { q: q.q });
    }
    let f = -q.ln_q - q.ln_qc;
    // Q' and Q'' share exp(-(x-t)^2/2); dividing in logs keeps Q'/(1-Q) finite
    // where both underflow.
    let gap = -0.5 * (x - t) * (x - t);
    let z = x * t;
    let (i0, i1, i2) = (
        bessel_i_scaled(0, z)?,
        bessel_i_scaled(1, z)?,
        bessel_i_scaled(2, z)?,
    );
    let ratio = |ln_den: f64, amp: f64| {
        if amp == 0.0 {
            0.0
        } else {
            amp.signum() * (amp.abs().ln() + gap - ln_den).exp()
        }
    };
    let d1_amp = t * i1;
    let d2_amp = 0.5 * t * t * (i0 + i2) - z * i1;
    let (d1_q, d1_qc) = (ratio(q.ln_q, d1_amp), ratio(q.ln_qc, d1_amp));
    let (d2_q, d2_qc) = (ratio(q.ln_q, d2_amp), ratio(q.ln_qc, d2_amp));
    let fp = -d1_q + d1_qc;
    let fpp = d1_q * d1_q - d2_q + d1_qc * d1_qc + d2_qc;
    Ok([f, fp, fpp])
}

/// Expands `f` around `x_breve = sqrt(T P / (sigma2 r_breve^alpha))`.
pub fn build_taylor_model(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
) -> Result<TaylorModel, ClosedFormError> {
    cfg.validate()?;
    let xb = x_breve(cfg, power, field);
    taylor_model_at(xb, cfg.t())
}

/// [`build_taylor_model`] at an explicit expansion point.
pub fn taylor_model_at(xb: f64, t: f64) -> Result<TaylorModel, ClosedFormError> {
    TaylorModel::from_derivatives(xb, t, log_inverse_variance(xb, t)?)
}

impl TaylorModel {
    /// Builds the model from `(f, f', f'')` at the expansion point `xb`.
    pub fn from_derivatives(
        xb: f64,
        t: f64,
        [f, fp, fpp]: [f64; 3],
    ) -> Result<Self, ClosedFormError> {
        let f0 = f - xb * fp + 0.5 * xb * xb * fpp;
        let f1 = fp - xb * fpp;
        let f2 = 0.5 * fpp;
        if f2 >= 1.0 {
            return Err(ClosedFormError::ModelInvalid { f2 });
        }
        let root = (1.0 - f2).sqrt();
        let a = root / t;
        let b = -f1 / (2.0 * root);
        let c = (f1 * f1 / (4.0 * (1.0 - f2)) + f0 - t * t).exp();
        Ok(TaylorModel {
            f0,
            f1,
            f2,
            a,
            b,
            c,
            x_breve: xb,
            t,
            s_breve: a * xb * t + b,
        })
    }
}

/// `sum_{l=0}^{n} C(n,l) (-B)^l D_l`, with `D_l` the gamma difference of
/// order `(n - l + 1) / 2` between `B^2` and `s^2`.
///
/// For `B >= 0` (or [`GammaSumMode::Unsplit`]) this is
/// `D_l = Gamma(a, B^2) - Gamma(a, s^2)` and the sum equals
/// `2 int_B^s (u - B)^n e^(-u^2) du`; [`GammaSumMode::Split`] keeps that
/// identity for negative `B`.
pub fn gamma_sum(n: usize, b: f64, s: f64, mode: GammaSumMode) -> Result<f64, SpecFunError> {
    let split = mode == GammaSumMode::Split && b < 0.0;
    let mut sum = 0.0;
    let mut neg_b_pow = 1.0;
    for l in 0..=n {
        let j = n - l;
        let order = 0.5 * (j as f64 + 1.0);
        let d = if split {
            let sign = |v: f64| {
                if v < 0.0 && j.is_multiple_of(2) {
                    -1.0
                } else {
                    1.0
                }
            };
            sign(s) * lower_gamma(order, s * s)? - sign(b) * lower_gamma(order, b * b)?
        } else if b * b < order && s * s < order {
            // both points in the series region: difference of lower gammas
            lower_gamma(order, s * s)? - lower_gamma(order, b * b)?
        } else {
            upper_gamma(order, b * b)? - upper_gamma(order, s * s)?
        };
        sum += binomial(n as u64, l as u64) * neg_b_pow * d;
        neg_b_pow *= -b;
    }
    Ok(sum)
}

// C(2k+2, k) / [(2A)^{k+1} (k+1)!]^2 = coeff_k / A^{2k+2}
fn series_weight(k: usize, a: f64) -> Result<f64, SpecFunError> {
    Ok(i1_squared_taylor_coeff(k)? / a.powi(2 * k as i32 + 2))
}

fn check_order(m: usize) -> Result<(), ClosedFormError> {
    if m > MAX_ORDER {
        return Err(ClosedFormError::OrderTooLarge { m });
    }
    Ok(())
}

/// Default series order: 3 for `alpha = 2`, 1 for `alpha = 4`.
pub fn default_order(alpha: f64) -> usize {
    if alpha == 4.0 {
        1
    } else {
        3
    }
}

/// Closed-form `F11` for `alpha = 2` or `alpha = 4`.
pub fn f11_closed_form(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    m: usize,
) -> Result<f64, ClosedFormError> {
    f11_closed_form_with(cfg, power, field, m, GammaSumMode::default())
}

pub fn f11_closed_form_with(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    m: usize,
    mode: GammaSumMode,
) -> Result<f64, ClosedFormError> {
    check_order(m)?;
    let two = cfg.alpha == 2.0;
    if !two && cfg.alpha != 4.0 {
        return Err(ClosedFormError::UnsupportedAlpha(cfg.alpha));
    }
    let tm = build_taylor_model(cfg, power, field)?;
    let (t, sigma) = (tm.t, cfg.sigma2.sqrt());
    let pre = if two {
        tm.c * PI * PI * field.rho * cfg.t_obs * t * t / (2.0 * power * cfg.sigma2)
    } else {
        tm.c * PI * PI * field.rho * cfg.t_obs.sqrt() * t / (4.0 * tm.a * power.powf(1.5) * sigma)
    };
    let mut sum = 0.0;
    for k in 0..=m {
        let n = if two { 2 * k + 1 } else { 2 * k + 2 };
        sum += series_weight(k, tm.a)? * gamma_sum(n, tm.b, tm.s_breve, mode)?;
    }
    Ok(pre * sum)
}

/// Closed-form `F22` (= `F33`); the pathloss exponent only enters as a factor.
pub fn f22_closed_form(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    m: usize,
) -> Result<f64, ClosedFormError> {
    f22_closed_form_with(cfg, power, field, m, GammaSumMode::default())
}

pub fn f22_closed_form_with(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    m: usize,
    mode: GammaSumMode,
) -> Result<f64, ClosedFormError> {
    check_order(m)?;
    let tm = build_taylor_model(cfg, power, field)?;
    let pre = tm.c * PI * PI * field.rho * cfg.alpha / (2.0 * tm.a * tm.a);
    let mut sum = 0.0;
    for k in 0..=m {
        sum += series_weight(k, tm.a)? * gamma_sum(2 * k + 3, tm.b, tm.s_breve, mode)?;
    }
    Ok(pre * sum)
}

/// Warnings attached to a closed-form evaluation; the values are never clamped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quality {
    /// `x_breve t > 2 (m + 2)`: the truncated `I1^2` series is used far out.
    pub series_radius_exceeded: bool,
    pub negative: bool,
    /// More than 10% away from a 16-point Gauss-Legendre estimate of the
    /// exact integral.
    pub deviates_from_estimate: bool,
    /// Largest relative deviation from the estimate over `F11` and `F22`.
    pub deviation: f64,
}

impl Quality {
    pub fn is_clean(&self) -> bool {
        !(self.series_radius_exceeded || self.negative || self.deviates_from_estimate)
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut tags = Vec::new();
        if self.series_radius_exceeded {
            tags.push("series-radius");
        }
        if self.negative {
            tags.push("negative");
        }
        if self.deviates_from_estimate {
            tags.push("deviation");
        }
        if tags.is_empty() {
            f.write_str("ok")
        } else {
            f.write_str(&tags.join("|"))
        }
    }
}

// 16-point Gauss-Legendre of the exact x-domain integrals: (F11, F22).
fn cheap_estimate(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
) -> Result<(f64, f64), ClosedFormError> {
    let (a, t) = (cfg.alpha, cfg.t());
    let xb = x_breve(cfg, power, field);
    let (nodes, weights) = gauss_legendre(16);
    let (mut s11, mut s22) = (0.0, 0.0);
    for (u, w) in nodes.iter().zip(&weights) {
        let x = 0.5 * xb * (u + 1.0);
        let q = marcum_q_parts(x, t)?;
        let core =
            (2.0 * bessel_i_scaled(1, x * t)?.ln() - (x - t) * (x - t) - q.ln_q - q.ln_qc).exp();
        s11 += w * core * x.powf(1.0 - 4.0 / a);
        s22 += w * core * x;
    }
    let half = 0.5 * xb;
    let pre11 =
        2.0 * PI * PI * t * t * field.rho * cfg.t_obs.powf(2.0 / a) * power.powf(2.0 / a - 2.0)
            / (a * cfg.sigma2.powf(2.0 / a));
    let pre22 = PI * PI * field.rho * a * t * t;
    Ok((pre11 * half * s11, pre22 * half * s22))
}

/// Closed-form Fisher matrix with quality flags.
///
/// `F11` needs `alpha` in `{2, 4}`; for other exponents use
/// [`f22_closed_form`] directly.
pub fn closed_form_fim(
    cfg: &DetectorConfig,
    power: f64,
    field: &FieldConfig,
    m: usize,
) -> Result<(FisherResult, Quality), ClosedFormError> {
    let f11 = f11_closed_form(cfg, power, field, m)?;
    let f22 = f22_closed_form(cfg, power, field, m)?;
    let (e11, e22) = cheap_estimate(cfg, power, field)?;
    let dev = |v: f64, e: f64| {
        if e > 0.0 {
            ((v - e) / e).abs()
        } else {
            f64::INFINITY
        }
    };
    let deviation = dev(f11, e11).max(dev(f22, e22));
    let quality = Quality {
        series_radius_exceeded: x_breve(cfg, power, field) * cfg.t() > 2.0 * (m as f64 + 2.0),
        negative: f11 < 0.0 || f22 < 0.0,
        deviates_from_estimate: deviation > 0.1,
        deviation,
    };
    Ok((
        FisherResult::diagonal(f11, f22, Method::ClosedForm { m }),
        quality,
    ))
}
