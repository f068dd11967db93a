//! Special functions used by the detection and Fisher-information code.
//!
//! Everything here is self-contained `f64` arithmetic: modified Bessel
//! functions of the first kind (plain and exponentially scaled), the
//! first-order Marcum Q function together with its first two partial
//! derivatives in the non-centrality argument, upper and lower incomplete
//! gamma functions, and the power-series coefficients of `I1(y)^2`.
//!
//! All functions are pure and thread-safe.

mod bessel;
mod gamma;
mod marcum;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_i_scaled_sequence};
pub use gamma::{
    binomial, gamma_fn, ln_gamma, lower_gamma, regularized_gamma_p, regularized_gamma_q,
    upper_gamma, upper_gamma_with,
};
pub use marcum::{
    marcum_q, marcum_q_da, marcum_q_daa, marcum_q_parts, marcum_q_parts_with, MarcumQ,
};

use thiserror::Error;

/// Largest `k` accepted by [`i1_squared_taylor_coeff`].
pub const MAX_I1_SQUARED_ORDER: usize = 80;

/// Errors raised by the special-function routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("invalid argument to {function}: {detail}")]
    InvalidArgument {
        function: &'static str,
        detail: String,
    },
    #[error("{function} overflows f64 at {argument}")]
    Overflow {
        function: &'static str,
        argument: f64,
    },
    #[error("{function} did not reach the requested tolerance after {terms} terms (last relative change {achieved:e})")]
    NoConvergence {
        function: &'static str,
        terms: usize,
        achieved: f64,
    },
}

pub(crate) fn invalid(function: &'static str, detail: impl Into<String>) -> SpecFunError {
    SpecFunError::InvalidArgument {
        function,
        detail: detail.into(),
    }
}

/// Truncation control for series and continued fractions.
///
/// Loops run until the next contribution is below machine precision; the
/// tolerances decide whether stopping at `max_terms` is still acceptable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for Accuracy {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_terms: 500,
        }
    }
}

impl Accuracy {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self, SpecFunError> {
        if !(abs_tol >= 0.0 && rel_tol >= 0.0) || abs_tol + rel_tol <= 0.0 {
            return Err(invalid(
                "Accuracy::new",
                format!("tolerances must be non-negative with a positive sum (abs {abs_tol}, rel {rel_tol})"),
            ));
        }
        if max_terms == 0 {
            return Err(invalid("Accuracy::new", "max_terms must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_terms,
        })
    }

    /// Whether a truncation error `err` on a value of size `value` is acceptable.
    pub(crate) fn accepts(&self, err: f64, value: f64) -> bool {
        err.abs() <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Coefficient of `y^(2k+2)` in the power series of `I1(y)^2`:
/// `C(2k+2, k) / (2^(k+1) (k+1)!)^2`.
pub fn i1_squared_taylor_coeff(k: usize) -> Result<f64, SpecFunError> {
    if k > MAX_I1_SQUARED_ORDER {
        return Err(SpecFunError::Overflow {
            function: "i1_squared_taylor_coeff",
            argument: k as f64,
        });
    }
    // (2^(k+1) (k+1)!) built up as a float product; fine well past k = 80.
    let mut denom = 1.0;
    for j in 1..=(k + 1) {
        denom *= 2.0 * j as f64;
    }
    Ok(binomial(2 * k as u64 + 2, k as u64) / (denom * denom))
}

/// Partial sum `sum_{k=0}^{m} coeff_k y^(2k+2)` of the `I1(y)^2` series.
pub fn i1_squared_series(y: f64, m: usize) -> Result<f64, SpecFunError> {
    let y2 = y * y;
    let mut pow = y2;
    let mut sum = 0.0;
    for k in 0..=m {
        sum += i1_squared_taylor_coeff(k)? * pow;
        pow *= y2;
    }
    Ok(sum)
}
