//! Cramér-Rao bounds for locating a non-cooperative RF emitter with a field
//! of non-coherent binary energy detectors.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Bessel, Marcum Q and incomplete gamma functions.
//! * [`detection`]: detection probability, its partial derivatives and the
//!   fusion-center log-likelihood.
//! * [`fisher`]: per-sensor and density-averaged Fisher information by
//!   adaptive quadrature, plus the bounds derived from it.
//! * [`closedform`]: the quadratic-exponent / truncated-series approximation
//!   that expresses the same information through incomplete gamma functions.
//! * [`montecarlo`]: Poisson sensor fields, sampled decisions and a
//!   maximum-likelihood fusion estimator for checking the bounds.

pub mod closedform;
pub mod detection;
pub mod fisher;
pub mod montecarlo;
pub mod quadrature;
pub mod specfun;

pub use closedform::{ClosedFormError, GammaSumMode, Quality, TaylorModel};
pub use detection::{DecisionRecord, DetectorConfig, ModelError, Point, TargetParams};
pub use fisher::{FieldConfig, FisherError, FisherResult, Method};
pub use montecarlo::{SimConfig, TrialResult};
pub use quadrature::QuadratureSpec;
