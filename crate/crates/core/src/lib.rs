//! Simulation, analysis and steering of linear tempered fractional systems
//! `D^{α,ρ} y = A y + B u` in the Caputo sense, with 0 < α < 1.
//!
//! Tempered derivative: `D^{α,ρ} v(t) = e^{-ρt} D^α [e^{ρs} v(s)](t)`, where
//! `D^α` is the Caputo derivative of order α.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dd;
pub mod error;
pub mod json;
pub mod mlf;
pub mod models;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod synthesis;
pub mod system;

pub use error::{Error, Result};
pub use mlf::{ml_matrix, ml_scalar, MittagLefflerSeries, MlConfig};
pub use operators::{ode_residual, tempered_derivative, tempered_integral, SampledFunction, TemperedParams};
pub use system::{
    forced_response_at, homogeneous_state, output_trajectory, solve, ControlInput, TemperedLinearSystem,
    TimeGrid, Trajectory,
};
pub use analysis::{
    controllability_gramian, kalman_controllability, kalman_observability, observability_gramian, GramianReport,
    RankReport,
};
pub use models::{chua_hartley_linearized, chua_linearized, ChuaHartleyParams, ChuaParams};
pub use oracle::{homogeneous_transform, invert_laplace, LaplaceEvaluator};
pub use synthesis::{steering_control, verify_steering, SteeringControl, SteeringProblem, SteeringReport};
