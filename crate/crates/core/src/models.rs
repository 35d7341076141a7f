//! Linearized Chua-type circuits.

use nalgebra::{dmatrix, DMatrix};

use crate::error::{Error, Result};
use crate::system::TemperedLinearSystem;

/// Parameters of the linearized Chua circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChuaParams {
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m0: f64,
}

impl Default for ChuaParams {
    fn default() -> Self {
        ChuaParams {
            delta: 2.0,
            beta: 0.5,
            gamma: -1.0,
            m0: 3.0,
        }
    }
}

/// Parameters of the linearized Chua–Hartley oscillator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChuaHartleyParams {
    pub delta: f64,
}

impl Default for ChuaHartleyParams {
    fn default() -> Self {
        ChuaHartleyParams { delta: 12.75 }
    }
}

/// Fixed coefficient of the Chua–Hartley oscillator.
pub const CHUA_HARTLEY_BETA: f64 = 100.0 / 7.0;

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

/// `A = [[-δ(1+m0), δ, 0], [1, -1, 1], [0, -β, -γ]]`, `B = e_3`, `C = I`, `D = 0`.
pub fn chua_linearized(p: &ChuaParams, alpha: f64, rho: f64) -> Result<TemperedLinearSystem> {
    finite("delta", p.delta)?;
    finite("beta", p.beta)?;
    finite("gamma", p.gamma)?;
    finite("m0", p.m0)?;
    let a = dmatrix![
        -p.delta * (1.0 + p.m0), p.delta, 0.0;
        1.0, -1.0, 1.0;
        0.0, -p.beta, -p.gamma
    ];
    let b = dmatrix![0.0; 0.0; 1.0];
    TemperedLinearSystem::new(alpha, rho, a, b, None, None)
}

/// `A = [[δ/7, δ, 0], [1, -1, 1], [0, -100/7, 0]]`, `B = e_2`,
/// `C = [[1, 0, 1], [2, -1, 0]]`, `D = 0`.
pub fn chua_hartley_linearized(p: &ChuaHartleyParams, alpha: f64, rho: f64) -> Result<TemperedLinearSystem> {
    finite("delta", p.delta)?;
    let a = dmatrix![
        p.delta / 7.0, p.delta, 0.0;
        1.0, -1.0, 1.0;
        0.0, -CHUA_HARTLEY_BETA, 0.0
    ];
    let b = dmatrix![0.0; 1.0; 0.0];
    let c: DMatrix<f64> = dmatrix![1.0, 0.0, 1.0; 2.0, -1.0, 0.0];
    TemperedLinearSystem::new(alpha, rho, a, b, Some(c), None)
}
