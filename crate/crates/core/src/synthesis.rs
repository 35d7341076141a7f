//! Minimum-energy open-loop steering.
//!
//! With `σ = T - τ`, the control
//!
//! ```text
//! u(τ) = σ^{α-1} e^{-ρσ} Bᵀ E_{α,α}(Aᵀ σ^α) W_c(T)^{-1} (y_T - e^{-ρT} E_α(A T^α) y0)
//! ```
//!
//! drives the state from `y0` to `y_T` at time `T`. It is singular like
//! `σ^{α-1}` at `τ = T` and tells the solver so through
//! [`ControlInput::endpoint_singularity`].

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::analysis::{controllability_gramian, GramianReport};
use crate::error::{Error, Result};
use crate::mlf::{time_argument, MittagLefflerSeries, MlConfig};
use crate::system::{homogeneous_state, solve, ControlInput, EndpointSingularity, TemperedLinearSystem, TimeGrid, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct SteeringProblem {
    pub sys: TemperedLinearSystem,
    pub y0: DVector<f64>,
    pub y_target: DVector<f64>,
    pub horizon: f64,
}

impl SteeringProblem {
    pub fn new(sys: TemperedLinearSystem, y0: DVector<f64>, y_target: DVector<f64>, horizon: f64) -> Result<Self> {
        let n = sys.state_dim();
        if y0.len() != n || y_target.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "initial state and target must have length {n}, got {} and {}",
                y0.len(),
                y_target.len()
            )));
        }
        if y0.iter().chain(y_target.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial state and target must be finite".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if sys.alpha() <= 0.5 {
            return Err(Error::AlphaOutOfRange {
                alpha: sys.alpha(),
                range: "alpha > 1/2 for steering",
            });
        }
        Ok(SteeringProblem {
            sys,
            y0,
            y_target,
            horizon,
        })
    }
}

/// The synthesized control `τ ↦ u(τ)` on `[0, T)`.
#[derive(Clone, Debug)]
pub struct SteeringControl {
    alpha: f64,
    rho: f64,
    horizon: f64,
    /// `v = W_c^{-1}(y_T - free response)`.
    multiplier: DVector<f64>,
    free_response: DVector<f64>,
    /// `vᵀ E_{α,α}(A σ^α) B`, a 1×m series.
    regular: MittagLefflerSeries,
    gramian: GramianReport,
}

/// Builds the steering control using a Gramian with `quad_nodes` panels.
pub fn steering_control(prob: &SteeringProblem, quad_nodes: usize) -> Result<SteeringControl> {
    let sys = &prob.sys;
    let gramian = controllability_gramian(sys, prob.horizon, quad_nodes)?;
    let singular = || Error::SingularGramian {
        min_eigenvalue: gramian.min_eigenvalue,
        max_eigenvalue: gramian.max_eigenvalue,
    };
    if !gramian.is_nonsingular() {
        return Err(singular());
    }
    let free_response = homogeneous_state(sys, &prob.y0, prob.horizon)?;
    let residual = &prob.y_target - &free_response;
    let chol = Cholesky::new(gramian.matrix.clone()).ok_or_else(singular)?;
    let multiplier = chol.solve(&residual);
    let left = DMatrix::from_row_slice(1, multiplier.len(), multiplier.as_slice());
    let regular = MittagLefflerSeries::projected(
        sys.alpha(),
        sys.alpha(),
        sys.a(),
        Some(&left),
        Some(sys.b()),
        time_argument(prob.horizon, sys.alpha()),
        &MlConfig::default(),
    )?;
    Ok(SteeringControl {
        alpha: sys.alpha(),
        rho: sys.rho(),
        horizon: prob.horizon,
        multiplier,
        free_response,
        regular,
        gramian,
    })
}

impl SteeringControl {
    pub fn gramian(&self) -> &GramianReport {
        &self.gramian
    }

    pub fn multiplier(&self) -> &DVector<f64> {
        &self.multiplier
    }

    /// `e^{-ρT} E_α(A T^α) y0`.
    pub fn free_response(&self) -> &DVector<f64> {
        &self.free_response
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Exponent of the singular factor `(T - τ)^{α-1}`.
    pub fn endpoint_exponent(&self) -> f64 {
        self.alpha - 1.0
    }

    fn regular_at(&self, tau: f64) -> Result<DVector<f64>> {
        let sigma = (self.horizon - tau).max(0.0);
        let row = self.regular.at_time(sigma)?;
        Ok(DVector::from_iterator(row.ncols(), row.iter().copied()))
    }

    /// `u(τ)` for `τ ∈ [0, T)`.
    pub fn try_value(&self, tau: f64) -> Result<DVector<f64>> {
        if !(tau >= 0.0) || !(tau < self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "steering control is defined on [0, {}), got {tau}",
                self.horizon
            )));
        }
        let sigma = self.horizon - tau;
        Ok(self.regular_at(tau)? * (sigma.powf(self.alpha - 1.0) * (-self.rho * sigma).exp()))
    }

    /// `n` samples at `τ_k = kT/n`, `k = 0..n`, which exclude the singular endpoint.
    pub fn sample(&self, n: usize) -> Result<Vec<(f64, DVector<f64>)>> {
        (0..n)
            .map(|k| {
                let tau = self.horizon * k as f64 / n as f64;
                Ok((tau, self.try_value(tau)?))
            })
            .collect()
    }

    /// CSV with header `tau,u1,…,um` and 17 significant digits.
    pub fn to_csv(&self, n: usize) -> Result<String> {
        let samples = self.sample(n)?;
        let m = self.regular.shape().1;
        let mut out = String::from("tau");
        for i in 1..=m {
            let _ = write!(out, ",u{i}");
        }
        out.push('\n');
        for (tau, u) in samples {
            let _ = write!(out, "{tau:.16e}");
            for v in u.iter() {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

impl ControlInput for SteeringControl {
    fn input_dim(&self) -> usize {
        self.regular.shape().1
    }

    /// NaN outside `[0, T)`; use [`SteeringControl::try_value`] for a checked value.
    fn value(&self, tau: f64) -> DVector<f64> {
        self.try_value(tau)
            .unwrap_or_else(|_| DVector::from_element(self.input_dim(), f64::NAN))
    }

    fn endpoint_singularity(&self) -> Option<EndpointSingularity> {
        Some(EndpointSingularity {
            at: self.horizon,
            exponent: self.alpha - 1.0,
            decay: self.rho,
        })
    }

    fn regular_part(&self, tau: f64) -> DVector<f64> {
        self.regular_at(tau)
            .unwrap_or_else(|_| DVector::from_element(self.input_dim(), f64::NAN))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteeringReport {
    pub final_state: Vec<f64>,
    pub target: Vec<f64>,
    /// Euclidean norm of `y(T) - y_T`.
    pub abs_error: f64,
    /// `abs_error / ‖y_T‖`, or `abs_error` for a zero target.
    pub rel_error: f64,
    pub horizon: f64,
    pub grid_steps: usize,
    pub quad_nodes: usize,
}

/// Simulates the controlled system on `grid` and measures the miss at `T`.
pub fn verify_steering(
    prob: &SteeringProblem,
    ctrl: &SteeringControl,
    grid: &TimeGrid,
) -> Result<(SteeringReport, Trajectory)> {
    if (grid.horizon() - prob.horizon).abs() > 1e-12 * prob.horizon {
        return Err(Error::InvalidParameter(format!(
            "grid ends at {}, problem horizon is {}",
            grid.horizon(),
            prob.horizon
        )));
    }
    let traj = solve(&prob.sys, &prob.y0, ctrl, grid)?;
    let y = traj.final_state();
    let abs_error = (y - &prob.y_target).norm();
    let target_norm = prob.y_target.norm();
    let rel_error = if target_norm > 0.0 {
        abs_error / target_norm
    } else {
        abs_error
    };
    let report = SteeringReport {
        final_state: y.iter().copied().collect(),
        target: prob.y_target.iter().copied().collect(),
        abs_error,
        rel_error,
        horizon: prob.horizon,
        grid_steps: grid.steps(),
        quad_nodes: ctrl.gramian.quad_nodes,
    };
    Ok((report, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::DEFAULT_QUAD_PANELS;
    use crate::mlf::ml_scalar;
    use nalgebra::{dmatrix, dvector};

    fn scalar(a: f64, b: f64) -> TemperedLinearSystem {
        TemperedLinearSystem::new(0.8, 0.3, dmatrix![a], dmatrix![b], None, None).unwrap()
    }

    #[test]
    fn free_response_target_gives_zero_control() {
        let sys = scalar(-1.0, 1.0);
        let free = homogeneous_state(&sys, &dvector![2.0], 1.0).unwrap();
        let prob = SteeringProblem::new(sys, dvector![2.0], free, 1.0).unwrap();
        let ctrl = steering_control(&prob, 64).unwrap();
        for (_, u) in ctrl.sample(10).unwrap() {
            assert_eq!(u[0], 0.0);
        }
    }

    #[test]
    fn null_target_matches_hand_formula() {
        let (a, b, alpha, rho, t) = (-1.0, 2.0, 0.8, 0.3, 1.0);
        let sys = scalar(a, b);
        let y0 = 1.5;
        let prob = SteeringProblem::new(sys, dvector![y0], dvector![0.0], t).unwrap();
        let ctrl = steering_control(&prob, DEFAULT_QUAD_PANELS).unwrap();
        let w = ctrl.gramian().matrix[(0, 0)];
        let cfg = MlConfig::default();
        let free = (-rho * t).exp() * ml_scalar(alpha, 1.0, a * t.powf(alpha), &cfg).unwrap() * y0;
        for &tau in &[0.0, 0.25, 0.9] {
            let s: f64 = t - tau;
            let expected = -s.powf(alpha - 1.0)
                * (-rho * s).exp()
                * b
                * ml_scalar(alpha, alpha, a * s.powf(alpha), &cfg).unwrap()
                * free
                / w;
            let got = ctrl.try_value(tau).unwrap()[0];
            assert!((got - expected).abs() < 1e-12 * expected.abs(), "tau = {tau}");
            assert!(got < 0.0);
        }
        assert!(ctrl.try_value(t).is_err());
    }

    #[test]
    fn singular_gramian_is_refused() {
        let sys = scalar(-1.0, 0.0);
        let prob = SteeringProblem::new(sys, dvector![1.0], dvector![0.0], 1.0).unwrap();
        assert!(matches!(steering_control(&prob, 32), Err(Error::SingularGramian { .. })));
    }

    #[test]
    fn problem_validation() {
        let sys = TemperedLinearSystem::new(0.4, 0.3, dmatrix![1.0], dmatrix![1.0], None, None).unwrap();
        assert!(matches!(
            SteeringProblem::new(sys, dvector![1.0], dvector![0.0], 1.0),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(SteeringProblem::new(scalar(1.0, 1.0), dvector![1.0, 2.0], dvector![0.0], 1.0).is_err());
        assert!(SteeringProblem::new(scalar(1.0, 1.0), dvector![1.0], dvector![0.0], 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let sys = scalar(-1.0, 1.0);
        let prob = SteeringProblem::new(sys, dvector![1.0], dvector![0.5], 1.0).unwrap();
        let csv = steering_control(&prob, 32).unwrap().to_csv(4).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "tau,u1");
        assert_eq!(lines.len(), 5);
        assert!(csv.ends_with('\n'));
    }
}
