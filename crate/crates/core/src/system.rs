//! Linear tempered fractional control systems
//!
//! ```text
//! D^{α,ρ} y(t) = A y(t) + B u(t),   y(0) = y0,
//! z(t) = C y(t) + D u(t)
//! ```
//!
//! and their solution by the variation of constants formula
//! `y(t) = e^{-ρt} E_α(A t^α) y0 + ∫_0^t e^{-ρσ} σ^{α-1} E_{α,α}(A σ^α) B u(t-σ) dσ`.
//!
//! The convolution is evaluated with the rule of [`crate::quadrature`]. On
//! uniform grids the kernel `E_{α,α}(Aσ^α) B` is tabulated once at the fixed
//! lag abscissae and every control value is computed once, so a solve with
//! `N` steps costs `O(N)` kernel and control evaluations and `O(N²)` small
//! matrix-vector products. The hypothesis that `(s+ρ)^α I - A` is invertible
//! on the Laplace half-plane used by the formula is not checked at runtime.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_rows, rows_of};
use crate::mlf::{time_argument, ml_matrix, MittagLefflerSeries, MlConfig};
use crate::operators::SampledFunction;
use crate::quadrature::{gauss_legendre, start_panel, SingularWeight, PANEL_NODES};

/// Grid steps per unit time when no grid is given.
pub const DEFAULT_STEPS_PER_UNIT_TIME: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct TemperedLinearSystem {
    alpha: f64,
    rho: f64,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} has non-finite entries")))
    }
}

impl TemperedLinearSystem {
    /// `C` defaults to the identity and `D` to zero.
    pub fn new(
        alpha: f64,
        rho: f64,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: Option<DMatrix<f64>>,
        d: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange {
                alpha,
                range: "0 < alpha < 1",
            });
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rho must be finite and non-negative, got {rho}"
            )));
        }
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B must have {n} rows and at least one column, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        let m = b.ncols();
        let c = c.unwrap_or_else(|| DMatrix::identity(n, n));
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "C must have {n} columns, got {}x{}",
                c.nrows(),
                c.ncols()
            )));
        }
        let p = c.nrows();
        let d = d.unwrap_or_else(|| DMatrix::zeros(p, m));
        if d.nrows() != p || d.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "D must be {p}x{m}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            check_finite(name, mat)?;
        }
        Ok(TemperedLinearSystem {
            alpha,
            rho,
            a,
            b,
            c,
            d,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Same matrices with a different order and tempering rate.
    pub fn with_params(&self, alpha: f64, rho: f64) -> Result<Self> {
        Self::new(
            alpha,
            rho,
            self.a.clone(),
            self.b.clone(),
            Some(self.c.clone()),
            Some(self.d.clone()),
        )
    }

    pub fn with_b(&self, b: DMatrix<f64>) -> Result<Self> {
        Self::new(self.alpha, self.rho, self.a.clone(), b, Some(self.c.clone()), None)
    }

    pub fn with_c(&self, c: DMatrix<f64>) -> Result<Self> {
        Self::new(self.alpha, self.rho, self.a.clone(), self.b.clone(), Some(c), None)
    }

    /// Parses a JSON system description `{alpha, rho, A, B, C?, D?}` with
    /// row-major nested arrays.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec =
            serde_json::from_str(text).map_err(|e| Error::SpecFormat(e.to_string()))?;
        spec.build()
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            alpha: self.alpha,
            rho: self.rho,
            a: rows_of(&self.a),
            b: rows_of(&self.b),
            c: Some(rows_of(&self.c)),
            d: Some(rows_of(&self.d)),
        }
    }
}

/// Serialized form of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub alpha: f64,
    pub rho: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<TemperedLinearSystem> {
        let a = matrix_from_rows("A", &self.a)?;
        let b = matrix_from_rows("B", &self.b)?;
        let c = self.c.as_deref().map(|r| matrix_from_rows("C", r)).transpose()?;
        let d = self.d.as_deref().map(|r| matrix_from_rows("D", r)).transpose()?;
        TemperedLinearSystem::new(self.alpha, self.rho, a, b, c, d).map_err(|e| match e {
            Error::DimensionMismatch(msg) => Error::SpecFormat(msg),
            other => other,
        })
    }
}

/// Time nodes `0 = t_0 < … < t_N = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// `steps` equal intervals on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if steps < 2 {
            return Err(Error::GridTooCoarse(format!("need at least 2 steps, got {steps}")));
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<f64> = (0..steps).map(|k| k as f64 * h).collect();
        nodes.push(horizon);
        Ok(TimeGrid { nodes })
    }

    /// Uniform grid with [`DEFAULT_STEPS_PER_UNIT_TIME`] steps per unit time.
    pub fn default_for(horizon: f64) -> Result<Self> {
        let steps = (horizon * DEFAULT_STEPS_PER_UNIT_TIME as f64).ceil().max(2.0) as usize;
        Self::uniform(horizon, steps)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::GridTooCoarse(format!("need at least 3 nodes, got {}", nodes.len())));
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidParameter(format!("grid must start at 0, got {}", nodes[0])));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(TimeGrid { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Step size if all steps agree to rounding.
    pub fn uniform_step(&self) -> Option<f64> {
        let h = self.horizon() / self.steps() as f64;
        let uniform = self
            .nodes
            .iter()
            .enumerate()
            .all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-12 * self.horizon());
        uniform.then_some(h)
    }
}

/// States sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<DVector<f64>>) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} states",
                times.len(),
                states.len()
            )));
        }
        if states.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter("trajectory has non-finite states".into()));
        }
        Ok(Trajectory { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<f64>] {
        &self.states
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Declared behaviour `u(τ) = (at - τ)^exponent e^{-decay (at - τ)} r(τ)`
/// near the point `at`, with `r` regular.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointSingularity {
    pub at: f64,
    pub exponent: f64,
    pub decay: f64,
}

/// An input signal `τ ↦ u(τ) ∈ R^m`.
pub trait ControlInput {
    fn input_dim(&self) -> usize;

    fn value(&self, tau: f64) -> DVector<f64>;

    /// Integrable singularity at the right end of the horizon, if any.
    fn endpoint_singularity(&self) -> Option<EndpointSingularity> {
        None
    }

    /// The regular factor `r(τ)`; equals `value` for controls without a
    /// declared singularity.
    fn regular_part(&self, tau: f64) -> DVector<f64> {
        self.value(tau)
    }
}

/// `u ≡ 0`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroInput(pub usize);

impl ControlInput for ZeroInput {
    fn input_dim(&self) -> usize {
        self.0
    }

    fn value(&self, _tau: f64) -> DVector<f64> {
        DVector::zeros(self.0)
    }
}

/// `u ≡ const`.
#[derive(Clone, Debug)]
pub struct ConstantInput(pub DVector<f64>);

impl ControlInput for ConstantInput {
    fn input_dim(&self) -> usize {
        self.0.len()
    }

    fn value(&self, _tau: f64) -> DVector<f64> {
        self.0.clone()
    }
}

/// Control given by a closure.
pub struct FnInput<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> DVector<f64>> FnInput<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnInput { dim, f }
    }
}

impl<F: Fn(f64) -> DVector<f64>> ControlInput for FnInput<F> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn value(&self, tau: f64) -> DVector<f64> {
        (self.f)(tau)
    }
}

/// Sum of two controls with matching dimensions.
pub struct SumInput<'a>(pub &'a dyn ControlInput, pub &'a dyn ControlInput);

impl ControlInput for SumInput<'_> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    fn value(&self, tau: f64) -> DVector<f64> {
        self.0.value(tau) + self.1.value(tau)
    }
}

fn check_y0(sys: &TemperedLinearSystem, y0: &DVector<f64>) -> Result<()> {
    if y0.len() != sys.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, system has {} states",
            y0.len(),
            sys.state_dim()
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("initial state must be finite".into()));
    }
    Ok(())
}

/// `e^{-ρt} E_α(A t^α) y0`.
pub fn homogeneous_state(sys: &TemperedLinearSystem, y0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    check_y0(sys, y0)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    let e = ml_matrix(sys.alpha, 1.0, &(&sys.a * time_argument(t, sys.alpha)), &MlConfig::default())?;
    Ok(e * y0 * (-sys.rho * t).exp())
}

/// `E_{α,α}(A σ^α) B` for `σ ∈ [0, horizon]`.
pub fn kernel_series(sys: &TemperedLinearSystem, horizon: f64) -> Result<MittagLefflerSeries> {
    MittagLefflerSeries::projected(
        sys.alpha,
        sys.alpha,
        &sys.a,
        None,
        Some(&sys.b),
        time_argument(horizon, sys.alpha),
        &MlConfig::default(),
    )
}

/// Solution of the state equation on `grid` for initial state `y0` and input `u`.
pub fn solve(
    sys: &TemperedLinearSystem,
    y0: &DVector<f64>,
    u: &dyn ControlInput,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_y0(sys, y0)?;
    if u.input_dim() != sys.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "control has {} components, system has {} inputs",
            u.input_dim(),
            sys.input_dim()
        )));
    }
    let horizon = grid.horizon();
    let singular = u.endpoint_singularity();
    if let Some(s) = singular {
        if s.at < horizon * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "control is singular at {} inside the horizon {horizon}",
                s.at
            )));
        }
        if !(s.exponent > -sys.alpha) {
            return Err(Error::QuadratureFailure(format!(
                "control singularity exponent {} is not integrable against the kernel",
                s.exponent
            )));
        }
    }
    let free = MittagLefflerSeries::projected(
        sys.alpha,
        1.0,
        &sys.a,
        None,
        Some(&DMatrix::from_column_slice(y0.len(), 1, y0.as_slice())),
        time_argument(horizon, sys.alpha),
        &MlConfig::default(),
    )?;
    let kernel = kernel_series(sys, horizon)?;
    let mut states: Vec<DVector<f64>> = Vec::with_capacity(grid.nodes().len());
    for &t in grid.nodes() {
        let v = free.at_time(t)?.column(0) * (-sys.rho * t).exp();
        states.push(v);
    }
    states[0] = y0.clone();
    // singular combined weight applies only where the control's singular point coincides with t
    let at_singular = |t: f64| singular.filter(|s| (s.at - t).abs() <= 1e-12 * horizon.max(1.0));
    match grid.uniform_step() {
        Some(h) => solve_uniform(sys, u, &kernel, grid, h, &at_singular, &mut states)?,
        None => {
            for (k, &t) in grid.nodes().iter().enumerate().skip(1) {
                let steps = grid.steps() as f64;
                let panels = ((t / horizon) * steps).round().max(1.0) as usize;
                states[k] += convolution_at(sys, u, &kernel, t, panels, at_singular(t))?;
            }
        }
    }
    Trajectory::new(grid.nodes().to_vec(), states)
}

fn regular_weight(sys: &TemperedLinearSystem) -> Result<SingularWeight> {
    SingularWeight::new(sys.rho, sys.alpha, sys.alpha)
}

fn combined_weight(sys: &TemperedLinearSystem, s: &EndpointSingularity) -> Result<SingularWeight> {
    SingularWeight::new(sys.rho + s.decay, sys.alpha + s.exponent, sys.alpha)
}

/// Convolution integral at a single time `t` with `panels` equal panels.
fn convolution_at(
    sys: &TemperedLinearSystem,
    u: &dyn ControlInput,
    kernel: &MittagLefflerSeries,
    t: f64,
    panels: usize,
    singular: Option<EndpointSingularity>,
) -> Result<DVector<f64>> {
    let h = t / panels as f64;
    let weight = regular_weight(sys)?;
    let mut acc = DVector::zeros(sys.state_dim());
    let first = match &singular {
        Some(s) => start_panel(&combined_weight(sys, s)?, h)?,
        None => start_panel(&weight, h)?,
    };
    for (&s, &w) in first.nodes.iter().zip(&first.weights) {
        let uv = if singular.is_some() {
            u.regular_part(t - s)
        } else {
            u.value(t - s)
        };
        acc += kernel.at_time(s)? * uv * w;
    }
    let (gx, gw) = gauss_legendre(PANEL_NODES);
    for j in 1..panels {
        for (&x, &g) in gx.iter().zip(&gw) {
            let s = (j as f64 + x) * h;
            acc += kernel.at_time(s)? * u.value(t - s) * (g * h * weight.value(s));
        }
    }
    Ok(acc)
}

fn solve_uniform(
    sys: &TemperedLinearSystem,
    u: &dyn ControlInput,
    kernel: &MittagLefflerSeries,
    grid: &TimeGrid,
    h: f64,
    at_singular: &dyn Fn(f64) -> Option<EndpointSingularity>,
    states: &mut [DVector<f64>],
) -> Result<()> {
    let steps = grid.steps();
    let weight = regular_weight(sys)?;
    let first = start_panel(&weight, h)?;
    let (gx, gw) = gauss_legendre(PANEL_NODES);

    // kernel at the start-panel nodes, and weighted kernel on panels 1..steps-1
    let k_first: Vec<DMatrix<f64>> = first
        .nodes
        .iter()
        .map(|&s| kernel.at_time(s))
        .collect::<Result<_>>()?;
    let mut k_panels: Vec<DMatrix<f64>> = Vec::with_capacity((steps - 1) * PANEL_NODES);
    for j in 1..steps {
        for (&x, &g) in gx.iter().zip(&gw) {
            let s = (j as f64 + x) * h;
            k_panels.push(kernel.at_time(s)? * (g * h * weight.value(s)));
        }
    }
    // u((p + 1 - x_r) h) for p = 0..steps-2
    let mut u_panels: Vec<DVector<f64>> = Vec::with_capacity((steps - 1) * PANEL_NODES);
    for p in 0..steps.saturating_sub(1) {
        for &x in &gx {
            u_panels.push(u.value((p as f64 + 1.0 - x) * h));
        }
    }

    let times = grid.nodes();
    for k in 1..=steps {
        let t = times[k];
        let mut acc = DVector::zeros(sys.state_dim());
        match at_singular(t) {
            Some(s) => {
                let rule = start_panel(&combined_weight(sys, &s)?, h)?;
                for ((kb, &s), &w) in k_first.iter().zip(&rule.nodes).zip(&rule.weights) {
                    acc += kb * u.regular_part(t - s) * w;
                }
            }
            None => {
                for ((kb, &s), &w) in k_first.iter().zip(&first.nodes).zip(&first.weights) {
                    acc += kb * u.value(t - s) * w;
                }
            }
        }
        for j in 1..k {
            let p = k - j - 1;
            for r in 0..PANEL_NODES {
                acc += &k_panels[(j - 1) * PANEL_NODES + r] * &u_panels[p * PANEL_NODES + r];
            }
        }
        states[k] += acc;
    }
    Ok(())
}

/// `z(t_k) = C y(t_k) + D u(t_k)`.
pub fn output_trajectory(
    sys: &TemperedLinearSystem,
    traj: &Trajectory,
    u: &dyn ControlInput,
) -> Result<SampledFunction> {
    if traj.states().iter().any(|y| y.len() != sys.state_dim()) {
        return Err(Error::DimensionMismatch(format!(
            "trajectory states must have length {}",
            sys.state_dim()
        )));
    }
    if u.input_dim() != sys.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "control has {} components, system has {} inputs",
            u.input_dim(),
            sys.input_dim()
        )));
    }
    let feedthrough = sys.d.iter().any(|&v| v != 0.0);
    let values = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, y)| {
            let z = &sys.c * y;
            if feedthrough {
                z + &sys.d * u.value(t)
            } else {
                z
            }
        })
        .collect();
    SampledFunction::new(traj.times().to_vec(), values)
}

/// State reached at `horizon` from `y0 = 0` under `u`, on the default grid.
pub fn forced_response_at(sys: &TemperedLinearSystem, u: &dyn ControlInput, horizon: f64) -> Result<DVector<f64>> {
    forced_response_on(sys, u, &TimeGrid::default_for(horizon)?)
}

/// State reached at the end of `grid` from `y0 = 0` under `u`.
pub fn forced_response_on(sys: &TemperedLinearSystem, u: &dyn ControlInput, grid: &TimeGrid) -> Result<DVector<f64>> {
    let y0 = DVector::zeros(sys.state_dim());
    Ok(solve(sys, &y0, u, grid)?.final_state().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use nalgebra::{dmatrix, dvector};

    fn scalar(alpha: f64, rho: f64, a: f64) -> TemperedLinearSystem {
        TemperedLinearSystem::new(alpha, rho, dmatrix![a], dmatrix![1.0], None, None).unwrap()
    }

    #[test]
    fn validation_errors() {
        let a = DMatrix::zeros(2, 2);
        let b = DMatrix::zeros(2, 1);
        assert!(matches!(
            TemperedLinearSystem::new(1.2, 0.5, a.clone(), b.clone(), None, None),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(TemperedLinearSystem::new(0.5, -1.0, a.clone(), b.clone(), None, None).is_err());
        assert!(matches!(
            TemperedLinearSystem::new(0.5, 0.5, a.clone(), DMatrix::zeros(3, 1), None, None),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            TemperedLinearSystem::new(0.5, 0.5, a, b, None, Some(DMatrix::zeros(1, 1))),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn defaults_for_output_matrices() {
        let s = TemperedLinearSystem::new(0.5, 0.5, DMatrix::zeros(2, 2), DMatrix::zeros(2, 3), None, None).unwrap();
        assert_eq!(s.c(), &DMatrix::<f64>::identity(2, 2));
        assert_eq!(s.d(), &DMatrix::<f64>::zeros(2, 3));
    }

    #[test]
    fn spec_round_trip_and_errors() {
        let text = r#"{"alpha": 0.7, "rho": 0.5, "A": [[-1, 2], [0, -3]], "B": [[0], [1]]}"#;
        let s = TemperedLinearSystem::from_json(text).unwrap();
        assert_eq!(s.state_dim(), 2);
        let back = serde_json::to_string(&s.to_spec()).unwrap();
        assert_eq!(TemperedLinearSystem::from_json(&back).unwrap(), s);

        let ragged = r#"{"alpha": 0.7, "rho": 0.5, "A": [[-1, 2], [0]], "B": [[0], [1]]}"#;
        let e = TemperedLinearSystem::from_json(ragged).unwrap_err();
        assert!(matches!(&e, Error::SpecFormat(m) if m.contains("row 1")), "{e}");
        let unknown = r#"{"alpha": 0.7, "rho": 0.5, "A": [[1]], "B": [[1]], "E": 1}"#;
        assert!(matches!(TemperedLinearSystem::from_json(unknown), Err(Error::SpecFormat(_))));
        let wrong_b = r#"{"alpha": 0.7, "rho": 0.5, "A": [[1]], "B": [[1], [2]]}"#;
        assert!(matches!(TemperedLinearSystem::from_json(wrong_b), Err(Error::SpecFormat(_))));
    }

    #[test]
    fn grids() {
        let g = TimeGrid::uniform(1.5, 3).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0, 1.5]);
        assert_eq!(g.uniform_step(), Some(0.5));
        assert!(TimeGrid::uniform(1.0, 1).is_err());
        assert_eq!(TimeGrid::default_for(1.5).unwrap().steps(), 768);
        let g = TimeGrid::from_nodes(vec![0.0, 0.1, 0.5, 1.0]).unwrap();
        assert_eq!(g.uniform_step(), None);
        assert!(TimeGrid::from_nodes(vec![0.0, 0.5, 0.4]).is_err());
    }

    #[test]
    fn homogeneous_state_with_zero_matrix() {
        let s = TemperedLinearSystem::new(0.6, 0.8, DMatrix::zeros(2, 2), DMatrix::zeros(2, 1), None, None).unwrap();
        let y0 = dvector![1.0, -2.0];
        let y = homogeneous_state(&s, &y0, 1.3).unwrap();
        assert!((y - y0 * (-0.8f64 * 1.3).exp()).amax() < 1e-15);
    }

    #[test]
    fn constant_input_classical_caputo() {
        // A = 0, rho = 0: y = y0 + t^α / Γ(1 + α)
        let s = scalar(0.5, 0.0, 0.0);
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        let y0 = dvector![0.25];
        let traj = solve(&s, &y0, &ConstantInput(dvector![1.0]), &grid).unwrap();
        assert_eq!(traj.states()[0], y0);
        for (t, y) in traj.times().iter().zip(traj.states()) {
            let exact = 0.25 + t.sqrt() / gamma(1.5);
            assert!((y[0] - exact).abs() < 1e-10, "t = {t}: {:e}", y[0] - exact);
        }
    }

    #[test]
    fn non_uniform_grid_matches_uniform() {
        let s = scalar(0.7, 0.5, -1.0);
        let u = FnInput::new(1, |t: f64| dvector![(2.0 * t).cos()]);
        let uni = solve(&s, &dvector![1.0], &u, &TimeGrid::uniform(1.0, 40).unwrap()).unwrap();
        let mut nodes: Vec<f64> = (0..=40).map(|k| k as f64 / 40.0).collect();
        nodes[1] = 0.02;
        let non = solve(&s, &dvector![1.0], &u, &TimeGrid::from_nodes(nodes).unwrap()).unwrap();
        assert!((uni.final_state() - non.final_state()).amax() < 1e-9);
    }

    #[test]
    fn output_of_identity_observation() {
        let s = scalar(0.7, 0.5, -1.0);
        let traj = Trajectory::new(vec![0.0, 1.0], vec![dvector![2.0], dvector![3.0]]).unwrap();
        let z = output_trajectory(&s, &traj, &ZeroInput(1)).unwrap();
        assert_eq!(z.values(), traj.states());
    }

    #[test]
    fn dimension_checks() {
        let s = scalar(0.7, 0.5, -1.0);
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(matches!(
            solve(&s, &dvector![1.0, 2.0], &ZeroInput(1), &grid),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            solve(&s, &dvector![1.0], &ZeroInput(2), &grid),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
