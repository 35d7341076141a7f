//! Tempered fractional integral and Caputo tempered derivative of sampled
//! functions, plus the residual of a simulated trajectory against the
//! system equation.
//!
//! Both operators use product integration: the sampled data are
//! interpolated piecewise and integrated exactly against the kernel.
//! The derivative is computed for `w(s) = e^{ρs} v(s)`, since
//! `D^{α,ρ} v = e^{-ρt} D^α w`, with `w` interpolated by piecewise quadratics
//! in `ξ = s^p`. `p = 1` is the usual choice for smooth data; `p = α` fits
//! functions that behave like power series in `t^α`, such as solutions of
//! fractional systems.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, SingularWeight};
use crate::special::{beta_split, gamma, tempered_power_integral};
use crate::system::{TemperedLinearSystem, Trajectory};

/// Dimension constant multiplying `v'` in the first-order tempered derivative.
pub const DIMENSION_CONSTANT: f64 = 1.0;

const FAR_PANEL_NODES: usize = 8;

/// Order and tempering rate of the operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperedParams {
    pub alpha: f64,
    pub rho: f64,
}

impl TemperedParams {
    pub fn new(alpha: f64, rho: f64) -> Result<Self> {
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
        Ok(TemperedParams { alpha, rho })
    }
}

/// Vector-valued samples `v(t_k)` on a grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<DVector<f64>>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<DVector<f64>>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} grid nodes but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.is_empty() {
            return Err(Error::GridTooCoarse("sampled function has no nodes".into()));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidParameter(format!("grid must start at 0, got {}", grid[0])));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("grid must be finite and strictly increasing".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("values have inconsistent lengths".into()));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidParameter("sampled values must be finite".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Samples a scalar function.
    pub fn from_scalar_fn<F: Fn(f64) -> f64>(grid: Vec<f64>, f: F) -> Result<Self> {
        let values = grid.iter().map(|&t| DVector::from_element(1, f(t))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[DVector<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Component `i` at every node.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[i]).collect()
    }
}

fn combine(values: &[DVector<f64>], weights: &[f64]) -> DVector<f64> {
    let mut out = DVector::zeros(values[0].len());
    for (v, &w) in values.iter().zip(weights) {
        if w != 0.0 {
            out.axpy(w, v, 1.0);
        }
    }
    out
}

/// `(1/Γ(α)) ∫_0^t e^{-ρ(t-s)} (t-s)^{α-1} f(s) ds` at every node, with `f`
/// interpolated linearly between nodes.
pub fn tempered_integral(f: &SampledFunction, p: &TemperedParams) -> Result<SampledFunction> {
    if f.len() < 2 {
        return Err(Error::GridTooCoarse("tempered integral needs at least 2 nodes".into()));
    }
    let (alpha, rho) = (p.alpha, p.rho);
    let weight = SingularWeight::new(rho, alpha, alpha)?;
    let (gx, gw) = gauss_legendre(FAR_PANEL_NODES);
    let grid = f.grid();
    let scale = 1.0 / gamma(alpha);
    let mut out = vec![DVector::zeros(f.dim())];
    let mut w = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        let t = grid[k];
        w[..=k].iter_mut().for_each(|x| *x = 0.0);
        for j in 0..k {
            let h = grid[j + 1] - grid[j];
            // σ = t - s runs over [lo, hi]
            let (lo, hi) = (t - grid[j + 1], t - grid[j]);
            let (m0, m1) = if j + 1 == k {
                (
                    tempered_power_integral(alpha, rho, h),
                    tempered_power_integral(alpha + 1.0, rho, h),
                )
            } else {
                let mut m = (0.0, 0.0);
                for (&x, &g) in gx.iter().zip(&gw) {
                    let s = lo + h * x;
                    let v = g * h * weight.value(s);
                    m.0 += v;
                    m.1 += v * s;
                }
                m
            };
            // f_j (σ - lo)/h + f_{j+1} (hi - σ)/h
            w[j] += (m1 - lo * m0) / h;
            w[j + 1] += (hi * m0 - m1) / h;
        }
        w[..=k].iter_mut().for_each(|x| *x *= scale);
        out.push(combine(&f.values()[..=k], &w[..=k]));
    }
    SampledFunction::new(grid.to_vec(), out)
}

/// Caputo tempered derivative with piecewise-quadratic interpolation in `s`.
pub fn tempered_derivative(f: &SampledFunction, p: &TemperedParams) -> Result<SampledFunction> {
    tempered_derivative_in_basis(f, p, 1.0)
}

/// `∫_a^b (t-s)^{-α} s^{q-1} ds` for `0 <= a < b <= t`, by incomplete beta.
fn power_moment(t: f64, a: f64, b: f64, alpha: f64, q: f64) -> f64 {
    let (xa, xb) = (a / t, b / t);
    let (la, ua) = beta_split(q, 1.0 - alpha, xa);
    let (lb, ub) = beta_split(q, 1.0 - alpha, xb);
    let diff = if xa >= 0.5 { ua - ub } else { lb - la };
    t.powf(q - alpha) * diff
}

/// Caputo tempered derivative with `e^{ρs} v(s)` interpolated by piecewise
/// quadratics in `ξ = s^exponent`.
///
/// Panel `[t_j, t_{j+1}]` uses the quadratic through nodes `j, j+1, j+2`
/// (shifted back at the right end of the integration range). Values at `t_0`
/// are not defined by the scheme and reported as 0.
pub fn tempered_derivative_in_basis(
    f: &SampledFunction,
    p: &TemperedParams,
    exponent: f64,
) -> Result<SampledFunction> {
    if f.len() < 3 {
        return Err(Error::GridTooCoarse("tempered derivative needs at least 3 nodes".into()));
    }
    if !(exponent > 0.0) || !exponent.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "interpolation exponent must be positive, got {exponent}"
        )));
    }
    let (alpha, rho) = (p.alpha, p.rho);
    let grid = f.grid();
    let xi: Vec<f64> = grid.iter().map(|&t| t.powf(exponent)).collect();
    let tempered: Vec<DVector<f64>> = grid
        .iter()
        .zip(f.values())
        .map(|(&t, v)| v * (rho * t).exp())
        .collect();
    let scale = 1.0 / gamma(1.0 - alpha);
    let mut out = vec![DVector::zeros(f.dim())];
    let mut w = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        let t = grid[k];
        w.iter_mut().for_each(|x| *x = 0.0);
        let last = grid.len() - 1;
        for j in 0..k {
            let i0 = j.min(k.saturating_sub(2)).min(last - 2);
            let (p0, p1, p2) = (xi[i0], xi[i0 + 1], xi[i0 + 2]);
            let i1 = power_moment(t, grid[j], grid[j + 1], alpha, exponent);
            let i2 = power_moment(t, grid[j], grid[j + 1], alpha, 2.0 * exponent);
            // Newton form: d1, d2 first divided differences, c second
            let d1 = [-1.0 / (p1 - p0), 1.0 / (p1 - p0), 0.0];
            let d2 = [0.0, -1.0 / (p2 - p1), 1.0 / (p2 - p1)];
            for r in 0..3 {
                let c = (d2[r] - d1[r]) / (p2 - p0);
                let b = d1[r] - c * (p0 + p1);
                w[i0 + r] += exponent * (b * i1 + 2.0 * c * i2);
            }
        }
        let s = scale * (-rho * t).exp();
        let hi = (k + 1).max(3).min(grid.len());
        w[..hi].iter_mut().for_each(|x| *x *= s);
        out.push(combine(&tempered[..hi], &w[..hi]));
    }
    SampledFunction::new(grid.to_vec(), out)
}

/// Node-wise residual of the state equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// Nodes `t_1, …, t_N` (the initial node is excluded).
    pub times: Vec<f64>,
    pub values: Vec<DVector<f64>>,
    /// Largest max-norm over the reported nodes.
    pub sup_norm: f64,
}

/// `D^{α,ρ} y - (A y + B u)` at `t_1, …, t_N` for a trajectory and control
/// sampled on the same grid. The derivative uses interpolation in `t^α`.
pub fn ode_residual(
    sys: &TemperedLinearSystem,
    traj: &Trajectory,
    u: &SampledFunction,
) -> Result<Residual> {
    let n = sys.state_dim();
    let m = sys.input_dim();
    if traj.states().iter().any(|y| y.len() != n) {
        return Err(Error::DimensionMismatch(format!("trajectory states must have length {n}")));
    }
    if u.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "control has {} components, system has {m} inputs",
            u.dim()
        )));
    }
    if u.grid() != traj.times() {
        return Err(Error::DimensionMismatch("trajectory and control grids differ".into()));
    }
    let params = TemperedParams::new(sys.alpha(), sys.rho())?;
    let y = SampledFunction::new(traj.times().to_vec(), traj.states().to_vec())?;
    let d = tempered_derivative_in_basis(&y, &params, sys.alpha())?;
    let mut values = Vec::with_capacity(y.len() - 1);
    let mut sup_norm = 0.0_f64;
    for k in 1..y.len() {
        let r = &d.values()[k] - (sys.a() * &y.values()[k] + sys.b() * &u.values()[k]);
        sup_norm = sup_norm.max(r.amax());
        values.push(r);
    }
    Ok(Residual {
        times: traj.times()[1..].to_vec(),
        values,
        sup_norm,
    })
}
