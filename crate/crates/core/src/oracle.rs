//! Numerical inverse Laplace transform on a Talbot contour, used to check
//! time-domain formulas against their transforms.
//!
//! The contour is the modified Talbot contour of Weideman and Trefethen,
//! `s(θ) = σ + z(θ)/t` with
//! `z(θ) = N (0.5017 θ cot(0.6407 θ) - 0.6122 + 0.2645 i θ)`, `θ ∈ (-π, π)`,
//! sampled with the midpoint rule. The shift σ is placed at the rightmost
//! singularity of the transform, so the contour wraps the branch cut
//! `(-∞, -ρ]` and all poles without amplifying rounding by `e^{σt}` more
//! than necessary.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::TemperedLinearSystem;

type C64 = Complex<f64>;

const CA: f64 = 0.5017;
const CB: f64 = 0.6407;
const CC: f64 = 0.6122;
const CD: f64 = 0.2645;

/// Relative disagreement between `N` and `2N` nodes accepted by [`invert_laplace`].
pub const ACCURACY_TARGET: f64 = 1e-6;

/// A vector-valued transform `s ↦ F(s)` together with its singular points.
pub struct LaplaceEvaluator<'a> {
    dim: usize,
    f: Box<dyn Fn(C64) -> Result<DVector<C64>> + 'a>,
    singularities: Vec<C64>,
}

impl<'a> LaplaceEvaluator<'a> {
    /// `singularities` must contain every pole and branch point of `F`.
    pub fn new<F>(dim: usize, singularities: Vec<C64>, f: F) -> Self
    where
        F: Fn(C64) -> Result<DVector<C64>> + 'a,
    {
        LaplaceEvaluator {
            dim,
            f: Box::new(f),
            singularities,
        }
    }

    /// Scalar transform.
    pub fn scalar<F>(singularities: Vec<C64>, f: F) -> Self
    where
        F: Fn(C64) -> C64 + 'a,
    {
        Self::new(1, singularities, move |s| Ok(DVector::from_element(1, f(s))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, s: C64) -> Result<DVector<C64>> {
        (self.f)(s)
    }

    pub fn singularities(&self) -> &[C64] {
        &self.singularities
    }

    /// Rightmost real part over the declared singularities.
    pub fn abscissa(&self) -> f64 {
        self.singularities
            .iter()
            .map(|s| s.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn contour(theta: f64, n: f64) -> (C64, C64) {
    let bt = CB * theta;
    let cot = bt.cos() / bt.sin();
    let z = C64::new(n * (CA * theta * cot - CC), n * CD * theta);
    let dz = C64::new(n * (CA * cot - CA * bt / (bt.sin() * bt.sin())), n * CD);
    (z, dz)
}

/// Checks that `z` lies left of (inside) the contour with `n` nodes.
fn enclosed(z: C64, n: f64) -> bool {
    let theta = z.im / (n * CD);
    if theta.abs() >= PI {
        return false;
    }
    let re = if theta == 0.0 {
        n * (CA / CB - CC)
    } else {
        n * (CA * theta * (CB * theta).cos() / (CB * theta).sin() - CC)
    };
    z.re < re
}

fn talbot(f: &LaplaceEvaluator, t: f64, n: usize) -> Result<DVector<f64>> {
    let sigma = f.abscissa();
    let sigma = if sigma.is_finite() { sigma } else { 0.0 };
    let nf = n as f64;
    for &p in f.singularities() {
        if !enclosed((p - sigma) * t, nf) {
            return Err(Error::ContourFailure(format!(
                "singularity {p} not enclosed by a {n}-node contour at t = {t}"
            )));
        }
    }
    let mut acc = DVector::<C64>::zeros(f.dim());
    for k in 0..n {
        let theta = -PI + (k as f64 + 0.5) * 2.0 * PI / nf;
        let (z, dz) = contour(theta, nf);
        let s = C64::new(sigma, 0.0) + z / t;
        let v = f.eval(s)?;
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::ContourFailure(format!("non-finite transform value at s = {s}")));
        }
        acc += v * (z.exp() * dz);
    }
    let scale = C64::new(0.0, -(sigma * t).exp() / (nf * t));
    Ok(acc.map(|c| (c * scale).re))
}

/// `f(t)` from its transform, using `terms` and `2·terms` contour nodes and
/// requiring the two to agree to [`ACCURACY_TARGET`].
pub fn invert_laplace(f: &LaplaceEvaluator, t: f64, terms: usize) -> Result<DVector<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if terms < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 contour nodes, got {terms}")));
    }
    let coarse = talbot(f, t, terms)?;
    let fine = talbot(f, t, 2 * terms)?;
    let scale = fine.amax().max(f64::MIN_POSITIVE);
    let disagreement = (&coarse - &fine).amax() / scale;
    if disagreement > ACCURACY_TARGET {
        return Err(Error::AccuracyNotReached { disagreement });
    }
    Ok(fine)
}

fn principal_pow(z: C64, p: f64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        z
    } else {
        z.powf(p)
    }
}

/// Poles `s = λ^{1/α} - ρ` of `((s+ρ)^α I - A)^{-1}` on the principal sheet,
/// one for every eigenvalue `λ` with `|arg λ| < απ`, plus the branch point `-ρ`.
pub fn resolvent_singularities(sys: &TemperedLinearSystem) -> Vec<C64> {
    let alpha = sys.alpha();
    let rho = sys.rho();
    let mut out = vec![C64::new(-rho, 0.0)];
    for lambda in sys.a().complex_eigenvalues().iter() {
        if lambda.norm() > 0.0 && lambda.arg().abs() < alpha * PI {
            out.push(principal_pow(*lambda, 1.0 / alpha) - rho);
        }
    }
    out
}

/// Transform of the free response, `((s+ρ)^α I - A)^{-1} (s+ρ)^{α-1} y0`.
pub fn homogeneous_transform<'a>(sys: &'a TemperedLinearSystem, y0: &'a DVector<f64>) -> Result<LaplaceEvaluator<'a>> {
    let n = sys.state_dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, system has {n} states",
            y0.len()
        )));
    }
    let a: DMatrix<C64> = sys.a().map(|v| C64::new(v, 0.0));
    let y: DVector<C64> = y0.map(|v| C64::new(v, 0.0));
    let alpha = sys.alpha();
    let rho = sys.rho();
    Ok(LaplaceEvaluator::new(n, resolvent_singularities(sys), move |s| {
        let w = s + rho;
        let wa = principal_pow(w, alpha);
        let m = DMatrix::<C64>::identity(n, n) * wa - &a;
        let rhs = &y * principal_pow(w, alpha - 1.0);
        m.lu().solve(&rhs).ok_or(Error::SingularResolvent { re: s.re, im: s.im })
    }))
}
