//! Quadrature for integrals `∫_0^L e^{-cσ} σ^{μ-1} g(σ) dσ` whose smooth factor
//! `g` is a power series in `σ^α` near the origin (as `E_{α,β}(Aσ^α)` is).
//!
//! The first panel `[0, h]` uses product integration in the variable
//! `ξ = σ^α`: the rule is exact for `g ∈ span{1, σ^α, …, σ^{(q-1)α}}` against
//! the exact weight, with moments from the incomplete gamma function. The
//! remaining panels carry a bounded weight and use Gauss–Legendre with the
//! weight folded into the node weights.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::tempered_power_integral;

/// Nodes of the product rule on the first panel.
pub const START_NODES: usize = 5;
/// Gauss–Legendre nodes on each regular panel.
pub const PANEL_NODES: usize = 6;

/// Gauss–Legendre nodes and weights on `[0, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    (nodes, weights)
}

/// The weight `e^{-cσ} σ^{μ-1}` with the variable `σ^α` the smooth factor is expanded in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularWeight {
    pub decay: f64,
    pub mu: f64,
    pub alpha: f64,
}

impl SingularWeight {
    pub fn new(decay: f64, mu: f64, alpha: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "weight exponent mu = {mu} is not integrable at the origin"
            )));
        }
        if !(alpha > 0.0) || !decay.is_finite() || decay < 0.0 {
            return Err(Error::QuadratureFailure(format!(
                "invalid weight parameters decay = {decay}, alpha = {alpha}"
            )));
        }
        Ok(SingularWeight { decay, mu, alpha })
    }

    pub fn value(&self, sigma: f64) -> f64 {
        (-self.decay * sigma).exp() * sigma.powf(self.mu - 1.0)
    }
}

/// Nodes and weights of a quadrature rule for a fixed weight.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i g(σ_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * g(s))
            .sum()
    }

    fn extend(&mut self, other: WeightedRule) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// Product rule on `[0, h]`, exact for `g(σ) = (σ/h)^{kα}`, `k < START_NODES`.
pub fn start_panel(w: &SingularWeight, h: f64) -> Result<WeightedRule> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::QuadratureFailure(format!("panel width must be positive, got {h}")));
    }
    let (u, _) = gauss_legendre(START_NODES);
    let q = START_NODES;
    let vander = DMatrix::from_fn(q, q, |k, i| u[i].powi(k as i32));
    let moments = DVector::from_fn(q, |k, _| {
        let kk = k as f64 * w.alpha;
        tempered_power_integral(w.mu + kk, w.decay, h) * h.powf(-kk)
    });
    let weights = vander
        .lu()
        .solve(&moments)
        .ok_or_else(|| Error::QuadratureFailure("singular start-panel moment system".into()))?;
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite start-panel weights".into()));
    }
    Ok(WeightedRule {
        nodes: u.iter().map(|&x| h * x.powf(1.0 / w.alpha)).collect(),
        weights: weights.iter().copied().collect(),
    })
}

/// Gauss–Legendre on `[a, b]` with the weight multiplied into the node weights.
pub fn regular_panel(w: &SingularWeight, a: f64, b: f64) -> WeightedRule {
    let (x, gw) = gauss_legendre(PANEL_NODES);
    let len = b - a;
    let nodes: Vec<f64> = x.iter().map(|&t| a + len * t).collect();
    let weights = nodes.iter().zip(&gw).map(|(&s, &g)| g * len * w.value(s)).collect();
    WeightedRule { nodes, weights }
}

/// Composite rule on `[0, panels * h]`.
pub fn composite(w: &SingularWeight, h: f64, panels: usize) -> Result<WeightedRule> {
    if panels == 0 {
        return Err(Error::QuadratureFailure("need at least one panel".into()));
    }
    let mut rule = start_panel(w, h)?;
    for j in 1..panels {
        rule.extend(regular_panel(w, j as f64 * h, (j + 1) as f64 * h));
    }
    Ok(rule)
}
