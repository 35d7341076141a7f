//! Controllability and observability: Gramians on a finite horizon and
//! Kalman rank tests.
//!
//! ```text
//! W_c(T) = ∫_0^T e^{-2ρσ} σ^{2α-2} K(σ) B Bᵀ K(σ)ᵀ dσ,   K(σ) = E_{α,α}(A σ^α)
//! W_o(T) = ∫_0^T e^{-2ρt} (C E_α(A t^α))ᵀ (C E_α(A t^α)) dt
//! ```
//!
//! `σ^{2α-2}` is integrable only for α > 1/2, so `W_c` is refused below that.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::rows_of;
use crate::mlf::{time_argument, MittagLefflerSeries, MlConfig};
use crate::quadrature::{composite, SingularWeight};
use crate::system::{kernel_series, TemperedLinearSystem};

/// Relative eigenvalue threshold below which a Gramian is declared singular.
pub const SINGULARITY_TOL: f64 = 1e-10;
/// Default number of quadrature panels for Gramians.
pub const DEFAULT_QUAD_PANELS: usize = 512;

pub(crate) fn serialize_matrix<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    rows_of(m).serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianKind {
    Controllability,
    Observability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GramianVerdict {
    Nonsingular,
    Singular,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramianReport {
    pub kind: GramianKind,
    pub horizon: f64,
    pub quad_nodes: usize,
    /// Symmetrized matrix `(M + Mᵀ)/2`.
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: DMatrix<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `max/min` eigenvalue, infinite when `min <= 0`.
    pub condition_number: f64,
    /// `max|M - Mᵀ| / max|M|` before symmetrization.
    pub asymmetry: f64,
    pub verdict: GramianVerdict,
}

impl GramianReport {
    fn from_matrix(kind: GramianKind, horizon: f64, quad_nodes: usize, raw: DMatrix<f64>) -> Self {
        let scale = raw.amax();
        let asymmetry = if scale > 0.0 {
            (&raw - raw.transpose()).amax() / scale
        } else {
            0.0
        };
        let matrix = (&raw + raw.transpose()) * 0.5;
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(matrix.clone()).eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        let min_eigenvalue = eigenvalues[0];
        let max_eigenvalue = *eigenvalues.last().unwrap();
        let condition_number = if min_eigenvalue > 0.0 {
            max_eigenvalue / min_eigenvalue
        } else {
            f64::INFINITY
        };
        let verdict = if max_eigenvalue > 0.0 && min_eigenvalue > SINGULARITY_TOL * max_eigenvalue {
            GramianVerdict::Nonsingular
        } else {
            GramianVerdict::Singular
        };
        GramianReport {
            kind,
            horizon,
            quad_nodes,
            matrix,
            eigenvalues,
            min_eigenvalue,
            max_eigenvalue,
            condition_number,
            asymmetry,
            verdict,
        }
    }

    pub fn is_nonsingular(&self) -> bool {
        self.verdict == GramianVerdict::Nonsingular
    }
}

fn check_horizon(horizon: f64, quad_nodes: usize) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if quad_nodes == 0 {
        return Err(Error::InvalidParameter("quad_nodes must be at least 1".into()));
    }
    Ok(())
}

/// Controllability Gramian on `[0, horizon]` with `quad_nodes` panels.
pub fn controllability_gramian(sys: &TemperedLinearSystem, horizon: f64, quad_nodes: usize) -> Result<GramianReport> {
    let alpha = sys.alpha();
    if alpha <= 0.5 {
        return Err(Error::AlphaOutOfRange {
            alpha,
            range: "alpha > 1/2 for the controllability Gramian",
        });
    }
    check_horizon(horizon, quad_nodes)?;
    let weight = SingularWeight::new(2.0 * sys.rho(), 2.0 * alpha - 1.0, alpha)?;
    let rule = composite(&weight, horizon / quad_nodes as f64, quad_nodes)?;
    let kernel = kernel_series(sys, horizon)?;
    let n = sys.state_dim();
    let mut w = DMatrix::zeros(n, n);
    for (&s, &q) in rule.nodes.iter().zip(&rule.weights) {
        let kb = kernel.at_time(s)?;
        w.gemm(q, &kb, &kb.transpose(), 1.0);
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite Gramian entries".into()));
    }
    Ok(GramianReport::from_matrix(GramianKind::Controllability, horizon, quad_nodes, w))
}

/// Observability Gramian on `[0, horizon]` with `quad_nodes` panels.
pub fn observability_gramian(sys: &TemperedLinearSystem, horizon: f64, quad_nodes: usize) -> Result<GramianReport> {
    check_horizon(horizon, quad_nodes)?;
    let alpha = sys.alpha();
    let weight = SingularWeight::new(2.0 * sys.rho(), 1.0, alpha)?;
    let rule = composite(&weight, horizon / quad_nodes as f64, quad_nodes)?;
    let series = MittagLefflerSeries::projected(
        alpha,
        1.0,
        sys.a(),
        Some(sys.c()),
        None,
        time_argument(horizon, alpha),
        &MlConfig::default(),
    )?;
    let n = sys.state_dim();
    let mut w = DMatrix::zeros(n, n);
    for (&t, &q) in rule.nodes.iter().zip(&rule.weights) {
        let ce = series.at_time(t)?;
        w.gemm(q, &ce.transpose(), &ce, 1.0);
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite Gramian entries".into()));
    }
    Ok(GramianReport::from_matrix(GramianKind::Observability, horizon, quad_nodes, w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankVerdict {
    Controllable,
    NotControllable,
    Observable,
    NotObservable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    #[serde(serialize_with = "serialize_matrix")]
    pub block_matrix: DMatrix<f64>,
    /// Non-increasing.
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    pub numerical_rank: usize,
    pub full_rank_required: usize,
    pub verdict: RankVerdict,
}

impl RankReport {
    fn new(block_matrix: DMatrix<f64>, required: usize, yes: RankVerdict, no: RankVerdict) -> Self {
        let mut singular_values: Vec<f64> = block_matrix.clone().svd(false, false).singular_values.iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        let dims = block_matrix.nrows().max(block_matrix.ncols()) as f64;
        let tolerance = f64::EPSILON * singular_values.first().copied().unwrap_or(0.0) * dims;
        let numerical_rank = singular_values.iter().filter(|&&s| s > tolerance).count();
        let verdict = if numerical_rank == required { yes } else { no };
        RankReport {
            block_matrix,
            singular_values,
            tolerance,
            numerical_rank,
            full_rank_required: required,
            verdict,
        }
    }

    pub fn is_full_rank(&self) -> bool {
        self.numerical_rank == self.full_rank_required
    }
}

/// Rank of `[B, AB, …, A^{n-1}B]`.
pub fn kalman_controllability(sys: &TemperedLinearSystem) -> RankReport {
    let (n, m) = (sys.state_dim(), sys.input_dim());
    let mut k = DMatrix::zeros(n, n * m);
    let mut block = sys.b().clone();
    for i in 0..n {
        k.view_mut((0, i * m), (n, m)).copy_from(&block);
        block = sys.a() * block;
    }
    RankReport::new(k, n, RankVerdict::Controllable, RankVerdict::NotControllable)
}

/// Rank of `[C; CA; …; CA^{n-1}]`.
pub fn kalman_observability(sys: &TemperedLinearSystem) -> RankReport {
    let (n, p) = (sys.state_dim(), sys.output_dim());
    let mut q = DMatrix::zeros(n * p, n);
    let mut block = sys.c().clone();
    for i in 0..n {
        q.view_mut((i * p, 0), (p, n)).copy_from(&block);
        block *= sys.a();
    }
    RankReport::new(q, n, RankVerdict::Observable, RankVerdict::NotObservable)
}
