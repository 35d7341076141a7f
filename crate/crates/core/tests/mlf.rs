use nalgebra::{dmatrix, DMatrix};
use statrs::function::{erf::erfc, gamma::gamma};
use tempered_core::{chua_linearized, ml_matrix, ml_scalar, ChuaParams, Error, MittagLefflerSeries, MlConfig};

fn cfg() -> MlConfig {
    MlConfig::default()
}

fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.abs().row_sum().amax();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let x = a / 2f64.powi(s);
    let mut term = DMatrix::<f64>::identity(a.nrows(), a.nrows());
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &x / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn order_one_is_the_exponential() {
    for k in 0..1000 {
        let z = -10.0 + 20.0 * k as f64 / 999.0;
        let v = ml_scalar(1.0, 1.0, z, &cfg()).unwrap();
        assert!((v - z.exp()).abs() <= 1e-12 * z.exp(), "z = {z}");
    }
}

#[test]
fn order_two_is_cosh() {
    for &x in &[0.1, 1.0, 2.5, 4.0] {
        let v = ml_scalar(2.0, 1.0, x * x, &cfg()).unwrap();
        assert!((v - x.cosh()).abs() <= 1e-13 * x.cosh());
        let w = ml_scalar(2.0, 1.0, -x * x, &cfg()).unwrap();
        assert!((w - x.cos()).abs() <= 1e-13);
    }
}

#[test]
fn order_half_matches_erfc() {
    // E_{1/2}(z) = e^{z^2} erfc(-z)
    for &z in &[-3.0, -1.0, -0.2, 0.5, 2.0, 3.0] {
        let v = ml_scalar(0.5, 1.0, z, &cfg()).unwrap();
        let exact = (z * z).exp() * erfc(-z);
        assert!((v - exact).abs() <= 1e-10 * exact, "z = {z}: {v} vs {exact}");
    }
}

#[test]
fn value_at_zero_is_reciprocal_gamma() {
    for &(a, b) in &[(0.3, 0.7), (0.7, 1.3), (0.9, 2.5), (1.5, 4.2)] {
        let v = ml_scalar(a, b, 0.0, &cfg()).unwrap();
        assert!((v - 1.0 / gamma(b)).abs() <= 1e-14 / gamma(b));
    }
}

#[test]
fn matrix_exponential_of_chua_system() {
    let a = chua_linearized(&ChuaParams::default(), 0.7, 0.5).unwrap().a().clone();
    let e = ml_matrix(1.0, 1.0, &a, &cfg()).unwrap();
    assert!((e - expm(&a)).amax() <= 1e-8);
}

#[test]
fn diagonal_argument_acts_entrywise() {
    let a = dmatrix![-1.5, 0.0, 0.0; 0.0, 0.3, 0.0; 0.0, 0.0, 2.0];
    let e = ml_matrix(0.7, 0.7, &a, &cfg()).unwrap();
    for i in 0..3 {
        let s = ml_scalar(0.7, 0.7, a[(i, i)], &cfg()).unwrap();
        assert!((e[(i, i)] - s).abs() <= 1e-14 * s.abs().max(1.0));
    }
    assert_eq!(e[(0, 1)], 0.0);
}

#[test]
fn similarity_commutes() {
    let a = dmatrix![-2.0, 1.0; 0.5, -1.0];
    let t = dmatrix![1.0, 2.0; 0.0, 1.0];
    let ti = t.clone().try_inverse().unwrap();
    let lhs = ml_matrix(0.8, 1.0, &(&t * &a * &ti), &cfg()).unwrap();
    let rhs = &t * ml_matrix(0.8, 1.0, &a, &cfg()).unwrap() * &ti;
    assert!((lhs - rhs).amax() <= 1e-12);
}

#[test]
fn more_terms_do_not_change_the_result() {
    let a = chua_linearized(&ChuaParams::default(), 0.7, 0.5).unwrap().a() * 0.4;
    let loose = ml_matrix(0.7, 1.0, &a, &cfg()).unwrap();
    let long = MlConfig {
        max_terms: 4000,
        ..MlConfig::default()
    };
    assert_eq!(loose, ml_matrix(0.7, 1.0, &a, &long).unwrap());
}

#[test]
fn large_matrix_powers_do_not_overflow() {
    // A^l overflows near l = 93 here, A^l x^l / Γ stays moderate
    let a = DMatrix::from_diagonal_element(1, 1, 2000.0);
    let s = MittagLefflerSeries::new(0.5, 1.0, &a, 0.0025, &cfg()).unwrap();
    let v = s.eval(0.0025).unwrap()[(0, 0)];
    let exact = 25f64.exp() * erfc(-5.0);
    assert!((v - exact).abs() <= 1e-12 * exact, "{v} vs {exact}");
}

#[test]
fn failures_are_reported() {
    assert!(matches!(ml_scalar(1.0, 1.0, -30.0, &cfg()), Err(Error::PrecisionLoss { .. })));
    assert!(ml_scalar(0.0, 1.0, 1.0, &cfg()).is_err());
    assert!(ml_scalar(0.5, -1.0, 1.0, &cfg()).is_err());
    let tiny = MlConfig {
        max_terms: 3,
        ..MlConfig::default()
    };
    assert!(matches!(ml_scalar(1.0, 1.0, 2.0, &tiny), Err(Error::NonConvergence { .. })));
}
