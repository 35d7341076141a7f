use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use statrs::function::gamma::gamma;
use tempered_core::system::{ConstantInput, FnInput, SumInput, TimeGrid, ZeroInput};
use tempered_core::{
    chua_linearized, controllability_gramian, forced_response_at, homogeneous_state, kalman_controllability,
    kalman_observability, ml_scalar, observability_gramian, solve, tempered_integral, ChuaParams, MlConfig,
    SampledFunction, TemperedLinearSystem, TemperedParams,
};

fn matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, r * c).prop_map(move |v| DMatrix::from_row_slice(r, c, &v))
}

fn system(n: usize) -> impl Strategy<Value = TemperedLinearSystem> {
    (matrix(n, n), matrix(n, 1), matrix(1, n), 0.55..0.95f64, 0.0..1.0f64)
        .prop_map(|(a, b, c, alpha, rho)| TemperedLinearSystem::new(alpha, rho, a, b, Some(c), None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponential_addition(x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let cfg = MlConfig::default();
        let lhs = ml_scalar(1.0, 1.0, x, &cfg).unwrap() * ml_scalar(1.0, 1.0, y, &cfg).unwrap();
        let rhs = ml_scalar(1.0, 1.0, x + y, &cfg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs);
    }

    #[test]
    fn mittag_leffler_recurrence(alpha in 0.3..1.5f64, beta in 0.5..2.0f64, z in -3.0..3.0f64) {
        // E_{α,β}(z) = 1/Γ(β) + z E_{α,α+β}(z)
        let cfg = MlConfig::default();
        let lhs = ml_scalar(alpha, beta, z, &cfg).unwrap();
        let shifted = ml_scalar(alpha, alpha + beta, z, &cfg).unwrap();
        let rhs = 1.0 / gamma(beta) + z * shifted;
        let scale = lhs.abs().max((z * shifted).abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn solution_is_linear(
        y1 in prop::collection::vec(-3.0..3.0f64, 3),
        y2 in prop::collection::vec(-3.0..3.0f64, 3),
        k in -2.0..2.0f64,
        u in -2.0..2.0f64,
    ) {
        let sys = chua_linearized(&ChuaParams::default(), 0.7, 0.5).unwrap();
        let grid = TimeGrid::uniform(1.0, 32).unwrap();
        let (y1, y2) = (DVector::from_vec(y1), DVector::from_vec(y2));
        let c = ConstantInput(DVector::from_element(1, u));
        let w = FnInput::new(1, move |t: f64| DVector::from_element(1, k * t));
        let both = SumInput(&c, &w);
        let a = solve(&sys, &y1, &c, &grid).unwrap();
        let b = solve(&sys, &(&y2 * k), &w, &grid).unwrap();
        let s = solve(&sys, &(&y1 + &y2 * k), &both, &grid).unwrap();
        prop_assert!((s.final_state() - a.final_state() - b.final_state()).amax() <= 1e-11);
    }

    #[test]
    fn gramians_are_symmetric_and_psd(sys in system(3)) {
        let t = 1.0;
        for w in [controllability_gramian(&sys, t, 64).unwrap(), observability_gramian(&sys, t, 64).unwrap()] {
            prop_assert!(w.asymmetry <= 1e-12);
            prop_assert!(w.min_eigenvalue >= -1e-10 * w.max_eigenvalue.abs().max(1e-300));
        }
    }

    #[test]
    fn rank_survives_similarity(sys in system(3), p in matrix(3, 3)) {
        let t = DMatrix::<f64>::identity(3, 3) + p * 0.3;
        let ti = t.clone().try_inverse().unwrap();
        let sim = TemperedLinearSystem::new(sys.alpha(), sys.rho(), &ti * sys.a() * &t, &ti * sys.b(), Some(sys.c() * &t), None).unwrap();
        prop_assert_eq!(kalman_controllability(&sim).numerical_rank, kalman_controllability(&sys).numerical_rank);
        prop_assert_eq!(kalman_observability(&sim).numerical_rank, kalman_observability(&sys).numerical_rank);
    }

    #[test]
    fn tempered_integral_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, alpha in 0.2..0.9f64, rho in 0.0..2.0f64) {
        let g: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let p = TemperedParams::new(alpha, rho).unwrap();
        let f = SampledFunction::from_scalar_fn(g.clone(), |t| t.exp()).unwrap();
        let h = SampledFunction::from_scalar_fn(g.clone(), |t| 1.0 - t).unwrap();
        let fh = SampledFunction::from_scalar_fn(g, |t| a * t.exp() + b * (1.0 - t)).unwrap();
        let (i, j, k) = (tempered_integral(&f, &p).unwrap(), tempered_integral(&h, &p).unwrap(), tempered_integral(&fh, &p).unwrap());
        for n in 0..k.len() {
            prop_assert!((&k.values()[n] - &i.values()[n] * a - &j.values()[n] * b).amax() <= 1e-12);
        }
    }

    #[test]
    fn trivial_identities(sys in system(2), y in prop::collection::vec(-5.0..5.0f64, 2), t in 0.01..2.0f64) {
        let y = DVector::from_vec(y);
        prop_assert_eq!(homogeneous_state(&sys, &y, 0.0).unwrap(), y.clone());
        prop_assert_eq!(forced_response_at(&sys, &ZeroInput(1), t).unwrap(), DVector::zeros(2));
        prop_assert_eq!(homogeneous_state(&sys, &DVector::zeros(2), t).unwrap(), DVector::zeros(2));
    }
}
