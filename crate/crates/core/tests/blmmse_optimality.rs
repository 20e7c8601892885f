//! The Bussgang LMMSE matrix against random perturbations on a tiny
//! instance, scored by empirical MSE over common Monte-Carlo draws.

use onebit_rof::estimators::{blmmse_build, Blmmse};
use onebit_rof::model::{
    build_fourier_operator, build_upconversion, qpsk_pilots, simulate_model2, Draws, ForwardOperator, Observation,
    C64,
};
use onebit_rof::rng;
use nalgebra::DMatrix;
use rand::Rng;

fn tiny_op() -> ForwardOperator {
    ForwardOperator::new(
        build_fourier_operator(4, 1).unwrap(),
        build_upconversion(4, 2.4e9, 1e10).unwrap(),
        qpsk_pilots(1, 2, 1.0, 5),
    )
    .unwrap()
}

fn empirical_mse(w: &DMatrix<C64>, draws: &[(Vec<C64>, Observation)]) -> f64 {
    let est = Blmmse::from_matrix(w.clone());
    draws
        .iter()
        .map(|(h, obs)| {
            est.estimate(obs)
                .iter()
                .zip(h)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        / draws.len() as f64
}

#[test]
fn blmmse_beats_random_perturbations() {
    let op = tiny_op();
    let (n0, ed) = (0.1, 0.4);
    let bl = blmmse_build(&op, n0, ed).unwrap();
    let draws: Vec<(Vec<C64>, Observation)> = (0..100_000u64)
        .map(|i| {
            let dr = Draws::new(&mut rng::stream(42, &[i]), &op);
            let obs = simulate_model2(&op, &dr.h, &dr.noise(n0), &dr.dither(ed));
            (dr.h, obs)
        })
        .collect();
    let base = empirical_mse(bl.matrix(), &draws);
    // the model-based prediction is the same quantity in expectation
    assert!((base - bl.predicted_mse()).abs() < 0.02 * bl.predicted_mse(), "{base} vs {}", bl.predicted_mse());

    let scale = bl.matrix().iter().map(|v| v.norm()).fold(0.0, f64::max) * 0.1;
    let mut r = rng::stream(43, &[]);
    for trial in 0..20 {
        let delta = DMatrix::from_fn(bl.matrix().nrows(), bl.matrix().ncols(), |_, _| {
            C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) * scale
        });
        let perturbed = empirical_mse(&(bl.matrix() + delta), &draws);
        assert!(perturbed > base, "trial {trial}: {perturbed} <= {base}");
    }
}

#[test]
fn normal_equations_hold() {
    for (n0, ed) in [(0.0, 0.3), (0.1, 0.4), (1.0, 1e-3)] {
        let parts = Blmmse::build_parts(&tiny_op(), n0, ed).unwrap();
        assert!(parts.normal_equation_residual() <= 1e-8);
    }
}

#[test]
fn degenerate_covariance_is_rejected() {
    assert!(blmmse_build(&tiny_op(), 0.0, 0.0).is_err());
}
