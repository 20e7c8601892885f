//! Quick oracle and invariant checks run by the `selftest` subcommand.
//!
//! Each check compares the implementation against an independent reference
//! (finite differences, closed forms, model reductions) on a handful of
//! seeded instances; the full-size versions live in the test suite.

use crate::config::SystemConfig;
use crate::error::Result;
use crate::estimators::{
    blmmse_build, gradient_wirtinger, objective_exact, objective_smoothed, unfolded_forward, Blmmse, MlProblem,
    UnfoldedParams,
};
use crate::model::{
    build_fourier_operator, build_upconversion, qpsk_pilots, simulate_model1, simulate_model2, simulate_model3,
    Draws, ForwardOperator, Model3Link, C64,
};
use crate::rng;
use crate::training::{backward, batch_loss, TrainSample};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        passed: value <= limit,
        detail: format!("{value:.3e} (limit {limit:.0e})"),
    }
}

/// Central difference of `f` along the real and imaginary part of entry `k`.
fn fd_complex(f: &dyn Fn(&[C64]) -> f64, h: &[C64], k: usize, step: f64) -> C64 {
    let mut hp = h.to_vec();
    let mut hm = h.to_vec();
    hp[k].re += step;
    hm[k].re -= step;
    let re = (f(&hp) - f(&hm)) / (2.0 * step);
    hp[k].re -= step;
    hm[k].re += step;
    hp[k].im += step;
    hm[k].im -= step;
    let im = (f(&hp) - f(&hm)) / (2.0 * step);
    C64::new(re, im)
}

pub fn run_selftest(cfg: &SystemConfig) -> Result<Vec<Check>> {
    let op = ForwardOperator::from_config(cfg)?;
    let ed = 0.12;
    let mut out = Vec::new();

    // smoothed-objective gradient against finite differences
    let mut worst = 0.0f64;
    for i in 0..5 {
        let mut r = rng::stream(cfg.seed, &[rng::kind::SELFTEST, 1, i]);
        let dr = Draws::new(&mut r, &op);
        let obs = simulate_model1(&op, &dr.h, &dr.dither(ed));
        let prob = MlProblem::new(&op, &obs, ed)?;
        let h: Vec<C64> = dr.h.iter().map(|v| v * 0.3).collect();
        let g = gradient_wirtinger(&h, &prob, prob.smoothed_slope());
        let f = |x: &[C64]| objective_smoothed(x, &prob);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..h.len() {
            let fd = fd_complex(&f, &h, k, 1e-5);
            num += (g[k] * 2.0 - fd).norm_sqr();
            den += fd.norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    out.push(check("gradient_wirtinger vs finite differences", worst, 1e-5));

    // reverse pass against finite differences of the batch loss
    let mut worst = 0.0f64;
    for i in 0..2 {
        let batch: Vec<TrainSample> = (0..4)
            .map(|j| {
                let mut r = rng::stream(cfg.seed, &[rng::kind::SELFTEST, 2, i, j]);
                let dr = Draws::new(&mut r, &op);
                TrainSample {
                    obs: simulate_model1(&op, &dr.h, &dr.dither(ed)),
                    h: dr.h,
                }
            })
            .collect();
        let params = UnfoldedParams {
            alpha: (0..cfg.estimator.layers).map(|l| 0.1 + 0.02 * l as f64).collect(),
            beta: vec![3.5; cfg.estimator.layers],
        };
        let g = backward(&params, &op, &batch)?.grad;
        let flat = params.flatten();
        let fd: Vec<f64> = (0..flat.len())
            .map(|k| {
                let (mut p, mut m) = (flat.clone(), flat.clone());
                p[k] += 1e-5;
                m[k] -= 1e-5;
                (batch_loss(&UnfoldedParams::from_flat(&p), &op, &batch)
                    - batch_loss(&UnfoldedParams::from_flat(&m), &op, &batch))
                    / 2e-5
            })
            .collect();
        let scale = 1e-3 * fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for k in 0..fd.len() {
            worst = worst.max((g[k] - fd[k]).abs() / fd[k].abs().max(scale));
        }
    }
    out.push(check("backward vs finite differences", worst, 1e-5));

    // first layer from h = 0 is (α/2)·Mᴴz; objective at 0 is N·Np·ln 2
    let mut r = rng::stream(cfg.seed, &[rng::kind::SELFTEST, 3]);
    let dr = Draws::new(&mut r, &op);
    let obs = simulate_model1(&op, &dr.h, &dr.dither(ed));
    let alpha = 0.37;
    let h1 = unfolded_forward(&UnfoldedParams::new(1, alpha, 4.0), &op, &obs);
    let zf: Vec<f64> = obs.z().iter().map(|&z| z as f64).collect();
    let mut mz = vec![C64::new(0.0, 0.0); op.cols()];
    op.adjoint_re(&zf, &mut mz);
    let dev = h1.iter().zip(&mz).map(|(a, b)| (a - b * (alpha / 2.0)).norm()).fold(0.0, f64::max);
    out.push(check("first layer equals (alpha/2) M^H z", dev, 1e-12));
    let prob = MlProblem::new(&op, &obs, ed)?;
    let zero = vec![C64::new(0.0, 0.0); op.cols()];
    let ln2 = op.rows() as f64 * std::f64::consts::LN_2;
    let dev = (objective_exact(&zero, &prob) - ln2).abs().max((objective_smoothed(&zero, &prob) - ln2).abs());
    out.push(check("objective at zero equals N Np ln 2", dev / ln2, 1e-12));

    // model reductions under common random numbers
    let mut mismatches = 0usize;
    for i in 0..20 {
        let mut r = rng::stream(cfg.seed, &[rng::kind::SELFTEST, 4, i]);
        let dr = Draws::new(&mut r, &op);
        let (w, d) = (dr.noise(cfg.n0()), dr.dither(ed));
        let m2 = simulate_model2(&op, &dr.h, &w, &d);
        let m3 = simulate_model3(&op, &dr.h, &w, &d, &Model3Link::ideal(), &mut r);
        let m2_quiet = simulate_model2(&op, &dr.h, &dr.noise(0.0), &d);
        let m1 = simulate_model1(&op, &dr.h, &d);
        mismatches += (m2 != m3) as usize + (m2_quiet != m1) as usize;
    }
    out.push(check("model reduction chain (mismatching observations)", mismatches as f64, 0.0));

    // Bussgang construction on a small instance
    let small = ForwardOperator::new(
        build_fourier_operator(4, 1)?,
        build_upconversion(4, cfg.system.fc_hz, cfg.system.fs_hz)?,
        qpsk_pilots(1, 2, 1.0, 3),
    )?;
    let parts = Blmmse::build_parts(&small, 0.05, 0.3)?;
    let diag = (0..parts.c_z.nrows()).map(|i| (parts.c_z[(i, i)] - 1.0).abs()).fold(0.0, f64::max);
    out.push(check("arcsine covariance has unit diagonal", diag, 1e-14));
    out.push(check("BLMMSE normal-equation residual", parts.normal_equation_residual(), 1e-8));
    let full = blmmse_build(&op, cfg.n0(), cfg.ed())?;
    out.push(Check {
        name: "BLMMSE predicted MSE below the zero estimator",
        passed: full.predicted_mse() < (op.cols()) as f64,
        detail: format!("{:.4} < {}", full.predicted_mse(), op.cols()),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_selftest(&SystemConfig::default()).unwrap();
        for c in &checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
