//! Reverse pass against finite differences, optimizer properties, and
//! end-to-end training behavior.

use onebit_rof::config::SystemConfig;
use onebit_rof::estimators::UnfoldedParams;
use onebit_rof::experiments::{dither_point, evaluate};
use onebit_rof::model::{simulate_model1, Draws, ForwardOperator};
use onebit_rof::rng;
use onebit_rof::training::{adam_step, backward, batch_loss, loss, train, AdamState, TrainSample};
use rand::Rng;

const ED: f64 = 0.12;

fn batch(op: &ForwardOperator, seed: u64, size: u64) -> Vec<TrainSample> {
    (0..size)
        .map(|i| {
            let dr = Draws::new(&mut rng::stream(seed, &[i]), op);
            TrainSample {
                obs: simulate_model1(op, &dr.h, &dr.dither(ED)),
                h: dr.h,
            }
        })
        .collect()
}

fn random_params(r: &mut impl Rng, layers: usize) -> UnfoldedParams {
    UnfoldedParams {
        alpha: (0..layers).map(|_| r.random_range(0.02..0.4)).collect(),
        beta: (0..layers).map(|_| r.random_range(2.0..7.0)).collect(),
    }
}

#[test]
fn backward_matches_finite_differences_on_100_batches() {
    let op = ForwardOperator::from_config(&SystemConfig::default()).unwrap();
    let mut r = rng::stream(21, &[]);
    let mut worst = 0.0f64;
    for b in 0..100 {
        let data = batch(&op, 1000 + b, 4);
        let params = random_params(&mut r, 7);
        let g = backward(&params, &op, &data).unwrap();
        assert!((g.loss - batch_loss(&params, &op, &data)).abs() < 1e-12 * g.loss);
        let flat = params.flatten();
        let step = 1e-5;
        let fd: Vec<f64> = (0..flat.len())
            .map(|k| {
                let (mut p, mut m) = (flat.clone(), flat.clone());
                p[k] += step;
                m[k] -= step;
                (batch_loss(&UnfoldedParams::from_flat(&p), &op, &data)
                    - batch_loss(&UnfoldedParams::from_flat(&m), &op, &data))
                    / (2.0 * step)
            })
            .collect();
        // β₁ multiplies x = 0 and has an exactly zero derivative; components
        // far below the largest one are compared on that scale instead
        let scale = 1e-3 * fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for k in 0..fd.len() {
            worst = worst.max((g.grad[k] - fd[k]).abs() / fd[k].abs().max(scale));
        }
    }
    assert!(worst <= 1e-5, "worst relative error {worst:e}");
}

#[test]
fn zero_steps_make_slopes_unreachable() {
    let op = ForwardOperator::from_config(&SystemConfig::default()).unwrap();
    let data = batch(&op, 7, 4);
    let params = UnfoldedParams::new(7, 0.0, 5.0);
    let g = backward(&params, &op, &data).unwrap();
    for l in 0..7 {
        assert_eq!(g.grad[2 * l + 1], 0.0);
    }
    // the first slope acts on x = 0 whatever the step sizes
    let g = backward(&UnfoldedParams::new(7, 0.2, 5.0), &op, &data).unwrap();
    assert_eq!(g.grad[1], 0.0);
}

#[test]
fn duplicated_batch_has_same_gradient() {
    let op = ForwardOperator::from_config(&SystemConfig::default()).unwrap();
    let data = batch(&op, 8, 3);
    let doubled: Vec<TrainSample> = data.iter().chain(&data).cloned().collect();
    let params = UnfoldedParams::new(7, 0.15, 4.0);
    let a = backward(&params, &op, &data).unwrap();
    let b = backward(&params, &op, &doubled).unwrap();
    for (x, y) in a.grad.iter().zip(&b.grad) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-9));
    }
}

#[test]
fn loss_is_a_norm() {
    let mut r = rng::stream(22, &[]);
    let mut v = || -> Vec<_> {
        (0..9)
            .map(|_| onebit_rof::model::C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect()
    };
    for _ in 0..100 {
        let (a, b, c) = (v(), v(), v());
        assert!(loss(&a, &c) <= loss(&a, &b) + loss(&b, &c) + 1e-12);
    }
}

#[test]
fn adam_properties() {
    let mut params = vec![1.0, -2.0];
    let mut st = AdamState::new(2);
    for _ in 0..10 {
        adam_step(&mut st, &mut params, &[0.0, 0.0], 0.01);
    }
    assert_eq!(params, vec![1.0, -2.0]);

    let mut params = vec![0.0; 3];
    let mut st = AdamState::new(3);
    adam_step(&mut st, &mut params, &[0.5, -3.0, 1e3], 0.002);
    for p in &params {
        assert!((p.abs() - 0.002).abs() < 1e-6);
    }
    assert!(params[0] < 0.0 && params[1] > 0.0);
    for _ in 0..50 {
        adam_step(&mut st, &mut params, &[0.5, -3.0, 1e3], 0.002);
    }
    assert!(params[0] < -0.05 && params[1] > 0.05);
}

fn small_cfg(epochs: usize) -> SystemConfig {
    let mut cfg = SystemConfig::default();
    cfg.training.epochs = epochs;
    cfg.experiments.test_size = 1000;
    cfg
}

#[test]
fn zero_epochs_return_initial_values() {
    let cfg = small_cfg(0);
    let op = ForwardOperator::from_config(&cfg).unwrap();
    let pt = dither_point(&cfg, &op, 9.2).unwrap();
    let out = train(&cfg, &pt.train, &[1]).unwrap();
    assert_eq!(out.params, UnfoldedParams::new(7, 1.0, 5.0));
    assert!(out.log.is_empty());
}

#[test]
fn training_is_deterministic_and_makes_progress() {
    let cfg = small_cfg(30);
    let op = ForwardOperator::from_config(&cfg).unwrap();
    let pt = dither_point(&cfg, &op, 9.2).unwrap();
    let a = train(&cfg, &pt.train, &[1]).unwrap();
    let b = train(&cfg, &pt.train, &[1]).unwrap();
    assert_eq!(a.params, b.params);
    let losses: Vec<f64> = a.log.iter().map(|r| r.loss).collect();
    assert_eq!(losses, b.log.iter().map(|r| r.loss).collect::<Vec<_>>());
    assert!(losses.last().unwrap() < losses.first().unwrap());
    for r in &a.log {
        assert_eq!(r.lr, 0.002 * 0.95f64.powi((r.epoch / 100) as i32));
    }

    // a different stream gives a different network
    let c = train(&cfg, &pt.train, &[2]).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn trained_network_beats_zero_estimate_by_5_db() {
    // the reduced 200-epoch budget
    let cfg = small_cfg(200);
    let op = ForwardOperator::from_config(&cfg).unwrap();
    let pt = dither_point(&cfg, &op, 9.2).unwrap();
    let out = train(&cfg, &pt.train, &[3]).unwrap();
    let ev = evaluate(&cfg, &pt, &out.params, &[3]);
    assert!(ev.dnn.db() <= -5.0, "{} dB", ev.dnn.db());
}
