use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::backward::{reduce, sample_loss_grad};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::estimators::UnfoldedParams;
use crate::model::SampleSource;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Mean loss over the epoch's batches, each taken before its update.
    pub loss: f64,
    /// Wall time since the start of training.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: UnfoldedParams,
    pub log: Vec<TrainRecord>,
}

/// Trains the unfolded estimator on fresh batches from `source`.
///
/// One epoch is `steps_per_epoch` Adam steps, each on a batch of `batch` new
/// samples. Sample `i` (counted across the epoch) of epoch `e` draws from the stream
/// `(cfg.seed, [TRAIN, stream.., e, i])`, so the result depends only on the
/// config, the seed and `stream`.
pub fn train(cfg: &SystemConfig, source: &SampleSource, stream: &[u64]) -> Result<TrainOutcome> {
    let t = &cfg.training;
    let mut params = UnfoldedParams::new(cfg.estimator.layers, t.alpha_init, t.beta_init);
    let mut flat = params.flatten();
    let mut adam = AdamState::new(flat.len());
    let mut log = Vec::with_capacity(t.epochs);
    let start = Instant::now();

    let mut path = Vec::with_capacity(stream.len() + 3);
    path.push(rng::kind::TRAIN);
    path.extend_from_slice(stream);

    for epoch in 0..t.epochs {
        let lr = t.learning_rate(epoch);
        let mut epoch_loss = 0.0;
        for step in 0..t.steps_per_epoch {
            let first = step * t.batch;
            let per_sample: Vec<(f64, Vec<f64>)> = (first..first + t.batch)
                .into_par_iter()
                .map(|i| {
                    let mut p = path.clone();
                    p.extend_from_slice(&[epoch as u64, i as u64]);
                    let mut r = rng::stream(cfg.seed, &p);
                    let (h, obs) = source.sample(&mut r);
                    sample_loss_grad(&params, &source.op, &obs, &h)
                })
                .collect();
            let g = reduce(per_sample, params.layers())?;
            if !g.loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            epoch_loss += g.loss;
            adam_step(&mut adam, &mut flat, &g.grad, lr);
            params = UnfoldedParams::from_flat(&flat);
        }
        log.push(TrainRecord {
            epoch,
            lr,
            loss: epoch_loss / t.steps_per_epoch as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(TrainOutcome { params, log })
}

/// Run log as CSV. Wall time is only written when `with_time` is set, which
/// keeps the default log byte-reproducible.
pub fn write_train_log<W: Write>(mut out: W, log: &[TrainRecord], with_time: bool) -> Result<()> {
    if with_time {
        writeln!(out, "epoch,lr,loss,seconds")?;
    } else {
        writeln!(out, "epoch,lr,loss")?;
    }
    for r in log {
        if with_time {
            writeln!(out, "{},{:?},{:?},{:.3}", r.epoch, r.lr, r.loss, r.seconds)?;
        } else {
            writeln!(out, "{},{:?},{:?}", r.epoch, r.lr, r.loss)?;
        }
    }
    Ok(())
}
