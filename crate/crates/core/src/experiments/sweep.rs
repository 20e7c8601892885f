use rayon::prelude::*;

use super::nmse::NmseAccumulator;
use super::points::{dither_point, snr_point, OperatingPoint};
use super::{Estimator, Scenario, SweepResult};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::estimators::{unfolded_forward, UnfoldedParams};
use crate::model::ForwardOperator;
use crate::rng;
use crate::training::{train, TrainOutcome};

/// Stream tags separating the sweeps; test samples of all Es/N0 scenarios
/// share theirs so scenarios are compared on common draws.
const DITHER_SWEEP: u64 = 1;
const SNR_SWEEP: u64 = 2;
const REFERENCE: u64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Evaluation {
    pub dnn: NmseAccumulator,
    pub blmmse: NmseAccumulator,
}

/// Tests both estimators on `cfg.experiments.test_size` samples of the
/// point's test model, sample `i` from stream `[TEST, stream.., i]`.
pub fn evaluate(cfg: &SystemConfig, point: &OperatingPoint, params: &UnfoldedParams, stream: &[u64]) -> Evaluation {
    evaluate_with(cfg, point, Some(params), stream)
}

/// [`evaluate`] for the baseline alone; same samples.
pub fn evaluate_blmmse(cfg: &SystemConfig, point: &OperatingPoint, stream: &[u64]) -> NmseAccumulator {
    evaluate_with(cfg, point, None, stream).blmmse
}

fn evaluate_with(
    cfg: &SystemConfig,
    point: &OperatingPoint,
    params: Option<&UnfoldedParams>,
    stream: &[u64],
) -> Evaluation {
    let mut path = vec![rng::kind::TEST];
    path.extend_from_slice(stream);
    let per_sample: Vec<Evaluation> = (0..cfg.experiments.test_size as u64)
        .into_par_iter()
        .map(|i| {
            let mut p = path.clone();
            p.push(i);
            let mut ev = Evaluation::default();
            let (h, obs) = point.test.sample(&mut rng::stream(cfg.seed, &p));
            if let Some(params) = params {
                ev.dnn.add(&h, &unfolded_forward(params, &point.test.op, &obs));
            }
            ev.blmmse.add(&h, &point.blmmse.estimate(&obs));
            ev
        })
        .collect();
    let mut total = Evaluation::default();
    for ev in &per_sample {
        total.dnn.merge(&ev.dnn);
        total.blmmse.merge(&ev.blmmse);
    }
    total
}

fn row(cfg: &SystemConfig, sweep_db: f64, ev: &Evaluation) -> SweepResult {
    SweepResult {
        sweep_db,
        nmse_dnn_db: ev.dnn.db(),
        nmse_blmmse_db: ev.blmmse.db(),
        n_test: ev.dnn.count,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    }
}

/// Grid value with the lowest NMSE for `est` (first one on ties).
pub fn optimum(rows: &[SweepResult], est: Estimator) -> Option<f64> {
    rows.iter()
        .filter(|r| !r.nmse(est).is_nan())
        .min_by(|a, b| a.nmse(est).total_cmp(&b.nmse(est)))
        .map(|r| r.sweep_db)
}

#[derive(Debug, Clone)]
pub struct DitherSweep {
    pub rows: Vec<SweepResult>,
    /// Trained network of every grid point.
    pub params: Vec<UnfoldedParams>,
    pub best_dnn_db: f64,
    pub best_blmmse_db: f64,
}

/// Model-1 sweep over Es/Ed: train, build the baseline and test at every
/// point of `cfg.experiments.dither_grid`.
pub fn run_dither_sweep(cfg: &SystemConfig) -> Result<DitherSweep> {
    let op = ForwardOperator::from_config(cfg)?;
    let grid = cfg.experiments.dither_grid.values();
    let results: Vec<Result<(SweepResult, UnfoldedParams)>> = grid
        .par_iter()
        .enumerate()
        .map(|(k, &ratio_db)| {
            let point = dither_point(cfg, &op, ratio_db)?;
            let stream = [DITHER_SWEEP, k as u64];
            let trained = train(cfg, &point.train, &stream)?;
            let ev = evaluate(cfg, &point, &trained.params, &stream);
            Ok((row(cfg, ratio_db, &ev), trained.params))
        })
        .collect();
    let (rows, params): (Vec<_>, Vec<_>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    Ok(DitherSweep {
        best_dnn_db: optimum(&rows, Estimator::Dnn).expect("non-empty grid"),
        best_blmmse_db: optimum(&rows, Estimator::Blmmse).expect("non-empty grid"),
        rows,
        params,
    })
}

/// Model-1 training at Es/Ed = `ratio_db`. When the ratio is a point of the
/// dither grid this reproduces the network the dither sweep trained there.
pub fn m1_reference_training(cfg: &SystemConfig, ratio_db: f64) -> Result<TrainOutcome> {
    let op = ForwardOperator::from_config(cfg)?;
    let point = dither_point(cfg, &op, ratio_db)?;
    let grid = cfg.experiments.dither_grid.values();
    let stream = match grid.iter().position(|&g| (g - ratio_db).abs() <= 1e-9 * (1.0 + g.abs())) {
        Some(k) => vec![DITHER_SWEEP, k as u64],
        None => vec![REFERENCE],
    };
    train(cfg, &point.train, &stream)
}

/// Es/N0 sweep for `scenario` at Es/Ed = `ratio_db`.
///
/// The Model-1 scenarios use `m1_params` when given (otherwise they train
/// the reference network); the Model-3 scenario trains at every point.
pub fn run_snr_sweep(
    cfg: &SystemConfig,
    scenario: Scenario,
    ratio_db: f64,
    m1_params: Option<&UnfoldedParams>,
) -> Result<Vec<SweepResult>> {
    let op = ForwardOperator::from_config(cfg)?;
    let shared = match (scenario, m1_params) {
        (Scenario::TrainM3TestM3, _) => None,
        (_, Some(p)) => Some(p.clone()),
        (_, None) => Some(m1_reference_training(cfg, ratio_db)?.params),
    };
    let grid = cfg.experiments.snr_grid.values();
    grid.par_iter()
        .enumerate()
        .map(|(k, &snr_db)| {
            let point = snr_point(cfg, &op, scenario, snr_db, ratio_db)?;
            let stream = [SNR_SWEEP, k as u64];
            let params = match &shared {
                Some(p) => p.clone(),
                None => train(cfg, &point.train, &stream)?.params,
            };
            let ev = evaluate(cfg, &point, &params, &stream);
            Ok(row(cfg, snr_db, &ev))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[(f64, f64, f64)]) -> Vec<SweepResult> {
        v.iter()
            .map(|&(x, d, b)| SweepResult {
                sweep_db: x,
                nmse_dnn_db: d,
                nmse_blmmse_db: b,
                n_test: 1,
                seed: 0,
                config_hash: String::new(),
            })
            .collect()
    }

    #[test]
    fn optimum_picks_first_minimum() {
        let r = rows(&[(0.0, -1.0, -2.0), (1.0, -3.0, -2.0), (2.0, -3.0, -1.0)]);
        assert_eq!(optimum(&r, Estimator::Dnn), Some(1.0));
        assert_eq!(optimum(&r, Estimator::Blmmse), Some(0.0));
        assert_eq!(optimum(&[], Estimator::Dnn), None);
    }

    #[test]
    fn untrained_evaluation_is_deterministic() {
        let mut cfg = SystemConfig::default();
        cfg.experiments.test_size = 50;
        let op = ForwardOperator::from_config(&cfg).unwrap();
        let pt = dither_point(&cfg, &op, 9.2).unwrap();
        let p = UnfoldedParams::new(7, 0.1, 5.0);
        let a = evaluate(&cfg, &pt, &p, &[9]);
        let b = evaluate(&cfg, &pt, &p, &[9]);
        assert_eq!(a, b);
        assert_eq!(a.dnn.count, 50);
        // a valid LMMSE beats the zero estimator
        assert!(a.blmmse.db() < 0.0);
    }
}
