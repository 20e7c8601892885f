use super::Scenario;
use crate::config::{db_to_lin, AgcPower, BlmmseStats, SnrDither, SystemConfig};
use crate::error::Result;
use crate::estimators::{blmmse_build, Blmmse};
use crate::model::{agc_amplitude, DataModel, ForwardOperator, Gain, Model3Link, SampleSource};

/// Everything needed to train and test at one grid point.
#[derive(Debug, Clone)]
pub struct OperatingPoint {
    pub sweep_db: f64,
    /// Samples the network is trained on.
    pub train: SampleSource,
    /// Samples both estimators are tested on.
    pub test: SampleSource,
    pub blmmse: Blmmse,
}

fn source(op: &ForwardOperator, model: DataModel, n0: f64, ed: f64, link: Model3Link) -> SampleSource {
    SampleSource {
        op: op.clone(),
        model,
        n0,
        ed,
        link,
    }
}

/// Model-1 point at Es/Ed = `ratio_db`, with Es from the config.
pub fn dither_point(cfg: &SystemConfig, op: &ForwardOperator, ratio_db: f64) -> Result<OperatingPoint> {
    let ed = cfg.es() / db_to_lin(ratio_db);
    let src = source(op, DataModel::M1, 0.0, ed, Model3Link::ideal());
    Ok(OperatingPoint {
        sweep_db: ratio_db,
        train: src.clone(),
        test: src,
        blmmse: blmmse_build(op, 0.0, ed)?,
    })
}

/// Point of an Es/N0 sweep with Es/Ed = `ratio_db`.
///
/// Signs are invariant to a common scaling of signal, noise and dither, so
/// the sweep keeps the operator at the configured Es and sets N0 = Es/SNR;
/// absolute power only matters for Model 3, where the waveform is scaled so
/// that its expected power is `rx_power_anchor_dbw + snr_db` dBW. Model-3
/// dither is fixed in absolute terms so that, at the AGC target, the
/// per-sample signal-to-dither ratio equals that of Model 1 at `ratio_db`.
pub fn snr_point(
    cfg: &SystemConfig,
    op: &ForwardOperator,
    scenario: Scenario,
    snr_db: f64,
    ratio_db: f64,
) -> Result<OperatingPoint> {
    let es = cfg.es();
    let ratio = db_to_lin(ratio_db);
    let n0 = es / db_to_lin(snr_db);
    let ed = match cfg.experiments.snr_dither {
        SnrDither::FixedRatio => es / ratio,
        SnrDither::FixedAbsolute => es * db_to_lin(cfg.experiments.snr_grid.hi_db - snr_db) / ratio,
    };
    let m2 = source(op, DataModel::M2, n0, ed, Model3Link::ideal());

    let p_rf_dbw = cfg.agc.rx_power_anchor_dbw + snr_db;
    let rf_scale = (db_to_lin(p_rf_dbw) / op.expected_rf_power(n0)).sqrt();
    let link = Model3Link {
        rf_scale,
        gain: match cfg.experiments.agc_power {
            AgcPower::Measured => Gain::Agc(cfg.agc),
            AgcPower::Expected => Gain::Fixed(agc_amplitude(p_rf_dbw, &cfg.agc)),
        },
        threshold: cfg.comparator.threshold,
    };
    let signal_per_sample = (op.s() * op.ues()) as f64 / op.n() as f64;
    let ed_abs = db_to_lin(cfg.agc.target_dbw) / signal_per_sample / ratio;
    let m3 = source(op, DataModel::M3, n0, ed_abs, link);

    let train = match scenario.train_model() {
        DataModel::M3 => m3.clone(),
        _ => source(op, DataModel::M1, 0.0, es / ratio, Model3Link::ideal()),
    };
    let test = match scenario.test_model() {
        DataModel::M3 => m3,
        _ => m2,
    };
    let blmmse = match (cfg.experiments.blmmse_stats, scenario.test_model()) {
        (BlmmseStats::Matched, DataModel::M3) => {
            // dither seen through the expected gain, in model units
            let a = agc_amplitude(p_rf_dbw, &cfg.agc) * rf_scale;
            blmmse_build(op, n0, ed_abs / (a * a))?
        }
        _ => blmmse_build(op, n0, ed)?,
    };
    Ok(OperatingPoint {
        sweep_db: snr_db,
        train,
        test,
        blmmse,
    })
}
