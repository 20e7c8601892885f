//! System configuration and its TOML file format.
//!
//! Powers are given in dB with the unit carried by the key suffix
//! (`_dbw` for absolute power, `_db` for gains and ratios); frequencies carry
//! `_hz`. Every section is optional and falls back to the reference
//! configuration (U = 1, Np = 10, S = 9, N = 189, L = 7).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub seed: u64,
    pub system: SystemParams,
    pub agc: AgcParams,
    pub comparator: ComparatorParams,
    pub estimator: EstimatorParams,
    pub training: TrainingParams,
    pub experiments: ExperimentParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub fc_hz: f64,
    pub fs_hz: f64,
    /// Informational only; (n, s) define the signal dimensions.
    pub w_hz: f64,
    pub n: usize,
    pub s: usize,
    pub np: usize,
    pub u: usize,
    pub es_dbw: f64,
    pub n0_dbw: f64,
    pub ed_dbw: f64,
    /// Seed of the fixed QPSK pilot sequence.
    pub pilot_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgcParams {
    pub gain_max_db: f64,
    pub gain_min_db: f64,
    pub p_low_dbw: f64,
    pub p_high_dbw: f64,
    pub target_dbw: f64,
    /// Absolute received RF power at Es/N0 = 0 dB.
    pub rx_power_anchor_dbw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparatorParams {
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    /// Number of unfolded layers (gradient updates from h = 0).
    pub layers: usize,
    pub sigmoid_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingParams {
    pub lr0: f64,
    pub lr_decay: f64,
    pub decay_every: usize,
    /// Samples per Adam step.
    pub batch: usize,
    /// Adam steps per epoch; an epoch draws `batch * steps_per_epoch` fresh samples.
    pub steps_per_epoch: usize,
    pub epochs: usize,
    pub fast_epochs: usize,
    pub alpha_init: f64,
    pub beta_init: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub count: usize,
    pub lo_db: f64,
    pub hi_db: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi_db - self.lo_db) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi_db
                } else {
                    self.lo_db + step * i as f64
                }
            })
            .collect()
    }

    fn validate(&self, key: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::config(format!("{key}.count"), "grid needs at least 2 points"));
        }
        if !(self.lo_db < self.hi_db) {
            return Err(Error::config(format!("{key}.lo_db"), "lo_db must be below hi_db"));
        }
        Ok(())
    }
}

/// Which statistics the Bussgang baseline is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlmmseStats {
    /// Model-2 statistics at the nominal operating point, whatever the test
    /// model (the baseline does not know about the AGC or the comparator).
    Model2,
    /// When testing on Model 3, Model-2 statistics with the dither rescaled
    /// by the expected AGC gain.
    Matched,
}

/// How the dither follows Es along an Es/N0 sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrDither {
    /// Es/Ed held at the dither-sweep optimum.
    FixedRatio,
    /// Ed held at the value it has at the top of the sweep.
    FixedAbsolute,
}

/// Which power sets the AGC gain in the Model-3 sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgcPower {
    /// Sample average of each realized waveform (a power detector).
    Measured,
    /// Expected power at the operating point; the gain is then the same for
    /// every realization.
    Expected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub test_size: usize,
    pub dither_grid: Grid,
    pub snr_grid: Grid,
    /// Output of a prior dither sweep; supplies the optimal Es/Ed to SNR sweeps.
    pub dither_sweep_csv: String,
    pub blmmse_stats: BlmmseStats,
    pub snr_dither: SnrDither,
    pub agc_power: AgcPower,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            seed: 1,
            system: SystemParams::default(),
            agc: AgcParams::default(),
            comparator: ComparatorParams::default(),
            estimator: EstimatorParams::default(),
            training: TrainingParams::default(),
            experiments: ExperimentParams::default(),
        }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            fc_hz: 2.4e9,
            fs_hz: 10e9,
            w_hz: 240e6,
            n: 189,
            s: 9,
            np: 10,
            u: 1,
            es_dbw: 0.0,
            n0_dbw: -30.0,
            ed_dbw: -9.2,
            pilot_seed: 0x51_0B17,
        }
    }
}

impl Default for AgcParams {
    fn default() -> Self {
        AgcParams {
            gain_max_db: 15.0,
            gain_min_db: -30.0,
            p_low_dbw: -68.0,
            p_high_dbw: -23.0,
            target_dbw: -53.0,
            rx_power_anchor_dbw: -70.0,
        }
    }
}

impl Default for ComparatorParams {
    fn default() -> Self {
        ComparatorParams { threshold: 2.6e-4 }
    }
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            layers: 7,
            sigmoid_c: 1.702,
        }
    }
}

impl Default for TrainingParams {
    fn default() -> Self {
        TrainingParams {
            lr0: 0.002,
            lr_decay: 0.95,
            decay_every: 100,
            batch: 20,
            steps_per_epoch: 50,
            epochs: 1000,
            fast_epochs: 200,
            alpha_init: 1.0,
            beta_init: 5.0,
        }
    }
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            test_size: 5000,
            dither_grid: Grid {
                count: 20,
                lo_db: -5.0,
                hi_db: 25.0,
            },
            snr_grid: Grid {
                count: 30,
                lo_db: 0.0,
                hi_db: 50.0,
            },
            dither_sweep_csv: "dither_sweep.csv".to_string(),
            blmmse_stats: BlmmseStats::Model2,
            snr_dither: SnrDither::FixedRatio,
            agc_power: AgcPower::Measured,
        }
    }
}

impl TrainingParams {
    /// Learning rate used during `epoch` (0-based).
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * self.lr_decay.powi((epoch / self.decay_every) as i32)
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<document>".to_string());
            Error::config(key, e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if s.n == 0 {
            return Err(Error::config("system.n", "must be positive"));
        }
        if s.s % 2 == 0 {
            return Err(Error::config("system.s", "must be odd"));
        }
        if s.s > s.n {
            return Err(Error::config("system.s", "must not exceed system.n"));
        }
        if s.np == 0 {
            return Err(Error::config("system.np", "must be positive"));
        }
        if s.u == 0 {
            return Err(Error::config("system.u", "must be positive"));
        }
        if !(s.fs_hz > 0.0) {
            return Err(Error::config("system.fs_hz", "must be positive"));
        }
        if !(s.fs_hz >= 2.0 * s.fc_hz) {
            return Err(Error::config("system.fs_hz", "must be at least 2 * fc_hz"));
        }
        if !s.es_dbw.is_finite() {
            return Err(Error::config("system.es_dbw", "must be finite"));
        }
        // N0 and Ed may be -inf (zero power) for the reduction cases.
        for (key, v) in [("system.n0_dbw", s.n0_dbw), ("system.ed_dbw", s.ed_dbw)] {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::config(key, "must be finite or -inf"));
            }
        }
        let a = &self.agc;
        if !(a.p_low_dbw < a.p_high_dbw) {
            return Err(Error::config("agc.p_low_dbw", "must be below agc.p_high_dbw"));
        }
        if !(self.comparator.threshold >= 0.0) {
            return Err(Error::config("comparator.threshold", "must be non-negative"));
        }
        if self.estimator.layers == 0 {
            return Err(Error::config("estimator.layers", "must be at least 1"));
        }
        if !(self.estimator.sigmoid_c > 0.0) {
            return Err(Error::config("estimator.sigmoid_c", "must be positive"));
        }
        let t = &self.training;
        if t.batch == 0 {
            return Err(Error::config("training.batch", "must be positive"));
        }
        if t.steps_per_epoch == 0 {
            return Err(Error::config("training.steps_per_epoch", "must be positive"));
        }
        if t.decay_every == 0 {
            return Err(Error::config("training.decay_every", "must be positive"));
        }
        if !(t.lr0 > 0.0) {
            return Err(Error::config("training.lr0", "must be positive"));
        }
        if self.experiments.test_size == 0 {
            return Err(Error::config("experiments.test_size", "must be at least 1"));
        }
        self.experiments.dither_grid.validate("experiments.dither_grid")?;
        self.experiments.snr_grid.validate("experiments.snr_grid")?;
        Ok(())
    }

    pub fn es(&self) -> f64 {
        db_to_lin(self.system.es_dbw)
    }

    pub fn n0(&self) -> f64 {
        db_to_lin(self.system.n0_dbw)
    }

    pub fn ed(&self) -> f64 {
        db_to_lin(self.system.ed_dbw)
    }

    /// Switch to the reduced training budget.
    pub fn fast(mut self) -> Self {
        self.training.epochs = self.training.fast_epochs;
        self
    }

    /// Short hex digest of everything except the seed.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.seed = 0;
        let digest = Sha256::digest(c.to_toml_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
