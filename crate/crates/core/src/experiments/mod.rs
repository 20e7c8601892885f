//! Monte-Carlo sweeps: NMSE of the unfolded estimator and the Bussgang
//! baseline against the dither level (Model 1) and against Es/N0 (Models 2
//! and 3), written as CSV tables.
//!
//! Every table row is a function of (config, seed) only: training and test
//! samples come from per-sample RNG streams and all reductions run in a fixed
//! order, so results do not depend on the thread count.

mod csv;
mod nmse;
mod plot;
mod points;
mod sweep;

use std::fmt;
use std::str::FromStr;

use crate::config::Grid;
use crate::error::{Error, Result};
use crate::model::DataModel;

pub use self::csv::{read_sweep_csv, write_sweep_csv, CSV_HEADER};
pub use nmse::{format_db, nmse_db, NmseAccumulator, NMSE_FLOOR_DB};
pub use plot::write_svg;
pub use points::{dither_point, snr_point, OperatingPoint};
pub use sweep::{
    evaluate, evaluate_blmmse, m1_reference_training, optimum, run_dither_sweep, run_snr_sweep, DitherSweep, Evaluation,
};

/// Which estimator a column or an optimum refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Dnn,
    Blmmse,
}

/// The three Es/N0 experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Network trained on Model 1 at the optimal Es/Ed, tested on Model 2.
    TrainM1TestM2,
    /// Same network, tested on Model 3.
    TrainM1TestM3,
    /// Network retrained on Model 3 at every Es/N0, tested on Model 3.
    TrainM3TestM3,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::TrainM1TestM2, Scenario::TrainM1TestM3, Scenario::TrainM3TestM3];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::TrainM1TestM2 => "train-M1-test-M2",
            Scenario::TrainM1TestM3 => "train-M1-test-M3",
            Scenario::TrainM3TestM3 => "train-M3-test-M3",
        }
    }

    pub fn train_model(self) -> DataModel {
        match self {
            Scenario::TrainM3TestM3 => DataModel::M3,
            _ => DataModel::M1,
        }
    }

    pub fn test_model(self) -> DataModel {
        match self {
            Scenario::TrainM1TestM2 => DataModel::M2,
            _ => DataModel::M3,
        }
    }

    /// Default output file name.
    pub fn csv_name(self) -> String {
        format!("snr_sweep_{}.csv", self.name())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown scenario `{s}` (expected one of train-M1-test-M2, train-M1-test-M3, train-M3-test-M3)"
                ))
            })
    }
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptVariable {
    EsOverEd,
    EsOverN0,
}

/// Description of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweptVariable,
    pub grid: Grid,
    pub train_model: DataModel,
    pub test_model: DataModel,
    pub test_size: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.count < 2 || !(self.grid.lo_db < self.grid.hi_db) {
            return Err(Error::Parameter(format!("invalid sweep grid {:?}", self.grid)));
        }
        if self.test_size == 0 {
            return Err(Error::Parameter("test size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep_db: f64,
    pub nmse_dnn_db: f64,
    pub nmse_blmmse_db: f64,
    pub n_test: usize,
    pub seed: u64,
    pub config_hash: String,
}

impl SweepResult {
    pub fn nmse(&self, est: Estimator) -> f64 {
        match est {
            Estimator::Dnn => self.nmse_dnn_db,
            Estimator::Blmmse => self.nmse_blmmse_db,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("train-M2-test-M2".parse::<Scenario>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SweepSpec {
            variable: SweptVariable::EsOverEd,
            grid: Grid { count: 20, lo_db: -5.0, hi_db: 25.0 },
            train_model: DataModel::M1,
            test_model: DataModel::M1,
            test_size: 5000,
        };
        assert!(spec.validate().is_ok());
        spec.test_size = 0;
        assert!(spec.validate().is_err());
    }
}
