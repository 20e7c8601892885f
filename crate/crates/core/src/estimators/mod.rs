//! Channel estimators: the ML objective and its smoothed Wirtinger
//! gradient, the deep-unfolded estimator, and the Bussgang LMMSE baseline.

mod blmmse;
mod ml;
pub mod special;
mod unfolded;

pub use blmmse::{blmmse_build, Blmmse, BlmmseParts};
pub use ml::{
    gradient_exact, gradient_wirtinger, objective_exact, objective_smoothed, thresholds_from_obs, MlProblem,
    SIGMOID_C,
};
pub use unfolded::{unfolded_forward, unfolded_layer, UnfoldedParams};

pub(crate) use ml::{bracket_at_zero, bracket_slice};
