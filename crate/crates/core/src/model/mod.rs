//! Signal model: deterministic operators and the stochastic uplink channel.

mod dump;
mod fourier;
mod impairments;
mod observation;
mod operator;
mod sampling;
mod simulate;
mod source;

pub use dump::{read_observations, write_observations, DUMP_MAGIC, DUMP_VERSION};
pub use fourier::{build_fourier_operator, build_upconversion, occupied_bins};
pub use impairments::{agc_amplitude, agc_gain, apply_comparator_flips, measure_rf_power};
pub use observation::{sgn, Observation, Threshold};
pub use operator::{qpsk_pilots, ForwardOperator};
pub use sampling::{sample_channel, sample_dither, sample_noise, Draws};
pub use source::SampleSource;
pub use simulate::{
    simulate_model1, simulate_model2, simulate_model3, simulate_model3_detailed, DataModel, Gain,
    Model3Link, Model3Output,
};

pub use num_complex::Complex64 as C64;
